// Rotating-frame engineering of the switching Hamiltonian: the lab-frame
// nuclear Hamiltonian H0 = P I_z^2 + w_n I_z is driven by two detuned RF
// tones; in the frame that removes H0 and adds the target diagonal ramp the
// rotating-wave approximation leaves H(t) = lambda (a I_z + b I_x).
//
// Carriers are scaled down from the MHz regime (carrier_scale) so a full
// switching window integrates in seconds; a guard keeps the slowest carrier
// at least 20x the drive scale |lambda| so the RWA stays meaningful.

#pragma once

#include <numbers>

#include "qje/evolution.hpp"
#include "qje/protocol.hpp"
#include "qje/qutrit.hpp"

namespace qje {

struct LabFrameParams {
    double quadrupole = -2.0 * std::numbers::pi * 4.95e6;  // P, rad/s
    double zeeman = 2.0 * std::numbers::pi * 2.28e6;       // w_n, rad/s
    Schedule schedule;
    double carrier_scale = 0.1;  // applied to quadrupole and zeeman

    double p_eff() const { return quadrupole * carrier_scale; }
    double wn_eff() const { return zeeman * carrier_scale; }
};

// Instantaneous RF carrier angular frequencies:
//   w1 = P + w_n - lambda a(t),  w2 = P - w_n + lambda a(t).
std::array<double, 2> carrier_frequencies(double t, const LabFrameParams& p);

// min over t in [0, tau] of min(|w1|, |w2|).
double min_carrier(const LabFrameParams& p);

// Smallest carrier_scale whose min_carrier equals ratio * |lambda|.
double carrier_scale_for_ratio(const LabFrameParams& base, double ratio);

// H0 + 2 lambda b(t) [cos Theta1(t) + cos Theta2(t)] I_x, where
// Theta_i(t) = integral of w_i (closed form; a(t) is piecewise linear).
Mat3 lab_hamiltonian(double t, const LabFrameParams& p);

// Diagonal frame unitary U_rot(t) = exp(i t H0 - i lambda A(t) I_z) with
// A(t) = integral of a.  Composing U_rot(tau) * U_lab(tau) reproduces the
// target propagator of H(t); with b == 0 the match is exact.
Mat3 rotating_transform(double t, const LabFrameParams& p);

// Steps needed to resolve the fastest carrier with >= 20 samples per period.
long rwa_min_steps(const LabFrameParams& p);

// Gate fidelity |Tr(U_target^dag U_rot(tau) U_lab(tau))| / 3 between the
// engineered propagator and the target switching propagator.  Throws when
// the carrier guard (min carrier >= 20 |lambda|) or the step-density
// requirement is violated.
double rwa_fidelity(const LabFrameParams& p, long n_steps);

}  // namespace qje
