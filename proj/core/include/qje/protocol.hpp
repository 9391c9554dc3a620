// The switching protocol: H(t) = lambda * (a(t) I_z + b(t) I_x) with ramps
// a(t) = 1 - t/(4 tau) and b(t) = 1 - |2t/tau - 1|, plus its analytic time
// derivative and the adiabaticity factor
//
//   F_A = min over eigenpairs m != n and times t of
//         (e_m(t) - e_n(t))^2 / |<m(t)| dH/dt |n(t)>|.

#pragma once

#include <numbers>

#include "qje/qutrit.hpp"

namespace qje {

// -sqrt(2) * pi * 5 kHz, in rad/s.
inline constexpr double kLambdaDefault = -std::numbers::sqrt2 * std::numbers::pi * 5000.0;

enum class RampKind {
    tent,       // a: 1 -> 3/4 linear; b: 0 -> 1 -> 0 triangle (kink at tau/2)
    diag_only,  // same a; b == 0
    hold,       // a == 1; b == 0 (constant Hamiltonian)
};

struct Schedule {
    double lambda = kLambdaDefault;  // rad/s (negative in the default setup)
    double tau = 200e-6;             // s, > 0
    RampKind kind = RampKind::tent;
};

struct RampValue {
    double a;
    double b;
};

// Dimensionless ramps at time t in [0, tau].
RampValue ramp(double t, const Schedule& s);

// Integral of a over [0, t]; closed form (a is linear in t).
double ramp_integral_a(double t, const Schedule& s);

// Instantaneous Hamiltonian, Hermitian by construction.
Mat3 h_of_t(double t, const Schedule& s);

// Analytic dH/dt.  For the tent ramp the b slope flips sign at tau/2; the
// kink point itself is rejected, callers sample one-sided around it.
Mat3 dh_dt(double t, const Schedule& s);

// Minimized gap^2 / |<m|dH/dt|n>| over a uniform time grid (kink excluded),
// internally doubling the grid until the minimum moves by < 0.1%.
// Pairs whose matrix element vanishes are skipped; with no drive at all
// (hold ramp) the result is +infinity.
double adiabaticity_factor(const Schedule& s, long grid_points = 10001);

// Basis index (0,1,2) of the instantaneous eigenstate carrying a level label
// (+1, 0, -1).  Eigenvalues are lambda * r(t) * (1, 0, -1), so for lambda < 0
// the ascending order is (+1, 0, -1) and labels map to indices directly.
int label_to_eigen_index(int label, const Schedule& s);

}  // namespace qje
