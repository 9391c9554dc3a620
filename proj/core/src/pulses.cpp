#include "qje/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qje {

namespace {

void check_time(double t, const LabFrameParams& p, const char* who) {
    if (!(t >= 0.0 && t <= p.schedule.tau))
        throw std::invalid_argument(std::string(who) + ": t outside [0, tau]");
}

}  // namespace

std::array<double, 2> carrier_frequencies(double t, const LabFrameParams& p) {
    check_time(t, p, "carrier_frequencies");
    const double la = p.schedule.lambda * ramp(t, p.schedule).a;
    return {p.p_eff() + p.wn_eff() - la, p.p_eff() - p.wn_eff() + la};
}

double min_carrier(const LabFrameParams& p) {
    // a(t) is monotone, so |w_i| extremes sit at the endpoints.
    double m = std::numeric_limits<double>::infinity();
    for (double t : {0.0, p.schedule.tau}) {
        const auto w = carrier_frequencies(t, p);
        m = std::min({m, std::abs(w[0]), std::abs(w[1])});
    }
    return m;
}

double carrier_scale_for_ratio(const LabFrameParams& base, double ratio) {
    if (!(ratio > 0.0)) throw std::invalid_argument("carrier_scale_for_ratio: ratio must be > 0");
    const double target = ratio * std::abs(base.schedule.lambda);
    LabFrameParams p = base;
    double lo = 1e-9, hi = 1.0;
    auto carrier_at = [&](double scale) {
        p.carrier_scale = scale;
        return min_carrier(p);
    };
    while (carrier_at(hi) < target) {
        hi *= 2.0;
        if (hi > 1e6) throw std::invalid_argument("carrier_scale_for_ratio: ratio unreachable");
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (carrier_at(mid) < target ? lo : hi) = mid;
    }
    return hi;
}

namespace {

// Accumulated carrier phases Theta_i(t) = (P ± w_n) t ∓ lambda A(t).
std::array<double, 2> carrier_phases(double t, const LabFrameParams& p) {
    const double a_int = p.schedule.lambda * ramp_integral_a(t, p.schedule);
    return {(p.p_eff() + p.wn_eff()) * t - a_int, (p.p_eff() - p.wn_eff()) * t + a_int};
}

}  // namespace

Mat3 lab_hamiltonian(double t, const LabFrameParams& p) {
    check_time(t, p, "lab_hamiltonian");
    // H0 = P I_z^2 + w_n I_z, diagonal entries for m = +1, 0, -1.
    Mat3 h = Mat3::diag(p.p_eff() + p.wn_eff(), 0.0, p.p_eff() - p.wn_eff());
    const double b = ramp(t, p.schedule).b;
    if (b != 0.0) {
        const auto th = carrier_phases(t, p);
        const double drive = 2.0 * p.schedule.lambda * b * (std::cos(th[0]) + std::cos(th[1]));
        h = h + cx{drive, 0.0} * spin1_operator(Axis::x);
    }
    return h;
}

Mat3 rotating_transform(double t, const LabFrameParams& p) {
    check_time(t, p, "rotating_transform");
    const double a_int = p.schedule.lambda * ramp_integral_a(t, p.schedule);
    Mat3 u;
    for (int idx = 0; idx < 3; ++idx) {
        const double m = static_cast<double>(1 - idx);  // +1, 0, -1
        const double h0 = p.p_eff() * m * m + p.wn_eff() * m;
        const double phi = h0 * t - a_int * m;
        u(idx, idx) = cx{std::cos(phi), std::sin(phi)};
    }
    return u;
}

long rwa_min_steps(const LabFrameParams& p) {
    double wmax = 0.0;
    for (double t : {0.0, p.schedule.tau}) {
        const auto w = carrier_frequencies(t, p);
        wmax = std::max({wmax, std::abs(w[0]), std::abs(w[1])});
    }
    return static_cast<long>(
        std::ceil(20.0 * p.schedule.tau * wmax / (2.0 * std::numbers::pi)));
}

double rwa_fidelity(const LabFrameParams& p, long n_steps) {
    const double guard = 20.0 * std::abs(p.schedule.lambda);
    const double carrier = min_carrier(p);
    if (carrier < guard)
        throw std::domain_error("rwa_fidelity: min carrier " + std::to_string(carrier) +
                                " rad/s below the 20|lambda| guard " + std::to_string(guard));
    const long required = rwa_min_steps(p);
    if (n_steps < required)
        throw std::invalid_argument("rwa_fidelity: n_steps too small, need >= " +
                                    std::to_string(required));

    const double dt = p.schedule.tau / static_cast<double>(n_steps);
    Mat3 u_lab = Mat3::identity();
    for (long i = 0; i < n_steps; ++i) {
        const double tm = (static_cast<double>(i) + 0.5) * dt;
        u_lab = expm_minus_iH_dt(lab_hamiltonian(tm, p), dt) * u_lab;
    }

    const Mat3 engineered = rotating_transform(p.schedule.tau, p) * u_lab;
    const Mat3 target = propagate_auto(p.schedule, 20000, 1e-9).unitary;
    return std::abs(trace(adjoint(target) * engineered)) / 3.0;
}

}  // namespace qje
