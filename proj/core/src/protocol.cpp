#include "qje/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qje {

namespace {

void check_time(double t, const Schedule& s, const char* who) {
    if (!(s.tau > 0.0)) throw std::invalid_argument(std::string(who) + ": tau must be > 0");
    if (!(t >= 0.0 && t <= s.tau))
        throw std::invalid_argument(std::string(who) + ": t outside [0, tau]");
}

}  // namespace

RampValue ramp(double t, const Schedule& s) {
    check_time(t, s, "ramp");
    switch (s.kind) {
        case RampKind::tent:
            return {1.0 - t / (4.0 * s.tau), 1.0 - std::abs(2.0 * t / s.tau - 1.0)};
        case RampKind::diag_only:
            return {1.0 - t / (4.0 * s.tau), 0.0};
        case RampKind::hold:
            return {1.0, 0.0};
    }
    throw std::invalid_argument("ramp: unknown ramp kind");
}

double ramp_integral_a(double t, const Schedule& s) {
    check_time(t, s, "ramp_integral_a");
    if (s.kind == RampKind::hold) return t;
    return t - t * t / (8.0 * s.tau);
}

Mat3 h_of_t(double t, const Schedule& s) {
    const RampValue r = ramp(t, s);
    return cx{s.lambda * r.a, 0.0} * spin1_operator(Axis::z) +
           cx{s.lambda * r.b, 0.0} * spin1_operator(Axis::x);
}

Mat3 dh_dt(double t, const Schedule& s) {
    check_time(t, s, "dh_dt");
    double da = 0.0, db = 0.0;
    switch (s.kind) {
        case RampKind::tent:
            if (std::abs(t - 0.5 * s.tau) <= 1e-12 * s.tau)
                throw std::invalid_argument("dh_dt: derivative undefined at the ramp kink t = tau/2");
            da = -1.0 / (4.0 * s.tau);
            db = (t < 0.5 * s.tau) ? 2.0 / s.tau : -2.0 / s.tau;
            break;
        case RampKind::diag_only:
            da = -1.0 / (4.0 * s.tau);
            break;
        case RampKind::hold:
            break;
    }
    return cx{s.lambda * da, 0.0} * spin1_operator(Axis::z) +
           cx{s.lambda * db, 0.0} * spin1_operator(Axis::x);
}

namespace {

// Minimum of the ratio over one uniform grid; samples at the kink are skipped
// (its one-sided neighbours at +- step are already on the grid).
double adiabaticity_scan(const Schedule& s, long grid_points) {
    const long steps = grid_points - 1;
    const double h = s.tau / static_cast<double>(steps);
    const bool has_kink = (s.kind == RampKind::tent);
    double best = std::numeric_limits<double>::infinity();

    for (long i = 0; i <= steps; ++i) {
        const double t = (i == steps) ? s.tau : static_cast<double>(i) * h;
        if (has_kink && std::abs(t - 0.5 * s.tau) < 0.25 * h) continue;

        const EigenSystem es = eigh(h_of_t(t, s));
        const Mat3 dh = dh_dt(t, s);
        const double dnorm = max_abs(dh);
        if (dnorm == 0.0) continue;

        for (int m = 0; m < 3; ++m) {
            for (int n = 0; n < 3; ++n) {
                if (m == n) continue;
                const double elem =
                    std::abs(inner(es.eigenvectors[static_cast<size_t>(m)],
                                   dh * es.eigenvectors[static_cast<size_t>(n)]));
                if (elem <= 1e-12 * dnorm) continue;
                const double gap = es.eigenvalues[static_cast<size_t>(m)] -
                                   es.eigenvalues[static_cast<size_t>(n)];
                best = std::min(best, gap * gap / elem);
            }
        }
    }
    return best;
}

}  // namespace

double adiabaticity_factor(const Schedule& s, long grid_points) {
    if (grid_points < 100)
        throw std::invalid_argument("adiabaticity_factor: grid_points must be >= 100");
    if (!(s.tau > 0.0)) throw std::invalid_argument("adiabaticity_factor: tau must be > 0");

    double best = adiabaticity_scan(s, grid_points);
    // Refine until stable to 0.1% (3 significant figures).
    for (int iter = 0; iter < 6; ++iter) {
        if (!std::isfinite(best)) break;
        grid_points = 2 * (grid_points - 1) + 1;
        const double next = adiabaticity_scan(s, grid_points);
        const bool settled = std::abs(next - best) <= 1e-3 * std::abs(next);
        best = next;
        if (settled) break;
    }
    return best;
}

int label_to_eigen_index(int label, const Schedule& s) {
    const int idx = level_index(label);
    return (s.lambda < 0.0) ? idx : 2 - idx;
}

}  // namespace qje
