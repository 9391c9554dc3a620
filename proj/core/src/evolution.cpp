#include "qje/evolution.hpp"

#include <cmath>
#include <stdexcept>

namespace qje {

PropagationResult propagate(const Schedule& s, long n_steps) {
    if (n_steps < 1) throw std::invalid_argument("propagate: n_steps must be >= 1");
    if (!(s.tau > 0.0)) throw std::invalid_argument("propagate: tau must be > 0");
    if (n_steps % 2 != 0) ++n_steps;

    const double dt = s.tau / static_cast<double>(n_steps);
    Mat3 u = Mat3::identity();
    for (long i = 0; i < n_steps; ++i) {
        const double tm = (static_cast<double>(i) + 0.5) * dt;
        u = expm_minus_iH_dt(h_of_t(tm, s), dt) * u;
    }
    return {u, n_steps, unitarity_defect(u)};
}

PropagationResult propagate_auto(const Schedule& s, long n_start, double tol) {
    PropagationResult prev = propagate(s, n_start);
    for (int iter = 0; iter < 8; ++iter) {
        PropagationResult next = propagate(s, 2 * prev.step_count);
        const double change = max_abs_diff(next.unitary, prev.unitary);
        prev = next;
        if (change < tol) break;
    }
    return prev;
}

OverlapTrace overlap_trace(const Schedule& s, int initial_label, long n_steps) {
    if (n_steps < 1) throw std::invalid_argument("overlap_trace: n_steps must be >= 1");
    if (n_steps % 2 != 0) ++n_steps;
    const double dt = s.tau / static_cast<double>(n_steps);

    Vec3 psi = eigh(h_of_t(0.0, s))
                   .eigenvectors[static_cast<size_t>(label_to_eigen_index(initial_label, s))];

    OverlapTrace trace;
    trace.times.reserve(static_cast<size_t>(n_steps) + 1);
    trace.overlaps.reserve(static_cast<size_t>(n_steps) + 1);

    auto record = [&](double t, const Vec3& state) {
        const EigenSystem es = eigh(h_of_t(t, s));
        std::array<double, 3> row{};
        for (int label : {+1, 0, -1}) {
            const int eig = label_to_eigen_index(label, s);
            row[static_cast<size_t>(level_index(label))] =
                std::norm(inner(es.eigenvectors[static_cast<size_t>(eig)], state));
        }
        trace.times.push_back(t);
        trace.overlaps.push_back(row);
    };

    record(0.0, psi);
    for (long i = 0; i < n_steps; ++i) {
        const double tm = (static_cast<double>(i) + 0.5) * dt;
        psi = expm_minus_iH_dt(h_of_t(tm, s), dt) * psi;
        const double t = (i + 1 == n_steps) ? s.tau : static_cast<double>(i + 1) * dt;
        record(t, psi);
    }
    return trace;
}

}  // namespace qje
