#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qje/evolution.hpp"

using namespace qje;

namespace {

Schedule paper_schedule(double tau) { return {kLambdaDefault, tau, RampKind::tent}; }

// Reversed-schedule propagator built directly from the step product; each
// factor is the adjoint of the forward one, applied in opposite order.
Mat3 reverse_propagate(const Schedule& s, long n_steps) {
    const double dt = s.tau / static_cast<double>(n_steps);
    Mat3 u = Mat3::identity();
    for (long i = n_steps - 1; i >= 0; --i) {
        const double tm = (static_cast<double>(i) + 0.5) * dt;
        u = adjoint(expm_minus_iH_dt(h_of_t(tm, s), dt)) * u;
    }
    return u;
}

}  // namespace

TEST_CASE("propagate: tau -> 0 limit is the identity") {
    // accumulated phase is bounded by |lambda| tau sqrt(a^2+b^2) <= 1.33 |lambda| tau
    const Schedule s = paper_schedule(1e-12);
    const PropagationResult r = propagate(s, 1);
    CHECK(max_abs_diff(r.unitary, Mat3::identity()) < 2.0 * std::abs(s.lambda) * s.tau);
    CHECK(r.step_count == 2);  // rounded up to even

    const Schedule tiny = paper_schedule(1e-14);
    CHECK(max_abs_diff(propagate(tiny, 1).unitary, Mat3::identity()) < 1e-9);
}

TEST_CASE("propagate: constant Hamiltonian reproduces the single exponential") {
    const Schedule s{kLambdaDefault, 150e-6, RampKind::hold};
    const PropagationResult r = propagate(s, 1024);
    const Mat3 expected = expm_minus_iH_dt(h_of_t(0.0, s), s.tau);
    CHECK(max_abs_diff(r.unitary, expected) < 1e-12);
}

TEST_CASE("propagate: unitarity bookkeeping") {
    const PropagationResult r = propagate(paper_schedule(200e-6), 4001);
    CHECK(r.step_count == 4002);
    CHECK(r.unitarity_defect < 1e-9);
    CHECK(unitarity_defect(r.unitary) == r.unitarity_defect);
}

TEST_CASE("propagate: second-order convergence against a 16x reference") {
    const Schedule s = paper_schedule(200e-6);
    const Mat3 reference = propagate(s, 16000).unitary;
    double previous_error = 0.0;
    for (long n : {250L, 500L, 1000L}) {
        const double error = max_abs_diff(propagate(s, n).unitary, reference);
        if (previous_error > 0.0) {
            const double ratio = previous_error / error;
            CHECK(ratio > 3.5);
            CHECK(ratio < 4.5);
        }
        previous_error = error;
    }
}

TEST_CASE("propagate: interval splitting matches the full window") {
    const Schedule s = paper_schedule(80e-6);
    const Mat3 full = propagate(s, 4000).unitary;

    // same product, split at the kink
    const double dt = s.tau / 4000.0;
    Mat3 first = Mat3::identity(), second = Mat3::identity();
    for (long i = 0; i < 2000; ++i)
        first = expm_minus_iH_dt(h_of_t((i + 0.5) * dt, s), dt) * first;
    for (long i = 2000; i < 4000; ++i)
        second = expm_minus_iH_dt(h_of_t((i + 0.5) * dt, s), dt) * second;
    CHECK(max_abs_diff(second * first, full) < 1e-9);
}

TEST_CASE("propagate: time reversal returns to the identity") {
    const Schedule s = paper_schedule(120e-6);
    const Mat3 forward = propagate(s, 2000).unitary;
    const Mat3 backward = reverse_propagate(s, 2000);
    CHECK(max_abs_diff(backward * forward, Mat3::identity()) < 1e-8);
}

TEST_CASE("propagate: norm drift over 1e5 steps") {
    const Schedule s = paper_schedule(200e-6);
    const PropagationResult r = propagate(s, 100000);
    Vec3 psi = eigh(h_of_t(0.0, s)).eigenvectors[0];
    psi = r.unitary * psi;
    CHECK(std::abs(norm(psi) - 1.0) < 1e-10);
}

TEST_CASE("overlap_trace: completeness at every step") {
    const Schedule s = paper_schedule(50e-6);
    const OverlapTrace trace = overlap_trace(s, +1, 2000);
    REQUIRE(trace.times.size() == trace.overlaps.size());
    for (const auto& row : trace.overlaps)
        CHECK(std::abs(row[0] + row[1] + row[2] - 1.0) < 1e-9);
}

TEST_CASE("overlap_trace: adiabatic window keeps the initial label") {
    const Schedule s = paper_schedule(2500e-6);
    for (int label : {+1, 0, -1}) {
        const OverlapTrace trace = overlap_trace(s, label, 20000);
        const auto& last = trace.overlaps.back();
        CHECK(last[static_cast<size_t>(level_index(label))] >= 0.99);
    }
}

TEST_CASE("overlap_trace: fast window returns to the initial label despite transit dips") {
    const Schedule s = paper_schedule(5e-6);
    for (int label : {+1, 0, -1}) {
        const OverlapTrace trace = overlap_trace(s, label, 4000);
        const size_t column = static_cast<size_t>(level_index(label));
        CHECK(trace.overlaps.back()[column] >= 0.95);

        double dip = 1.0;
        for (const auto& row : trace.overlaps) dip = std::min(dip, row[column]);
        CHECK(dip < 0.9);  // the eigenbasis swings away mid-ramp
    }
}
