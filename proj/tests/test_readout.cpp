#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qje/evolution.hpp"
#include "qje/readout.hpp"

using namespace qje;

namespace {

Schedule paper_schedule(double tau) { return {kLambdaDefault, tau, RampKind::tent}; }

double channel_group_sum(const MeasurementChannel& ch, int pre) {
    double s = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) s += ch.table[pre][j][k];
    return s;
}

std::array<std::array<double, 3>, 3> ideal_joint(const std::array<double, 3>& p0,
                                                 const ConditionalMatrix& cond) {
    std::array<std::array<double, 3>, 3> j{};
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) j[x][y] = p0[x] * cond.p[y][x];
    return j;
}

double total_variation(const std::array<std::array<double, 3>, 3>& a,
                       const std::array<std::array<double, 3>, 3>& b) {
    double s = 0.0;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) s += std::abs(a[x][y] - b[x][y]);
    return 0.5 * s;
}

JumpModel random_jump_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    JumpModel jm;
    jm.p_plus = u(rng);
    jm.p_minus = u(rng);
    jm.p_zero = u(rng);
    const double split = u(rng);
    jm.p_zero_up = (1.0 - jm.p_zero) * split;
    jm.p_zero_down = (1.0 - jm.p_zero) - jm.p_zero_up;
    return jm;
}

}  // namespace

TEST_CASE("jump_model_from_fidelity: endpoints and the reference sets") {
    const JumpModel perfect = jump_model_from_fidelity(1.0);
    CHECK(perfect.p_plus == doctest::Approx(1.0));
    CHECK(perfect.p_zero_up == doctest::Approx(0.0));

    const JumpModel f98 = jump_model_from_fidelity(0.98);
    CHECK(f98.p_plus == doctest::Approx(0.96).epsilon(1e-12));
    CHECK(f98.p_zero_up == doctest::Approx(0.02).epsilon(1e-12));

    const JumpModel f905 = jump_model_from_fidelity(0.905);
    CHECK(f905.p_plus == doctest::Approx(0.81).epsilon(1e-12));
    CHECK(f905.p_zero_down == doctest::Approx(0.095).epsilon(1e-12));

    const JumpModel literal = jump_model_f90();
    CHECK(literal.p_plus == doctest::Approx(0.81));
    CHECK(literal.p_zero_up == doctest::Approx(0.095));

    CHECK_THROWS_AS(jump_model_from_fidelity(0.5), std::invalid_argument);
    CHECK_THROWS_AS(jump_model_from_fidelity(1.01), std::invalid_argument);
}

TEST_CASE("measurement_channel: no jumps means a perfect projective readout") {
    const MeasurementChannel ch = measurement_channel(jump_model_from_fidelity(1.0));
    for (int pre = 0; pre < 3; ++pre)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                const double expected = (pre == j && j == k) ? 1.0 : 0.0;
                CHECK(ch.table[pre][j][k] == doctest::Approx(expected));
            }
    for (double m : ch.excluded_mass) CHECK(std::abs(m) < 1e-15);
}

TEST_CASE("measurement_channel: spot value at fidelity 0.98") {
    const MeasurementChannel ch = measurement_channel(jump_model_from_fidelity(0.98));
    // pre |+1>, outcome +1, post +1: p^2 + p0+ (1-p)/2 = 0.9216 + 0.0004
    CHECK(ch.table[0][0][0] == doctest::Approx(0.9220).epsilon(1e-12));
}

TEST_CASE("measurement_channel: group sums over random jump models") {
    std::mt19937_64 rng(8080);
    for (int trial = 0; trial < 200; ++trial) {
        const JumpModel jm = random_jump_model(rng);
        const MeasurementChannel ch = measurement_channel(jm);

        CHECK(std::abs(channel_group_sum(ch, 1) - 1.0) < 1e-12);
        CHECK(std::abs(channel_group_sum(ch, 2) - 1.0) < 1e-12);
        const double deficit = jm.p_zero_down * (1.0 - jm.p_plus) / 4.0;
        CHECK(std::abs(channel_group_sum(ch, 0) - (1.0 - deficit)) < 1e-12);

        CHECK(std::abs(ch.excluded_mass[0] - deficit) < 1e-12);
        CHECK(std::abs(ch.excluded_mass[1]) < 1e-12);
        CHECK(std::abs(ch.excluded_mass[2]) < 1e-12);
        for (int pre = 0; pre < 3; ++pre)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) CHECK(ch.table[pre][j][k] >= 0.0);
    }
}

TEST_CASE("noisy_joint_distribution: identity channel reduces to the ideal joint") {
    const Schedule s = paper_schedule(200e-6);
    const double beta = 0.7 / std::abs(s.lambda);
    const auto p0 = gibbs_populations(eigh(h_of_t(0.0, s)), beta);
    const Mat3 u = propagate(s, 4000).unitary;
    const ConditionalMatrix cond = tpm_conditional(u, h_of_t(0.0, s), h_of_t(s.tau, s));

    const MeasurementChannel identity = measurement_channel(jump_model_from_fidelity(1.0));
    const NoisyJoint joint = noisy_joint_distribution(p0, cond, identity, false);
    CHECK(joint.retained_mass == doctest::Approx(1.0).epsilon(1e-12));
    const auto ideal = ideal_joint(p0, cond);
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            CHECK(joint.p[x][y] == doctest::Approx(ideal[x][y]).epsilon(1e-10));
}

TEST_CASE("noisy_joint_distribution: retained mass bookkeeping") {
    const Schedule s = paper_schedule(200e-6);
    const double beta = 0.7 / std::abs(s.lambda);
    const auto p0 = gibbs_populations(eigh(h_of_t(0.0, s)), beta);
    const Mat3 u = propagate(s, 4000).unitary;
    const ConditionalMatrix cond = tpm_conditional(u, h_of_t(0.0, s), h_of_t(s.tau, s));

    const MeasurementChannel ch = measurement_channel(jump_model_from_fidelity(0.98));
    const NoisyJoint raw = noisy_joint_distribution(p0, cond, ch, false);
    CHECK(raw.retained_mass < 1.0);

    // mass bookkeeping: 1 - first-readout exclusions - second-readout
    // exclusions accumulated along retained paths
    double first_excluded = 0.0;
    for (int i = 0; i < 3; ++i) first_excluded += p0[i] * ch.excluded_mass[i];
    double second_excluded = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int x = 0; x < 3; ++x)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k)
                    second_excluded += p0[i] * ch.table[i][x][j] * cond.p[k][j] *
                                       ch.excluded_mass[k];
    CHECK(raw.retained_mass ==
          doctest::Approx(1.0 - first_excluded - second_excluded).epsilon(1e-12));

    const NoisyJoint renorm = noisy_joint_distribution(p0, cond, ch, true);
    double total = 0.0;
    for (const auto& row : renorm.p)
        for (double v : row) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("noisy_joint_distribution: trajectory-sampling oracle") {
    const Schedule s = paper_schedule(200e-6);
    const double beta = 0.7 / std::abs(s.lambda);
    const auto p0 = gibbs_populations(eigh(h_of_t(0.0, s)), beta);
    const Mat3 u = propagate(s, 4000).unitary;
    const ConditionalMatrix cond = tpm_conditional(u, h_of_t(0.0, s), h_of_t(s.tau, s));
    const MeasurementChannel ch = measurement_channel(jump_model_from_fidelity(0.9));

    const NoisyJoint exact = noisy_joint_distribution(p0, cond, ch, false);
    const long n = 200000;
    const TrajectoryJoint sampled = sample_joint_distribution(p0, cond, ch, n, 777);

    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            const double p = exact.p[x][y];
            const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
            CHECK(std::abs(sampled.p[x][y] - p) < 4.0 * sigma + 1e-12);
        }
}

TEST_CASE("je_deviation: identity channel gives zero") {
    const Schedule s = paper_schedule(125e-6);
    const MeasurementChannel identity = measurement_channel(jump_model_from_fidelity(1.0));
    const double beta = 0.5 / std::abs(s.lambda);
    CHECK(std::abs(je_deviation(s, beta, identity, 4000)) < 1e-9);
}

TEST_CASE("je_deviation: worse readout fidelity deviates more") {
    const double beta = 0.7 / std::abs(kLambdaDefault);
    const MeasurementChannel ch90 = measurement_channel(jump_model_f90());
    const MeasurementChannel ch98 = measurement_channel(jump_model_from_fidelity(0.98));

    double max90 = 0.0, max98 = 0.0;
    for (double tau_us : {5.0, 50.0, 125.0, 200.0, 2500.0}) {
        const Schedule s = paper_schedule(tau_us * 1e-6);
        max90 = std::max(max90, std::abs(je_deviation(s, beta, ch90, 4000)));
        const double d98 = std::abs(je_deviation(s, beta, ch98, 4000));
        max98 = std::max(max98, d98);
        CHECK(d98 < 0.035);
    }
    CHECK(max90 > max98);
    CHECK(max90 <= 0.1);
}

TEST_CASE("channel monotonicity: total variation shrinks with fidelity") {
    for (double x : {0.5, 0.7}) {
        const double beta = x / std::abs(kLambdaDefault);
        for (double tau_us : {5.0, 50.0, 125.0, 200.0, 2500.0}) {
            const Schedule s = paper_schedule(tau_us * 1e-6);
            const auto p0 = gibbs_populations(eigh(h_of_t(0.0, s)), beta);
            const Mat3 u = propagate(s, 2000).unitary;
            const ConditionalMatrix cond =
                tpm_conditional(u, h_of_t(0.0, s), h_of_t(s.tau, s));
            const auto ideal = ideal_joint(p0, cond);

            const auto joint_at = [&](double f) {
                return noisy_joint_distribution(
                           p0, cond, measurement_channel(jump_model_from_fidelity(f)), true)
                    .p;
            };
            CHECK(total_variation(joint_at(0.98), ideal) <=
                  total_variation(joint_at(0.90), ideal) + 1e-12);
        }
    }
}

TEST_CASE("simulate_trace: no jumps, dark platform within 4 sigma") {
    TraceModel model;
    model.survival_per_unit = {1.0, 1.0, 1.0};
    const long n = 5000;
    const TraceResult trace = simulate_trace(model, n, +1, +1, 11);

    const double mean_expected =
        model.rate_dark * model.unit_duration * model.repeats_per_bundle;
    double mean = 0.0;
    for (long c : trace.photon_counts) mean += static_cast<double>(c);
    mean /= static_cast<double>(n);
    const double sigma = std::sqrt(mean_expected / static_cast<double>(n));
    CHECK(std::abs(mean - mean_expected) < 4.0 * sigma);
    for (int state : trace.states) CHECK(state == +1);
}

TEST_CASE("simulate_trace: Markov transition frequencies within 4 sigma") {
    TraceModel model;
    const long n = 60000;
    const TraceResult trace = simulate_trace(model, n, +1, 0, 13);

    std::array<long, 3> visits{};
    std::array<long, 3> departures{};
    for (size_t i = 0; i + 1 < trace.states.size(); ++i) {
        const int idx = level_index(trace.states[i]);
        ++visits[idx];
        if (trace.states[i + 1] != trace.states[i]) ++departures[idx];
    }
    for (int idx = 0; idx < 3; ++idx) {
        if (visits[idx] < 200) continue;
        const double p_leave =
            1.0 - std::pow(model.survival_per_unit[idx], model.repeats_per_bundle);
        const double sigma =
            std::sqrt(p_leave * (1.0 - p_leave) * static_cast<double>(visits[idx]));
        CHECK(std::abs(static_cast<double>(departures[idx]) -
                       p_leave * static_cast<double>(visits[idx])) < 4.0 * sigma);
    }
}

TEST_CASE("simulate_trace: platforms separate at the cascaded readout size") {
    // At the single-bundle level the 30% contrast keeps the Poisson peaks
    // overlapping; aggregated to the 9-bundle cascade they split cleanly.
    TraceModel model;
    const TraceResult trace = simulate_trace(model, 27000, +1, +1, 17);

    const int agg = 9;
    double dark_sum = 0.0, bright_sum = 0.0;
    long dark_n = 0, bright_n = 0;
    const long groups = static_cast<long>(trace.photon_counts.size()) / agg;
    for (long g = 0; g < groups; ++g) {
        long total = 0;
        bool uniform = true;
        for (int j = 0; j < agg; ++j) {
            total += trace.photon_counts[static_cast<size_t>(g * agg + j)];
            uniform = uniform && trace.states[static_cast<size_t>(g * agg + j)] ==
                                     trace.states[static_cast<size_t>(g * agg)];
        }
        if (!uniform) continue;
        if (trace.states[static_cast<size_t>(g * agg)] == +1) {
            dark_sum += static_cast<double>(total);
            ++dark_n;
        } else {
            bright_sum += static_cast<double>(total);
            ++bright_n;
        }
    }
    REQUIRE(dark_n > 50);
    REQUIRE(bright_n > 50);
    const double dark_mean = dark_sum / static_cast<double>(dark_n);
    const double bright_mean = bright_sum / static_cast<double>(bright_n);
    CHECK(bright_mean - dark_mean > 4.0 * std::sqrt(bright_mean));
}

TEST_CASE("optimize_threshold: closed-form run length on a two-state flipper") {
    TraceModel model;
    model.rate_bright = 700e3;
    model.rate_dark = 200e3;
    model.unit_duration = 2e-6;
    const double q = 0.9995;
    model.survival_per_unit = {q, q, q};
    model.jump_targets = {{{0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}}};

    const TraceResult trace = simulate_trace(model, 40000, +1, +1, 23);
    for (int b : {1, 2, 3}) {
        const ThresholdResult r = optimize_threshold(trace.photon_counts, b);
        const double analytic = 1.0 - (1.0 - std::pow(q, 100.0 * b)) / 2.0;
        CHECK(std::abs(r.fidelity - analytic) < 0.02);
    }
}

TEST_CASE("optimize_threshold: typical model has an interior optimum near 0.98") {
    TraceModel model;
    const TraceResult on_target = simulate_trace(model, 30000, +1, +1, 29);
    const TraceResult off_target = simulate_trace(model, 30000, +1, 0, 31);
    std::vector<long> counts = on_target.photon_counts;
    counts.insert(counts.end(), off_target.photon_counts.begin(),
                  off_target.photon_counts.end());

    int best_b = 0;
    double best_f = -1.0;
    for (int b = 1; b <= 15; ++b) {
        const ThresholdResult r = optimize_threshold(counts, b);
        if (r.fidelity > best_f) {
            best_f = r.fidelity;
            best_b = b;
        }
    }
    CHECK(best_b > 1);
    CHECK(best_b < 15);
    CHECK(best_f > 0.95);
    CHECK(best_f < 0.995);
}

TEST_CASE("optimize_threshold: indistinguishable platforms pin F at 3/4") {
    // With rate_bright == rate_dark the aggregated counts are iid, every
    // threshold splits them into geometric runs with 1/n_low + 1/n_high = 1,
    // so F = 1 - 1/4 independently of the split.
    TraceModel model;
    model.rate_dark = model.rate_bright;
    const TraceResult trace = simulate_trace(model, 20000, +1, 0, 37);
    const ThresholdResult r = optimize_threshold(trace.photon_counts, 1);
    CHECK(std::abs(r.fidelity - 0.75) < 0.02);
}

TEST_CASE("optimize_threshold: degenerate single-platform trace rejected") {
    const std::vector<long> flat(2000, 42);
    CHECK_THROWS_AS(optimize_threshold(flat, 1), std::invalid_argument);
    CHECK_THROWS_AS(optimize_threshold(flat, 0), std::invalid_argument);
}

TEST_CASE("optimize_threshold: no jumps hit the run-length ceiling") {
    // Two concatenated single-platform traces (the calibration layout) with
    // well-separated rates: one run per side, so F approaches
    // 1 - 1/(2 n_points) from below.
    TraceModel model;
    model.rate_dark = 200e3;
    model.unit_duration = 2e-6;
    model.survival_per_unit = {1.0, 1.0, 1.0};
    const TraceResult on_target = simulate_trace(model, 3000, +1, +1, 41);
    const TraceResult off_target = simulate_trace(model, 3000, +1, 0, 43);
    std::vector<long> counts = on_target.photon_counts;
    counts.insert(counts.end(), off_target.photon_counts.begin(),
                  off_target.photon_counts.end());

    const ThresholdResult r = optimize_threshold(counts, 1);
    CHECK(r.fidelity > 0.999);
    CHECK(r.n_bar_low == doctest::Approx(3000.0));
    CHECK(r.n_bar_high == doctest::Approx(3000.0));
}
