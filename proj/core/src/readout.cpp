#include "qje/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>

#include "qje/evolution.hpp"

namespace qje {

JumpModel jump_model_from_fidelity(double fidelity) {
    if (!(fidelity > 0.5 && fidelity <= 1.0))
        throw std::invalid_argument("jump_model_from_fidelity: fidelity must be in (0.5, 1]");
    const double p = 2.0 * fidelity - 1.0;
    const double branch = 0.5 * (1.0 - p);
    return {p, p, p, branch, branch};
}

JumpModel jump_model_f90() { return {0.81, 0.81, 0.81, 0.095, 0.095}; }

namespace {

void validate(const JumpModel& jm) {
    for (double p : {jm.p_plus, jm.p_zero, jm.p_minus, jm.p_zero_up, jm.p_zero_down})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("JumpModel: probabilities must be in [0, 1]");
    if (std::abs(jm.p_zero + jm.p_zero_up + jm.p_zero_down - 1.0) > 1e-12)
        throw std::invalid_argument("JumpModel: p_zero + p_zero_up + p_zero_down must be 1");
}

}  // namespace

MeasurementChannel measurement_channel(const JumpModel& jm) {
    validate(jm);
    const double pp = jm.p_plus, p0 = jm.p_zero, pm = jm.p_minus;
    const double pu = jm.p_zero_up, pd = jm.p_zero_down;

    MeasurementChannel ch;
    auto set = [&](int pre, int outcome, int post, double val) {
        ch.table[static_cast<size_t>(pre)][static_cast<size_t>(outcome)]
                [static_cast<size_t>(post)] = val;
    };

    // pre |+1>
    set(0, 0, 0, pp * pp + pu * (1.0 - pp) / 2.0);
    set(0, 1, 0, pu * (1.0 - pp) / 2.0);
    set(0, 2, 0, 0.0);
    set(0, 0, 1, pp * (1.0 - pp) + p0 * (1.0 - pp) / 2.0);
    set(0, 1, 1, p0 * (1.0 - pp) / 2.0);
    set(0, 2, 1, 0.0);
    set(0, 0, 2, pd * (1.0 - pp) / 4.0);
    set(0, 1, 2, pd * (1.0 - pp) / 4.0);
    set(0, 2, 2, pd * (1.0 - pp) / 4.0);

    // pre |0>
    set(1, 0, 0, pp * pu / 2.0);
    set(1, 1, 0, p0 * pu + pp * pu / 2.0);
    set(1, 2, 0, 0.0);
    set(1, 0, 1, pu * (1.0 - pp) / 2.0);
    set(1, 1, 1, p0 * p0 + pu * (1.0 - pp) / 2.0 + pd * (1.0 - pm) / 2.0);
    set(1, 2, 1, pd * (1.0 - pm) / 2.0);
    set(1, 0, 2, 0.0);
    set(1, 1, 2, p0 * pd / 2.0);
    set(1, 2, 2, p0 * pd / 2.0 + pm * pd);

    // pre |-1>
    set(2, 0, 0, 0.0);
    set(2, 1, 0, pu * (1.0 - pm));
    set(2, 2, 0, 0.0);
    set(2, 0, 1, 0.0);
    set(2, 1, 1, pm * (1.0 - pm) / 2.0 + p0 * (1.0 - pm));
    set(2, 2, 1, pm * (1.0 - pm) / 2.0);
    set(2, 0, 2, 0.0);
    set(2, 1, 2, pd * (1.0 - pm) / 2.0);
    set(2, 2, 2, pm * pm + pd * (1.0 - pm) / 2.0);

    for (int pre = 0; pre < 3; ++pre) {
        double s = 0.0;
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                s += ch.table[static_cast<size_t>(pre)][static_cast<size_t>(j)]
                             [static_cast<size_t>(k)];
        ch.excluded_mass[static_cast<size_t>(pre)] = 1.0 - s;
    }
    return ch;
}

NoisyJoint noisy_joint_distribution(const std::array<double, 3>& p0,
                                    const ConditionalMatrix& cond,
                                    const MeasurementChannel& channel,
                                    bool renormalize) {
    NoisyJoint out{};
    out.renormalized = renormalize;
    for (int i = 0; i < 3; ++i)
        for (int x = 0; x < 3; ++x)
            for (int j = 0; j < 3; ++j) {
                const double first = p0[static_cast<size_t>(i)] *
                                     channel.table[static_cast<size_t>(i)]
                                                  [static_cast<size_t>(x)]
                                                  [static_cast<size_t>(j)];
                if (first == 0.0) continue;
                for (int k = 0; k < 3; ++k) {
                    const double hop =
                        first * cond.p[static_cast<size_t>(k)][static_cast<size_t>(j)];
                    for (int y = 0; y < 3; ++y)
                        for (int l = 0; l < 3; ++l)
                            out.p[static_cast<size_t>(x)][static_cast<size_t>(y)] +=
                                hop * channel.table[static_cast<size_t>(k)]
                                                   [static_cast<size_t>(y)]
                                                   [static_cast<size_t>(l)];
                }
            }

    double mass = 0.0;
    for (const auto& row : out.p)
        for (double v : row) mass += v;
    out.retained_mass = mass;
    if (renormalize && mass > 0.0)
        for (auto& row : out.p)
            for (double& v : row) v /= mass;
    return out;
}

double je_deviation(const Schedule& s, double beta, const MeasurementChannel& channel,
                    long n_steps, bool renormalize) {
    const Mat3 h0 = h_of_t(0.0, s);
    const Mat3 htau = h_of_t(s.tau, s);
    const EigenSystem es0 = eigh(h0);
    const EigenSystem est = eigh(htau);

    const auto p0 = gibbs_populations(es0, beta);
    const PropagationResult prop = propagate(s, n_steps);
    const ConditionalMatrix cond = tpm_conditional(prop.unitary, h0, htau);
    const NoisyJoint joint = noisy_joint_distribution(p0, cond, channel, renormalize);

    double lhs = 0.0;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            const double w = est.eigenvalues[static_cast<size_t>(y)] -
                             es0.eigenvalues[static_cast<size_t>(x)];
            lhs += joint.p[static_cast<size_t>(x)][static_cast<size_t>(y)] *
                   std::exp(-beta * w);
        }
    return lhs - free_energy_ratio(h0, htau, beta);
}

namespace {

// Sample (outcome, post) from a pre-state's table row; -1 signals an
// excluded (double-below-threshold) trial.
std::pair<int, int> sample_readout(const MeasurementChannel& ch, int pre, double u) {
    double acc = 0.0;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
            acc += ch.table[static_cast<size_t>(pre)][static_cast<size_t>(j)]
                           [static_cast<size_t>(k)];
            if (u < acc) return {j, k};
        }
    return {-1, -1};
}

int sample_index(const std::array<double, 3>& p, double u) {
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        acc += p[static_cast<size_t>(i)];
        if (u < acc) return i;
    }
    return 2;
}

}  // namespace

TrajectoryJoint sample_joint_distribution(const std::array<double, 3>& p0,
                                          const ConditionalMatrix& cond,
                                          const MeasurementChannel& channel,
                                          long n_samples, uint64_t seed) {
    if (n_samples < 1)
        throw std::invalid_argument("sample_joint_distribution: n_samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::array<std::array<long, 3>, 3> counts{};
    long excluded = 0;
    for (long trial = 0; trial < n_samples; ++trial) {
        const int i = sample_index(p0, unit(rng));
        const auto [x, j] = sample_readout(channel, i, unit(rng));
        if (x < 0) {
            ++excluded;
            continue;
        }
        std::array<double, 3> column{cond.p[0][static_cast<size_t>(j)],
                                     cond.p[1][static_cast<size_t>(j)],
                                     cond.p[2][static_cast<size_t>(j)]};
        const int k = sample_index(column, unit(rng));
        const auto [y, l] = sample_readout(channel, k, unit(rng));
        (void)l;
        if (y < 0) {
            ++excluded;
            continue;
        }
        ++counts[static_cast<size_t>(x)][static_cast<size_t>(y)];
    }

    TrajectoryJoint out;
    out.excluded = excluded;
    out.n_samples = n_samples;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y)
            out.p[static_cast<size_t>(x)][static_cast<size_t>(y)] =
                static_cast<double>(counts[static_cast<size_t>(x)][static_cast<size_t>(y)]) /
                static_cast<double>(n_samples);
    return out;
}

TraceResult simulate_trace(const TraceModel& model, long n_bundles, int readout_target,
                           int initial_state, uint64_t seed) {
    if (n_bundles < 1) throw std::invalid_argument("simulate_trace: n_bundles must be >= 1");
    if (!(model.rate_bright >= model.rate_dark && model.rate_dark > 0.0))
        throw std::invalid_argument("simulate_trace: need rate_bright >= rate_dark > 0");
    if (readout_target != +1 && readout_target != -1)
        throw std::invalid_argument("simulate_trace: readout target must be +1 or -1");
    for (double q : model.survival_per_unit)
        if (!(q > 0.0 && q <= 1.0))
            throw std::invalid_argument("simulate_trace: survival must be in (0, 1]");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    int state = level_index(initial_state);
    const double window = model.unit_duration * static_cast<double>(model.repeats_per_bundle);

    TraceResult out;
    out.photon_counts.reserve(static_cast<size_t>(n_bundles));
    out.states.reserve(static_cast<size_t>(n_bundles));
    const std::array<int, 3> labels{+1, 0, -1};

    for (long b = 0; b < n_bundles; ++b) {
        const bool on_target = (labels[static_cast<size_t>(state)] == readout_target);
        const double mean = window * (on_target ? model.rate_dark : model.rate_bright);
        std::poisson_distribution<long> poisson(mean);
        out.photon_counts.push_back(poisson(rng));
        out.states.push_back(labels[static_cast<size_t>(state)]);

        const double survive = std::pow(model.survival_per_unit[static_cast<size_t>(state)],
                                        model.repeats_per_bundle);
        if (unit(rng) >= survive) {
            const auto& row = model.jump_targets[static_cast<size_t>(state)];
            if (std::abs(row[0] + row[1] + row[2] - 1.0) > 1e-12)
                throw std::invalid_argument("simulate_trace: jump_targets rows must sum to 1");
            state = sample_index(row, unit(rng));
        }
    }
    return out;
}

namespace {

struct RunStats {
    double n_bar_low = 0.0;
    double n_bar_high = 0.0;
    bool both_present = false;
};

RunStats run_lengths(const std::vector<long>& points, long threshold) {
    long low_points = 0, high_points = 0, low_runs = 0, high_runs = 0;
    int prev = -1;  // 0 = low, 1 = high
    for (long x : points) {
        const int side = (x < threshold) ? 0 : 1;
        if (side == 0) {
            ++low_points;
            if (prev != 0) ++low_runs;
        } else {
            ++high_points;
            if (prev != 1) ++high_runs;
        }
        prev = side;
    }
    RunStats st;
    if (low_runs > 0 && high_runs > 0) {
        st.both_present = true;
        st.n_bar_low = static_cast<double>(low_points) / static_cast<double>(low_runs);
        st.n_bar_high = static_cast<double>(high_points) / static_cast<double>(high_runs);
    }
    return st;
}

}  // namespace

ThresholdResult optimize_threshold(const std::vector<long>& photon_counts, int bundle_size) {
    if (bundle_size < 1) throw std::invalid_argument("optimize_threshold: bundle_size must be >= 1");
    const long n_points = static_cast<long>(photon_counts.size()) / bundle_size;
    if (n_points < 4)
        throw std::invalid_argument("optimize_threshold: trace too short for this bundle size");

    std::vector<long> points(static_cast<size_t>(n_points));
    for (long i = 0; i < n_points; ++i) {
        long s = 0;
        for (int j = 0; j < bundle_size; ++j)
            s += photon_counts[static_cast<size_t>(i * bundle_size + j)];
        points[static_cast<size_t>(i)] = s;
    }

    const auto [mn_it, mx_it] = std::minmax_element(points.begin(), points.end());
    const long mn = *mn_it, mx = *mx_it;
    if (mn == mx) throw std::invalid_argument("optimize_threshold: degenerate single-platform trace");

    // Histogram peaks on both sides of the midpoint, for tie-breaking.
    std::map<long, long> hist;
    for (long x : points) ++hist[x];
    const double mid_guess = 0.5 * (static_cast<double>(mn) + static_cast<double>(mx));
    long peak_low = mn, peak_high = mx, best_low = -1, best_high = -1;
    for (const auto& [value, freq] : hist) {
        if (static_cast<double>(value) <= mid_guess) {
            if (freq > best_low) { best_low = freq; peak_low = value; }
        } else {
            if (freq > best_high) { best_high = freq; peak_high = value; }
        }
    }
    const double peak_mid = 0.5 * (static_cast<double>(peak_low) + static_cast<double>(peak_high));

    ThresholdResult best{0, -1.0, 0.0, 0.0};
    for (long t = mn + 1; t <= mx; ++t) {
        const RunStats st = run_lengths(points, t);
        if (!st.both_present) continue;
        const double f_low = 1.0 - 1.0 / (2.0 * st.n_bar_low);
        const double f_high = 1.0 - 1.0 / (2.0 * st.n_bar_high);
        const double f = 0.5 * (f_low + f_high);
        const bool better =
            f > best.fidelity + 1e-12 ||
            (std::abs(f - best.fidelity) <= 1e-12 &&
             std::abs(static_cast<double>(t) - peak_mid) <
                 std::abs(static_cast<double>(best.threshold) - peak_mid));
        if (better) best = {t, f, st.n_bar_low, st.n_bar_high};
    }
    if (best.fidelity < 0.0)
        throw std::invalid_argument("optimize_threshold: no threshold separates two platforms");
    return best;
}

}  // namespace qje
