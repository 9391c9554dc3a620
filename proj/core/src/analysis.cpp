#include "qje/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace qje {

std::array<std::array<double, 3>, 3> JointCounts::probabilities() const {
    if (total <= 0) throw std::invalid_argument("JointCounts: total must be > 0");
    std::array<std::array<double, 3>, 3> p{};
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
            p[static_cast<size_t>(m)][static_cast<size_t>(n)] =
                static_cast<double>(counts[static_cast<size_t>(m)][static_cast<size_t>(n)]) /
                static_cast<double>(total);
    return p;
}

std::array<std::array<double, 3>, 3> binomial_sigma(const JointCounts& counts) {
    const auto p = counts.probabilities();
    std::array<std::array<double, 3>, 3> sigma{};
    for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n) {
            const double q = p[static_cast<size_t>(m)][static_cast<size_t>(n)];
            sigma[static_cast<size_t>(m)][static_cast<size_t>(n)] =
                std::sqrt(q * (1.0 - q) / static_cast<double>(counts.total));
        }
    return sigma;
}

JointProbabilities joint_from_counts(const JointCounts& counts) {
    return {counts.probabilities(), binomial_sigma(counts)};
}

namespace {

// Diagonal of the Gibbs state of `es` in the measurement basis.
std::array<double, 3> gibbs_diagonal(const EigenSystem& es, double beta) {
    const auto w = gibbs_populations(es, beta);
    std::array<double, 3> diag{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k)
            diag[static_cast<size_t>(i)] +=
                w[static_cast<size_t>(k)] *
                std::norm(es.eigenvectors[static_cast<size_t>(k)][i]);
    return diag;
}

double bhattacharyya(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        s += std::sqrt(a[static_cast<size_t>(i)] * b[static_cast<size_t>(i)]);
    return s * s;
}

// splitmix64, used to derive independent per-run streams from (seed, k).
uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

BetaFit fit_beta(const std::array<double, 3>& populations, const Mat3& h0) {
    std::array<double, 3> p = populations;
    double sum = 0.0;
    for (double& x : p) {
        if (x < -1e-12) throw std::invalid_argument("fit_beta: negative population");
        x = std::max(x, 0.0);
        sum += x;
    }
    if (!(sum > 0.0)) throw std::invalid_argument("fit_beta: populations sum to zero");
    for (double& x : p) x /= sum;

    const EigenSystem es = eigh(h0);
    const double scale =
        std::max({std::abs(es.eigenvalues[0]), std::abs(es.eigenvalues[2]), 1e-300});

    // Anti-thermal input: populations strictly rising with the basis energy.
    std::array<double, 3> energy{};
    for (int i = 0; i < 3; ++i) energy[static_cast<size_t>(i)] = h0(i, i).real();
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return energy[static_cast<size_t>(a)] < energy[static_cast<size_t>(b)];
    });
    if (p[static_cast<size_t>(order[0])] < p[static_cast<size_t>(order[1])] &&
        p[static_cast<size_t>(order[1])] < p[static_cast<size_t>(order[2])])
        return {0.0, true};

    auto fidelity = [&](double x) { return bhattacharyya(gibbs_diagonal(es, x / scale), p); };

    constexpr int kGrid = 501;
    constexpr double kXMax = 5.0;
    double best_x = 0.0, best_f = -1.0;
    for (int i = 0; i < kGrid; ++i) {
        const double x = kXMax * static_cast<double>(i) / (kGrid - 1);
        const double f = fidelity(x);
        if (f > best_f) {
            best_f = f;
            best_x = x;
        }
    }

    // Golden-section refinement inside the bracketing grid cells.
    const double step = kXMax / (kGrid - 1);
    double lo = std::max(0.0, best_x - step), hi = std::min(kXMax, best_x + step);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = fidelity(c), fd = fidelity(d);
    while (hi - lo > 1e-6) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = fidelity(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = fidelity(d);
        }
    }
    return {0.5 * (lo + hi) / scale, false};
}

McSummary mc_pipeline(const JointProbabilities& measured, const Mat3& h0, const Mat3& htau,
                      long runs, uint64_t seed, NegativeHandling negatives) {
    if (runs < 100) throw std::invalid_argument("mc_pipeline: need at least 100 runs");

    const EigenSystem es0 = eigh(h0);
    const EigenSystem est = eigh(htau);
    const double shift = std::min(es0.eigenvalues[0], est.eigenvalues[0]);

    std::vector<double> betas, lhss, rhss;
    betas.reserve(static_cast<size_t>(runs));
    lhss.reserve(static_cast<size_t>(runs));
    rhss.reserve(static_cast<size_t>(runs));

    for (long k = 0; k < runs; ++k) {
        std::mt19937_64 rng(mix(seed ^ mix(static_cast<uint64_t>(k))));
        std::normal_distribution<double> gauss(0.0, 1.0);

        std::array<std::array<double, 3>, 3> draw{};
        for (int attempt = 0;; ++attempt) {
            bool negative = false;
            for (int m = 0; m < 3; ++m)
                for (int n = 0; n < 3; ++n) {
                    const auto mm = static_cast<size_t>(m);
                    const auto nn = static_cast<size_t>(n);
                    draw[mm][nn] = measured.p[mm][nn] + measured.sigma[mm][nn] * gauss(rng);
                    if (draw[mm][nn] < 0.0) negative = true;
                }
            if (!negative || negatives == NegativeHandling::clamp || attempt >= 1000) {
                for (auto& row : draw)
                    for (double& v : row) v = std::max(v, 0.0);
                break;
            }
        }

        std::array<double, 3> populations{};
        for (int n = 0; n < 3; ++n)
            for (int m = 0; m < 3; ++m)
                populations[static_cast<size_t>(n)] +=
                    draw[static_cast<size_t>(m)][static_cast<size_t>(n)];
        const double beta = fit_beta(populations, h0).beta;

        double lhs = 0.0;
        for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) {
                const double w = est.eigenvalues[static_cast<size_t>(m)] -
                                 es0.eigenvalues[static_cast<size_t>(n)];
                lhs += draw[static_cast<size_t>(m)][static_cast<size_t>(n)] *
                       std::exp(-beta * w);
            }

        double z0 = 0.0, zt = 0.0;
        for (int i = 0; i < 3; ++i) {
            z0 += std::exp(-beta * (es0.eigenvalues[static_cast<size_t>(i)] - shift));
            zt += std::exp(-beta * (est.eigenvalues[static_cast<size_t>(i)] - shift));
        }

        betas.push_back(beta);
        lhss.push_back(lhs);
        rhss.push_back(zt / z0);
    }

    auto stats = [](const std::vector<double>& v, double& mean, double& std_out) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        std_out = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    };

    McSummary s;
    s.runs = runs;
    s.seed = seed;
    stats(betas, s.beta_mean, s.beta_std);
    stats(lhss, s.lhs_mean, s.lhs_std);
    stats(rhss, s.rhs_mean, s.rhs_std);
    return s;
}

}  // namespace qje
