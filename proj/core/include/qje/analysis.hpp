// Monte Carlo resampling of measured joint probabilities: binomial errors,
// inverse-temperature fitting by maximal fidelity against a diagonal Gibbs
// family, and aggregation of <e^{-beta W}> and e^{-beta dF} with their
// spreads over K resampled data sets.

#pragma once

#include <cstdint>

#include "qje/qutrit.hpp"

namespace qje {

// Measured joint counts, counts[m][n] with m the final outcome and n the
// initial one; `total` is the number of recorded trials.
struct JointCounts {
    std::array<std::array<long, 3>, 3> counts{};
    long total = 0;

    std::array<std::array<double, 3>, 3> probabilities() const;
};

// sigma_{m,n} = sqrt(P (1-P) / total)
std::array<std::array<double, 3>, 3> binomial_sigma(const JointCounts& counts);

struct BetaFit {
    double beta;    // s (rad/s)^-1, >= 0
    bool boundary;  // set when the populations rise with energy (anti-thermal)
};

// argmax over beta >= 0 of the Bhattacharyya fidelity
// (sum_i sqrt(gibbs_ii(beta) * p_i))^2 between the diagonal of the Gibbs
// family of h0 and the measured populations (basis order +1, 0, -1).
// Coarse grid over beta * scale in [0, 5] (501 points, scale = spectral
// radius of h0), then golden-section refinement to |dbeta| * scale < 1e-6.
BetaFit fit_beta(const std::array<double, 3>& populations, const Mat3& h0);

struct JointProbabilities {
    std::array<std::array<double, 3>, 3> p{};      // [m][n]
    std::array<std::array<double, 3>, 3> sigma{};  // [m][n]
};

JointProbabilities joint_from_counts(const JointCounts& counts);

enum class NegativeHandling {
    clamp,     // negative resamples are set to 0
    resample,  // redraw the matrix until non-negative (falls back to clamp)
};

struct McSummary {
    double beta_mean = 0.0, beta_std = 0.0;
    double lhs_mean = 0.0, lhs_std = 0.0;  // <e^{-beta W}>
    double rhs_mean = 0.0, rhs_std = 0.0;  // e^{-beta dF}
    long runs = 0;
    uint64_t seed = 0;
};

// Per run k: draw p^k_{m,n} ~ N(P, sigma^2); populations are the column sums;
// beta^k = fit_beta; lhs^k = sum p^k e^{-beta^k W_{m|n}} with
// W_{m|n} = e_m(tau) - e_n(0); rhs^k = partition ratio at beta^k.  Run RNG
// streams are derived from (seed, k), so the summary does not depend on how
// the runs are scheduled.
McSummary mc_pipeline(const JointProbabilities& measured, const Mat3& h0, const Mat3& htau,
                      long runs, uint64_t seed,
                      NegativeHandling negatives = NegativeHandling::clamp);

}  // namespace qje
