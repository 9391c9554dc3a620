// Two-point-measurement work statistics for the switching protocol:
// thermal / coherent-Gibbs preparation, the conditional probability matrix
// P_{m|n} = |<m(tau)|U|n(0)>|^2, the work distribution
// P(W) = sum_{n,m} P_n^0 P_{m|n} delta(W - W_{m|n}), and both sides of the
// Jarzynski equality <e^{-beta W}> = e^{-beta dF} = Z(tau)/Z(0).

#pragma once

#include <utility>
#include <vector>

#include "qje/protocol.hpp"
#include "qje/qutrit.hpp"

namespace qje {

// Rows indexed by the final eigenstate m, columns by the initial one n,
// both in ascending-eigenvalue order.  Unistochastic: rows and columns sum
// to 1 for any unitary.
struct ConditionalMatrix {
    std::array<std::array<double, 3>, 3> p{};  // p[m][n]

    double row_sum(int m) const;
    double col_sum(int n) const;
};

ConditionalMatrix tpm_conditional(const Mat3& u, const Mat3& h0, const Mat3& htau);

struct WorkAtom {
    double w;            // rad/s, = e_m(tau) - e_n(0)
    double probability;  // P_n^0 * P_{m|n}, merged over coinciding w
    std::vector<std::pair<int, int>> labels;  // contributing (n, m) index pairs
};

struct WorkDistribution {
    std::vector<WorkAtom> atoms;  // sorted by w ascending

    double total_probability() const;
};

// Atoms with exactly zero probability are dropped; atoms whose work values
// coincide within 1e-12 rad/s are merged (their label lists are kept).
WorkDistribution work_distribution(const std::array<double, 3>& p0,
                                   const ConditionalMatrix& cond,
                                   const Mat3& h0, const Mat3& htau);

// sum_k p_k exp(-beta w_k)
double jarzynski_lhs(const WorkDistribution& dist, double beta);

// Tr[e^{-beta H(tau)}] / Tr[e^{-beta H(0)}], spectrum-shifted for stability.
double free_energy_ratio(const Mat3& h0, const Mat3& htau, double beta);

struct PrepAngles {
    double theta;        // rad, rotation on the (+1, 0) pair
    double theta_prime;  // rad, rotation on the (-1, 0) pair
};

struct CoherentGibbsPrep {
    PrepAngles angles;
    StateVector state;       // sqrt(Gibbs) amplitudes, basis order (+1, 0, -1)
    DensityMatrix dephased;  // after both dephasing stages; equals the Gibbs state
};

// Selective-rotation preparation of the coherent Gibbs state of H(0),
// followed by dephasing of the (+1) and then (-1) coherences.
//
// theta = 2 arccos sqrt(e^{-lambda beta} / (1 + 2 cosh(beta lambda))) and
// theta' = 2 arccos sqrt(1 / (1 + e^{-lambda beta})).  The second rotation
// transfers the cos^2(theta'/2) share of the remaining amplitude onto |-1>;
// that orientation is the one that lands the diagonal exactly on the Gibbs
// populations (checked against gibbs_state in the tests).
CoherentGibbsPrep coherent_gibbs_prep(double beta, const Schedule& s);

struct JeResult {
    double lhs;
    double rhs;
    double difference;
};

// Full ideal-measurement pipeline: thermal occupation of H(0), midpoint
// propagation, conditional matrix, work distribution, both JE sides.
JeResult je_check(const Schedule& s, double beta, long n_steps);

}  // namespace qje
