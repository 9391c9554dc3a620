#include "qje/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qje/evolution.hpp"

namespace qje {

double ConditionalMatrix::row_sum(int m) const {
    const auto& row = p[static_cast<size_t>(m)];
    return row[0] + row[1] + row[2];
}

double ConditionalMatrix::col_sum(int n) const {
    return p[0][static_cast<size_t>(n)] + p[1][static_cast<size_t>(n)] +
           p[2][static_cast<size_t>(n)];
}

ConditionalMatrix tpm_conditional(const Mat3& u, const Mat3& h0, const Mat3& htau) {
    const double defect = unitarity_defect(u);
    if (defect > 1e-6)
        throw std::invalid_argument("tpm_conditional: U is not unitary, defect " +
                                    std::to_string(defect));
    const EigenSystem es0 = eigh(h0);
    const EigenSystem est = eigh(htau);

    ConditionalMatrix cond;
    for (int n = 0; n < 3; ++n) {
        const Vec3 evolved = u * es0.eigenvectors[static_cast<size_t>(n)];
        for (int m = 0; m < 3; ++m)
            cond.p[static_cast<size_t>(m)][static_cast<size_t>(n)] =
                std::norm(inner(est.eigenvectors[static_cast<size_t>(m)], evolved));
    }
    return cond;
}

double WorkDistribution::total_probability() const {
    double s = 0.0;
    for (const auto& atom : atoms) s += atom.probability;
    return s;
}

WorkDistribution work_distribution(const std::array<double, 3>& p0,
                                   const ConditionalMatrix& cond,
                                   const Mat3& h0, const Mat3& htau) {
    double sum = 0.0;
    for (double p : p0) {
        if (p < -1e-12) throw std::invalid_argument("work_distribution: negative probability");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("work_distribution: p0 must sum to 1");

    const EigenSystem es0 = eigh(h0);
    const EigenSystem est = eigh(htau);

    struct Raw {
        double w;
        double p;
        int n, m;
    };
    std::vector<Raw> raw;
    raw.reserve(9);
    for (int n = 0; n < 3; ++n)
        for (int m = 0; m < 3; ++m) {
            const double p = p0[static_cast<size_t>(n)] *
                             cond.p[static_cast<size_t>(m)][static_cast<size_t>(n)];
            if (p == 0.0) continue;
            raw.push_back({est.eigenvalues[static_cast<size_t>(m)] -
                               es0.eigenvalues[static_cast<size_t>(n)],
                           p, n, m});
        }
    std::sort(raw.begin(), raw.end(), [](const Raw& x, const Raw& y) { return x.w < y.w; });

    constexpr double kMergeTol = 1e-12;  // rad/s
    WorkDistribution dist;
    for (const Raw& r : raw) {
        if (!dist.atoms.empty() && std::abs(r.w - dist.atoms.back().w) <= kMergeTol) {
            dist.atoms.back().probability += r.p;
            dist.atoms.back().labels.emplace_back(r.n, r.m);
        } else {
            dist.atoms.push_back({r.w, r.p, {{r.n, r.m}}});
        }
    }
    return dist;
}

double jarzynski_lhs(const WorkDistribution& dist, double beta) {
    double s = 0.0;
    for (const auto& atom : dist.atoms) s += atom.probability * std::exp(-beta * atom.w);
    return s;
}

double free_energy_ratio(const Mat3& h0, const Mat3& htau, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("free_energy_ratio: beta must be >= 0");
    const EigenSystem es0 = eigh(h0);
    const EigenSystem est = eigh(htau);
    const double shift = std::min(es0.eigenvalues[0], est.eigenvalues[0]);
    double z0 = 0.0, zt = 0.0;
    for (int k = 0; k < 3; ++k) {
        z0 += std::exp(-beta * (es0.eigenvalues[static_cast<size_t>(k)] - shift));
        zt += std::exp(-beta * (est.eigenvalues[static_cast<size_t>(k)] - shift));
    }
    return zt / z0;
}

CoherentGibbsPrep coherent_gibbs_prep(double beta, const Schedule& s) {
    if (!(beta >= 0.0)) throw std::invalid_argument("coherent_gibbs_prep: beta must be >= 0");
    const double bl = beta * s.lambda;
    const double z = 1.0 + 2.0 * std::cosh(bl);

    CoherentGibbsPrep prep;
    prep.angles.theta = 2.0 * std::acos(std::sqrt(std::exp(-bl) / z));
    prep.angles.theta_prime = 2.0 * std::acos(std::sqrt(1.0 / (1.0 + std::exp(-bl))));

    const double c1 = std::cos(0.5 * prep.angles.theta);
    const double s1 = std::sin(0.5 * prep.angles.theta);
    const double c2 = std::cos(0.5 * prep.angles.theta_prime);
    const double s2 = std::sin(0.5 * prep.angles.theta_prime);

    // R1 on the (+1, 0) pair starting from |+1>, then R2 on the (0, -1) pair
    // moving the cos share onto |-1>.
    prep.state[0] = c1;
    prep.state[1] = s1 * s2;
    prep.state[2] = s1 * c2;

    const Mat3 pure = outer(prep.state, prep.state);
    prep.dephased = dephase_pair(dephase_pair(pure, +1), -1);
    return prep;
}

JeResult je_check(const Schedule& s, double beta, long n_steps) {
    const Mat3 h0 = h_of_t(0.0, s);
    const Mat3 htau = h_of_t(s.tau, s);

    const auto p0 = gibbs_populations(eigh(h0), beta);
    const PropagationResult prop = propagate(s, n_steps);
    const ConditionalMatrix cond = tpm_conditional(prop.unitary, h0, htau);
    const WorkDistribution dist = work_distribution(p0, cond, h0, htau);

    JeResult r;
    r.lhs = jarzynski_lhs(dist, beta);
    r.rhs = free_energy_ratio(h0, htau, beta);
    r.difference = r.lhs - r.rhs;
    return r;
}

}  // namespace qje
