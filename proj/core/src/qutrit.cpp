#include "qje/qutrit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qje {

double norm(const Vec3& v) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += std::norm(v[i]);
    return std::sqrt(s);
}

Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
    return cx{1.0 / n, 0.0} * v;
}

Mat3 Mat3::identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
}

Mat3 Mat3::diag(cx d0, cx d1, cx d2) {
    Mat3 m;
    m(0, 0) = d0;
    m(1, 1) = d1;
    m(2, 2) = d2;
    return m;
}

Mat3 operator+(const Mat3& x, const Mat3& y) {
    Mat3 z;
    for (size_t i = 0; i < 9; ++i) z.a[i] = x.a[i] + y.a[i];
    return z;
}

Mat3 operator-(const Mat3& x, const Mat3& y) {
    Mat3 z;
    for (size_t i = 0; i < 9; ++i) z.a[i] = x.a[i] - y.a[i];
    return z;
}

Mat3 operator*(cx s, const Mat3& x) {
    Mat3 z;
    for (size_t i = 0; i < 9; ++i) z.a[i] = s * x.a[i];
    return z;
}

Mat3 operator*(const Mat3& x, const Mat3& y) {
    Mat3 z;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            cx s = 0.0;
            for (int k = 0; k < 3; ++k) s += x(r, k) * y(k, c);
            z(r, c) = s;
        }
    return z;
}

Vec3 operator*(const Mat3& x, const Vec3& v) {
    Vec3 w;
    for (int r = 0; r < 3; ++r) {
        cx s = 0.0;
        for (int c = 0; c < 3; ++c) s += x(r, c) * v[c];
        w[r] = s;
    }
    return w;
}

Mat3 adjoint(const Mat3& x) {
    Mat3 z;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) z(r, c) = std::conj(x(c, r));
    return z;
}

cx trace(const Mat3& x) { return x(0, 0) + x(1, 1) + x(2, 2); }

Mat3 commutator(const Mat3& x, const Mat3& y) { return x * y - y * x; }

Mat3 outer(const Vec3& u, const Vec3& v) {
    Mat3 z;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) z(r, c) = u[r] * std::conj(v[c]);
    return z;
}

double max_abs(const Mat3& x) {
    double m = 0.0;
    for (const auto& e : x.a) m = std::max(m, std::abs(e));
    return m;
}

double max_abs_diff(const Mat3& x, const Mat3& y) {
    double m = 0.0;
    for (size_t i = 0; i < 9; ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
    return m;
}

double hermiticity_defect(const Mat3& x) { return max_abs_diff(x, adjoint(x)); }

double unitarity_defect(const Mat3& u) {
    return max_abs_diff(adjoint(u) * u, Mat3::identity());
}

Mat3 spin1_operator(Axis axis) {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    Mat3 m;
    switch (axis) {
        case Axis::z:
            m = Mat3::diag(1.0, 0.0, -1.0);
            break;
        case Axis::x:
            m(0, 1) = m(1, 0) = m(1, 2) = m(2, 1) = inv_sqrt2;
            break;
        case Axis::y:
            m(0, 1) = m(1, 2) = cx{0.0, -inv_sqrt2};
            m(1, 0) = m(2, 1) = cx{0.0, inv_sqrt2};
            break;
    }
    return m;
}

namespace {

// One complex Jacobi rotation zeroing a(p,q).  The (p,q) phase is absorbed
// first so the 2x2 block becomes real symmetric, then the classic stable
// rotation applies.  Returns the full 3x3 unitary.
Mat3 jacobi_rotation(const Mat3& a, int p, int q) {
    const cx apq = a(p, q);
    const double r = std::abs(apq);
    const cx phase = apq / r;  // e^{i arg(apq)}
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();

    const double tau = (aqq - app) / (2.0 * r);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;

    Mat3 u = Mat3::identity();
    u(p, p) = c;
    u(p, q) = s;
    u(q, p) = -s * std::conj(phase);
    u(q, q) = c * std::conj(phase);
    return u;
}

double offdiag_max(const Mat3& a) {
    return std::max({std::abs(a(0, 1)), std::abs(a(0, 2)), std::abs(a(1, 2))});
}

}  // namespace

EigenSystem eigh(const Mat3& h) {
    const double scale = max_abs(h);
    const double defect = hermiticity_defect(h);
    if (defect > 1e-9 * std::max(scale, 1.0)) {
        std::ostringstream msg;
        msg << "eigh: input is not Hermitian, |H - H^dag|_max = " << defect;
        throw std::invalid_argument(msg.str());
    }

    // Exact symmetrization removes rounding-level asymmetry.
    Mat3 a = cx{0.5, 0.0} * (h + adjoint(h));
    Mat3 v = Mat3::identity();

    if (scale > 0.0) {
        const double stop = 1e-15 * scale;
        for (int sweep = 0; sweep < 60 && offdiag_max(a) > stop; ++sweep) {
            for (auto [p, q] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
                if (std::abs(a(p, q)) <= stop) continue;
                const Mat3 u = jacobi_rotation(a, p, q);
                a = adjoint(u) * a * u;
                v = v * u;
            }
        }
    }

    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });

    EigenSystem es;
    for (int k = 0; k < 3; ++k) {
        const int j = order[static_cast<size_t>(k)];
        es.eigenvalues[static_cast<size_t>(k)] = a(j, j).real();
        Vec3 vec;
        for (int i = 0; i < 3; ++i) vec[i] = v(i, j);
        // Deterministic phase: largest-magnitude component real positive.
        int imax = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(vec[i]) > std::abs(vec[imax])) imax = i;
        const cx ph = std::conj(vec[imax]) / std::abs(vec[imax]);
        es.eigenvectors[static_cast<size_t>(k)] = ph * vec;
    }
    return es;
}

Mat3 reconstruct(const EigenSystem& es) {
    Mat3 m;
    for (int k = 0; k < 3; ++k)
        m = m + cx{es.eigenvalues[static_cast<size_t>(k)], 0.0} *
                    outer(es.eigenvectors[static_cast<size_t>(k)],
                          es.eigenvectors[static_cast<size_t>(k)]);
    return m;
}

Mat3 expm_minus_iH_dt(const Mat3& h, double dt) {
    if (!(dt >= 0.0)) throw std::invalid_argument("expm_minus_iH_dt: dt must be >= 0");
    const EigenSystem es = eigh(h);
    Mat3 u;
    for (int k = 0; k < 3; ++k) {
        const double phi = -es.eigenvalues[static_cast<size_t>(k)] * dt;
        u = u + cx{std::cos(phi), std::sin(phi)} *
                    outer(es.eigenvectors[static_cast<size_t>(k)],
                          es.eigenvectors[static_cast<size_t>(k)]);
    }
    return u;
}

Mat3 gibbs_state(const Mat3& h, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("gibbs_state: beta must be >= 0");
    const EigenSystem es = eigh(h);
    const auto pop = gibbs_populations(es, beta);
    Mat3 rho;
    for (int k = 0; k < 3; ++k)
        rho = rho + cx{pop[static_cast<size_t>(k)], 0.0} *
                        outer(es.eigenvectors[static_cast<size_t>(k)],
                              es.eigenvectors[static_cast<size_t>(k)]);
    return rho;
}

std::array<double, 3> gibbs_populations(const EigenSystem& es, double beta) {
    if (!(beta >= 0.0)) throw std::invalid_argument("gibbs_populations: beta must be >= 0");
    const double emin = es.eigenvalues[0];  // ascending
    std::array<double, 3> w;
    double z = 0.0;
    for (int k = 0; k < 3; ++k) {
        w[static_cast<size_t>(k)] = std::exp(-beta * (es.eigenvalues[static_cast<size_t>(k)] - emin));
        z += w[static_cast<size_t>(k)];
    }
    for (auto& x : w) x /= z;
    return w;
}

int level_index(int level) {
    switch (level) {
        case +1: return 0;
        case 0: return 1;
        case -1: return 2;
    }
    throw std::invalid_argument("level_index: level must be +1, 0 or -1");
}

Mat3 dephase_pair(const Mat3& rho, int level) {
    if (level != +1 && level != -1)
        throw std::invalid_argument("dephase_pair: level must be +1 or -1");
    const int idx = level_index(level);
    Mat3 out = rho;
    for (int j = 0; j < 3; ++j) {
        if (j == idx) continue;
        out(idx, j) = 0.0;
        out(j, idx) = 0.0;
    }
    return out;
}

}  // namespace qje
