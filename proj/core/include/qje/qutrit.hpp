// Dense 3-level (spin-1) linear algebra: spin operators, Hermitian
// eigendecomposition, unitary exponentials, Gibbs states, dephasing channels.
//
// Conventions used throughout the library:
//   * basis order is (|+1>, |0>, |-1>), i.e. index 0 ↔ m = +1
//   * hbar = 1; Hamiltonians carry angular frequency (rad/s)
//   * inverse temperature beta carries seconds, so beta*|H| is dimensionless
//
// Everything is a plain value type; all operations are pure functions.

#pragma once

#include <array>
#include <complex>
#include <cstddef>

namespace qje {

using cx = std::complex<double>;

// ── 3-component complex vector ───────────────────────────────────────────────

struct Vec3 {
    std::array<cx, 3> a{};

    cx& operator[](int i) { return a[static_cast<size_t>(i)]; }
    const cx& operator[](int i) const { return a[static_cast<size_t>(i)]; }
};

inline Vec3 operator+(const Vec3& u, const Vec3& v) {
    Vec3 w;
    for (int i = 0; i < 3; ++i) w[i] = u[i] + v[i];
    return w;
}

inline Vec3 operator-(const Vec3& u, const Vec3& v) {
    Vec3 w;
    for (int i = 0; i < 3; ++i) w[i] = u[i] - v[i];
    return w;
}

inline Vec3 operator*(cx s, const Vec3& v) {
    Vec3 w;
    for (int i = 0; i < 3; ++i) w[i] = s * v[i];
    return w;
}

// <u|v> with the physics convention: conjugate-linear in the first slot.
inline cx inner(const Vec3& u, const Vec3& v) {
    cx s = 0.0;
    for (int i = 0; i < 3; ++i) s += std::conj(u[i]) * v[i];
    return s;
}

double norm(const Vec3& v);
Vec3 normalized(const Vec3& v);

// ── 3x3 complex matrix ───────────────────────────────────────────────────────

struct Mat3 {
    std::array<cx, 9> a{};

    cx& operator()(int r, int c) { return a[static_cast<size_t>(3 * r + c)]; }
    const cx& operator()(int r, int c) const { return a[static_cast<size_t>(3 * r + c)]; }

    static Mat3 zero() { return Mat3{}; }
    static Mat3 identity();
    static Mat3 diag(cx d0, cx d1, cx d2);
};

Mat3 operator+(const Mat3& x, const Mat3& y);
Mat3 operator-(const Mat3& x, const Mat3& y);
Mat3 operator*(cx s, const Mat3& x);
Mat3 operator*(const Mat3& x, const Mat3& y);
Vec3 operator*(const Mat3& x, const Vec3& v);

Mat3 adjoint(const Mat3& x);
cx trace(const Mat3& x);
Mat3 commutator(const Mat3& x, const Mat3& y);

// |u><v|
Mat3 outer(const Vec3& u, const Vec3& v);

// Largest entry magnitude (max norm).
double max_abs(const Mat3& x);
double max_abs_diff(const Mat3& x, const Mat3& y);

// max |A - A†| entry; 0 for exactly Hermitian input.
double hermiticity_defect(const Mat3& x);
// max |U†U - I| entry; 0 for exactly unitary input.
double unitarity_defect(const Mat3& u);

// Domain aliases.  An Operator is Hermitian (rad/s) or unitary depending on
// role; a DensityMatrix is Hermitian, unit-trace, positive semidefinite.
using Operator = Mat3;
using DensityMatrix = Mat3;
using StateVector = Vec3;

// ── spin-1 operators ─────────────────────────────────────────────────────────

enum class Axis { x, y, z };

// Canonical spin-1 matrices in the (|+1>, |0>, |-1>) basis:
//   I_z = diag(1, 0, -1), I_x/I_y with 1/sqrt(2) (∓i/sqrt(2)) off-diagonals.
Mat3 spin1_operator(Axis axis);

// ── Hermitian eigendecomposition ─────────────────────────────────────────────

struct EigenSystem {
    std::array<double, 3> eigenvalues;  // ascending, rad/s
    std::array<Vec3, 3> eigenvectors;   // same order, orthonormal
};

// Cyclic complex Jacobi diagonalization of a Hermitian 3x3 matrix.
// Eigenvalues sorted ascending; each eigenvector's phase is fixed by making
// its largest-magnitude component real and positive, so repeated calls (and
// degenerate inputs) give reproducible bases.
// Throws std::invalid_argument when the input is not Hermitian within
// 1e-9 * max(1, |H|), reporting the defect.
EigenSystem eigh(const Mat3& h);

// Reassemble V diag(e) V† from an eigensystem.
Mat3 reconstruct(const EigenSystem& es);

// U = V diag(exp(-i e_k dt)) V†.  dt in seconds, dt >= 0.
Mat3 expm_minus_iH_dt(const Mat3& h, double dt);

// rho = exp(-beta H) / Tr[exp(-beta H)], evaluated in the eigenbasis with the
// spectrum shifted by its minimum so large beta cannot overflow.
Mat3 gibbs_state(const Mat3& h, double beta);

// Thermal occupations exp(-beta e_k)/Z indexed like the eigensystem.
std::array<double, 3> gibbs_populations(const EigenSystem& es, double beta);

// Zero every coherence between the named level (+1 or -1) and the other two
// levels; populations are untouched.  Acts in the matrix's own basis.
Mat3 dephase_pair(const Mat3& rho, int level);

// Basis index of a level label: +1 -> 0, 0 -> 1, -1 -> 2.
int level_index(int level);

}  // namespace qje
