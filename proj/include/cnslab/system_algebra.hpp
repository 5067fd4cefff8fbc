#pragma once

#include <array>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "scalar.hpp"

namespace cnslab {

/**
 * @brief Coefficients c1..c12 of a two-component cubic system.
 *
 * Component 1 carries c1..c6 and component 2 carries c7..c12, in the monomial order
 * |u1|^2 u1, |u1|^2 u2, u1^2 conj(u2), u1 |u2|^2, conj(u1) u2^2, |u2|^2 u2.
 */
template <class T>
struct CubicSystem {
    std::array<T, 12> coeff{};

    /// 1-based accessor matching the usual c_j numbering.
    const T& c(int j) const { return coeff[j - 1]; }
    T& c(int j) { return coeff[j - 1]; }

    friend bool operator==(const CubicSystem& x, const CubicSystem& y) { return x.coeff == y.coeff; }
};

template <class T>
struct CnsaSystem {
    std::array<T, 8> lambda{};
    const T& l(int j) const { return lambda[j - 1]; }
};

template <class T>
struct MatrixKernelRep {
    Mat3<T> C = Mat3<T>::zero();
    T p{0}, q{0}, r{0};

    Vec3<T> pqr() const { return {p, q, r}; }
    bool is_cnsa() const { return C.trace() == T(0) && p == T(0) && q == T(0) && r == T(0); }
    friend bool operator==(const MatrixKernelRep& x, const MatrixKernelRep& y) {
        return x.C == y.C && x.p == y.p && x.q == y.q && x.r == y.r;
    }
};

/// Change of unknowns v = M u with M = [[a, b], [c, d]].
template <class T>
struct UnknownChange {
    T a{1}, b{0}, c{0}, d{1};

    T det() const { return a * d - b * c; }
    static UnknownChange identity() { return {T(1), T(0), T(0), T(1)}; }
};

/// Composite of "first M1, then M2", i.e. the matrix M2 * M1.
template <class T>
UnknownChange<T> compose(const UnknownChange<T>& m2, const UnknownChange<T>& m1) {
    return {m2.a * m1.a + m2.b * m1.c, m2.a * m1.b + m2.b * m1.d,
            m2.c * m1.a + m2.d * m1.c, m2.c * m1.b + m2.d * m1.d};
}

template <class T>
UnknownChange<T> inverse(const UnknownChange<T>& m) {
    T det = m.det();
    return {m.d / det, -m.b / det, -m.c / det, m.a / det};
}

inline CubicSystem<double> to_double(const CubicSystem<Rational>& s) {
    CubicSystem<double> out;
    for (int j = 0; j < 12; ++j) out.coeff[j] = to_double(s.coeff[j]);
    return out;
}
inline const CubicSystem<double>& to_double(const CubicSystem<double>& s) { return s; }

template <class T>
MatrixKernelRep<double> to_double(const MatrixKernelRep<T>& rep) {
    return {to_double(rep.C), to_double(rep.p), to_double(rep.q), to_double(rep.r)};
}

template <class T>
UnknownChange<double> to_double(const UnknownChange<T>& m) {
    return {to_double(m.a), to_double(m.b), to_double(m.c), to_double(m.d)};
}

inline void require_finite(const CubicSystem<double>& s) {
    for (double x : s.coeff)
        if (!std::isfinite(x)) throw InvalidInput("non-finite coefficient");
}

template <class T>
MatrixKernelRep<T> to_rep(const CubicSystem<T>& s) {
    auto c = [&](int j) -> const T& { return s.c(j); };
    MatrixKernelRep<T> rep;
    rep.C = Mat3<T>::from_rows({{c(2) - c(3), -c(1) + c(8) - c(9), -c(7)},
                                {c(5), -c(3) + c(11), -c(9)},
                                {c(6), -c(4) + c(5) + c(12), -c(10) + c(11)}});
    rep.p = c(8) - 2 * c(9);
    rep.q = (-c(2) + 2 * c(3) - c(10) + 2 * c(11)) / T(2);
    rep.r = c(4) - 2 * c(5);
    return rep;
}

template <class T>
CubicSystem<T> from_rep(const MatrixKernelRep<T>& rep) {
    const Mat3<T>& A = rep.C;
    auto a = [&](int i, int j) -> const T& { return A(i - 1, j - 1); };
    const T &p = rep.p, &q = rep.q, &r = rep.r;
    CubicSystem<T> s;
    s.c(5) = a(2, 1);
    s.c(6) = a(3, 1);
    s.c(7) = -a(1, 3);
    s.c(9) = -a(2, 3);
    s.c(1) = p - a(1, 2) - a(2, 3);
    s.c(8) = p - 2 * a(2, 3);
    s.c(2) = q + (3 * a(1, 1) - a(2, 2) - a(3, 3)) / T(2);
    s.c(3) = q + (a(1, 1) - a(2, 2) - a(3, 3)) / T(2);
    s.c(10) = q + (a(1, 1) + a(2, 2) - 3 * a(3, 3)) / T(2);
    s.c(11) = q + (a(1, 1) + a(2, 2) - a(3, 3)) / T(2);
    s.c(4) = r + 2 * a(2, 1);
    s.c(12) = r + a(2, 1) + a(3, 2);
    return s;
}

template <class T>
CubicSystem<T> embed_cnsa(const CnsaSystem<T>& sa) {
    auto l = [&](int j) -> const T& { return sa.l(j); };
    CubicSystem<T> s;
    s.c(1) = 3 * l(1);
    s.c(2) = 2 * l(2);
    s.c(3) = l(2);
    s.c(4) = 2 * l(3);
    s.c(5) = l(3);
    s.c(6) = 3 * l(4);
    s.c(7) = 3 * l(5);
    s.c(8) = 2 * l(6);
    s.c(9) = l(6);
    s.c(10) = 2 * l(7);
    s.c(11) = l(7);
    s.c(12) = 3 * l(8);
    return s;
}

template <class T>
Mat3<T> cnsa_matrix(const CnsaSystem<T>& sa) {
    auto l = [&](int j) -> const T& { return sa.l(j); };
    return Mat3<T>::from_rows({{l(2), -3 * l(1) + l(6), -3 * l(5)},
                               {l(3), -l(2) + l(7), -l(6)},
                               {3 * l(4), 3 * l(8) - l(3), -l(7)}});
}

/// Singularity guard for det M, relative to the entry scale in float mode.
template <class T>
void require_invertible(const UnknownChange<T>& m) {
    if constexpr (is_exact_v<T>) {
        if (m.det() == 0) throw SingularTransform("det M = 0");
    } else {
        double scale = std::max({std::abs(m.a), std::abs(m.b), std::abs(m.c), std::abs(m.d)});
        if (!(std::abs(m.det()) > 1e-14 * scale * scale)) throw SingularTransform("det M is numerically zero");
    }
}

/// D(M) and D(M)^{-1}.
template <class T>
std::pair<Mat3<T>, Mat3<T>> induced_matrix(const UnknownChange<T>& m) {
    require_invertible(m);
    const T &a = m.a, &b = m.b, &c = m.c, &d = m.d;
    T inv_det = T(1) / m.det();
    Mat3<T> D = Mat3<T>::from_rows({{d * d, -2 * d * c, c * c},
                                    {-b * d, a * d + b * c, -a * c},
                                    {b * b, -2 * a * b, a * a}});
    Mat3<T> Dinv = Mat3<T>::from_rows({{a * a, 2 * a * c, c * c},
                                       {a * b, a * d + b * c, c * d},
                                       {b * b, 2 * b * d, d * d}});
    return {inv_det * D, inv_det * Dinv};
}

template <class T>
MatrixKernelRep<T> transform(const MatrixKernelRep<T>& rep, const UnknownChange<T>& m) {
    auto [D, Dinv] = induced_matrix(m);
    T inv_det = T(1) / m.det();
    MatrixKernelRep<T> out;
    out.C = inv_det * (D * rep.C * Dinv);
    Vec3<T> v = D * rep.pqr();
    out.p = inv_det * v[0];
    out.q = inv_det * v[1];
    out.r = inv_det * v[2];
    return out;
}

template <class T>
CubicSystem<T> transform_system(const CubicSystem<T>& s, const UnknownChange<T>& m) {
    return from_rep(transform(to_rep(s), m));
}

template <class T>
Mat3<T> b_matrix(const CubicSystem<T>& s) {
    auto c = [&](int j) -> const T& { return s.c(j); };
    T b12 = c(1) - c(8) - c(9);
    T b13 = 2 * (c(2) - c(3) - c(10) + c(11));
    T b23 = c(4) + c(5) - c(12);
    return Mat3<T>::from_rows({{-4 * c(7), b12, b13},
                               {b12, 2 * (c(3) - c(11)), b23},
                               {b13, b23, 4 * c(6)}});
}

inline constexpr double kDefaultRankTol = 1e-9;

inline Eigen::Matrix3d to_eigen(const Mat3<double>& m) {
    Eigen::Matrix3d e;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) e(i, j) = m(i, j);
    return e;
}

inline Eigen::Vector3d singular_values(const Mat3<double>& m) {
    return Eigen::JacobiSVD<Eigen::Matrix3d>(to_eigen(m)).singularValues();
}

/// Rank via singular values relative to sigma_max (float) or exact elimination (rational).
template <class T>
int rank_c(const Mat3<T>& C, double tol = kDefaultRankTol) {
    if constexpr (is_exact_v<T>) {
        Mat3<T> work = C;
        int rank = 0;
        rref(work, rank, 0.0);
        return rank;
    } else {
        Eigen::Vector3d sv = singular_values(C);
        if (sv(0) == 0.0) return 0;
        int rank = 0;
        for (int i = 0; i < 3; ++i)
            if (sv(i) > tol * sv(0)) ++rank;
        return rank;
    }
}

template <class T>
int rank_c(const MatrixKernelRep<T>& rep, double tol = kDefaultRankTol) {
    return rank_c(rep.C, tol);
}

/// Flip sign so that the first nonzero component is positive.
inline Vec3<double> canonical_sign(Vec3<double> v, double tol = 0.0) {
    for (double x : v) {
        if (std::abs(x) > tol) {
            if (x < 0)
                for (double& y : v) y = -y;
            break;
        }
    }
    return v;
}

/**
 * @brief Factor a rank-one C as d nu^T with |nu| = 1 and canonical sign on nu.
 */
inline std::pair<Vec3<double>, Vec3<double>> rank_one_factor(const Mat3<double>& C, double tol = kDefaultRankTol) {
    if (rank_c(C, tol) != 1) throw RankMismatch("rank C != 1");
    // every row of C is a multiple of nu^T; take the largest one for conditioning
    int best = 0;
    double best_norm = -1;
    for (int i = 0; i < 3; ++i) {
        double n = norm2(C.row(i));
        if (n > best_norm) {
            best_norm = n;
            best = i;
        }
    }
    Vec3<double> nu = C.row(best);
    for (double& x : nu) x /= best_norm;
    nu = canonical_sign(nu, 1e-14);
    Vec3<double> d = C * nu;
    return {nu, d};
}

template <class T>
Vec3<double> nu_vector(const Mat3<T>& C, double tol = kDefaultRankTol) {
    return rank_one_factor(to_double(C), tol).first;
}

template <class T>
Vec3<double> d_vector(const Mat3<T>& C, double tol = kDefaultRankTol) {
    return rank_one_factor(to_double(C), tol).second;
}

} // namespace cnslab
