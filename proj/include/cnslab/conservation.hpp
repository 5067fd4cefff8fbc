#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "system_algebra.hpp"

namespace cnslab {

/// Coefficients (a,b,c) of a|u1|^2 + 2b Re(conj(u1) u2) + c|u2|^2.
template <class T>
struct ConservedQuadratic {
    Vec3<T> abc{};
};

inline double quadratic_value(const Vec3<double>& abc, std::complex<double> u1, std::complex<double> u2) {
    return abc[0] * std::norm(u1) + 2 * abc[1] * std::real(std::conj(u1) * u2) + abc[2] * std::norm(u2);
}

namespace detail {

inline Vec3<Rational> integer_like(Vec3<Rational> v) {
    using boost::multiprecision::cpp_int;
    using boost::multiprecision::denominator;
    using boost::multiprecision::gcd;
    using boost::multiprecision::lcm;
    using boost::multiprecision::numerator;
    cpp_int l = 1;
    for (auto& x : v)
        if (x != 0) l = lcm(l, cpp_int(denominator(x)));
    for (auto& x : v) x *= l;
    cpp_int g = 0;
    for (auto& x : v)
        if (x != 0) g = gcd(g, cpp_int(numerator(x)));
    if (g > 1)
        for (auto& x : v) x /= Rational(g);
    for (auto& x : v) {
        if (x != 0) {
            if (x < 0)
                for (auto& y : v) y = -y;
            break;
        }
    }
    return v;
}

inline Vec3<double> max_normalised(Vec3<double> v) {
    double m = std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
    if (m == 0) return v;
    for (double& x : v) x /= m;
    for (double& x : v)
        if (std::abs(x) < 1e-15) x = 0;
    return canonical_sign(v);
}

} // namespace detail

/**
 * @brief Basis of ker C. Exact (integer-normalised) for rationals, SVD with tol*sigma_max for doubles.
 */
template <class T>
std::vector<Vec3<T>> null_space(const Mat3<T>& C, double tol = kDefaultRankTol) {
    std::vector<Vec3<T>> out;
    if constexpr (is_exact_v<T>) {
        Mat3<T> R = C;
        int rank = 0;
        auto piv = rref(R, rank, 0.0);
        bool is_pivot[3] = {false, false, false};
        for (int i = 0; i < rank; ++i) is_pivot[piv[i]] = true;
        for (int f = 0; f < 3; ++f) {
            if (is_pivot[f]) continue;
            Vec3<T> v{T(0), T(0), T(0)};
            v[f] = 1;
            for (int i = 0; i < rank; ++i) v[piv[i]] = -R(i, f);
            out.push_back(detail::integer_like(v));
        }
    } else {
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(to_eigen(C), Eigen::ComputeFullV);
        auto sv = svd.singularValues();
        double cut = tol * sv(0);
        for (int i = 0; i < 3; ++i) {
            if (sv(0) == 0 || sv(i) <= cut) {
                Eigen::Vector3d v = svd.matrixV().col(i);
                out.push_back({v(0), v(1), v(2)});
            }
        }
        if (out.size() == 1) out[0] = detail::max_normalised(out[0]);
    }
    return out;
}

template <class T>
std::vector<ConservedQuadratic<T>> mass_like_kernel(const MatrixKernelRep<T>& rep, double tol = kDefaultRankTol) {
    std::vector<ConservedQuadratic<T>> out;
    for (auto& v : null_space(rep.C, tol)) out.push_back({v});
    return out;
}

/// 2 Im(conj(u1) u2) is conserved exactly when B = O.
template <class T>
bool imaginary_invariant(const CubicSystem<T>& sys, double tol = 0.0) {
    auto B = b_matrix(sys);
    for (auto& x : B.a)
        if (!is_zero(x, tol)) return false;
    return true;
}

struct GlobalExistence {
    enum class Verdict { Global, NotGuaranteed, Indeterminate };
    Verdict verdict = Verdict::NotGuaranteed;
    Vec3<double> witness{0, 0, 0};
    double margin = 0;  // max of a c - b^2 over the unit sphere of ker C

    bool holds() const { return verdict == Verdict::Global; }
    const char* name() const {
        switch (verdict) {
        case Verdict::Global: return "global";
        case Verdict::NotGuaranteed: return "not-guaranteed";
        case Verdict::Indeterminate: return "indeterminate";
        }
        return "?";
    }
};

/**
 * @brief Search ker C for (a,b,c) with b^2 < a c, i.e. a positive definite conserved mass.
 */
template <class T>
GlobalExistence global_existence_criterion(const MatrixKernelRep<T>& rep, double tol = kDefaultRankTol,
                                           double margin_tol = 1e-12) {
    GlobalExistence out;
    auto basis = null_space(to_double(rep.C), tol);
    if (basis.empty()) return out;
    const int m = static_cast<int>(basis.size());
    Eigen::MatrixXd K(3, m);
    for (int j = 0; j < m; ++j) {
        Eigen::Vector3d v(basis[j][0], basis[j][1], basis[j][2]);
        K.col(j) = v;
    }
    K = Eigen::HouseholderQR<Eigen::MatrixXd>(K).householderQ() * Eigen::MatrixXd::Identity(3, m);
    Eigen::Matrix3d H;
    H << 0, 0, 0.5, 0, -1, 0, 0.5, 0, 0;
    Eigen::MatrixXd S = K.transpose() * H * K;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    out.margin = es.eigenvalues()(m - 1);
    Eigen::Vector3d w = K * es.eigenvectors().col(m - 1);
    if (w(0) + w(2) < 0) w = -w;
    out.witness = detail::max_normalised({w(0), w(1), w(2)});
    if (out.witness[0] < 0) out.witness = {-out.witness[0], -out.witness[1], -out.witness[2]};
    if (out.margin > margin_tol) out.verdict = GlobalExistence::Verdict::Global;
    else if (out.margin >= -margin_tol) out.verdict = GlobalExistence::Verdict::Indeterminate;
    return out;
}

template <class T>
Mat3<T> energy_matrix(const MatrixKernelRep<T>& rep) {
    T tr = rep.C.trace();
    const T &p = rep.p, &q = rep.q, &r = rep.r;
    return Mat3<T>::from_rows({{tr - 2 * q, 2 * p, T(0)}, {-r, tr, p}, {T(0), -2 * r, tr + 2 * q}});
}

/// Coefficients of |u1|^4, |u1|^2 Re(u1* u2), |u1|^2|u2|^2, Re(u1*^2 u2^2), |u2|^2 Re(u1* u2), |u2|^4.
template <class T>
std::array<T, 6> energy_quartic(const CubicSystem<T>& s, const Vec3<T>& abc) {
    const T &a = abc[0], &b = abc[1], &c = abc[2];
    auto k = [&](int j) -> const T& { return s.c(j); };
    return {a * k(1) + b * k(7),      4 * (a * k(3) + b * k(9)),  2 * (a * k(4) + b * k(10)),
            2 * (a * k(5) + b * k(11)), 4 * (b * k(5) + c * k(11)), b * k(6) + c * k(12)};
}

struct EnergyCertificate {
    Vec3<double> abc{};
    Mat3<double> second_condition_matrix;
    std::array<double, 6> quartic_coeffs{};
    double kernel_residual = 0;
    double second_residual = 0;
    bool valid = false;
};

template <class T>
EnergyCertificate energy_certificate(const MatrixKernelRep<T>& rep, const Vec3<T>& abc, double tol = 1e-10) {
    EnergyCertificate out;
    out.abc = to_double(abc);
    Mat3<T> E = energy_matrix(rep);
    out.second_condition_matrix = to_double(E);
    Vec3<T> k1 = rep.C * abc, k2 = E * abc;
    auto resid = [](const Vec3<T>& v) {
        return std::max({std::abs(to_double(v[0])), std::abs(to_double(v[1])), std::abs(to_double(v[2]))});
    };
    out.kernel_residual = resid(k1);
    out.second_residual = resid(k2);
    if constexpr (is_exact_v<T>) {
        out.valid = k1 == Vec3<T>{0, 0, 0} && k2 == Vec3<T>{0, 0, 0};
    } else {
        double scale = std::max(1.0, norm2(out.abc)) * std::max({1.0, max_abs(rep.C), max_abs(E)});
        out.valid = out.kernel_residual <= tol * scale && out.second_residual <= tol * scale;
    }
    auto qc = energy_quartic(from_rep(rep), abc);
    for (int i = 0; i < 6; ++i) out.quartic_coeffs[i] = to_double(qc[i]);
    return out;
}

} // namespace cnslab
