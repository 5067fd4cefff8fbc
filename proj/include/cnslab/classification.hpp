#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "system_algebra.hpp"

namespace cnslab {

using Change = UnknownChange<double>;
using Rep = MatrixKernelRep<double>;

enum class Region { S1, Gamma2Pos, Gamma2Neg, S2Pos, S2Neg };
enum class Rank1Case { Plus, Zero, Minus };

inline const char* region_name(Region r) {
    switch (r) {
    case Region::S1: return "S1";
    case Region::Gamma2Pos: return "Gamma2_pos";
    case Region::Gamma2Neg: return "Gamma2_neg";
    case Region::S2Pos: return "S2_pos";
    case Region::S2Neg: return "S2_neg";
    }
    return "?";
}

inline const char* case_name(Rank1Case c) {
    switch (c) {
    case Rank1Case::Plus: return "plus";
    case Rank1Case::Zero: return "zero";
    case Rank1Case::Minus: return "minus";
    }
    return "?";
}

struct Stratum {
    enum Tag { Rank0, Rank1, Rank2, Rank3 } tag = Rank0;
    Rank1Case rank1_case = Rank1Case::Plus;

    std::string name() const {
        switch (tag) {
        case Rank0: return "rank0";
        case Rank1: return std::string("rank1/") + case_name(rank1_case);
        case Rank2: return "rank2";
        case Rank3: return "rank3";
        }
        return "?";
    }
};

inline constexpr double kEpsCurve = 1e-9;

/// Region of the unit sphere containing nu, by the sign of b^2 - 4ac.
inline Region locate_nu(const Vec3<double>& nu, double eps_curve = kEpsCurve) {
    double scale = norm2(nu);
    double disc = nu[1] * nu[1] - 4 * nu[0] * nu[2];
    if (std::abs(disc) <= eps_curve * scale * scale)
        return nu[0] + nu[2] >= 0 ? Region::Gamma2Pos : Region::Gamma2Neg;
    if (disc > 0) return Region::S1;
    return nu[0] > 0 ? Region::S2Pos : Region::S2Neg;
}

inline Rank1Case case_of(Region r) {
    switch (r) {
    case Region::S1: return Rank1Case::Plus;
    case Region::Gamma2Pos:
    case Region::Gamma2Neg: return Rank1Case::Zero;
    default: return Rank1Case::Minus;
    }
}

/// Anchor row vector a with C = k a^T in the reduced strata Y+, Y0, Y-.
inline Vec3<double> anchor_of(Rank1Case c) {
    switch (c) {
    case Rank1Case::Plus: return {0, 1, 0};
    case Rank1Case::Zero: return {0, 0, 1};
    case Rank1Case::Minus: return {1, 0, 1};
    }
    return {};
}

namespace detail {

inline Change diag(double p, double s) { return {p, 0, 0, s}; }
inline Change swap_change() { return {0, 1, 1, 0}; }

/// Accumulates elementary changes; composite() is the product last * ... * first.
struct ChangeChain {
    std::vector<Change> steps;
    void push(const Change& m) { steps.push_back(m); }
    Change composite() const {
        Change out = Change::identity();
        for (auto& m : steps) out = compose(m, out);
        return out;
    }
};

inline Mat3<double> apply_matrix_part(const Mat3<double>& C, const Change& m) {
    return transform(Rep{C, 0, 0, 0}, m).C;
}

inline Vec3<double> apply_kernel_part(const Vec3<double>& pqr, const Change& m) {
    return transform(Rep{Mat3<double>::zero(), pqr[0], pqr[1], pqr[2]}, m).pqr();
}

inline double wrap_2pi(double x) {
    constexpr double two_pi = 2 * std::numbers::pi;
    x = std::fmod(x, two_pi);
    return x < 0 ? x + two_pi : x;
}

inline int sgn(double x, double tol) {
    if (std::abs(x) <= tol) return 0;
    return x > 0 ? 1 : -1;
}

} // namespace detail

struct FirstReduction {
    Change M;
    Mat3<double> C_tilde;
    Rank1Case kase;
    Region region;
};

/**
 * @brief Move nu(C) onto (0,1,0), (0,0,1) or (1,0,1)/sqrt2 according to the stratum.
 */
inline FirstReduction first_reduction(const Mat3<double>& C, double tol = kDefaultRankTol,
                                      double eps_curve = kEpsCurve) {
    auto [nu, d] = rank_one_factor(C, tol);
    (void)d;
    Region region = locate_nu(nu, eps_curve);
    Rank1Case kase = case_of(region);
    const double n1 = nu[0], n2 = nu[1], n3 = nu[2];
    Vec3<double> anchor = anchor_of(kase);
    double an = norm2(anchor);
    for (double& x : anchor) x /= an;

    Change M = Change::identity();
    if (max_abs_diff(nu, anchor) > 1e-15) {
        switch (kase) {
        case Rank1Case::Plus: {
            // roots theta of (n1+n3) + (n1-n3) sin(theta) + n2 cos(theta) = 0
            double R = std::hypot(n2, n1 - n3);
            double phi = std::atan2(n1 - n3, n2);
            double c = -(n1 + n3) / R;
            if (!(R > 0) || std::abs(c) >= 1) throw NoIntersection("no two roots on Gamma1 for nu");
            double alpha = std::acos(c);
            double th1 = detail::wrap_2pi(phi - alpha), th2 = detail::wrap_2pi(phi + alpha);
            if (th2 < th1) std::swap(th1, th2);
            double e1 = -th1 / 2 + std::numbers::pi / 4, e2 = -th2 / 2 + std::numbers::pi / 4;
            M = {std::cos(e1), std::sin(e1), std::cos(e2), std::sin(e2)};
            break;
        }
        case Rank1Case::Zero: {
            // nu proportional to (1 - sin th, -2 cos th, 1 + sin th)
            double s = 2.0 / (n1 + n3);
            double sin_t = (s * n3 - s * n1) / 2, cos_t = -s * n2 / 2;
            double th = std::atan2(sin_t, cos_t);
            double eta = -th / 2 + std::numbers::pi / 4;
            M = {std::cos(eta), std::sin(eta), -std::sin(eta), std::cos(eta)};
            break;
        }
        case Rank1Case::Minus: {
            double u = n1, v = n2, w = n3;
            double disc = 4 * u * w - v * v;
            if (!(disc > 0)) throw NoIntersection("nu not in S2");
            M = {2 * w, -v, 0, std::sqrt(disc)};
            break;
        }
        }
    }
    return {M, detail::apply_matrix_part(C, M), kase, region};
}

/// Class label within the rank-one SR: Z_j plus its discrete or continuous parameter.
struct ZClass {
    int j = 0;
    std::string variant;  // "k", "110", "011", "101", "-101", "theta", "a", "b" or ""
    double k = 0;
    int sigma = 0;
    double theta = 0;

    std::string label() const {
        std::string out = "Z" + std::to_string(j);
        char buf[64];
        if (j == 1 && variant == "k") {
            std::snprintf(buf, sizeof buf, "(k=%.12g)", k);
            out += buf;
        } else if (j == 1 && variant == "theta") {
            std::snprintf(buf, sizeof buf, "(theta=%.12g)", theta);
            out += buf;
        } else if (j == 1) {
            out += "[" + variant + "]";
        } else if (j == 2) {
            std::snprintf(buf, sizeof buf, "(sigma=%d,k=%.12g)", sigma, k);
            out += buf;
        } else if (j == 3) {
            out += "(sigma=" + std::to_string(sigma) + ")";
        } else if (j == 4) {
            out += "[" + variant + "](sigma=" + std::to_string(sigma) + ")";
        }
        return out;
    }
};

inline Mat3<double> template_matrix(const ZClass& z) {
    using V = Vec3<double>;
    auto col2 = [](V k) { return Mat3<double>::outer(k, V{0, 1, 0}); };
    auto col3 = [](V k) { return Mat3<double>::outer(k, V{0, 0, 1}); };
    auto minus = [](double th) {
        return Mat3<double>::outer(V{std::sin(th), std::cos(th), std::sin(th)}, V{1, 0, 1});
    };
    double s = z.sigma;
    switch (z.j) {
    case 1:
        if (z.variant == "k") return col2({1, z.k, 1});
        if (z.variant == "110") return col2({1, 1, 0});
        if (z.variant == "011") return col2({0, 1, 1});
        if (z.variant == "101") return col3({1, 0, 1});
        if (z.variant == "-101") return col3({-1, 0, 1});
        return minus(z.theta);
    case 2: return col2({s, z.k, -s});
    case 3: return col2({s, 0, -s});
    case 4: return z.variant == "a" ? col3({0, s, 0}) : col2({0, 0, s});
    case 5: return col2({1, 0, 1});
    case 6: return col2({0, 1, 0});
    case 7: return col3({1, 0, 0});
    case 8: return col3({0, 0, 1});
    case 9: return Mat3<double>::outer(V{1, 0, 1}, V{1, 0, 1});
    }
    throw NotRepresentative("unknown class index");
}

struct SecondReduction {
    Change M;
    Mat3<double> C_rep;
    ZClass cls;
    std::vector<Change> steps;
};

/// Read k from C = k a^T, failing if C is not of that shape.
inline Vec3<double> read_k(const Mat3<double>& C, Rank1Case kase) {
    Vec3<double> k;
    if (kase == Rank1Case::Plus) k = C.col(1);
    else if (kase == Rank1Case::Zero) k = C.col(2);
    else k = {(C(0, 0) + C(0, 2)) / 2, (C(1, 0) + C(1, 2)) / 2, (C(2, 0) + C(2, 2)) / 2};
    Mat3<double> rebuilt = Mat3<double>::outer(k, anchor_of(kase));
    if (max_abs_diff(rebuilt, C) > 1e-8 * std::max(1.0, max_abs(C)))
        throw NotInY(std::string("matrix is not of the reduced form for case ") + case_name(kase));
    return k;
}

inline SecondReduction second_reduction(const Mat3<double>& C_tilde, Rank1Case kase) {
    using detail::diag;
    using detail::sgn;
    Vec3<double> k = read_k(C_tilde, kase);
    double kmax = std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
    if (kmax == 0) throw RankMismatch("zero matrix in second reduction");
    const double tz = 1e-9 * kmax;
    double k1 = k[0], k2 = k[1], k3 = k[2];
    int s1 = sgn(k1, tz), s2 = sgn(k2, tz), s3 = sgn(k3, tz);
    detail::ChangeChain chain;
    ZClass z;

    if (kase == Rank1Case::Plus) {
        auto do_swap = [&] {
            chain.push(detail::swap_change());
            double n1 = -k3, n2 = -k2, n3 = -k1;
            k1 = n1, k2 = n2, k3 = n3;
            std::swap(s1, s3);
            s1 = -s1, s2 = -s2, s3 = -s3;
        };
        if (s1 != 0 && s3 != 0) {
            if (s1 < 0 && s3 < 0) do_swap();
            double p = std::sqrt(std::abs(k1));
            double s = std::sqrt(std::abs(k3)) * (k2 < 0 ? -1.0 : 1.0);
            chain.push(diag(p, s));
            double kval = s2 == 0 ? 0.0 : std::abs(k2) / std::sqrt(std::abs(k1 * k3));
            if (s1 > 0 && s3 > 0) {
                if (kval > 0) z = {1, "k", kval, 0, 0};
                else z = {5, "", 0, 0, 0};
            } else {
                if (kval > 0) z = {2, "", kval, s1, 0};
                else z = {3, "", 0, s1, 0};
            }
        } else if (s1 != 0) {
            if (s1 > 0) {
                if (s2 != 0) {
                    double p = std::sqrt(k1);
                    chain.push(diag(p, k2 / p));
                    z = {1, "110", 0, 0, 0};
                } else {
                    do_swap();  // now (0, 0, -k1_old)
                    chain.push(diag(1.0, std::sqrt(std::abs(k3))));
                    z = {4, "b", 0, -1, 0};
                }
            } else {
                do_swap();  // now (0, -k2_old, -k1_old) with positive last entry
                double s = std::sqrt(k3);
                if (s2 != 0) {
                    chain.push(diag(k2 / s, s));
                    z = {1, "011", 0, 0, 0};
                } else {
                    chain.push(diag(1.0, s));
                    z = {4, "b", 0, 1, 0};
                }
            }
        } else if (s3 != 0) {
            double s = std::sqrt(std::abs(k3));
            if (s3 > 0) {
                if (s2 != 0) {
                    chain.push(diag(k2 / s, s));
                    z = {1, "011", 0, 0, 0};
                } else {
                    chain.push(diag(1.0, s));
                    z = {4, "b", 0, 1, 0};
                }
            } else {
                if (s2 != 0) {
                    do_swap();  // (-k3_old, -k2_old, 0) with positive first entry
                    double p = std::sqrt(k1);
                    chain.push(diag(p, k2 / p));
                    z = {1, "110", 0, 0, 0};
                } else {
                    chain.push(diag(1.0, s));
                    z = {4, "b", 0, -1, 0};
                }
            }
        } else {
            chain.push(diag(1.0, k2));
            z = {6, "", 0, 0, 0};
        }
    } else if (kase == Rank1Case::Zero) {
        if (s3 != 0) {
            double g = k1 * k3 - k2 * k2;
            int sigma = sgn(g, 1e-9 * kmax * kmax);
            double p = sigma != 0 ? std::pow(std::abs(g), 0.25) : 1.0;
            double s = k3 / p;
            double r = s * k2 / k3;
            chain.push({p, 0, r, s});
            if (sigma > 0) z = {1, "101", 0, 0, 0};
            else if (sigma < 0) z = {1, "-101", 0, 0, 0};
            else z = {8, "", 0, 0, 0};
        } else if (s2 != 0) {
            double r = k1 / (2 * k2);
            chain.push({std::sqrt(std::abs(k2)), 0, r, 1.0});
            z = {4, "a", 0, s2, 0};
        } else {
            chain.push(diag(1.0, 1.0 / k1));
            z = {7, "", 0, 0, 0};
        }
    } else {
        if (k1 + k3 < -tz) {
            chain.push(diag(1.0, -1.0));
            k1 = -k1, k3 = -k3;
        }
        double X = k1 - k3, Y = 2 * k2;
        double rho = std::hypot(X, Y);
        if (rho > tz) {
            double eta = std::atan2(-X, Y) / 2;
            chain.push({std::cos(eta), std::sin(eta), -std::sin(eta), std::cos(eta)});
        } else {
            rho = 0;
        }
        double m = (k1 + k3) / 2;
        if (m <= tz) m = 0;
        double half = rho / 2;
        double R0 = std::sqrt(std::hypot(m, half));
        if (std::abs(R0 - 1.0) > 0) chain.push(diag(R0, R0));
        double theta = std::atan2(m, half);
        if (rho == 0) z = {9, "", 0, 0, 0};
        else z = {1, "theta", 0, 0, m == 0 ? 0.0 : theta};
    }

    SecondReduction out;
    out.steps = chain.steps;
    out.M = chain.composite();
    out.cls = z;
    out.C_rep = template_matrix(z);
    return out;
}

/// Recognise an exact Z_j template (within tol); empty if C is not one.
inline std::optional<ZClass> identify_template(const Mat3<double>& C, double tol = 1e-10) {
    if (rank_c(C) != 1) return std::nullopt;
    for (Rank1Case kase : {Rank1Case::Plus, Rank1Case::Zero, Rank1Case::Minus}) {
        Vec3<double> k;
        try {
            k = read_k(C, kase);
        } catch (const NotInY&) {
            continue;
        }
        if (max_abs_diff(Mat3<double>::outer(k, anchor_of(kase)), C) > tol) continue;
        auto near = [&](double x, double y) { return std::abs(x - y) <= tol; };
        auto is = [&](double a, double b, double c) { return near(k[0], a) && near(k[1], b) && near(k[2], c); };
        std::optional<ZClass> z;
        if (kase == Rank1Case::Plus) {
            if (near(k[0], 1) && near(k[2], 1)) {
                z = k[1] > tol ? ZClass{1, "k", k[1], 0, 0} : (near(k[1], 0) ? ZClass{5, "", 0, 0, 0} : ZClass{});
            } else if (near(std::abs(k[0]), 1) && near(k[2], -k[0])) {
                int s = k[0] > 0 ? 1 : -1;
                z = k[1] > tol ? ZClass{2, "", k[1], s, 0} : (near(k[1], 0) ? ZClass{3, "", 0, s, 0} : ZClass{});
            } else if (is(1, 1, 0)) z = ZClass{1, "110", 0, 0, 0};
            else if (is(0, 1, 1)) z = ZClass{1, "011", 0, 0, 0};
            else if (is(0, 0, 1)) z = ZClass{4, "b", 0, 1, 0};
            else if (is(0, 0, -1)) z = ZClass{4, "b", 0, -1, 0};
            else if (is(0, 1, 0)) z = ZClass{6, "", 0, 0, 0};
        } else if (kase == Rank1Case::Zero) {
            if (is(1, 0, 1)) z = ZClass{1, "101", 0, 0, 0};
            else if (is(-1, 0, 1)) z = ZClass{1, "-101", 0, 0, 0};
            else if (is(0, 0, 1)) z = ZClass{8, "", 0, 0, 0};
            else if (is(0, 1, 0)) z = ZClass{4, "a", 0, 1, 0};
            else if (is(0, -1, 0)) z = ZClass{4, "a", 0, -1, 0};
            else if (is(1, 0, 0)) z = ZClass{7, "", 0, 0, 0};
        } else {
            if (near(k[0], k[2]) && k[0] >= -tol && k[1] >= -tol && near(k[0] * k[0] + k[1] * k[1], 1)) {
                double th = std::atan2(std::max(k[0], 0.0), std::max(k[1], 0.0));
                z = near(k[1], 0) ? ZClass{9, "", 0, 0, 0} : ZClass{1, "theta", 0, 0, th};
            }
        }
        if (z && z->j != 0) return z;
    }
    return std::nullopt;
}

/// Literal membership in the listed kernel sets K_j.
inline bool in_listed_k(int j, const Vec3<double>& v, double tol = 1e-9) {
    double p = v[0], q = v[1], r = v[2];
    double t = tol * std::max({1.0, std::abs(p), std::abs(q), std::abs(r)});
    auto eq = [&](double x, double y) { return std::abs(x - y) <= t; };
    auto ge = [&](double x, double y) { return x >= y - t; };
    auto gt = [&](double x, double y) { return x > y + t; };
    auto is = [&](double a, double b, double c) { return eq(p, a) && eq(q, b) && eq(r, c); };
    switch (j) {
    case 1: return true;
    case 2: return gt(p, r) || (eq(p, r) && ge(q, 0));
    case 3: return ge(p, r) && ge(q, 0);
    case 4: return (eq(r, 1) && ge(q, 0)) || (eq(r, 0) && (eq(q, 0) || eq(q, 1)));
    case 5: return ge(q, 0);
    case 6: return (eq(std::abs(p), std::abs(r)) && ge(q, 0)) || (eq(r, 0) && eq(std::abs(p), 1) && ge(q, 0));
    case 7:
        return (eq(std::abs(p), std::abs(r)) && gt(std::abs(p), 0)) ||
               (eq(r, 0) && eq(std::abs(p), std::abs(q)) && gt(std::abs(p), 0)) ||
               (eq(p, 0) && eq(std::abs(q), std::abs(r)) && gt(std::abs(q), 0)) || is(1, 0, 0) || is(0, 1, 0) ||
               is(0, 0, 1) || is(0, 0, 0);
    case 8:
        return (eq(std::abs(p), std::abs(r)) && ge(q, 0)) || (eq(r, 0) && eq(std::abs(p), 1) && ge(q, 0)) ||
               (eq(p, 0) && eq(std::abs(r), 1) && ge(q, 0));
    case 9: return ge(p, r) && eq(q, 0);
    }
    return false;
}

/// Membership in the corrected kernel SR produced by reduce_kernel for this class.
inline bool in_kernel_sr(const ZClass& z, const Vec3<double>& v, double tol = 1e-9) {
    double p = v[0], q = v[1], r = v[2];
    double t = tol * std::max({1.0, std::abs(p), std::abs(q), std::abs(r)});
    auto zero = [&](double x) { return std::abs(x) <= t; };
    auto eq = [&](double x, double y) { return std::abs(x - y) <= t; };
    auto unit = [&](double x) { return eq(std::abs(x), 1); };
    auto is = [&](double a, double b, double c) { return eq(p, a) && eq(q, b) && eq(r, c); };
    switch (z.j) {
    case 1:
        if (z.variant == "theta" && z.theta == 0) return q >= -t;
        return true;
    case 2: return p > r + t || (eq(p, r) && q >= -t);
    case 3: return p >= r - t && q >= -t;
    case 4:
        if (z.variant == "a") return (unit(r) && q >= -t) || (zero(r) && (zero(q) || eq(q, 1)));
        return eq(q, 1) || (zero(q) && (unit(p) || zero(p)));
    case 5: return q >= -t;
    case 6: {
        if (q < -t) return false;
        if (zero(q)) {
            if (zero(r)) return zero(p) || unit(p);
            return !zero(p) && eq(std::abs(p), std::abs(r)) && p >= r - t;
        }
        if (zero(p) && zero(r)) return true;
        if (zero(p)) return unit(r);
        if (zero(r)) return unit(p);
        return eq(std::abs(p), std::abs(r));
    }
    case 7:
        return (zero(q) && !zero(p) && !zero(r) && eq(std::abs(p), std::abs(r))) || is(0, 0, 1) || is(-1, 1, -1) ||
               is(0, 1, 0) || is(1, -1, 0) || is(1, 0, 0) || is(-1, 0, 0) || is(0, 0, 0);
    case 8: {
        if (zero(p) && zero(r)) return true;
        if (zero(p)) return unit(r);
        if (zero(r)) return unit(p);
        return eq(std::abs(p), std::abs(r));
    }
    case 9: return p >= r - t && zero(q);
    }
    return false;
}

struct KernelReduction {
    Change M;
    Vec3<double> pqr;
    std::vector<Change> steps;
    bool in_listed_k = false;
};

/**
 * @brief Normalise the kernel part with an element of the stabiliser of the template.
 *
 * The stabilisers used here are computed from the template directly; see README for the
 * classes where they are larger than the diagonal groups usually listed.
 */
inline KernelReduction reduce_kernel(const Mat3<double>& repC, const Vec3<double>& pqr_in, double abs_floor = 0.0) {
    auto zc = identify_template(repC);
    if (!zc) throw NotRepresentative("matrix part is not a Z_j template");
    const ZClass z = *zc;
    using detail::diag;
    using detail::sgn;
    double P = pqr_in[0], Q = pqr_in[1], R = pqr_in[2];
    // entries under abs_floor are rounding residue of a zero kernel entry
    for (double* x : {&P, &Q, &R})
        if (std::abs(*x) <= abs_floor) *x = 0;
    const double scale = std::max({std::abs(P), std::abs(Q), std::abs(R)});
    const double tz = std::max(1e-9 * scale, abs_floor);
    detail::ChangeChain chain;
    Vec3<double> out{P, Q, R};

    auto apply = [&](const Change& m) {
        chain.push(m);
        out = detail::apply_kernel_part(out, m);
    };
    const Change flip = diag(1, -1);
    const Change quarter = {0, 1, -1, 0};  // acts as (P,Q,R) -> (R,-Q,P)

    if (scale == 0) {
        // nothing to normalise
    } else if (z.j == 1) {
        if (z.variant == "theta" && z.theta == 0 && out[1] < -tz) apply(flip);
    } else if (z.j == 2) {
        if (out[0] < out[2] - tz || (std::abs(out[0] - out[2]) <= tz && out[1] < -tz)) apply(quarter);
    } else if (z.j == 3) {
        if (out[0] < out[2] - tz) apply(detail::swap_change());
        if (out[1] < -tz) apply(flip);
    } else if (z.j == 4 && z.variant == "a") {
        // stabiliser diag(+-1, s): (P, +-Q/s, R/s^2)
        if (sgn(R, tz) != 0) {
            double s = std::sqrt(std::abs(R)) * (Q < 0 ? -1.0 : 1.0);
            apply(diag(1, s));
        } else if (sgn(Q, tz) != 0) {
            apply(diag(1, Q));
        }
    } else if (z.j == 4) {
        // stabiliser diag(a, +-1): (P/a^2, +-Q/a, R)
        if (sgn(Q, tz) != 0) apply(diag(Q, 1));
        else if (sgn(P, tz) != 0) apply(diag(std::sqrt(std::abs(P)), 1));
    } else if (z.j == 5) {
        if (Q < -tz) apply(flip);
    } else if (z.j == 6) {
        // diag(a, 1/a): (P/a^2, Q, R a^2); diag(a,-1/a) swap: (R/a^2, -Q, P a^2)
        const Change turn = {0, 1, -1, 0};
        if (out[1] < -tz) apply(turn);
        double p = out[0], r = out[2];
        int sp = sgn(p, tz), sr = sgn(r, tz), sq = sgn(out[1], tz);
        if (sp != 0 && sr != 0) {
            double a2 = std::sqrt(std::abs(p / r));
            apply(diag(std::sqrt(a2), 1 / std::sqrt(a2)));
            if (sq == 0 && out[0] < out[2] - tz) apply(turn);
        } else if (sp != 0) {
            double a = std::sqrt(std::abs(p));
            apply(diag(a, 1 / a));
        } else if (sr != 0) {
            if (sq == 0) {
                apply(turn);
                double a = std::sqrt(std::abs(out[0]));
                apply(diag(a, 1 / a));
            } else {
                double a = 1 / std::sqrt(std::abs(r));
                apply(diag(a, 1 / a));
            }
        }
    } else if (z.j == 7) {
        // stabiliser [[p,0],[r,p^3]]: shear (P-2rQ+r^2R, Q-rR, R), diag(p,p^3): (P/p^2, Q/p^4, R/p^6)
        auto shear = [](double r) { return Change{1, 0, r, 1}; };
        auto dil = [](double p) { return Change{p, 0, 0, p * p * p}; };
        if (sgn(R, tz) != 0) {
            apply(shear(Q / R));
            double x0 = P - Q * Q / R;
            if (sgn(x0, tz) != 0) {
                apply(dil(std::pow(std::abs(R) / std::abs(x0), 0.25)));
            } else {
                apply(dil(std::pow(std::abs(R), 1.0 / 6.0)));
                if (R < 0) apply(shear(1));
            }
        } else if (sgn(Q, tz) != 0) {
            apply(shear(P / (2 * Q)));
            apply(dil(std::pow(std::abs(Q), 0.25)));
            if (Q < 0) apply(shear(0.5));
        } else if (sgn(P, tz) != 0) {
            apply(dil(std::sqrt(std::abs(P))));
        }
    } else if (z.j == 8) {
        // stabiliser diag(p, 1/p): (P/p^2, Q, R p^2)
        int sp = sgn(P, tz), sr = sgn(R, tz);
        if (sp != 0 && sr != 0) {
            double p2 = std::sqrt(std::abs(P / R));
            apply(diag(std::sqrt(p2), 1 / std::sqrt(p2)));
        } else if (sp != 0) {
            double p = std::sqrt(std::abs(P));
            apply(diag(p, 1 / p));
        } else if (sr != 0) {
            double p = 1 / std::sqrt(std::abs(R));
            apply(diag(p, 1 / p));
        }
    } else if (z.j == 9) {
        Eigen::Matrix2d S;
        S << P, Q, Q, R;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
        // descending eigenvalues, rotation with det +1
        Eigen::Matrix2d V;
        V.col(0) = es.eigenvectors().col(1);
        V.col(1) = es.eigenvectors().col(0);
        if (V.determinant() < 0) V.col(1) = -V.col(1);
        apply({V(0, 0), V(1, 0), V(0, 1), V(1, 1)});
    }

    // snap to the exact canonical values
    const double snap = 1e-9 * std::max(1.0, scale);
    for (double& x : out) {
        if (std::abs(x) <= snap) x = 0;
        else if (std::abs(std::abs(x) - 1) <= snap) x = x > 0 ? 1 : -1;
    }
    if (z.j == 9) out[1] = 0;
    KernelReduction kr;
    kr.steps = chain.steps;
    kr.M = chain.composite();
    kr.pqr = out;
    kr.in_listed_k = in_listed_k(z.j, out);
    return kr;
}

struct Rank0Result {
    int index = 8;  // 1..8 in the order of the representative list
    Vec3<double> pqr{0, 0, 0};
    Change M = Change::identity();
};

inline const std::array<Vec3<double>, 8>& rank0_representatives() {
    static const std::array<Vec3<double>, 8> reps{{{1, 0, 1},
                                                   {-1, 0, -1},
                                                   {1, 0, -1},
                                                   {1, 0, 0},
                                                   {-1, 0, 0},
                                                   {0, 0, 1},
                                                   {0, 0, -1},
                                                   {0, 0, 0}}};
    return reps;
}

/**
 * @brief Inertia of [[p,q],[q,r]] mapped to the rank-zero representative list.
 *
 * Exact for rational input. Semidefinite forms of rank one always land on (1,0,0) or
 * (-1,0,0); (0,0,1) and (0,0,-1) lie in the same classes (swap of unknowns).
 */
template <class T>
Rank0Result canonicalize_rank0(const Vec3<T>& pqr, double tol = 1e-12) {
    const T &p = pqr[0], &q = pqr[1], &r = pqr[2];
    double scale = std::max({std::abs(to_double(p)), std::abs(to_double(q)), std::abs(to_double(r))});
    double tz = is_exact_v<T> ? 0.0 : tol * scale;
    T det = p * r - q * q;
    int sdet = sign_of(det, tol * scale * scale);
    Rank0Result res;
    if (is_zero(p, tz) && is_zero(q, tz) && is_zero(r, tz)) res.index = 8;
    else if (sdet > 0) res.index = p > 0 ? 1 : 2;
    else if (sdet < 0) res.index = 3;
    else res.index = sign_of(T(p + r), tz) > 0 ? 4 : 5;
    res.pqr = rank0_representatives()[res.index - 1];

    if (res.index != 8) {
        Eigen::Matrix2d S;
        S << to_double(p), to_double(q), to_double(q), to_double(r);
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
        Eigen::Vector2d lam = es.eigenvalues();
        Eigen::Matrix2d V = es.eigenvectors();
        double ez = 1e-9 * std::max(std::abs(lam(0)), std::abs(lam(1)));
        auto key = [&](double l) { return l > ez ? 0 : (l < -ez ? 1 : 2); };
        if (key(lam(1)) < key(lam(0))) {
            std::swap(lam(0), lam(1));
            V.col(0).swap(V.col(1));
        }
        double h0 = key(lam(0)) == 2 ? 1.0 : std::sqrt(std::abs(lam(0)));
        double h1 = key(lam(1)) == 2 ? 1.0 : std::sqrt(std::abs(lam(1)));
        // M = diag(h) V^T gives M^{-T} S M^{-1} = diag(sign lambda)
        res.M = {h0 * V(0, 0), h0 * V(1, 0), h1 * V(0, 1), h1 * V(1, 1)};
    }
    return res;
}

struct CanonicalInvariants {
    int rank = 0;
    bool trace_zero = true;  // tr C scales by 1/det M, so only zero/nonzero is invariant
    int sign_q2_pr = 0;
    bool b_zero = true;
};

struct CanonicalForm {
    Rep original;
    Rep representative;
    bool has_representative = false;
    Stratum stratum;
    std::optional<ZClass> zclass;
    int rank0_index = 0;
    bool listed_k_member = false;
    Change witness = Change::identity();
    std::vector<Change> steps;
    CanonicalInvariants invariants;

    std::string label() const {
        if (stratum.tag == Stratum::Rank0) {
            auto& v = representative;
            char buf[96];
            std::snprintf(buf, sizeof buf, "rank0: (%g,%g,%g)", v.p, v.q, v.r);
            return buf;
        }
        if (stratum.tag == Stratum::Rank1 && zclass) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s x K%d, kernel (%.12g,%.12g,%.12g)", zclass->label().c_str(), zclass->j,
                          representative.p, representative.q, representative.r);
            return buf;
        }
        return "rank " + std::to_string(invariants.rank) + " - no canonical representative in paper";
    }
};

template <class T>
CanonicalInvariants compute_invariants(const CubicSystem<T>& sys, double tol) {
    auto rep = to_rep(sys);
    CanonicalInvariants inv;
    inv.rank = rank_c(rep.C, tol);
    double cscale = std::max(1.0, max_abs(rep.C));
    inv.trace_zero = is_zero(rep.C.trace(), is_exact_v<T> ? 0.0 : 1e-12 * cscale);
    T s = rep.q * rep.q - rep.p * rep.r;
    double pscale = std::max({1.0, std::abs(to_double(rep.p)), std::abs(to_double(rep.q)), std::abs(to_double(rep.r))});
    inv.sign_q2_pr = sign_of(s, is_exact_v<T> ? 0.0 : 1e-12 * pscale * pscale);
    auto B = b_matrix(sys);
    bool bz = true;
    double bscale = std::max(1.0, max_abs(Mat3<T>(b_matrix(sys))));
    for (auto& x : B.a) bz = bz && is_zero(x, is_exact_v<T> ? 0.0 : 1e-12 * bscale);
    inv.b_zero = bz;
    return inv;
}

/**
 * @brief Full pipeline: rank 0 and rank 1 get a representative plus witness M with
 * transform(to_rep(sys), M) equal to the representative.
 */
template <class T>
CanonicalForm canonicalize(const CubicSystem<T>& sys, double tol = kDefaultRankTol) {
    CanonicalForm cf;
    cf.invariants = compute_invariants(sys, tol);
    const Rep rep = to_double(to_rep(sys));
    cf.original = rep;
    const int rank = cf.invariants.rank;

    if (rank == 0) {
        auto exact_rep = to_rep(sys);
        auto r0 = canonicalize_rank0(exact_rep.pqr());
        cf.stratum.tag = Stratum::Rank0;
        cf.rank0_index = r0.index;
        cf.representative = Rep{Mat3<double>::zero(), r0.pqr[0], r0.pqr[1], r0.pqr[2]};
        cf.witness = r0.M;
        cf.steps = {r0.M};
        cf.has_representative = true;
        cf.listed_k_member = true;
        return cf;
    }
    if (rank >= 2) {
        cf.stratum.tag = rank == 2 ? Stratum::Rank2 : Stratum::Rank3;
        cf.representative = rep;
        return cf;
    }

    cf.stratum.tag = Stratum::Rank1;
    auto fr = first_reduction(rep.C, tol);
    cf.stratum.rank1_case = fr.kase;
    auto sr = second_reduction(fr.C_tilde, fr.kase);
    Change m12 = compose(sr.M, fr.M);
    Vec3<double> pqr12 = detail::apply_kernel_part(rep.pqr(), m12);
    auto [D12, D12inv] = induced_matrix(m12);
    double floor = 1e-11 * max_abs(D12) / std::abs(m12.det()) *
                   std::max(max_abs(rep.C), std::max({std::abs(rep.p), std::abs(rep.q), std::abs(rep.r)}));
    auto kr = reduce_kernel(sr.C_rep, pqr12, floor);

    cf.steps.push_back(fr.M);
    cf.steps.insert(cf.steps.end(), sr.steps.begin(), sr.steps.end());
    cf.steps.insert(cf.steps.end(), kr.steps.begin(), kr.steps.end());
    cf.witness = compose(kr.M, m12);
    cf.zclass = sr.cls;
    cf.representative = Rep{sr.C_rep, kr.pqr[0], kr.pqr[1], kr.pqr[2]};
    cf.has_representative = true;
    cf.listed_k_member = kr.in_listed_k;
    return cf;
}

/// Largest entrywise gap between transform(original, witness) and the representative.
inline double witness_error(const CanonicalForm& cf) {
    Rep t = transform(cf.original, cf.witness);
    double e = max_abs_diff(t.C, cf.representative.C);
    e = std::max(e, max_abs_diff(t.pqr(), cf.representative.pqr()));
    return e;
}

/// Same stratum, class and representative up to tol.
inline bool same_canonical_form(const CanonicalForm& x, const CanonicalForm& y, double tol) {
    if (x.stratum.tag != y.stratum.tag) return false;
    if (x.stratum.tag == Stratum::Rank0) return x.rank0_index == y.rank0_index;
    if (!x.zclass || !y.zclass) return false;
    auto &a = *x.zclass, &b = *y.zclass;
    if (a.j != b.j || a.variant != b.variant || a.sigma != b.sigma) return false;
    if (std::abs(a.k - b.k) > tol || std::abs(a.theta - b.theta) > tol) return false;
    return max_abs_diff(x.representative.C, y.representative.C) <= tol &&
           max_abs_diff(x.representative.pqr(), y.representative.pqr()) <= tol;
}

} // namespace cnslab
