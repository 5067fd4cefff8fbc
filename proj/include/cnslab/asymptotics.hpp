#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "errors.hpp"
#include "pde_sim.hpp"

namespace cnslab {

/// sqrt(3 (l6 - l1)(l6 - 3 l1)); NegativeDiscriminant when the product is negative.
inline double lambda_c(double l1, double l6) {
    double prod = (l6 - l1) * (l6 - 3 * l1);
    if (prod < 0) throw NegativeDiscriminant("(l6 - l1)(l6 - 3 l1) = " + std::to_string(prod) + " < 0");
    return std::sqrt(3 * prod);
}

/// (-3 l1 + 2 l6 +- lambda_c) / l6.
inline std::pair<double, double> lambda_tilde(double l1, double l6) {
    if (l6 == 0) throw DomainError("lambda_6 = 0");
    double lc = lambda_c(l1, l6);
    return {(-3 * l1 + 2 * l6 + lc) / l6, (-3 * l1 + 2 * l6 - lc) / l6};
}

// ---- profile <-> profile-frame field ----

/// g = F M(t) F^{-1} w, the profile-frame field whose profile at time t is w.
inline Field frame_from_profile(const Grid& g, const Field& w, double t) {
    Field phi = inverse_fourier(g, w);
    detail::multiply_chirp_x(g, phi, 0.5 / t);
    return fourier(g, phi);
}

inline Field profile_from_frame(const Grid& g, const Field& gf, double t) {
    Field phi = inverse_fourier(g, gf);
    detail::multiply_chirp_x(g, phi, -0.5 / t);
    return fourier(g, phi);
}

// ---- predictions ----
//
// Predicted fields are returned in the profile-frame representation: the array g with
// u(t, t xi_k) = t^{-1/2} e^{i t xi_k^2 / 2 - i pi/4} g_k. physical_samples() turns them into u.

namespace detail {

inline void require_late(double t) {
    if (!(t >= 1)) throw DomainError("asymptotic profiles are evaluated for t >= 1");
}

} // namespace detail

/// W1 e^{-3 i l1 |W1|^2 log t}.
inline Field predict_u1(const Field& W1, double l1, double t) {
    detail::require_late(t);
    const double s = std::log(t);
    Field out(W1.size());
    for (size_t k = 0; k < W1.size(); ++k) out[k] = W1[k] * std::polar(1.0, -3 * l1 * std::norm(W1[k]) * s);
    return out;
}

inline Field predict_u2_twomode(const Field& W1, const Field& W2, double l1, double l6, double t,
                                double eps_rel = 1e-3) {
    detail::require_late(t);
    const double lc = lambda_c(l1, l6);
    if (lc == 0) throw NegativeDiscriminant("two-mode profile needs (l6 - l1)(l6 - 3 l1) > 0");
    const double s = std::log(t);
    const double eps = eps_rel * sup_norm(W1);
    Field out(W1.size(), 0.0);
    for (size_t k = 0; k < W1.size(); ++k) {
        double m = std::norm(W1[k]);
        if (!(std::abs(W1[k]) > eps)) continue;
        cplx first = l6 * (W1[k] * W1[k] / m) * W2[k] * std::polar(1.0, (-3 * l1 - lc) * m * s);
        cplx second = (3 * l1 - 2 * l6 + lc) * std::conj(W2[k]) * std::polar(1.0, (-3 * l1 + lc) * m * s);
        out[k] = first + second;
    }
    return out;
}

enum class LogCase { ThreeLambda1, Lambda1 };

inline Field log_amplitude_w(const Field& W1, const Field& W2, double l1, LogCase c) {
    Field W(W1.size());
    for (size_t k = 0; k < W1.size(); ++k) {
        cplx z = W1[k] * std::conj(W2[k]);
        W[k] = c == LogCase::ThreeLambda1 ? cplx(0, -6 * l1) * W1[k] * z.real() : 2 * l1 * W1[k] * z.imag();
    }
    return W;
}

/// (W log t + W2) e^{-3 i l1 |W1|^2 log t}.
inline Field predict_u2_log(const Field& W1, const Field& W2, double l1, LogCase c, double t) {
    detail::require_late(t);
    const double s = std::log(t);
    Field W = log_amplitude_w(W1, W2, l1, c), out(W1.size());
    for (size_t k = 0; k < W1.size(); ++k)
        out[k] = (W[k] * s + W2[k]) * std::polar(1.0, -3 * l1 * std::norm(W1[k]) * s);
    return out;
}

/// -i (|W1|^2 W1 log t + W2).
inline Field predict_u2_free(const Field& W1, const Field& W2, double t) {
    detail::require_late(t);
    const double s = std::log(t);
    Field out(W1.size());
    for (size_t k = 0; k < W1.size(); ++k) out[k] = cplx(0, -1) * (std::norm(W1[k]) * W1[k] * s + W2[k]);
    return out;
}

struct AsymptoticPrediction {
    enum class Kind { TwoMode, LogAmplitude, FreeDriven };
    Kind kind = Kind::TwoMode;
    double lambda1 = 0, lambda6 = 0;
    LogCase log_case = LogCase::ThreeLambda1;
    Field W1, W2;

    static AsymptoticPrediction two_mode(double l1, double l6, Field W1, Field W2) {
        if (!(lambda_c(l1, l6) > 0)) throw NegativeDiscriminant("two-mode profile needs a positive lambda_c");
        return {Kind::TwoMode, l1, l6, LogCase::ThreeLambda1, std::move(W1), std::move(W2)};
    }
    static AsymptoticPrediction log_amplitude(double l1, LogCase c, Field W1, Field W2) {
        double l6 = c == LogCase::ThreeLambda1 ? 3 * l1 : l1;
        return {Kind::LogAmplitude, l1, l6, c, std::move(W1), std::move(W2)};
    }
    static AsymptoticPrediction free_driven(Field W1, Field W2) {
        return {Kind::FreeDriven, 0, 0, LogCase::ThreeLambda1, std::move(W1), std::move(W2)};
    }

    Field u1(double t) const {
        if (kind == Kind::FreeDriven) {
            detail::require_late(t);
            return W1;
        }
        return predict_u1(W1, lambda1, t);
    }
    Field u2(double t) const {
        switch (kind) {
        case Kind::TwoMode: return predict_u2_twomode(W1, W2, lambda1, lambda6, t);
        case Kind::LogAmplitude: return predict_u2_log(W1, W2, lambda1, log_case, t);
        case Kind::FreeDriven: return predict_u2_free(W1, W2, t);
        }
        return {};
    }
    PdeState state(double t) const { return {t, Frame::Profile, u1(t), u2(t)}; }
};

// ---- scattering data ----

struct ScatteringData {
    Field W1;
    std::vector<double> t;
    std::vector<double> convergence;  // sup_xi |w1(t_k) - W1 e^{-3 i l1 |W1|^2 log t_k}|
};

/**
 * @brief |W1| from the latest snapshot, phase averaged over the last three after undoing the
 * log-phase rotation.
 */
inline ScatteringData extract_scattering_data(const ProfileSeries& series, double l1) {
    const size_t n = series.size();
    if (n < 4) throw InsufficientSnapshots("need at least 4 snapshots, got " + std::to_string(n));
    const size_t N = series.w1.back().size();
    ScatteringData out;
    out.W1.assign(N, 0.0);
    for (size_t k = 0; k < N; ++k) {
        cplx avg = 0;
        for (size_t i = n - 3; i < n; ++i) {
            const cplx w = series.w1[i][k];
            avg += w * std::polar(1.0, 3 * l1 * std::norm(w) * std::log(series.t[i]));
        }
        double mod = std::abs(series.w1.back()[k]);
        if (std::abs(avg) > 0) out.W1[k] = mod * avg / std::abs(avg);
    }
    for (size_t i = 0; i < n; ++i) {
        double s = std::log(series.t[i]), m = 0;
        for (size_t k = 0; k < N; ++k) {
            cplx pred = out.W1[k] * std::polar(1.0, -3 * l1 * std::norm(out.W1[k]) * s);
            m = std::max(m, std::abs(series.w1[i][k] - pred));
        }
        out.t.push_back(series.t[i]);
        out.convergence.push_back(m);
    }
    return out;
}

// ---- fits ----

struct FitResult {
    double omega = 0;
    cplx A = 0, B = 0;       // beta(s) ~ A e^{-i omega s} + B e^{i omega s}
    double residual = 0;     // l2 norm of the misfit
    double t_a = 0, t_b = 0;
    double xi0 = 0;
    bool single_phasor = false;   // one amplitude vanishes; the sign of omega is then a convention
    bool ill_conditioned = false; // another scan minimum is nearly as good
};

namespace detail {

struct PhasorSolve {
    cplx A, B;
    double residual;
};

inline PhasorSolve solve_phasors(const std::vector<double>& s, const std::vector<cplx>& beta, double omega,
                                 double s_mid) {
    const int n = static_cast<int>(s.size());
    Eigen::MatrixXcd X(n, 2);
    Eigen::VectorXcd b(n);
    for (int k = 0; k < n; ++k) {
        X(k, 0) = std::polar(1.0, -omega * (s[k] - s_mid));
        X(k, 1) = std::polar(1.0, omega * (s[k] - s_mid));
        b(k) = beta[k];
    }
    Eigen::VectorXcd c = X.completeOrthogonalDecomposition().solve(b);
    double r = (X * c - b).norm();
    return {c(0) * std::polar(1.0, omega * s_mid), c(1) * std::polar(1.0, -omega * s_mid), r};
}

} // namespace detail

/**
 * @brief Least-squares fit of beta(s) by A e^{-i omega s} + B e^{i omega s}, omega in [0, omega_max].
 *
 * A uniform scan locates the basin, Brent's method refines inside the neighbouring scan cells.
 */
inline FitResult fit_two_phasor(const std::vector<double>& s, const std::vector<cplx>& beta, double omega_max,
                                int scan_points = 400) {
    if (s.size() != beta.size()) throw InvalidInput("sample arrays differ in length");
    if (s.size() < 12) throw InsufficientSpan("two-phasor fit needs at least 12 samples");
    auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
    if (*hi_it - *lo_it < 2) throw InsufficientSpan("two-phasor fit needs 2 units of log t");
    if (!(omega_max > 0)) throw InvalidInput("omega_max must be positive");

    double s_mid = 0.5 * (*lo_it + *hi_it);
    auto res2 = [&](double w) {
        double r = detail::solve_phasors(s, beta, w, s_mid).residual;
        return r * r;
    };
    std::vector<double> scan(scan_points + 1);
    const double h = omega_max / scan_points;
    for (int j = 0; j <= scan_points; ++j) scan[j] = res2(j * h);
    int best = static_cast<int>(std::min_element(scan.begin(), scan.end()) - scan.begin());

    double a = std::max(0.0, (best - 1) * h), b = std::min(omega_max, (best + 1) * h);
    auto [w, r2] = boost::math::tools::brent_find_minima(res2, a, b, 52);
    if (scan[best] < r2) {
        w = best * h;
        r2 = scan[best];
    }

    FitResult out;
    auto sol = detail::solve_phasors(s, beta, w, s_mid);
    out.omega = w;
    out.A = sol.A;
    out.B = sol.B;
    out.residual = sol.residual;
    out.t_a = std::exp(*lo_it);
    out.t_b = std::exp(*hi_it);
    double big = std::max(std::abs(sol.A), std::abs(sol.B));
    out.single_phasor = std::min(std::abs(sol.A), std::abs(sol.B)) <= 1e-6 * big;

    double floor = 1e-20 * std::max(1.0, std::norm(beta.front()));
    for (int j = 1; j < scan_points; ++j) {
        bool local_min = scan[j] <= scan[j - 1] && scan[j] <= scan[j + 1];
        if (local_min && std::abs(j - best) > 2 && scan[j] <= 1.1 * scan[best] + floor) out.ill_conditioned = true;
    }
    return out;
}

struct LogSlopeFit {
    cplx slope = 0;      // per unit log t
    cplx intercept = 0;  // value at t = 1
    double residual = 0;
    double r2 = 1;
};

/// Linear least squares of z against log t.
inline LogSlopeFit fit_log_slope(const std::vector<double>& t, const std::vector<cplx>& z) {
    if (t.size() != z.size()) throw InvalidInput("sample arrays differ in length");
    if (t.size() < 6) throw InsufficientSpan("log-slope fit needs at least 6 samples");
    const double n = static_cast<double>(t.size());
    double sm = 0;
    cplx zm = 0;
    for (size_t k = 0; k < t.size(); ++k) {
        if (!(t[k] > 0)) throw DomainError("log-slope fit needs t > 0");
        sm += std::log(t[k]);
        zm += z[k];
    }
    sm /= n;
    zm /= n;
    double sxx = 0;
    cplx sxz = 0;
    for (size_t k = 0; k < t.size(); ++k) {
        double ds = std::log(t[k]) - sm;
        sxx += ds * ds;
        sxz += ds * (z[k] - zm);
    }
    if (!(sxx > 0)) throw InsufficientSpan("all samples at the same time");
    LogSlopeFit out;
    out.slope = sxz / sxx;
    out.intercept = zm - out.slope * sm;
    double ss_res = 0, ss_tot = 0;
    for (size_t k = 0; k < t.size(); ++k) {
        ss_res += std::norm(z[k] - out.intercept - out.slope * std::log(t[k]));
        ss_tot += std::norm(z[k] - zm);
    }
    out.residual = std::sqrt(ss_res);
    out.r2 = ss_tot > 0 ? 1 - ss_res / ss_tot : 1.0;
    return out;
}

inline LogSlopeFit fit_log_slope(const std::vector<double>& t, const std::vector<double>& y) {
    return fit_log_slope(t, std::vector<cplx>(y.begin(), y.end()));
}

struct ResidualNorms {
    double sup = 0;
    double l2 = 0;
};

/// Sup and L2 distance of the u fields over the inner 80% of the sampled window.
inline ResidualNorms residual_norm(const Grid& g, const PdeState& pred, const PdeState& sim, double window = 0.8) {
    if (pred.frame != sim.frame || pred.t != sim.t || pred.a1.size() != sim.a1.size() ||
        static_cast<int>(pred.a1.size()) != g.N)
        throw GridMismatch("prediction and simulation are not on the same grid and time");
    auto [p1, p2] = physical_samples(g, pred);
    auto [s1, s2] = physical_samples(g, sim);
    const bool phys = pred.frame == Frame::Physical;
    const double half = phys ? g.L : g.xi_max();
    const double h = phys ? g.dx() : pred.t * g.dxi();
    ResidualNorms out;
    double acc = 0;
    for (int k = 0; k < g.N; ++k) {
        double c = phys ? g.x(k) : g.xi(k);
        if (std::abs(c) > window * half) continue;
        double d = std::hypot(std::abs(p1[k] - s1[k]), std::abs(p2[k] - s2[k]));
        out.sup = std::max(out.sup, d);
        acc += d * d;
    }
    out.l2 = std::sqrt(acc * h);
    return out;
}

inline int argmax_abs(const Field& f) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(f.size()); ++k)
        if (std::abs(f[k]) > std::abs(f[best])) best = k;
    return best;
}

/**
 * @brief Profile w2 of the d21 system computed from W1 alone by quadrature of
 * d w2/ds = -3i V(-t)[|V(t) W1|^2 V(t) W1], V(t) = F M(t) F^{-1}.
 *
 * Returns w2 at each of `times` given its value w2_first at times.front(); composite Simpson
 * with `panels` (even) subintervals in s per interval.
 */
inline std::vector<Field> d21_profile_oracle(const Grid& g, const Field& W1, const std::vector<double>& times,
                                             const Field& w2_first, int panels = 16) {
    if (panels % 2) ++panels;
    auto rate = [&](double s) {
        double t = std::exp(s);
        Field v = frame_from_profile(g, W1, t);
        for (auto& z : v) z = std::norm(z) * z;
        Field r = profile_from_frame(g, v, t);
        for (auto& z : r) z *= cplx(0, -3);
        return r;
    };
    std::vector<Field> out{w2_first};
    for (size_t i = 1; i < times.size(); ++i) {
        double s0 = std::log(times[i - 1]), s1 = std::log(times[i]);
        double h = (s1 - s0) / panels;
        Field acc = out.back();
        for (int m = 0; m <= panels; ++m) {
            double wgt = (m == 0 || m == panels) ? 1 : (m % 2 ? 4 : 2);
            Field r = rate(s0 + m * h);
            for (int k = 0; k < g.N; ++k) acc[k] += (wgt * h / 3) * r[k];
        }
        out.push_back(std::move(acc));
    }
    return out;
}

/// Angle between two complex numbers in degrees, in [0, 180].
inline double angle_deg(cplx a, cplx b) {
    double d = std::abs(std::arg(a * std::conj(b)));
    return d * 180 / std::numbers::pi;
}

} // namespace cnslab
