#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <ostream>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "conservation.hpp"
#include "system_algebra.hpp"

namespace cnslab {

using cplx = std::complex<double>;
using Pair = std::array<cplx, 2>;

/// Monomial u_a u_b conj(u_c) with 0-based component indices.
struct Monomial {
    int a, b, c;
};

/// Order of the six monomials carried by c1..c6 (component 1) and c7..c12 (component 2).
inline constexpr std::array<Monomial, 6> kMonomials{{{0, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 0}, {1, 1, 1}}};

/// Pointwise cubic nonlinearity N(u) for a double-valued system.
inline Pair nonlinearity(const CubicSystem<double>& s, const Pair& u) {
    Pair out{0.0, 0.0};
    for (int m = 0; m < 6; ++m) {
        const auto& mo = kMonomials[m];
        cplx v = u[mo.a] * u[mo.b] * std::conj(u[mo.c]);
        out[0] += s.coeff[m] * v;
        out[1] += s.coeff[6 + m] * v;
    }
    return out;
}

/// Directional derivative of N at u along du.
inline Pair nonlinearity_derivative(const CubicSystem<double>& s, const Pair& u, const Pair& du) {
    Pair out{0.0, 0.0};
    for (int m = 0; m < 6; ++m) {
        const auto& mo = kMonomials[m];
        cplx v = du[mo.a] * u[mo.b] * std::conj(u[mo.c]) + u[mo.a] * du[mo.b] * std::conj(u[mo.c]) +
                 u[mo.a] * u[mo.b] * std::conj(du[mo.c]);
        out[0] += s.coeff[m] * v;
        out[1] += s.coeff[6 + m] * v;
    }
    return out;
}

/// d alpha/dt = -i N(alpha).
inline Pair rhs(const CubicSystem<double>& s, const Pair& alpha) {
    Pair n = nonlinearity(s, alpha);
    const cplx mi(0, -1);
    return {mi * n[0], mi * n[1]};
}

inline Pair rhs_derivative(const CubicSystem<double>& s, const Pair& alpha, const Pair& dalpha) {
    Pair n = nonlinearity_derivative(s, alpha, dalpha);
    const cplx mi(0, -1);
    return {mi * n[0], mi * n[1]};
}

struct OdeConfig {
    double t0 = 0;
    double t1 = 1;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    bool log_time = false;  // integrate i d(alpha)/ds = N(alpha) in s = log t
    long max_steps = 2'000'000;
    double divergence_guard = 1e8;

    void validate() const {
        if (!(rel_tol > 0) || !(abs_tol > 0)) throw InvalidInput("tolerances must be positive");
        if (log_time && !(t1 > t0 && t0 > 0)) throw InvalidInput("log-time integration needs t1 > t0 > 0");
        if (!std::isfinite(t0) || !std::isfinite(t1)) throw InvalidInput("non-finite time bounds");
        if (max_steps <= 0) throw InvalidInput("max_steps must be positive");
    }
};

/**
 * @brief Knots of an integration with first and second derivatives for quintic Hermite output.
 *
 * Derivatives are with respect to the integration variable tau (t, or log t in log-time mode).
 */
class Trajectory {
public:
    bool log_time = false;
    std::vector<double> tau;
    std::vector<Pair> y, dy, ddy;

    std::size_t size() const { return tau.size(); }
    double time(std::size_t k) const { return log_time ? std::exp(tau[k]) : tau[k]; }
    std::vector<double> times() const {
        std::vector<double> out(size());
        for (std::size_t k = 0; k < size(); ++k) out[k] = time(k);
        return out;
    }
    double tau_of(double t) const { return log_time ? std::log(t) : t; }

    void push(double tk, const Pair& v, const Pair& dv, const Pair& ddv) {
        tau.push_back(tk);
        y.push_back(v);
        dy.push_back(dv);
        ddy.push_back(ddv);
    }

    /// Value and tau-derivative at integration variable x.
    std::pair<Pair, Pair> eval_tau(double x) const {
        if (tau.empty()) throw DomainError("empty trajectory");
        if (x < tau.front() - 1e-12 * std::max(1.0, std::abs(tau.front())) ||
            x > tau.back() + 1e-12 * std::max(1.0, std::abs(tau.back())))
            throw DomainError("evaluation outside the trajectory");
        if (size() == 1) return {y[0], dy[0]};
        auto it = std::upper_bound(tau.begin(), tau.end(), x);
        std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - tau.begin()), 1, size() - 1) - 1;
        double h = tau[k + 1] - tau[k];
        double s = std::clamp((x - tau[k]) / h, 0.0, 1.0);
        double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
        double h00 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h01 = 10 * s3 - 15 * s4 + 6 * s5;
        double h10 = s - 6 * s3 + 8 * s4 - 3 * s5, h11 = -4 * s3 + 7 * s4 - 3 * s5;
        double h20 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5, h21 = 0.5 * s3 - s4 + 0.5 * s5;
        double d00 = -30 * s2 + 60 * s3 - 30 * s4, d01 = -d00;
        double d10 = 1 - 18 * s2 + 32 * s3 - 15 * s4, d11 = -12 * s2 + 28 * s3 - 15 * s4;
        double d20 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4, d21 = 1.5 * s2 - 4 * s3 + 2.5 * s4;
        Pair v, dv;
        for (int j = 0; j < 2; ++j) {
            v[j] = h00 * y[k][j] + h01 * y[k + 1][j] + h * (h10 * dy[k][j] + h11 * dy[k + 1][j]) +
                   h * h * (h20 * ddy[k][j] + h21 * ddy[k + 1][j]);
            dv[j] = (d00 * y[k][j] + d01 * y[k + 1][j]) / h + d10 * dy[k][j] + d11 * dy[k + 1][j] +
                    h * (d20 * ddy[k][j] + d21 * ddy[k + 1][j]);
        }
        return {v, dv};
    }

    Pair at(double t) const { return eval_tau(tau_of(t)).first; }

    /// d/dt at physical time t.
    Pair derivative_at(double t) const {
        auto d = eval_tau(tau_of(t)).second;
        if (log_time)
            for (auto& x : d) x /= t;
        return d;
    }
};

namespace detail {

using OdeVec = std::array<double, 4>;

inline Pair unpack(const OdeVec& x) { return {cplx(x[0], x[1]), cplx(x[2], x[3])}; }
inline OdeVec pack(const Pair& p) { return {p[0].real(), p[0].imag(), p[1].real(), p[1].imag()}; }

inline void push_knot(Trajectory& tr, const CubicSystem<double>& s, double tk, const Pair& v) {
    Pair d = rhs(s, v);
    tr.push(tk, v, d, rhs_derivative(s, v, d));
}

} // namespace detail

/**
 * @brief Adaptive Dormand-Prince integration of i alpha' = N(alpha) with dense output.
 */
inline Trajectory integrate(const CubicSystem<double>& s, const Pair& alpha0, const OdeConfig& cfg) {
    cfg.validate();
    require_finite(s);
    using namespace boost::numeric::odeint;
    using detail::OdeVec;
    double x0 = cfg.log_time ? std::log(cfg.t0) : cfg.t0;
    double x1 = cfg.log_time ? std::log(cfg.t1) : cfg.t1;
    Trajectory tr;
    tr.log_time = cfg.log_time;
    detail::push_knot(tr, s, x0, alpha0);
    if (x1 == x0) return tr;
    if (x1 < x0) throw InvalidInput("integration interval must run forward");

    auto sys = [&s](const OdeVec& x, OdeVec& dxdt, double) { dxdt = detail::pack(rhs(s, detail::unpack(x))); };
    auto stepper = make_dense_output(cfg.abs_tol, cfg.rel_tol, runge_kutta_dopri5<OdeVec>());
    double dt0 = std::min(1e-3, (x1 - x0) / 16);
    stepper.initialize(detail::pack(alpha0), x0, dt0);
    long steps = 0;
    while (stepper.current_time() < x1) {
        if (++steps > cfg.max_steps) throw StepFailure("max_steps exceeded before reaching t1");
        stepper.do_step(sys);
        double tc = stepper.current_time();
        OdeVec xc = stepper.current_state();
        for (double v : xc)
            if (!std::isfinite(v) || std::abs(v) > cfg.divergence_guard)
                throw StepFailure("solution left the finite range (blowup)");
        if (tc >= x1) {
            OdeVec xe;
            stepper.calc_state(x1, xe);
            detail::push_knot(tr, s, x1, detail::unpack(xe));
        } else {
            detail::push_knot(tr, s, tc, detail::unpack(xc));
        }
    }
    return tr;
}

/// V_{p,q,r}(u) = p|u1|^2 + 2q Re(conj(u1) u2) + r|u2|^2.
inline double gauge_potential(const Vec3<double>& pqr, const Pair& u) {
    return quadratic_value(pqr, u[0], u[1]);
}

inline double gauge_potential_rate(const Vec3<double>& pqr, const Pair& u, const Pair& du) {
    return 2 * std::real(pqr[0] * std::conj(u[0]) * du[0] + pqr[1] * (std::conj(du[0]) * u[1] + std::conj(u[0]) * du[1]) +
                         pqr[2] * std::conj(u[1]) * du[1]);
}

/// Adaptive Simpson quadrature on [a,b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int depth = 40) {
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps, int d) -> double {
        double mid = 0.5 * (lo + hi);
        double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        double flm = f(lm), frm = f(rm);
        double left = (mid - lo) / 6 * (flo + 4 * flm + fmid);
        double right = (hi - mid) / 6 * (fmid + 4 * frm + fhi);
        double delta = left + right - whole;
        if (d <= 0) throw DomainError("adaptive Simpson did not converge");
        if (std::abs(delta) <= 15 * eps) return left + right + delta / 15;
        return rec(lo, mid, flo, flm, fmid, left, eps / 2, d - 1) + rec(mid, hi, fmid, frm, fhi, right, eps / 2, d - 1);
    };
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return rec(a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, depth);
}

/**
 * @brief u~_j = u_j exp(i int_0^t V ds); returns a trajectory of u~ that solves the (C,0,0,0) system.
 */
inline Trajectory gauge_strip(const CubicSystem<double>& s, const Trajectory& tr, double quad_tol = 1e-12) {
    auto rep = to_rep(s);
    const Vec3<double> pqr = rep.pqr();
    Trajectory out;
    out.log_time = tr.log_time;
    if (tr.size() == 0) return out;
    double phase = 0;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        if (k > 0) {
            auto V = [&](double x) { return gauge_potential(pqr, tr.eval_tau(x).first); };
            phase += adaptive_simpson(V, tr.tau[k - 1], tr.tau[k], quad_tol);
        }
        const Pair& u = tr.y[k];
        const Pair& du = tr.dy[k];
        const Pair& ddu = tr.ddy[k];
        double v = gauge_potential(pqr, u);
        double dv = gauge_potential_rate(pqr, u, du);
        cplx e = std::polar(1.0, phase), I(0, 1);
        Pair g, dg, ddg;
        for (int j = 0; j < 2; ++j) {
            g[j] = u[j] * e;
            dg[j] = (du[j] + I * v * u[j]) * e;
            ddg[j] = (ddu[j] + I * dv * u[j] + 2.0 * I * v * du[j] - v * v * u[j]) * e;
        }
        out.push(tr.tau[k], g, dg, ddg);
    }
    return out;
}

/// The system with the same C and zero kernel part.
inline CubicSystem<double> stripped_system(const CubicSystem<double>& s) {
    auto rep = to_rep(s);
    rep.p = rep.q = rep.r = 0;
    return from_rep(rep);
}

/// Largest |Q(t_k) - Q(t_0)| over the knots.
inline double check_conservation(const Trajectory& tr, const Vec3<double>& abc) {
    if (tr.size() == 0) return 0;
    double q0 = quadratic_value(abc, tr.y[0][0], tr.y[0][1]);
    double out = 0;
    for (auto& v : tr.y) out = std::max(out, std::abs(quadratic_value(abc, v[0], v[1]) - q0));
    return out;
}

/// Sup over sample points of |i u' - N(u)| with u' from a five-point difference of the interpolant.
inline double fd_residual(const CubicSystem<double>& s, const Trajectory& tr, double t_lo, double t_hi, int samples = 400,
                          double h = 2e-4) {
    double out = 0;
    const cplx I(0, 1);
    for (int i = 0; i < samples; ++i) {
        double t = t_lo + 2 * h + (t_hi - t_lo - 4 * h) * (i + 0.5) / samples;
        Pair up = tr.at(t + h), um = tr.at(t - h), u = tr.at(t);
        Pair up2 = tr.at(t + 2 * h), um2 = tr.at(t - 2 * h);
        Pair n = nonlinearity(s, u);
        double scale = tr.log_time ? t : 1.0;
        for (int j = 0; j < 2; ++j) {
            cplx du = (um2[j] - 8.0 * um[j] + 8.0 * up[j] - up2[j]) / (12 * h);
            out = std::max(out, std::abs(I * du * scale - n[j]));
        }
    }
    return out;
}

/// CSV rows: t, Re a1, Im a1, Re a2, Im a2, then one column per monitored quadratic.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr, const std::vector<Vec3<double>>& quads) {
    os << "t,re_a1,im_a1,re_a2,im_a2";
    for (std::size_t q = 0; q < quads.size(); ++q) os << ",Q" << q;
    os << "\n";
    os.precision(17);
    for (std::size_t k = 0; k < tr.size(); ++k) {
        auto& v = tr.y[k];
        os << tr.time(k) << ',' << v[0].real() << ',' << v[0].imag() << ',' << v[1].real() << ',' << v[1].imag();
        for (auto& abc : quads) os << ',' << quadratic_value(abc, v[0], v[1]);
        os << "\n";
    }
}

} // namespace cnslab
