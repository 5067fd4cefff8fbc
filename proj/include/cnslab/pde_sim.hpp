#pragma once

#include <cmath>
#include <cstdio>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "ode_sim.hpp"

namespace cnslab {

using Field = std::vector<cplx>;

/**
 * @brief Periodic box [-L, L) with N points and its dual frequency grid.
 *
 * Both grids are stored in ascending order: x_j = -L + j dx and xi_k = (k - N/2) dxi with
 * dx dxi N = 2 pi. Spectral fields are indexed like xi.
 */
struct Grid {
    double L = 60;
    int N = 4096;

    Grid() = default;
    Grid(double half_width, int n) : L(half_width), N(n) { validate(); }

    void validate() const {
        if (!(L > 0) || !std::isfinite(L)) throw InvalidInput("grid half-width must be positive");
        if (N < 16 || (N & (N - 1)) != 0) throw InvalidInput("grid size must be a power of two >= 16");
    }
    double dx() const { return 2 * L / N; }
    double dxi() const { return std::numbers::pi / L; }
    double xi_max() const { return std::numbers::pi * N / (2 * L); }
    double x(int j) const { return -L + j * dx(); }
    double xi(int k) const { return (k - N / 2) * dxi(); }

    friend bool operator==(const Grid& a, const Grid& b) { return a.L == b.L && a.N == b.N; }
};

/// Continuous Fourier transform (1/sqrt(2 pi) normalisation) sampled on the xi grid.
inline Field fourier(const Grid& g, Field u) {
    for (int j = 1; j < g.N; j += 2) u[j] = -u[j];
    Fft::forward(u);
    const double c = g.dx() / std::sqrt(2 * std::numbers::pi);
    for (int k = 0; k < g.N; ++k) u[k] *= (k % 2 ? -c : c);
    return u;
}

inline Field inverse_fourier(const Grid& g, Field h) {
    for (int k = 1; k < g.N; k += 2) h[k] = -h[k];
    Fft::backward(h);
    const double c = g.dxi() / std::sqrt(2 * std::numbers::pi);
    for (int j = 0; j < g.N; ++j) h[j] *= (j % 2 ? -c : c);
    return h;
}

inline double l2_norm(const Field& f, double h) {
    double s = 0;
    for (auto& v : f) s += std::norm(v);
    return std::sqrt(s * h);
}

inline double sup_norm(const Field& f) {
    double m = 0;
    for (auto& v : f) m = std::max(m, std::abs(v));
    return m;
}

/// U(tau) f: multiply the spectrum by exp(-i tau xi^2 / 2).
inline Field free_propagate(const Grid& g, const Field& f, double tau) {
    Field h = fourier(g, f);
    for (int k = 0; k < g.N; ++k) {
        double xi = g.xi(k);
        h[k] *= std::polar(1.0, -0.5 * tau * xi * xi);
    }
    return inverse_fourier(g, h);
}

/**
 * @brief Pointwise cubic nonlinearity with complex coefficients.
 *
 * Same monomial order as CubicSystem. Complex entries allow the reduced equations such as
 * i u_t + u_xx/2 = -i |u|^2 u to be run by the same solver.
 */
struct PointwiseCubic {
    std::array<cplx, 12> coeff{};

    PointwiseCubic() = default;
    explicit PointwiseCubic(const CubicSystem<double>& s) {
        for (int j = 0; j < 12; ++j) coeff[j] = s.coeff[j];
    }

    Pair operator()(const Pair& u) const {
        const cplx m[6] = {u[0] * u[0] * std::conj(u[0]), u[0] * u[1] * std::conj(u[0]),
                           u[0] * u[0] * std::conj(u[1]), u[0] * u[1] * std::conj(u[1]),
                           u[1] * u[1] * std::conj(u[0]), u[1] * u[1] * std::conj(u[1])};
        Pair out{0.0, 0.0};
        for (int i = 0; i < 6; ++i) {
            out[0] += coeff[i] * m[i];
            out[1] += coeff[6 + i] * m[i];
        }
        return out;
    }

    bool is_zero() const {
        for (auto& c : coeff)
            if (c != 0.0) return false;
        return true;
    }
};

/// Which representation a PdeState carries.
enum class Frame {
    Physical,  // u_j(t, x_j) on the x grid
    Profile,   // g_j = D(t)^{-1} M(t)^{-1} u_j on the xi grid
};

struct PdeState {
    double t = 0;
    Frame frame = Frame::Physical;
    Field a1, a2;
};

struct Schedule {
    double t_a = 1;
    double rho = 1.25;
    double t_b = 100;

    void validate() const {
        if (!(t_a > 0) || !(rho > 1) || !(t_b >= t_a)) throw InvalidInput("schedule needs t_a > 0, rho > 1, t_b >= t_a");
    }
    std::vector<double> times() const {
        validate();
        std::vector<double> out;
        for (int k = 0;; ++k) {
            double t = t_a * std::pow(rho, k);
            if (t > t_b * (1 + 1e-12)) break;
            out.push_back(t);
        }
        return out;
    }
};

struct SolverConfig {
    double dt0 = 1e-3;    // physical step
    double ds0 = 1e-2;    // step in s = log t once in the profile frame
    double t_end = 100;
    Schedule schedule{1, 1.25, 100};
    int substeps = 4;
    double t_switch = 1;  // infinity keeps the physical frame throughout
    double boundary_guard = 1e-8;
    double edge_fraction = 0.05;
    double divergence_guard = 1e6;

    void validate() const {
        if (!(dt0 > 0) || !(ds0 > 0)) throw InvalidInput("time steps must be positive");
        if (!(t_end > 0)) throw InvalidInput("t_end must be positive");
        if (substeps < 4) throw InvalidInput("at least 4 nonlinear substeps");
        if (!(t_switch > 0)) throw InvalidInput("t_switch must be positive");
        schedule.validate();
    }
};

/**
 * @brief Advance alpha' = -i N(alpha) by dt at every grid point with classical RK4.
 */
inline void nonlinear_flow(const PointwiseCubic& sys, Field& a1, Field& a2, double dt, int substeps = 4,
                           double guard = 1e6) {
    if (sys.is_zero()) return;
    const double h = dt / substeps;
    const cplx mi(0, -1);
    auto f = [&](const Pair& a) {
        Pair n = sys(a);
        return Pair{mi * n[0], mi * n[1]};
    };
    for (size_t j = 0; j < a1.size(); ++j) {
        Pair y{a1[j], a2[j]};
        for (int s = 0; s < substeps; ++s) {
            Pair k1 = f(y);
            Pair k2 = f({y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
            Pair k3 = f({y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
            Pair k4 = f({y[0] + h * k3[0], y[1] + h * k3[1]});
            for (int c = 0; c < 2; ++c) y[c] += h / 6 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        double m = std::max(std::abs(y[0]), std::abs(y[1]));
        if (!(m <= guard))
            throw SubstepDivergence("pointwise magnitude " + std::to_string(m) + " at index " + std::to_string(j));
        a1[j] = y[0];
        a2[j] = y[1];
    }
}

inline PdeState nonlinear_flow(const PointwiseCubic& sys, PdeState st, double dt, int substeps = 4) {
    nonlinear_flow(sys, st.a1, st.a2, dt, substeps);
    return st;
}

namespace detail {

inline void multiply_chirp_x(const Grid& g, Field& f, double coef) {
    for (int j = 0; j < g.N; ++j) {
        double x = g.x(j);
        f[j] *= std::polar(1.0, coef * x * x);
    }
}

inline void multiply_chirp_xi(const Grid& g, Field& f, double coef) {
    for (int k = 0; k < g.N; ++k) {
        double xi = g.xi(k);
        f[k] *= std::polar(1.0, coef * xi * xi);
    }
}

/// Profile-frame linear flow from t0 to t1: g -> F M(t1) M(t0)^{-1} F^{-1} g.
inline Field profile_linear(const Grid& g, const Field& gf, double t0, double t1) {
    Field phi = inverse_fourier(g, gf);
    multiply_chirp_x(g, phi, 0.5 * (1 / t1 - 1 / t0));
    return fourier(g, phi);
}

inline double edge_mass(const Field& f, int N, double frac) {
    int band = std::max(1, static_cast<int>(frac * N / 2));
    double s = 0;
    for (int j = 0; j < band; ++j) s += std::norm(f[j]) + std::norm(f[N - 1 - j]);
    return s;
}

inline double total_mass(const Field& f) {
    double s = 0;
    for (auto& v : f) s += std::norm(v);
    return s;
}

} // namespace detail

/// Convert a physical state to the profile frame, g = F M(t) U(-t) u.
inline PdeState to_profile_frame(const Grid& g, const PdeState& st) {
    if (st.frame == Frame::Profile) return st;
    if (!(st.t > 0)) throw DomainError("profile frame needs t > 0");
    PdeState out{st.t, Frame::Profile, {}, {}};
    for (int c = 0; c < 2; ++c) {
        Field phi = free_propagate(g, c == 0 ? st.a1 : st.a2, -st.t);
        detail::multiply_chirp_x(g, phi, 0.5 / st.t);
        (c == 0 ? out.a1 : out.a2) = fourier(g, phi);
    }
    return out;
}

/// Inverse of to_profile_frame: u = U(t) M(-t) F^{-1} g on the x grid.
inline PdeState to_physical_frame(const Grid& g, const PdeState& st) {
    if (st.frame == Frame::Physical) return st;
    PdeState out{st.t, Frame::Physical, {}, {}};
    for (int c = 0; c < 2; ++c) {
        Field phi = inverse_fourier(g, c == 0 ? st.a1 : st.a2);
        detail::multiply_chirp_x(g, phi, -0.5 / st.t);
        (c == 0 ? out.a1 : out.a2) = free_propagate(g, phi, st.t);
    }
    return out;
}

/**
 * @brief Raise BoundaryLeak when more than `guard` of the mass sits in the outer band of the
 * carried field or of its transform.
 */
inline void check_boundary(const Grid& g, const PdeState& st, const SolverConfig& cfg) {
    for (int c = 0; c < 2; ++c) {
        const Field& f = c == 0 ? st.a1 : st.a2;
        double tot = detail::total_mass(f);
        if (tot == 0) continue;
        Field dual = st.frame == Frame::Physical ? fourier(g, f) : inverse_fourier(g, f);
        double tot_dual = detail::total_mass(dual);
        double e1 = detail::edge_mass(f, g.N, cfg.edge_fraction) / tot;
        double e2 = tot_dual > 0 ? detail::edge_mass(dual, g.N, cfg.edge_fraction) / tot_dual : 0.0;
        if (e1 > cfg.boundary_guard || e2 > cfg.boundary_guard) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "component %d at t=%.6g: edge mass fraction %.3e on the %s side", c + 1,
                          st.t, std::max(e1, e2), (e1 > e2) == (st.frame == Frame::Physical) ? "x" : "xi");
            throw BoundaryLeak(buf);
        }
    }
}

/// One Strang step in the physical frame.
inline void strang_step_physical(const PointwiseCubic& sys, const Grid& g, PdeState& st, double dt,
                                 const SolverConfig& cfg) {
    if (sys.is_zero()) {
        st.a1 = free_propagate(g, st.a1, dt);
        st.a2 = free_propagate(g, st.a2, dt);
    } else {
        st.a1 = free_propagate(g, st.a1, dt / 2);
        st.a2 = free_propagate(g, st.a2, dt / 2);
        nonlinear_flow(sys, st.a1, st.a2, dt, cfg.substeps, cfg.divergence_guard);
        st.a1 = free_propagate(g, st.a1, dt / 2);
        st.a2 = free_propagate(g, st.a2, dt / 2);
    }
    st.t += dt;
}

/// One Strang step of length ds in s = log t in the profile frame.
inline void strang_step_profile(const PointwiseCubic& sys, const Grid& g, PdeState& st, double ds,
                                const SolverConfig& cfg) {
    double s0 = std::log(st.t);
    double t_mid = std::exp(s0 + ds / 2), t1 = std::exp(s0 + ds);
    if (sys.is_zero()) {
        st.a1 = detail::profile_linear(g, st.a1, st.t, t1);
        st.a2 = detail::profile_linear(g, st.a2, st.t, t1);
    } else {
        st.a1 = detail::profile_linear(g, st.a1, st.t, t_mid);
        st.a2 = detail::profile_linear(g, st.a2, st.t, t_mid);
        nonlinear_flow(sys, st.a1, st.a2, ds, cfg.substeps, cfg.divergence_guard);
        st.a1 = detail::profile_linear(g, st.a1, t_mid, t1);
        st.a2 = detail::profile_linear(g, st.a2, t_mid, t1);
    }
    st.t = t1;
}

/// Advance st to `target`, switching to the profile frame at cfg.t_switch.
inline void advance(const PointwiseCubic& sys, const Grid& g, PdeState& st, double target, const SolverConfig& cfg) {
    if (target < st.t) throw DomainError("cannot advance backwards; use conjugate_state for t < 0");
    if (st.frame == Frame::Physical) {
        double stop = std::min(target, cfg.t_switch);
        if (stop > st.t) {
            int n = std::max(1, static_cast<int>(std::ceil((stop - st.t) / cfg.dt0 - 1e-9)));
            double dt = (stop - st.t) / n;
            for (int i = 0; i < n; ++i) strang_step_physical(sys, g, st, dt, cfg);
            st.t = stop;
        }
        if (st.t < cfg.t_switch) return;
        st = to_profile_frame(g, st);
    }
    if (target > st.t) {
        double span = std::log(target) - std::log(st.t);
        int n = std::max(1, static_cast<int>(std::ceil(span / cfg.ds0 - 1e-9)));
        double ds = span / n;
        for (int i = 0; i < n; ++i) strang_step_profile(sys, g, st, ds, cfg);
        st.t = target;
    }
}

/**
 * @brief Evolve `init` and return snapshots at the schedule times inside (init.t, t_end] and at t_end.
 */
inline std::vector<PdeState> run(const PointwiseCubic& sys, const PdeState& init, const Grid& g,
                                 const SolverConfig& cfg) {
    cfg.validate();
    g.validate();
    if (init.t < 0) throw DomainError("forward runs start at t >= 0");
    if (static_cast<int>(init.a1.size()) != g.N || static_cast<int>(init.a2.size()) != g.N)
        throw GridMismatch("initial data size differs from grid");
    std::vector<double> targets;
    for (double t : cfg.schedule.times())
        if (t > init.t && t < cfg.t_end) targets.push_back(t);
    targets.push_back(cfg.t_end);

    PdeState st = init;
    check_boundary(g, st, cfg);
    std::vector<PdeState> out;
    for (double t : targets) {
        advance(sys, g, st, t, cfg);
        check_boundary(g, st, cfg);
        out.push_back(st);
    }
    return out;
}

inline PdeState run_to(const PointwiseCubic& sys, const PdeState& init, const Grid& g, SolverConfig cfg) {
    cfg.schedule = {cfg.t_end, 2.0, cfg.t_end};
    return run(sys, init, g, cfg).back();
}

/// Data whose forward evolution is conj(u(-t)) for the original data u0.
inline PdeState conjugate_state(PdeState st) {
    for (auto& v : st.a1) v = std::conj(v);
    for (auto& v : st.a2) v = std::conj(v);
    return st;
}

/// w_j = F U(-t) u_j on the xi grid.
inline std::pair<Field, Field> profile(const Grid& g, const PdeState& st) {
    if (!(st.t > 0)) throw DomainError("profile needs t > 0");
    std::pair<Field, Field> out;
    for (int c = 0; c < 2; ++c) {
        const Field& a = c == 0 ? st.a1 : st.a2;
        Field w;
        if (st.frame == Frame::Physical) {
            w = fourier(g, a);
            detail::multiply_chirp_xi(g, w, 0.5 * st.t);
        } else {
            Field phi = inverse_fourier(g, a);
            detail::multiply_chirp_x(g, phi, -0.5 / st.t);
            w = fourier(g, phi);
        }
        (c == 0 ? out.first : out.second) = std::move(w);
    }
    return out;
}

struct ProfileSeries {
    std::vector<double> t;
    std::vector<Field> w1, w2;

    size_t size() const { return t.size(); }
};

inline ProfileSeries profile_series(const Grid& g, const std::vector<PdeState>& snaps) {
    ProfileSeries out;
    for (auto& st : snaps) {
        auto [w1, w2] = profile(g, st);
        out.t.push_back(st.t);
        out.w1.push_back(std::move(w1));
        out.w2.push_back(std::move(w2));
    }
    return out;
}

/// Grid coordinates of the samples a state carries (x_j, or t xi_k in the profile frame).
inline std::vector<double> sample_points(const Grid& g, const PdeState& st) {
    std::vector<double> out(g.N);
    for (int j = 0; j < g.N; ++j) out[j] = st.frame == Frame::Physical ? g.x(j) : st.t * g.xi(j);
    return out;
}

/// u_j at sample_points; exact pointwise values in either frame.
inline std::pair<Field, Field> physical_samples(const Grid& g, const PdeState& st) {
    if (st.frame == Frame::Physical) return {st.a1, st.a2};
    std::pair<Field, Field> out{st.a1, st.a2};
    const double amp = 1 / std::sqrt(st.t);
    for (int k = 0; k < g.N; ++k) {
        double y = g.xi(k);
        cplx f = amp * std::polar(1.0, 0.5 * st.t * y * y - std::numbers::pi / 4);
        out.first[k] *= f;
        out.second[k] *= f;
    }
    return out;
}

struct Observables {
    double t = 0;
    double linf[2] = {0, 0};
    double l2[2] = {0, 0};
    double h01[2] = {0, 0};        // ||<x> u||_2 on the box, approximate
    double mass[3] = {0, 0, 0};    // ||u1||^2, Re(u1, u2), ||u2||^2
};

inline Observables observables(const Grid& g, const PdeState& st) {
    Observables o;
    o.t = st.t;
    const bool phys = st.frame == Frame::Physical;
    const double h = phys ? g.dx() : g.dxi();
    const double amp = phys ? 1.0 : 1 / std::sqrt(st.t);
    double cross = 0;
    for (int c = 0; c < 2; ++c) {
        const Field& f = c == 0 ? st.a1 : st.a2;
        double l2 = 0, w2 = 0;
        for (int j = 0; j < g.N; ++j) {
            double x = phys ? g.x(j) : st.t * g.xi(j);
            double n = std::norm(f[j]);
            l2 += n;
            w2 += (1 + x * x) * n;
        }
        o.linf[c] = amp * sup_norm(f);
        o.l2[c] = std::sqrt(l2 * h);
        o.h01[c] = std::sqrt(w2 * h);
    }
    for (int j = 0; j < g.N; ++j) cross += std::real(st.a1[j] * std::conj(st.a2[j]));
    o.mass[0] = o.l2[0] * o.l2[0];
    o.mass[1] = cross * h;
    o.mass[2] = o.l2[1] * o.l2[1];
    return o;
}

/// Mass functional a||u1||^2 + 2b Re(u1,u2) + c||u2||^2.
inline double mass_functional(const Observables& o, const Vec3<double>& abc) {
    return abc[0] * o.mass[0] + 2 * abc[1] * o.mass[1] + abc[2] * o.mass[2];
}

/**
 * @brief a||u1'||^2 + 2b Re(u1',u2') + c||u2'||^2 + integral of the quartic density.
 *
 * Conserved when abc spans an energy certificate. Physical frame only.
 */
inline double energy_functional(const Grid& g, const PdeState& st, const CubicSystem<double>& s,
                                const Vec3<double>& abc) {
    if (st.frame != Frame::Physical) throw DomainError("energy is evaluated in the physical frame");
    auto deriv = [&](const Field& f) {
        Field h = fourier(g, f);
        for (int k = 0; k < g.N; ++k) h[k] *= cplx(0, g.xi(k));
        return inverse_fourier(g, h);
    };
    Field d1 = deriv(st.a1), d2 = deriv(st.a2);
    auto q = energy_quartic(s, abc);
    double e = 0;
    for (int j = 0; j < g.N; ++j) {
        cplx u1 = st.a1[j], u2 = st.a2[j];
        double n1 = std::norm(u1), n2 = std::norm(u2);
        double re12 = std::real(std::conj(u1) * u2);
        double re2 = std::real(std::conj(u1) * std::conj(u1) * u2 * u2);
        e += abc[0] * std::norm(d1[j]) + 2 * abc[1] * std::real(std::conj(d1[j]) * d2[j]) + abc[2] * std::norm(d2[j]);
        e += q[0] * n1 * n1 + q[1] * n1 * re12 + q[2] * n1 * n2 + q[3] * re2 + q[4] * n2 * re12 + q[5] * n2 * n2;
    }
    return e * g.dx();
}

// ---- initial data ----

struct Gaussian {
    double amplitude = 0.1;
    double width = 1;
    double center = 0;
    double phase_slope = 0;
    double phase = 0;

    cplx operator()(double x) const {
        double z = (x - center) / width;
        return amplitude * std::exp(-0.5 * z * z) * std::polar(1.0, phase_slope * x + phase);
    }
};

inline Field sample(const Grid& g, const Gaussian& f) {
    Field out(g.N);
    for (int j = 0; j < g.N; ++j) out[j] = f(g.x(j));
    return out;
}

inline PdeState initial_state(const Grid& g, const Gaussian& f1, const Gaussian& f2) {
    return {0.0, Frame::Physical, sample(g, f1), sample(g, f2)};
}

// ---- Dollard factors U(t) = M(t) D(t) F M(t) ----

/// M(t) f = exp(i x^2 / 2t) f on the x grid.
inline Field chirp(const Grid& g, Field f, double t) {
    if (t == 0) throw DomainError("chirp needs t != 0");
    detail::multiply_chirp_x(g, f, 0.5 / t);
    return f;
}

/// Band-limited value at y of an x-grid field given its spectrum.
inline cplx eval_from_spectrum(const Grid& g, const Field& spec, double y) {
    if (y < -g.L || y >= g.L) return 0.0;
    cplx step = std::polar(1.0, g.dxi() * y), ph = std::polar(1.0, g.xi(0) * y), s = 0;
    for (int k = 0; k < g.N; ++k) {
        s += spec[k] * ph;
        ph *= step;
    }
    return s * (g.dxi() / std::sqrt(2 * std::numbers::pi));
}

/// Band-limited value at eta of a xi-grid field given its inverse transform.
inline cplx eval_from_inverse(const Grid& g, const Field& inv, double eta) {
    if (eta < -g.xi_max() || eta >= g.xi_max()) return 0.0;
    cplx step = std::polar(1.0, -g.dx() * eta), ph = std::polar(1.0, g.L * eta), s = 0;
    for (int j = 0; j < g.N; ++j) {
        s += inv[j] * ph;
        ph *= step;
    }
    return s * (g.dx() / std::sqrt(2 * std::numbers::pi));
}

/// D(t) h(x) = t^{-1/2} h(x/t) e^{-i pi/4}: a xi-grid field to an x-grid field.
inline Field dilate(const Grid& g, const Field& h, double t) {
    if (!(t > 0)) throw DomainError("dilation needs t > 0");
    Field inv = inverse_fourier(g, h), out(g.N);
    cplx c = std::polar(1 / std::sqrt(t), -std::numbers::pi / 4);
    for (int j = 0; j < g.N; ++j) out[j] = c * eval_from_inverse(g, inv, g.x(j) / t);
    return out;
}

/// D(t)^{-1}: an x-grid field to a xi-grid field, t^{1/2} e^{i pi/4} f(t xi).
inline Field undilate(const Grid& g, const Field& f, double t) {
    if (!(t > 0)) throw DomainError("dilation needs t > 0");
    Field spec = fourier(g, f), out(g.N);
    cplx c = std::polar(std::sqrt(t), std::numbers::pi / 4);
    for (int k = 0; k < g.N; ++k) out[k] = c * eval_from_spectrum(g, spec, t * g.xi(k));
    return out;
}

/// M(t) D(t) F M(t) f, the Dollard form of U(t) f.
inline Field dollard_apply(const Grid& g, const Field& f, double t) {
    if (!(t > 0)) throw DomainError("Dollard factorisation is used for t > 0");
    return chirp(g, dilate(g, fourier(g, chirp(g, f, t)), t), t);
}

/// M(-t) F^{-1} D(t)^{-1} M(-t) u, the Dollard form of U(-t) u.
inline Field dollard_inverse(const Grid& g, const Field& u, double t) {
    if (!(t > 0)) throw DomainError("Dollard factorisation is used for t > 0");
    return chirp(g, inverse_fourier(g, undilate(g, chirp(g, u, -t), t)), -t);
}

} // namespace cnslab
