#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "asymptotics.hpp"
#include "classification.hpp"
#include "conservation.hpp"
#include "ode_sim.hpp"
#include "pde_sim.hpp"
#include "sampling.hpp"
#include "system_algebra.hpp"

namespace cnslab::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;

    std::string line() const {
        char buf[64];
        std::snprintf(buf, sizeof buf, " (%.2f s)", seconds);
        return std::string(pass ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + name + ": " + detail + buf;
    }
};

namespace detail {

inline std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class F>
CriterionResult timed(int id, std::string name, F body) {
    auto t0 = std::chrono::steady_clock::now();
    CriterionResult r{id, std::move(name), false, "", 0};
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail += std::string(r.detail.empty() ? "" : "; ") + "exception: " + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

/// Appends "label=value" and folds `ok` into the verdict.
struct Tally {
    CriterionResult& r;
    bool all = true;
    void add(const std::string& label, bool ok, const std::string& value = "") {
        all = all && ok;
        if (!r.detail.empty()) r.detail += "; ";
        r.detail += label + (value.empty() ? "" : "=" + value) + (ok ? "" : " [x]");
    }
    void finish() { r.pass = all; }
};

inline CubicSystem<Rational> rational_system(std::initializer_list<int> c) {
    CubicSystem<Rational> s;
    int j = 0;
    for (int x : c) s.coeff[j++] = x;
    return s;
}

inline CubicSystem<Rational> two_nls_exact() { return rational_system({-2, 0, 0, 2, 1, 0, 0, -2, -1, 0, 0, 2}); }
inline CubicSystem<Rational> three_nls_exact() { return rational_system({0, 2, -1, 0, 0, 1, -1, 0, 0, -2, 1, 0}); }

template <class T>
CubicSystem<T> sysnew(T l1, T l6) {
    CnsaSystem<T> sa;
    sa.lambda[0] = l1;
    sa.lambda[5] = l6;
    return embed_cnsa(sa);
}

template <class T>
CubicSystem<T> d21_system() {
    CnsaSystem<T> sa;
    sa.lambda[4] = 1;
    return embed_cnsa(sa);
}

inline double max_diff(const Field& a, const Field& b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace detail

/// Grid and data shared by the PDE criteria.
struct PdeRecipe {
    Grid grid{60, 4096};
    // the slow log-phase drift of the l6 family reaches |x| = 60 in the dual field by t ~ 500
    Grid long_grid{120, 8192};
    double dt0 = 1e-3;
    double ds0 = 1e-2;
    double rho = 1.1;
};

// ---- 1: representation bijection ----
inline CriterionResult criterion_1() {
    return detail::timed(1, "Representation bijection", [](CriterionResult& r) {
        detail::Tally t{r};
        std::mt19937_64 rng(101);
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            auto s = sampling::random_rational_system(rng);
            if (!(from_rep(to_rep(s)) == s)) ++bad;
        }
        t.add("round-trip failures /1000", bad == 0, std::to_string(bad));
        auto r2 = to_rep(detail::two_nls_exact());
        t.add("2NLS matrix", r2.C == Mat3<Rational>::from_rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}) &&
                                 r2.pqr() == Vec3<Rational>{0, 0, 0});
        auto r3 = to_rep(detail::three_nls_exact());
        t.add("3NLS matrix", r3.C == Mat3<Rational>::from_rows({{3, 0, 1}, {0, 2, 0}, {1, 0, 3}}) &&
                                 r3.pqr() == Vec3<Rational>{0, 0, 0});
        t.finish();
    });
}

// ---- 2: group-action invariants ----
inline CriterionResult criterion_2() {
    return detail::timed(2, "Group-action invariants", [](CriterionResult& r) {
        detail::Tally t{r};
        std::mt19937_64 rng(102);
        int rank_bad = 0, sign_bad = 0, trace_bad = 0, d_bad = 0;
        double worst_trace = 0, worst_d = 0;
        for (int i = 0; i < 1000; ++i) {
            auto s = sampling::random_rational_system(rng);
            auto rep = to_rep(s);
            if (i % 4 == 1) rep.C = Mat3<Rational>::outer(rep.C.row(0), rep.C.row(1));
            if (i % 4 == 2) rep.C = Mat3<Rational>::zero();
            auto m = sampling::random_rational_change(rng);
            auto out = transform(rep, m);
            if (sign_of(Rational(out.q * out.q - out.p * out.r)) != sign_of(Rational(rep.q * rep.q - rep.p * rep.r)))
                ++sign_bad;

            auto repd = to_double(rep);
            auto md = sampling::random_change(rng);
            auto outd = transform(repd, md);
            if (rank_c(outd.C, 1e-9) != rank_c(rep.C)) ++rank_bad;
            double terr = std::abs(outd.C.trace() - repd.C.trace() / md.det()) / std::max(1.0, std::abs(repd.C.trace()));
            worst_trace = std::max(worst_trace, terr);
            if (terr > 1e-10) ++trace_bad;
            auto [D, Di] = induced_matrix(md);
            double derr = max_abs_diff(Mat3<double>(D * Di), Mat3<double>::identity());
            worst_d = std::max(worst_d, derr);
            if (derr > 1e-12) ++d_bad;
        }
        t.add("rank changes", rank_bad == 0, std::to_string(rank_bad));
        t.add("sign(q^2-pr) changes (exact)", sign_bad == 0, std::to_string(sign_bad));
        t.add("max |trC' - trC/detM|", trace_bad == 0, detail::fmt("%.1e", worst_trace));
        t.add("max |D D^-1 - I|", d_bad == 0, detail::fmt("%.1e", worst_d));
        t.finish();
    });
}

// ---- 3: canonicalisation ----
inline CriterionResult criterion_3() {
    return detail::timed(3, "Canonicalization soundness and idempotence", [](CriterionResult& r) {
        detail::Tally t{r};
        std::mt19937_64 rng(103);
        int wit_bad = 0, idem_bad = 0, inv_bad = 0;
        double worst_wit = 0;
        for (int i = 0; i < 1000; ++i) {
            auto sys = sampling::random_low_rank_system(rng);
            auto cf = canonicalize(sys);
            double scale = std::max({1.0, max_abs(cf.representative.C), norm2(cf.representative.pqr())});
            double we = witness_error(cf) / scale;
            worst_wit = std::max(worst_wit, we);
            if (!(we <= 1e-8)) ++wit_bad;
            if (!same_canonical_form(canonicalize(from_rep(cf.representative)), cf, 1e-9 * scale)) ++idem_bad;
            auto moved = transform_system(sys, sampling::random_change(rng, 6.0));
            if (!same_canonical_form(canonicalize(moved), cf, 1e-7 * scale)) ++inv_bad;
        }
        t.add("witness > 1e-8", wit_bad == 0, std::to_string(wit_bad) + " (max " + detail::fmt("%.1e", worst_wit) + ")");
        t.add("not idempotent", idem_bad == 0, std::to_string(idem_bad));
        t.add("not invariant", inv_bad == 0, std::to_string(inv_bad));
        auto d21 = canonicalize(detail::d21_system<Rational>());
        t.add("d21", d21.zclass && d21.zclass->j == 7, d21.label());
        auto sn = canonicalize(detail::sysnew<Rational>(Rational(1, 3), Rational(1)));
        t.add("l6=3l1", sn.zclass && sn.zclass->j == 4, sn.label());
        t.finish();
    });
}

// ---- 4: ODE conservation identities ----
inline CriterionResult criterion_4() {
    return detail::timed(4, "Conservation identities", [](CriterionResult& r) {
        detail::Tally t{r};
        std::mt19937_64 rng(104);
        double worst_drift = 0, worst_b = 0, worst_gauge = 0;
        for (int i = 0; i < 100; ++i) {
            auto [s, a0, tr] = sampling::finite_run(rng, [&] { return sampling::random_kernel_system(rng); }, 0.2, 10);
            for (auto& q : mass_like_kernel(to_rep(s))) worst_drift = std::max(worst_drift, check_conservation(tr, q.abc));
        }
        for (int i = 0; i < 100; ++i) {
            auto [s, a0, tr] = sampling::finite_run(rng, [&] { return sampling::random_system(rng); }, 0.3, 2);
            auto B = b_matrix(s);
            for (double tt : {0.3, 0.9, 1.7}) {
                const double h = 1e-3;
                auto im = [&](double x) {
                    auto v = tr.at(x);
                    return std::imag(std::conj(v[0]) * v[1]);
                };
                double fd = (im(tt - 2 * h) - 8 * im(tt - h) + 8 * im(tt + h) - im(tt + 2 * h)) / (12 * h);
                auto v = tr.at(tt);
                Vec3<double> x{std::norm(v[0]), 2 * std::real(std::conj(v[0]) * v[1]), std::norm(v[1])};
                Vec3<double> Bx = B * x;
                double exact = 0.25 * (x[0] * Bx[0] + x[1] * Bx[1] + x[2] * Bx[2]);
                double sc = 0.25 * max_abs(B) * (x[0] + std::abs(x[1]) + x[2]) * (x[0] + std::abs(x[1]) + x[2]);
                worst_b = std::max(worst_b, std::abs(fd - exact) / sc);
            }
        }
        for (int i = 0; i < 100; ++i) {
            auto [s, a0, coarse] = sampling::finite_run(rng, [&] { return sampling::random_system(rng); }, 0.4, 5);
            OdeConfig cfg{0, 5};
            cfg.rel_tol = 1e-13;
            cfg.abs_tol = 1e-15;
            auto tr = integrate(s, a0, cfg);
            worst_gauge = std::max(worst_gauge, fd_residual(stripped_system(s), gauge_strip(s, tr), 0, 5));
        }
        t.add("max kernel drift", worst_drift <= 1e-8, detail::fmt("%.1e", worst_drift));
        t.add("max B-identity rel. error", worst_b <= 1e-6, detail::fmt("%.1e", worst_b));
        t.add("max gauge-strip residual", worst_gauge <= 1e-7, detail::fmt("%.1e", worst_gauge));
        t.finish();
    });
}

// ---- 5: PDE baseline ----
inline CriterionResult criterion_5(const PdeRecipe& rc = {}) {
    return detail::timed(5, "PDE baseline", [&](CriterionResult& r) {
        detail::Tally t{r};
        const Grid& g = rc.grid;
        const double inf = std::numeric_limits<double>::infinity();

        {
            PointwiseCubic sys(detail::sysnew(1.0 / 3, 2.0));
            PdeState init = initial_state(g, {0.5, 2, 0, 0.3, 0}, {0.5, 2, 1, 0, 0.5});
            auto at = [&](double dt) {
                SolverConfig c;
                c.t_end = 1;
                c.t_switch = inf;
                c.dt0 = dt;
                return run_to(sys, init, g, c);
            };
            PdeState a = at(0.04), b = at(0.02), c = at(0.01);
            double e1 = std::max(detail::max_diff(a.a1, b.a1), detail::max_diff(a.a2, b.a2));
            double e2 = std::max(detail::max_diff(b.a1, c.a1), detail::max_diff(b.a2, c.a2));
            double ratio = e1 / e2;
            t.add("Richardson ratio", std::abs(ratio - 4) <= 0.8, detail::fmt("%.3f", ratio));
        }
        {
            PdeState init = initial_state(g, {0.1, 3, -2, 0.5, 0}, {0.05, 2, 4, -0.3, 1});
            SolverConfig c;
            c.t_end = 10;
            c.t_switch = inf;
            c.dt0 = 1e-2;
            PdeState st = run_to(PointwiseCubic{}, init, g, c);
            double err = std::max(detail::max_diff(st.a1, free_propagate(g, init.a1, 10)),
                                  detail::max_diff(st.a2, free_propagate(g, init.a2, 10)));
            SolverConfig h = c;
            h.t_switch = 1;
            h.t_end = 100;
            auto [w1, w2] = profile(g, run_to(PointwiseCubic{}, init, g, h));
            err = std::max({err, detail::max_diff(w1, fourier(g, init.a1)), detail::max_diff(w2, fourier(g, init.a2))});
            t.add("free-system error", err <= 1e-9, detail::fmt("%.1e", err));
        }
        for (double l6 : {2.0, 1.0}) {
            auto s = detail::sysnew(1.0 / 3, l6);
            PointwiseCubic sys(s);
            PdeState init = initial_state(g, {0.1, 7, 0, 0, 0}, {0.1, 7, 0, 0, -std::numbers::pi / 3});
            SolverConfig c;
            c.dt0 = rc.dt0;
            c.ds0 = rc.ds0;
            c.t_end = 100;
            c.schedule = {0.5, 1.25, 100};
            auto snaps = run(sys, init, g, c);
            auto o0 = observables(g, init);
            auto kernel = mass_like_kernel(to_rep(s));
            double worst = 0;
            for (auto& st : snaps) {
                auto o = observables(g, st);
                for (auto& q : kernel) {
                    double m0 = mass_functional(o0, q.abc);
                    worst = std::max(worst, std::abs(mass_functional(o, q.abc) - m0) / std::abs(m0));
                }
            }
            std::string lab = "mass drift l6=" + detail::fmt("%g", l6) + " (" + std::to_string(kernel.size()) + " kernel)";
            t.add(lab, worst <= 1e-6 && kernel.size() == (l6 == 1.0 ? 2u : 1u), detail::fmt("%.1e", worst));
        }
        t.finish();
    });
}

/// Run of the l6 family used by criteria 6 and 7.
struct FamilyRun {
    ProfileSeries series;
    std::vector<double> t;
    std::vector<double> u1_scaled, u2_scaled;  // ||u_j||_inf sqrt(t)
};

inline FamilyRun run_family(const PdeRecipe& rc, double l1, double l6, double t_end) {
    PointwiseCubic sys(detail::sysnew(l1, l6));
    const Grid& g = rc.long_grid;
    PdeState init = initial_state(g, {0.1, 7, 0, 0, 0}, {0.1, 7, 0, 0, -std::numbers::pi / 3});
    SolverConfig c;
    c.dt0 = rc.dt0;
    c.ds0 = rc.ds0;
    c.t_end = t_end;
    c.schedule = {50, rc.rho, t_end};
    auto snaps = run(sys, init, g, c);
    FamilyRun out;
    out.series = profile_series(g, snaps);
    for (auto& st : snaps) {
        auto o = observables(g, st);
        out.t.push_back(st.t);
        out.u1_scaled.push_back(o.linf[0] * std::sqrt(st.t));
        out.u2_scaled.push_back(o.linf[1] * std::sqrt(st.t));
    }
    return out;
}

inline double spread(const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

// ---- 6: two-mode structure ----
inline CriterionResult criterion_6(const PdeRecipe& rc = {}) {
    return detail::timed(6, "Two-mode structure (l1=1/3, l6=2)", [&](CriterionResult& r) {
        detail::Tally t{r};
        const double l1 = 1.0 / 3, l6 = 2.0;
        auto fr = run_family(rc, l1, l6, 3000);
        t.add("u1 sup*sqrt(t) spread", spread(fr.u1_scaled) < 2, detail::fmt("%.3f", spread(fr.u1_scaled)));
        t.add("u2 sup*sqrt(t) spread", spread(fr.u2_scaled) < 2, detail::fmt("%.3f", spread(fr.u2_scaled)));

        auto rep = analyze_two_mode(rc.long_grid, fr.series, l1, l6, 100, 3000);
        t.add("omega", rep.rel_error <= 0.10,
              detail::fmt("%.4f", rep.fit.omega) + " vs lc|W1|^2=" + detail::fmt("%.4f", rep.predicted) + " (" +
                  detail::fmt("%.1f", 100 * rep.rel_error) + "%)");
        // robustness only
        for (auto& h : rep.half_width)
            t.add("omega at xi=" + detail::fmt("%+.3f", h.xi), true,
                  detail::fmt("%.1f%% off", 100 * std::abs(h.omega - h.predicted) / h.predicted));
        t.finish();
    });
}

// ---- 7: log-amplitude correction ----
inline CriterionResult criterion_7(const PdeRecipe& rc = {}) {
    return detail::timed(7, "Log-amplitude correction (l6=3 l1)", [&](CriterionResult& r) {
        detail::Tally t{r};
        const double l1 = 1.0 / 3;
        auto fr = run_family(rc, l1, 3 * l1, 3000);
        auto rep = analyze_log_amplitude(rc.long_grid, fr.series, fr.t, fr.u2_scaled, l1, LogCase::ThreeLambda1, 50,
                                         100, 3000);
        t.add("R^2 of u2 sup*sqrt(t) vs log t", rep.amplitude.r2 >= 0.95, detail::fmt("%.4f", rep.amplitude.r2));
        t.add("slope angle to -6i l1 W1 Re[W1 conj W2]", rep.angle_deg <= 15, detail::fmt("%.2f deg", rep.angle_deg));
        t.add("|slope|/|W|", true, detail::fmt("%.3f", rep.magnitude_ratio));
        t.finish();
    });
}

// ---- 8: free-driven system ----
inline CriterionResult criterion_8(const PdeRecipe& rc = {}) {
    return detail::timed(8, "Free-driven system coefficient", [&](CriterionResult& r) {
        detail::Tally t{r};
        const Grid& g = rc.grid;
        PointwiseCubic sys(detail::d21_system<double>());
        PdeState init = initial_state(g, {0.3, 3, 0, 0, 0}, {0, 1, 0, 0, 0});
        SolverConfig c;
        c.dt0 = rc.dt0;
        c.ds0 = rc.ds0;
        c.t_end = 3000;
        c.schedule = {100, rc.rho, 3000};
        auto series = profile_series(g, run(sys, init, g, c));
        auto rep = analyze_free(g, series, fourier(g, init.a1), 100, 3000);
        t.add("w1 - u1_0 hat", rep.w1_drift <= 1e-9, detail::fmt("%.1e", rep.w1_drift));
        t.add("slope angle to -i|W1|^2 W1", rep.angle_deg <= 5, detail::fmt("%.2f deg", rep.angle_deg));
        t.add("|slope| vs quadrature oracle", rep.oracle_rel <= 0.05, detail::fmt("%.2e rel", rep.oracle_rel));
        t.add("slope / display coefficient", true, detail::fmt("%.4f", rep.display_ratio));
        t.finish();
    });
}

// ---- 9: dissipation, amplification and the decoupled system ----
inline CriterionResult criterion_9(const PdeRecipe& rc = {}) {
    return detail::timed(9, "Dissipative and decoupled examples", [&](CriterionResult& r) {
        detail::Tally t{r};
        const Grid& g = rc.grid;
        const double pi = std::numbers::pi;
        {
            PointwiseCubic sys(to_double(detail::two_nls_exact()));
            Gaussian f{0.3, 3, 0, 0, 0}, f2 = f;
            f2.phase = -pi / 4;
            PdeState init = initial_state(g, f, f2);
            SolverConfig c;
            c.dt0 = rc.dt0;
            c.ds0 = rc.ds0;
            c.t_end = 1000;
            c.schedule = {0.25, rc.rho, 1000};
            auto snaps = run(sys, init, g, c);
            auto mass = [&](const PdeState& st) {
                auto o = observables(g, st);
                return o.mass[0] + o.mass[2];
            };
            double prev = mass(init);
            bool decreasing = true;
            std::vector<double> scaled;
            for (auto& st : snaps) {
                double m = mass(st);
                decreasing = decreasing && m < prev;
                prev = m;
                if (st.t >= 10 * (1 - 1e-12)) scaled.push_back(m * std::log(st.t));
            }
            t.add("mass strictly decreasing", decreasing);
            t.add("mass*log t spread on [10,1000]", spread(scaled) < 2, detail::fmt("%.3f", spread(scaled)));

            SolverConfig cb = c;
            cb.t_end = 1;
            cb.schedule = {0.05, 1.25, 1};
            auto back = run(sys, conjugate_state(init), g, cb);
            prev = mass(init);
            bool increasing = true;
            for (auto& st : back) {
                double m = mass(st);
                increasing = increasing && m > prev;
                prev = m;
            }
            t.add("time-conjugated mass increasing", increasing, detail::fmt("%.4f", prev / mass(init)));
        }
        {
            PointwiseCubic sys(to_double(detail::three_nls_exact()));
            PointwiseCubic dec;
            dec.coeff[0] = cplx(0, 1);
            dec.coeff[11] = cplx(0, -1);
            PdeState init = initial_state(g, {0.05, 3, 0, 0, 0}, {0.04, 3, 1, 0.2, pi / 5});
            const cplx I(0, 1);
            auto to_v = [&](const PdeState& st) {
                PdeState v = st;
                for (int j = 0; j < g.N; ++j) {
                    v.a1[j] = st.a1[j] - I * st.a2[j];
                    v.a2[j] = -st.a1[j] - I * st.a2[j];
                }
                return v;
            };
            SolverConfig c;
            c.dt0 = rc.dt0;
            c.ds0 = rc.ds0;
            c.t_end = 20;
            c.schedule = {0.5, 2, 20};
            auto us = run(sys, init, g, c);
            auto vs = run(dec, to_v(init), g, c);
            double worst = 0;
            for (size_t i = 0; i < us.size(); ++i) {
                auto mv = to_v(us[i]);
                worst = std::max({worst, detail::max_diff(mv.a1, vs[i].a1), detail::max_diff(mv.a2, vs[i].a2)});
            }
            t.add("3NLS decoupled residual", worst <= 1e-6, detail::fmt("%.1e", worst));
        }
        t.finish();
    });
}

// ---- 10: rank-zero SR ----
inline CriterionResult criterion_10() {
    return detail::timed(10, "Rank-0 system of representatives", [](CriterionResult& r) {
        detail::Tally t{r};
        struct Row {
            Vec3<Rational> in;
            const char* pattern;
        };
        const std::vector<Row> table{
            {{2, 0, 3}, "definite +"},         {{-2, 1, -3}, "definite -"},
            {{1, 5, 1}, "indefinite pr>0"},    {{0, 1, 0}, "indefinite p=r=0"},
            {{1, 0, -1}, "indefinite q=0"},    {{4, 2, 1}, "semidefinite +"},
            {{0, 0, 5}, "semidefinite +, p=0"}, {{-1, 1, -1}, "semidefinite -"},
            {{0, 0, 0}, "zero"},
        };
        const auto reps = rank0_representatives();
        int bad = 0;
        std::string hit;
        for (auto& row : table) {
            auto res = canonicalize_rank0(row.in);
            double p = to_double(row.in[0]), q = to_double(row.in[1]), rr = to_double(row.in[2]);
            double tr = p + rr, det = p * rr - q * q, disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
            auto sg = [](double x) { return std::abs(x) < 1e-12 ? 0 : (x > 0 ? 1 : -1); };
            int npos = (sg(tr / 2 + disc) > 0) + (sg(tr / 2 - disc) > 0);
            int nneg = (sg(tr / 2 + disc) < 0) + (sg(tr / 2 - disc) < 0);
            auto rep = reps[res.index - 1];
            int rpos = (rep[0] > 0) + (rep[2] > 0), rneg = (rep[0] < 0) + (rep[2] < 0);
            auto mapped = cnslab::detail::apply_kernel_part(to_double(row.in), res.M);
            bool ok = npos == rpos && nneg == rneg && max_abs_diff(mapped, res.pqr) <= 1e-12 && max_abs_diff(res.pqr, rep) == 0.0;
            if (!ok) ++bad;
            hit += std::to_string(res.index);
        }
        t.add("patterns misclassified /9", bad == 0, std::to_string(bad));
        t.add("indices", true, hit);
        t.finish();
    });
}

inline std::vector<int> suite_ids(const std::string& suite) {
    if (suite == "algebra") return {1, 2, 3, 10};
    if (suite == "ode") return {4};
    if (suite == "pde-quick" || suite == "pde") return {5, 6, 7, 8, 9};
    if (suite == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    throw InvalidInput("unknown suite '" + suite + "' (algebra, ode, pde-quick, all)");
}

inline CriterionResult run_criterion(int id, const PdeRecipe& rc = {}) {
    switch (id) {
    case 1: return criterion_1();
    case 2: return criterion_2();
    case 3: return criterion_3();
    case 4: return criterion_4();
    case 5: return criterion_5(rc);
    case 6: return criterion_6(rc);
    case 7: return criterion_7(rc);
    case 8: return criterion_8(rc);
    case 9: return criterion_9(rc);
    case 10: return criterion_10();
    }
    throw InvalidInput("no criterion " + std::to_string(id));
}

/**
 * @brief Run criteria on up to `jobs` worker threads; results come back in id order and
 * `on_done` sees each one as soon as it is available in that order.
 */
inline std::vector<CriterionResult> run_suite(const std::vector<int>& ids, int jobs = 1,
                                              const std::function<void(const CriterionResult&)>& on_done = {},
                                              const PdeRecipe& rc = {}) {
    std::vector<CriterionResult> out;
    if (jobs <= 1) {
        for (int id : ids) {
            out.push_back(run_criterion(id, rc));
            if (on_done) on_done(out.back());
        }
        return out;
    }
    std::vector<std::future<CriterionResult>> pending;
    size_t next = 0;
    auto launch = [&] {
        int id = ids[next++];
        pending.push_back(std::async(std::launch::async, [id, &rc] { return run_criterion(id, rc); }));
    };
    while (next < ids.size() && static_cast<int>(next) < jobs) launch();
    for (size_t i = 0; i < ids.size(); ++i) {
        out.push_back(pending[i].get());
        if (on_done) on_done(out.back());
        if (next < ids.size()) launch();
    }
    return out;
}

} // namespace cnslab::acceptance
