#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

#include <cnslab/pde_sim.hpp>

#include "support.hpp"

using namespace cnslab;
using namespace testing_support;

namespace {

constexpr double kPi = std::numbers::pi;

CubicSystem<double> sysnew(double l1, double l6) {
    CnsaSystem<double> sa;
    sa.lambda[0] = l1;
    sa.lambda[5] = l6;
    return embed_cnsa(sa);
}

CubicSystem<double> d21() {
    CnsaSystem<double> sa;
    sa.lambda[4] = 1;
    return embed_cnsa(sa);
}

CubicSystem<double> two_nls() {
    CubicSystem<double> s;
    s.coeff = {-2, 0, 0, 2, 1, 0, 0, -2, -1, 0, 0, 2};
    return s;
}

double max_diff(const Field& a, const Field& b) {
    double m = 0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Field random_field(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Field f(n);
    for (auto& v : f) v = {g(rng), g(rng)};
    return f;
}

SolverConfig quick(double t_end) {
    SolverConfig c;
    c.t_end = t_end;
    c.schedule = {t_end, 2, t_end};
    return c;
}

} // namespace

TEST_CASE("grid and transforms") {
    CHECK_THROWS_AS(Grid(10, 8), InvalidInput);
    CHECK_THROWS_AS(Grid(10, 100), InvalidInput);
    CHECK_THROWS_AS(Grid(-1, 64), InvalidInput);
    Grid g(20, 256);
    CHECK(g.dx() * g.dxi() * g.N == Catch::Approx(2 * kPi));
    CHECK(g.xi(g.N / 2) == 0.0);
    CHECK(g.x(g.N / 2) == 0.0);

    std::mt19937_64 rng(1);
    Field f = random_field(rng, g.N);
    CHECK(max_diff(inverse_fourier(g, fourier(g, f)), f) < 1e-12);
    CHECK(l2_norm(fourier(g, f), g.dxi()) == Catch::Approx(l2_norm(f, g.dx())).epsilon(1e-13));

    // The transform of exp(-x^2/2) is exp(-xi^2/2).
    Field gauss(g.N);
    for (int j = 0; j < g.N; ++j) gauss[j] = std::exp(-0.5 * g.x(j) * g.x(j));
    Field h = fourier(g, gauss);
    double err = 0;
    for (int k = 0; k < g.N; ++k) err = std::max(err, std::abs(h[k] - std::exp(-0.5 * g.xi(k) * g.xi(k))));
    CHECK(err < 1e-13);
}

TEST_CASE("free_propagate") {
    Grid g(40, 2048);
    SECTION("plane wave is an eigenfunction") {
        int m = g.N / 2 + 7;
        double k = g.xi(m);
        Field f(g.N), want(g.N);
        for (int j = 0; j < g.N; ++j) {
            f[j] = std::polar(1.0, k * g.x(j));
            want[j] = std::polar(1.0, -0.5 * 0.8 * k * k) * f[j];
        }
        CHECK(max_diff(free_propagate(g, f, 0.8), want) < 1e-11);
    }
    SECTION("Gaussian closed form") {
        Field f(g.N), want(g.N);
        for (int j = 0; j < g.N; ++j) {
            double x = g.x(j);
            f[j] = std::exp(-0.5 * x * x);
            cplx z(1, 1.0);
            want[j] = std::exp(-0.5 * x * x / z) / std::sqrt(z);
        }
        CHECK(max_diff(free_propagate(g, f, 1.0), want) < 1e-8);
    }
    SECTION("unitary") {
        std::mt19937_64 rng(2);
        for (int i = 0; i < 5; ++i) {
            Field f = random_field(rng, g.N);
            double tau = std::uniform_real_distribution<double>(-5, 5)(rng);
            CHECK(std::abs(l2_norm(free_propagate(g, f, tau), g.dx()) / l2_norm(f, g.dx()) - 1) < 1e-12);
        }
    }
}

TEST_CASE("nonlinear_flow") {
    std::mt19937_64 rng(3);
    SECTION("zero nonlinearity is the identity") {
        Field a = random_field(rng, 64), b = random_field(rng, 64);
        Field a0 = a, b0 = b;
        nonlinear_flow(PointwiseCubic{}, a, b, 0.3);
        CHECK(a == a0);
        CHECK(b == b0);
    }
    SECTION("matches the ODE integrator at a point") {
        OdeConfig cfg;
        cfg.rel_tol = 1e-13;
        cfg.abs_tol = 1e-15;
        cfg.t1 = 1e-2;
        // Pointwise magnitudes of PDE data stay well below 1.
        std::normal_distribution<double> n(0.0, 0.4);
        for (int i = 0; i < 50; ++i) {
            auto s = random_system(rng);
            Pair a{cplx(n(rng), n(rng)), cplx(n(rng), n(rng))};
            Field f1{a[0]}, f2{a[1]};
            nonlinear_flow(PointwiseCubic(s), f1, f2, 1e-2);
            Pair want = integrate(s, a, cfg).at(1e-2);
            REQUIRE(std::abs(f1[0] - want[0]) <= 1e-10);
            REQUIRE(std::abs(f2[0] - want[1]) <= 1e-10);
        }
    }
    SECTION("2NLS keeps the pair (u, e^{-i pi/4} u)") {
        Field a = random_field(rng, 32), b(32);
        for (auto& v : a) v *= 0.5;
        cplx rot = std::polar(1.0, -kPi / 4);
        for (int j = 0; j < 32; ++j) b[j] = rot * a[j];
        nonlinear_flow(PointwiseCubic(two_nls()), a, b, 0.2);
        for (int j = 0; j < 32; ++j) REQUIRE(std::abs(b[j] - rot * a[j]) < 1e-14);
    }
    SECTION("divergence is reported") {
        PointwiseCubic blow;
        blow.coeff[0] = cplx(0, 1);  // i|u|^2 u grows forward
        Field a{cplx(10, 0)}, b{cplx(0, 0)};
        CHECK_THROWS_AS(nonlinear_flow(blow, a, b, 1.0, 4, 1e3), SubstepDivergence);
    }
}

TEST_CASE("run: free system and frames") {
    Grid g(60, 1024);
    PdeState init = initial_state(g, {0.1, 3, -2, 0.5, 0}, {0.05, 2, 4, -0.3, 1});
    SECTION("physical frame reproduces U(t)") {
        auto cfg = quick(3.0);
        cfg.t_switch = std::numeric_limits<double>::infinity();
        cfg.dt0 = 0.01;
        PdeState st = run_to(PointwiseCubic{}, init, g, cfg);
        CHECK(st.frame == Frame::Physical);
        CHECK(max_diff(st.a1, free_propagate(g, init.a1, 3.0)) < 1e-9);
        CHECK(max_diff(st.a2, free_propagate(g, init.a2, 3.0)) < 1e-9);
    }
    SECTION("profile frame is exact for the free flow") {
        auto cfg = quick(50.0);
        PdeState st = run_to(PointwiseCubic{}, init, g, cfg);
        CHECK(st.frame == Frame::Profile);
        PdeState back = to_physical_frame(g, st);
        CHECK(max_diff(back.a1, free_propagate(g, init.a1, 50.0)) < 1e-9);
        auto [w1, w2] = profile(g, st);
        CHECK(max_diff(w1, fourier(g, init.a1)) < 1e-10);
        CHECK(max_diff(w2, fourier(g, init.a2)) < 1e-10);
    }
    SECTION("frame conversions are inverse") {
        PdeState st{2.5, Frame::Physical, free_propagate(g, init.a1, 2.5), free_propagate(g, init.a2, 2.5)};
        PdeState p = to_profile_frame(g, st);
        CHECK(max_diff(to_physical_frame(g, p).a1, st.a1) < 1e-13);
        auto o1 = observables(g, st), o2 = observables(g, p);
        CHECK(o1.l2[0] == Catch::Approx(o2.l2[0]).epsilon(1e-12));
        CHECK(o1.mass[1] == Catch::Approx(o2.mass[1]).epsilon(1e-10));
        auto [x1, x2] = profile(g, st);
        auto [y1, y2] = profile(g, p);
        CHECK(max_diff(x1, y1) < 1e-12);
    }
    SECTION("profile-frame samples are pointwise values of u") {
        // At t = 0.75 the xi grid scaled by t lies inside the box.
        PdeState st{0.75, Frame::Physical, free_propagate(g, init.a1, 0.75), init.a2};
        PdeState p = to_profile_frame(g, st);
        auto pts = sample_points(g, p);
        auto [u1, u2] = physical_samples(g, p);
        Field spec = fourier(g, st.a1);
        for (int k = g.N / 2 - 40; k < g.N / 2 + 40; k += 7) {
            CHECK(std::abs(u1[k] - eval_from_spectrum(g, spec, pts[k])) < 1e-6);
        }
    }
    SECTION("schedule") {
        auto cfg = quick(10);
        cfg.schedule = {1, 2, 10};
        auto snaps = run(PointwiseCubic{}, init, g, cfg);
        REQUIRE(snaps.size() == 5);
        CHECK(snaps[0].t == 1.0);
        CHECK(snaps[3].t == 8.0);
        CHECK(snaps[4].t == 10.0);
    }
}

TEST_CASE("run: nonlinear systems") {
    Grid g(60, 1024);
    SECTION("Strang splitting is second order") {
        PointwiseCubic sys(sysnew(1.0, 2.0));
        PdeState init = initial_state(g, {0.8, 2, 0, 0.3, 0}, {0.6, 2, 1, 0, 0.5});
        auto at = [&](double dt) {
            auto cfg = quick(1.0);
            cfg.t_switch = std::numeric_limits<double>::infinity();
            cfg.dt0 = dt;
            return run_to(sys, init, g, cfg);
        };
        PdeState a = at(0.04), b = at(0.02), c = at(0.01);
        double ratio = max_diff(a.a2, b.a2) / max_diff(b.a2, c.a2);
        CHECK(ratio == Catch::Approx(4.0).epsilon(0.2));
    }
    SECTION("hybrid and physical runs agree") {
        PointwiseCubic sys(sysnew(1.0 / 3, 2.0));
        PdeState init = initial_state(g, {0.3, 3, 0, 0, 0}, {0.3, 3, 0, 0, -kPi / 3});
        auto cfg = quick(4.0);
        cfg.dt0 = 1e-3;
        cfg.ds0 = 1e-3;
        PdeState hy = to_physical_frame(g, run_to(sys, init, g, cfg));
        cfg.t_switch = std::numeric_limits<double>::infinity();
        PdeState ph = run_to(sys, init, g, cfg);
        CHECK(max_diff(hy.a1, ph.a1) < 1e-6);
        CHECK(max_diff(hy.a2, ph.a2) < 1e-6);
    }
    SECTION("mass kernel is conserved") {
        // g has the spatial width of u at the switch, so the xi grid must cover it.
        Grid g(60, 2048);
        PointwiseCubic sys(sysnew(1.0 / 3, 1.0));
        PdeState init = initial_state(g, {0.1, 7, 0, 0, 0}, {0.1, 7, 0, 0, -kPi / 3});
        auto cfg = quick(100);
        cfg.dt0 = 1e-2;
        cfg.schedule = {1, 2, 100};
        auto snaps = run(sys, init, g, cfg);
        auto o0 = observables(g, init);
        for (auto& st : snaps) {
            auto o = observables(g, st);
            REQUIRE(std::abs(o.mass[0] / o0.mass[0] - 1) < 1e-6);
            REQUIRE(std::abs(o.mass[1] / o0.mass[1] - 1) < 1e-6);
        }
    }
    SECTION("dissipative pair loses mass, conjugated data gains it") {
        PointwiseCubic sys(two_nls());
        Gaussian f{0.3, 3, 0, 0, 0}, f2 = f;
        f2.phase = -kPi / 4;
        PdeState init = initial_state(g, f, f2);
        auto cfg = quick(20);
        cfg.schedule = {0.5, 1.5, 20};
        auto snaps = run(sys, init, g, cfg);
        double prev = observables(g, init).l2[0];
        for (auto& st : snaps) {
            auto o = observables(g, st);
            double m = o.mass[0] + o.mass[2];
            REQUIRE(m < prev * prev * 2);
            prev = std::sqrt(m / 2);
        }
        // d/dt ||v||^2 = -2||v||_4^4 for the reduced equation, checked at t = 0.
        auto cfg2 = quick(1e-3);
        cfg2.dt0 = 1e-4;
        PdeState s1 = run_to(sys, init, g, cfg2);
        double l4 = 0;
        for (auto& v : init.a1) l4 += std::norm(v) * std::norm(v);
        l4 *= g.dx();
        double rate = (observables(g, s1).mass[0] - observables(g, init).mass[0]) / 1e-3;
        CHECK(rate == Catch::Approx(-2 * l4).epsilon(1e-3));

        PdeState conj = run_to(sys, conjugate_state(init), g, quick(1.0));
        auto oc = observables(g, conj), oi = observables(g, init);
        CHECK(oc.mass[0] + oc.mass[2] > oi.mass[0] + oi.mass[2]);
    }
    SECTION("free component of the d21 system") {
        PointwiseCubic sys(d21());
        PdeState init = initial_state(g, {0.2, 3, 0, 0.2, 0}, {0, 1, 0, 0, 0});
        auto cfg = quick(100);
        auto st = run_to(sys, init, g, cfg);
        auto [w1, w2] = profile(g, st);
        CHECK(max_diff(w1, fourier(g, init.a1)) < 1e-9);
        CHECK(sup_norm(w2) > 1e-3);
    }
    SECTION("energy is conserved for 2NLS") {
        PointwiseCubic sys(two_nls());
        PdeState init = initial_state(g, {0.2, 2, 0, 0.4, 0}, {0.15, 2, 1, 0, 1});
        Vec3<double> abc{1, 0, -1};
        REQUIRE(energy_certificate(to_rep(two_nls()), abc).valid);
        auto cfg = quick(5);
        cfg.t_switch = std::numeric_limits<double>::infinity();
        cfg.dt0 = 2e-3;
        double e0 = energy_functional(g, init, two_nls(), abc);
        double e1 = energy_functional(g, run_to(sys, init, g, cfg), two_nls(), abc);
        CHECK(std::abs(e1 - e0) < 1e-6 * std::abs(e0) + 1e-9);
        // A non-certified combination drifts.
        Vec3<double> bad{1, 0, 1};
        double b0 = energy_functional(g, init, two_nls(), bad);
        double b1 = energy_functional(g, run_to(sys, init, g, cfg), two_nls(), bad);
        CHECK(std::abs(b1 - b0) > 1e-4 * std::abs(b0));
    }
    SECTION("boundary leak is loud") {
        Grid small(10, 256);
        PdeState init = initial_state(small, {0.1, 1, 0, 3, 0}, {0, 1, 0, 0, 0});
        auto cfg = quick(5);
        cfg.t_switch = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(run(PointwiseCubic{}, init, small, cfg), BoundaryLeak);
    }
}

TEST_CASE("profile") {
    Grid g(60, 1024);
    PdeState init = initial_state(g, {0.2, 2, 1, 0.4, 0}, {0.1, 3, -1, 0, 0});
    Field u0h = fourier(g, init.a1);
    for (double t : {0.5, 2.0, 7.0}) {
        PdeState st{t, Frame::Physical, free_propagate(g, init.a1, t), free_propagate(g, init.a2, t)};
        auto [w1, w2] = profile(g, st);
        CHECK(max_diff(w1, u0h) < 1e-10);
        CHECK(l2_norm(w2, g.dxi()) == Catch::Approx(l2_norm(st.a2, g.dx())).epsilon(1e-12));
    }
    CHECK_THROWS_AS(profile(g, init), DomainError);
}

TEST_CASE("Dollard factors") {
    Grid g(40, 2048);
    Field f(g.N);
    for (int j = 0; j < g.N; ++j) f[j] = std::exp(-0.5 * g.x(j) * g.x(j)) * std::polar(1.0, 0.3 * g.x(j));
    SECTION("chirp keeps the modulus") {
        Field c = chirp(g, f, 0.7);
        for (int j = 0; j < g.N; ++j) REQUIRE(std::abs(c[j]) == Catch::Approx(std::abs(f[j])).epsilon(1e-15).margin(1e-300));
        CHECK_THROWS_AS(chirp(g, f, 0.0), DomainError);
    }
    SECTION("M D F M matches the spectral propagator") {
        for (double t : {1.5, 3.0}) CHECK(max_diff(dollard_apply(g, f, t), free_propagate(g, f, t)) < 1e-6);
        Field u = free_propagate(g, f, 2.0);
        CHECK(max_diff(dollard_inverse(g, u, 2.0), f) < 1e-6);
    }
    SECTION("D D^{-1} is the identity") {
        CHECK(max_diff(dilate(g, undilate(g, f, 2.0), 2.0), f) < 1e-8);
        CHECK_THROWS_AS(dilate(g, f, 0.0), DomainError);
    }
}

TEST_CASE("observables") {
    Grid g(60, 2048);
    PdeState zero{1.0, Frame::Physical, Field(g.N), Field(g.N)};
    auto oz = observables(g, zero);
    CHECK(oz.linf[0] == 0.0);
    CHECK(oz.mass[1] == 0.0);
    CHECK(oz.h01[1] == 0.0);

    double A = 0.3, w = 2.5;
    PdeState st = initial_state(g, {A, w, 0, 0, 0}, {A, w, 0, 0, kPi / 3});
    auto o = observables(g, st);
    double sq = A * A * w * std::sqrt(kPi);
    CHECK(std::abs(o.linf[0] - A) < 1e-8);
    CHECK(std::abs(o.l2[0] - std::sqrt(sq)) < 1e-8);
    CHECK(std::abs(o.h01[0] - std::sqrt(sq * (1 + w * w / 2))) < 1e-8);
    CHECK(std::abs(o.mass[1] - sq * std::cos(kPi / 3)) < 1e-8);
    CHECK(mass_functional(o, {1, 0, 0}) == Catch::Approx(o.mass[0]));
}

TEST_CASE("3NLS decouples under v1 = u1 - i u2, v2 = -u1 - i u2") {
    CubicSystem<double> s;
    s.coeff = {0, 2, -1, 0, 0, 1, -1, 0, 0, -2, 1, 0};
    PointwiseCubic sys(s), dec;
    dec.coeff[0] = cplx(0, 1);
    dec.coeff[11] = cplx(0, -1);
    const cplx I(0, 1);
    auto M = [&](const Pair& u) { return Pair{u[0] - I * u[1], -u[0] - I * u[1]}; };
    std::mt19937_64 rng(71);
    for (int i = 0; i < 200; ++i) {
        Pair u = random_pair(rng, 1.0);
        Pair lhs = dec(M(u)), rhs = M(sys(u));
        REQUIRE(std::abs(lhs[0] - rhs[0]) <= 1e-13);
        REQUIRE(std::abs(lhs[1] - rhs[1]) <= 1e-13);
    }
}
