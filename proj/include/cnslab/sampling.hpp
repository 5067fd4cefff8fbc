#pragma once

#include <random>
#include <stdexcept>
#include <tuple>

#include "classification.hpp"
#include "ode_sim.hpp"
#include "system_algebra.hpp"

namespace cnslab::sampling {

inline Rational random_rational(std::mt19937_64& rng, int num = 20, int den = 9) {
    std::uniform_int_distribution<int> n(-num, num), d(1, den);
    return Rational(n(rng), d(rng));
}

inline CubicSystem<Rational> random_rational_system(std::mt19937_64& rng) {
    CubicSystem<Rational> s;
    for (auto& c : s.coeff) c = random_rational(rng);
    return s;
}

inline CubicSystem<double> random_system(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    CubicSystem<double> s;
    for (auto& c : s.coeff) c = g(rng);
    return s;
}

/// Random well-conditioned change of unknowns.
inline UnknownChange<double> random_change(std::mt19937_64& rng, double max_cond = 20.0) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        UnknownChange<double> m{g(rng), g(rng), g(rng), g(rng)};
        double fro2 = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
        double det = std::abs(m.det());
        if (det < 0.2) continue;
        // cond_2 bound from fro^2 / |det|
        if (fro2 / det > max_cond) continue;
        return m;
    }
}

inline UnknownChange<Rational> random_rational_change(std::mt19937_64& rng) {
    for (;;) {
        UnknownChange<Rational> m{random_rational(rng, 5, 3), random_rational(rng, 5, 3), random_rational(rng, 5, 3),
                                  random_rational(rng, 5, 3)};
        if (m.det() != 0) return m;
    }
}

inline ZClass random_class(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 18);
    std::uniform_real_distribution<double> u(0.05, 3.0), th(0.05, 1.5);
    int s = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
    switch (pick(rng)) {
    case 0: return {1, "k", u(rng), 0, 0};
    case 1: return {1, "110", 0, 0, 0};
    case 2: return {1, "011", 0, 0, 0};
    case 3: return {1, "101", 0, 0, 0};
    case 4: return {1, "-101", 0, 0, 0};
    case 5: return {1, "theta", 0, 0, th(rng)};
    case 6: return {1, "theta", 0, 0, 0.0};
    case 7: return {2, "", u(rng), s, 0};
    case 8: return {3, "", 0, s, 0};
    case 9: return {4, "a", 0, s, 0};
    case 10: return {4, "b", 0, s, 0};
    case 11: return {5, "", 0, 0, 0};
    case 12: return {6, "", 0, 0, 0};
    case 13: return {7, "", 0, 0, 0};
    case 14: return {8, "", 0, 0, 0};
    case 15: return {9, "", 0, 0, 0};
    default: return {7, "", 0, 0, 0};
    }
}

inline Vec3<double> random_pqr(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::bernoulli_distribution zero(0.3);
    Vec3<double> v;
    for (double& x : v) x = zero(rng) ? 0.0 : g(rng);
    return v;
}

/// Random system with rank C <= 1, hidden behind a random change of unknowns.
inline CubicSystem<double> random_low_rank_system(std::mt19937_64& rng) {
    auto pqr = random_pqr(rng);
    Mat3<double> C = Mat3<double>::zero();
    int mode = std::uniform_int_distribution<int>(0, 9)(rng);
    if (mode == 0) {
        C = Mat3<double>::zero();
    } else if (mode == 1) {
        std::normal_distribution<double> g;
        C = Mat3<double>::outer({g(rng), g(rng), g(rng)}, {g(rng), g(rng), g(rng)});
    } else {
        C = template_matrix(random_class(rng));
    }
    Rep rep{C, pqr[0], pqr[1], pqr[2]};
    return from_rep(transform(rep, random_change(rng, 6.0)));
}

inline Pair random_pair(std::mt19937_64& rng, double amp) {
    std::normal_distribution<double> g(0.0, amp);
    return {cplx(g(rng), g(rng)), cplx(g(rng), g(rng))};
}

/// Draw (system, data) until the trajectory stays finite on [0, t1].
template <class MakeSystem>
std::tuple<CubicSystem<double>, Pair, Trajectory> finite_run(std::mt19937_64& rng, MakeSystem make, double amp, double t1) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        auto s = make();
        auto a0 = random_pair(rng, amp);
        try {
            auto tr = integrate(s, a0, OdeConfig{0, t1});
            double peak = 0;
            for (auto& v : tr.y) peak = std::max({peak, std::abs(v[0]), std::abs(v[1])});
            if (peak <= 4 * amp + 1) return {s, a0, tr};
        } catch (const StepFailure&) {
        }
    }
    throw std::runtime_error("no finite sample");
}

/// Random system whose C has rank <= 2, so that ker C is nontrivial.
inline CubicSystem<double> random_kernel_system(std::mt19937_64& rng) {
    auto rep = to_rep(random_system(rng));
    std::normal_distribution<double> g;
    Vec3<double> a{g(rng), g(rng), g(rng)}, b{g(rng), g(rng), g(rng)}, c{g(rng), g(rng), g(rng)}, d{g(rng), g(rng), g(rng)};
    rep.C = Mat3<double>::outer(a, b);
    if (rng() % 2) rep.C = rep.C + Mat3<double>::outer(c, d);
    return from_rep(rep);
}

} // namespace cnslab::sampling
