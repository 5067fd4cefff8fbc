#include <catch2/catch_amalgamated.hpp>

#include <cnslab/conservation.hpp>

#include "support.hpp"

using namespace cnslab;
using namespace testing_support;

namespace {

CubicSystem<Rational> rsys(std::array<int, 12> c) {
    CubicSystem<Rational> s;
    for (int j = 0; j < 12; ++j) s.coeff[j] = c[j];
    return s;
}
const auto kTwoNls = rsys({-2, 0, 0, 2, 1, 0, 0, -2, -1, 0, 0, 2});
const auto kThreeNls = rsys({0, 2, -1, 0, 0, 1, -1, 0, 0, -2, 1, 0});

CubicSystem<Rational> cnsa(std::initializer_list<std::pair<int, Rational>> entries) {
    CnsaSystem<Rational> sa;
    for (auto& [j, v] : entries) sa.lambda[j - 1] = v;
    return embed_cnsa(sa);
}

} // namespace

TEST_CASE("kernel basis") {
    auto k2 = mass_like_kernel(to_rep(kTwoNls));
    REQUIRE(k2.size() == 1);
    CHECK(k2[0].abc == Vec3<Rational>{1, 0, -1});

    auto k2d = mass_like_kernel(to_double(to_rep(kTwoNls)));
    REQUIRE(k2d.size() == 1);
    CHECK(max_abs_diff(k2d[0].abc, Vec3<double>{1, 0, -1}) <= 1e-14);

    CHECK(mass_like_kernel(MatrixKernelRep<Rational>{}).size() == 3);
    CHECK(mass_like_kernel(MatrixKernelRep<double>{}).size() == 3);
    CHECK(mass_like_kernel(to_rep(kThreeNls)).empty());
    CHECK(to_rep(kThreeNls).C.det() != 0);

    std::mt19937_64 rng(31);
    for (int i = 0; i < 300; ++i) {
        auto rep = to_rep(random_rational_system(rng));
        int want = i % 4;
        // force rank 3 - want
        if (want >= 1) rep.C = Mat3<Rational>::outer(rep.C.row(0), rep.C.row(1)) + (want == 1 ? Mat3<Rational>::outer(rep.C.row(2), rep.C.row(0)) : Mat3<Rational>::zero());
        if (want == 3) rep.C = Mat3<Rational>::zero();
        auto basis = mass_like_kernel(rep);
        REQUIRE(static_cast<int>(basis.size()) == 3 - rank_c(rep.C));
        for (auto& q : basis) REQUIRE(rep.C * q.abc == Vec3<Rational>{0, 0, 0});
        auto based = mass_like_kernel(to_double(rep));
        REQUIRE(based.size() == basis.size());
        for (auto& q : based) REQUIRE(norm2(to_double(rep).C * q.abc) <= 1e-10 * std::max(1.0, max_abs(rep.C)));
    }
}

TEST_CASE("imaginary invariant") {
    CHECK(imaginary_invariant(cnsa({{1, Rational(2, 5)}, {6, Rational(2, 5)}})));
    CHECK(imaginary_invariant(CubicSystem<Rational>{}));
    auto d21 = cnsa({{5, 1}});
    CHECK_FALSE(imaginary_invariant(d21));
    CHECK(b_matrix(d21)(0, 0) == -12);
}

TEST_CASE("global existence criterion") {
    auto zero = global_existence_criterion(MatrixKernelRep<Rational>{});
    CHECK(zero.holds());
    CHECK(max_abs_diff(zero.witness, Vec3<double>{1, 0, 1}) <= 1e-12);

    auto two = global_existence_criterion(to_rep(kTwoNls));
    CHECK(two.verdict == GlobalExistence::Verdict::NotGuaranteed);
    CHECK(two.margin == Catch::Approx(-0.5));
    CHECK_FALSE(global_existence_criterion(to_rep(kThreeNls)).holds());

    MatrixKernelRep<double> line;
    line.C = Mat3<double>::from_rows({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});  // kernel (1,0,0)
    CHECK(global_existence_criterion(line).verdict == GlobalExistence::Verdict::Indeterminate);

    MatrixKernelRep<double> plane;
    plane.C = Mat3<double>::outer({1, 0, 0}, {1, 0, -1});
    auto g = global_existence_criterion(plane);
    CHECK(g.holds());
    CHECK(g.witness[1] * g.witness[1] < g.witness[0] * g.witness[2]);

    // sampled oracle over the kernel sphere
    std::mt19937_64 rng(32);
    std::normal_distribution<double> n;
    for (int i = 0; i < 100; ++i) {
        Vec3<double> u{n(rng), n(rng), n(rng)}, v{n(rng), n(rng), n(rng)};
        MatrixKernelRep<double> rep;
        rep.C = i % 2 ? Mat3<double>::outer(u, v) : Mat3<double>::outer(u, v) + Mat3<double>::outer(v, u);
        auto res = global_existence_criterion(rep);
        auto basis = null_space(rep.C);
        double best = -1e300;
        for (int k = 0; k < 20000; ++k) {
            Vec3<double> w{0, 0, 0};
            for (auto& b : basis) {
                double c = n(rng);
                for (int j = 0; j < 3; ++j) w[j] += c * b[j];
            }
            double nw = norm2(w);
            for (double& x : w) x /= nw;
            best = std::max(best, w[0] * w[2] - w[1] * w[1]);
        }
        REQUIRE(res.margin >= best - 1e-12);
        REQUIRE(res.margin <= best + 0.05);
        REQUIRE(res.holds() == (best > 1e-3 ? true : res.holds()));
        if (res.holds()) REQUIRE(res.witness[1] * res.witness[1] < res.witness[0] * res.witness[2]);
    }
}

TEST_CASE("energy certificate") {
    std::mt19937_64 rng(33);
    for (int i = 0; i < 50; ++i) {
        CnsaSystem<Rational> sa;
        for (auto& l : sa.lambda) l = random_rational(rng);
        auto rep = to_rep(embed_cnsa(sa));
        rep.C = Mat3<Rational>::outer(rep.C.row(0), Vec3<Rational>{1, 0, 1}) - Mat3<Rational>::outer(Vec3<Rational>{0, 0, 1}, Vec3<Rational>{0, 1, 0});
        rep.C(0, 0) = rep.C(0, 0) - rep.C.trace();
        REQUIRE(rep.C.trace() == 0);
        for (auto& q : mass_like_kernel(rep)) REQUIRE(energy_certificate(rep, q.abc).valid);
    }
    MatrixKernelRep<Rational> zero;
    CHECK(energy_certificate(zero, Vec3<Rational>{3, -1, 2}).valid);
    MatrixKernelRep<Rational> p1;
    p1.p = 1;
    auto bad = energy_certificate(p1, Vec3<Rational>{0, 0, 1});
    CHECK_FALSE(bad.valid);
    CHECK(to_double(energy_matrix(p1) * Vec3<Rational>{0, 0, 1}) == Vec3<double>{0, 1, 0});

    CubicSystem<double> s;
    for (int j = 0; j < 12; ++j) s.coeff[j] = j + 1;
    auto q = energy_quartic(s, Vec3<double>{1, 2, 3});
    CHECK(q == std::array<double, 6>{1 + 2 * 7, 4 * (3 + 2 * 9), 2 * (4 + 2 * 10), 2 * (5 + 2 * 11), 4 * (2 * 5 + 3 * 11), 2 * 6 + 3 * 12});
}
