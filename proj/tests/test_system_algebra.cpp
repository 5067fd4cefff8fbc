#include <catch2/catch_amalgamated.hpp>

#include <cnslab/system_algebra.hpp>

#include "support.hpp"

using namespace cnslab;
using namespace testing_support;
using Catch::Approx;

namespace {

template <class T>
CubicSystem<T> make(std::initializer_list<T> c) {
    CubicSystem<T> s;
    int j = 0;
    for (auto& x : c) s.coeff[j++] = x;
    return s;
}

CubicSystem<Rational> two_nls() {
    return make<Rational>({-2, 0, 0, 2, 1, 0, 0, -2, -1, 0, 0, 2});
}
CubicSystem<Rational> three_nls() {
    return make<Rational>({0, 2, -1, 0, 0, 1, -1, 0, 0, -2, 1, 0});
}

Mat3<Rational> rows(std::initializer_list<std::initializer_list<Rational>> r) { return Mat3<Rational>::from_rows(r); }

} // namespace

TEST_CASE("to_rep reproduces the printed matrices") {
    auto r2 = to_rep(two_nls());
    CHECK(r2.C == rows({{0, 1, 0}, {1, 0, 1}, {0, 1, 0}}));
    CHECK(r2.pqr() == Vec3<Rational>{0, 0, 0});

    auto r3 = to_rep(three_nls());
    CHECK(r3.C == rows({{3, 0, 1}, {0, 2, 0}, {1, 0, 3}}));
    CHECK(r3.pqr() == Vec3<Rational>{0, 0, 0});

    auto z = to_rep(CubicSystem<Rational>{});
    CHECK(z.C == Mat3<Rational>::zero());
    CHECK(z.is_cnsa());
}

TEST_CASE("from_rep inverts to_rep exactly") {
    std::mt19937_64 rng(11);
    CHECK(from_rep(MatrixKernelRep<Rational>{}) == CubicSystem<Rational>{});
    CHECK(from_rep(to_rep(three_nls())) == three_nls());
    for (int i = 0; i < 1000; ++i) {
        auto s = random_rational_system(rng);
        REQUIRE(from_rep(to_rep(s)) == s);
        MatrixKernelRep<Rational> rep;
        for (auto& x : rep.C.a) x = random_rational(rng);
        rep.p = random_rational(rng);
        rep.q = random_rational(rng);
        rep.r = random_rational(rng);
        REQUIRE(to_rep(from_rep(rep)) == rep);
    }
}

TEST_CASE("CNS_A embedding matches its matrix") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        CnsaSystem<Rational> sa;
        for (auto& l : sa.lambda) l = random_rational(rng);
        auto rep = to_rep(embed_cnsa(sa));
        REQUIRE(rep.C == cnsa_matrix(sa));
        REQUIRE(rep.is_cnsa());
    }
    CnsaSystem<Rational> d21;
    d21.lambda[4] = 1;
    auto rep = to_rep(embed_cnsa(d21));
    CHECK(rep.C == rows({{0, 0, -3}, {0, 0, 0}, {0, 0, 0}}));

    CnsaSystem<Rational> sn;
    Rational l1(1, 3), l6(2);
    sn.lambda[0] = l1;
    sn.lambda[5] = l6;
    CHECK(to_rep(embed_cnsa(sn)).C == rows({{0, -3 * l1 + l6, 0}, {0, 0, -l6}, {0, 0, 0}}));
    CHECK(embed_cnsa(CnsaSystem<Rational>{}) == CubicSystem<Rational>{});
}

TEST_CASE("induced matrix") {
    auto [D, Di] = induced_matrix(UnknownChange<Rational>::identity());
    CHECK(D == Mat3<Rational>::identity());
    CHECK(Di == Mat3<Rational>::identity());

    auto [Ds, Dsi] = induced_matrix(UnknownChange<Rational>{0, 1, 1, 0});
    CHECK(Ds == rows({{0, 0, -1}, {0, -1, 0}, {-1, 0, 0}}));

    auto [Dm, Dmi] = induced_matrix(UnknownChange<Rational>{-1, 0, 0, -1});
    CHECK(Dm == Mat3<Rational>::identity());

    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        auto m = random_change(rng);
        auto [Dd, Ddi] = induced_matrix(m);
        REQUIRE(max_abs_diff(Mat3<double>(Dd * Ddi), Mat3<double>::identity()) <= 1e-12);
        REQUIRE(Dd.det() == Approx(1.0).margin(1e-10).epsilon(1e-10));
    }
    CHECK_THROWS_AS(induced_matrix(UnknownChange<double>{1, 2, 2, 4}), SingularTransform);
    CHECK_THROWS_AS(induced_matrix(UnknownChange<Rational>{1, 2, 2, 4}), SingularTransform);
}

TEST_CASE("transform covariance") {
    auto r3 = to_rep(three_nls());
    CHECK(transform(r3, UnknownChange<Rational>::identity()) == r3);
    auto scaled = transform(r3, UnknownChange<Rational>{2, 0, 0, 2});
    CHECK(r3.C.trace() == 8);
    CHECK(scaled.C.trace() == 2);

    std::mt19937_64 rng(14);
    for (int i = 0; i < 1000; ++i) {
        auto s = random_rational_system(rng);
        if (i % 4 == 1) {
            // force lower rank to exercise the rank invariant
            auto rep = to_rep(s);
            rep.C = Mat3<Rational>::outer(rep.C.row(0), rep.C.row(1));
            s = from_rep(rep);
        }
        auto m = random_rational_change(rng);
        auto rep = to_rep(s);
        auto out = transform(rep, m);
        REQUIRE(rank_c(out.C) == rank_c(rep.C));
        REQUIRE(sign_of(Rational(out.q * out.q - out.p * out.r)) == sign_of(Rational(rep.q * rep.q - rep.p * rep.r)));
        REQUIRE(out.C.trace() * m.det() == rep.C.trace());

        auto repd = to_double(rep);
        auto md = random_change(rng);
        auto outd = transform(repd, md);
        REQUIRE(rank_c(outd.C) == rank_c(rep.C));
        REQUIRE(std::abs(outd.C.trace() - repd.C.trace() / md.det()) <= 1e-10 * std::max(1.0, std::abs(repd.C.trace())));
    }
}

TEST_CASE("action composes as M2 M1") {
    std::mt19937_64 rng(15);
    for (int i = 0; i < 200; ++i) {
        auto rep = to_rep(random_rational_system(rng));
        auto m1 = random_rational_change(rng);
        auto m2 = random_rational_change(rng);
        REQUIRE(transform(transform(rep, m1), m2) == transform(rep, compose(m2, m1)));
        REQUIRE(transform(transform(rep, m1), inverse(m1)) == rep);
    }
}

TEST_CASE("transform_system keeps invariants of the 2NLS system") {
    auto s = transform_system(two_nls(), UnknownChange<Rational>{1, 0, 0, -1});
    auto rep = to_rep(s);
    CHECK(rank_c(rep.C) == 2);
    CHECK(rep.C.trace() == 0);
    CHECK(transform_system(two_nls(), UnknownChange<Rational>::identity()) == two_nls());
}

TEST_CASE("b matrix") {
    CHECK(b_matrix(CubicSystem<Rational>{}) == Mat3<Rational>::zero());
    CnsaSystem<Rational> sa;
    sa.lambda[0] = Rational(3, 7);
    sa.lambda[5] = Rational(3, 7);
    CHECK(b_matrix(embed_cnsa(sa)) == Mat3<Rational>::zero());
    sa.lambda[0] = Rational(1, 3);
    sa.lambda[5] = 2;
    CHECK_FALSE(b_matrix(embed_cnsa(sa)) == Mat3<Rational>::zero());
    auto B = b_matrix(three_nls());
    CHECK(B == B.transpose());
}

TEST_CASE("rank and rank-one factors") {
    Mat3<double> d21 = Mat3<double>::from_rows({{0, 0, -3}, {0, 0, 0}, {0, 0, 0}});
    auto [nu, d] = rank_one_factor(d21);
    CHECK(max_abs_diff(nu, Vec3<double>{0, 0, 1}) == 0.0);
    CHECK(max_abs_diff(d, Vec3<double>{-3, 0, 0}) == 0.0);

    Mat3<double> z9 = Mat3<double>::from_rows({{1, 0, 1}, {0, 0, 0}, {1, 0, 1}});
    auto nu9 = nu_vector(z9);
    auto d9 = d_vector(z9);
    CHECK(max_abs_diff(nu9, Vec3<double>{M_SQRT1_2, 0, M_SQRT1_2}) <= 1e-15);
    CHECK(max_abs_diff(Mat3<double>::outer(d9, nu9), z9) <= 1e-10);

    CHECK_THROWS_AS(nu_vector(to_double(to_rep(two_nls()).C)), RankMismatch);
    CHECK(rank_c(to_rep(two_nls()).C) == 2);
    CHECK(rank_c(to_rep(three_nls()).C) == 3);
    CHECK(rank_c(Mat3<double>::zero()) == 0);

    std::mt19937_64 rng(16);
    std::normal_distribution<double> g;
    for (int i = 0; i < 1000; ++i) {
        Vec3<double> u{g(rng), g(rng), g(rng)}, v{g(rng), g(rng), g(rng)};
        auto C = Mat3<double>::outer(u, v);
        auto [n, dd] = rank_one_factor(C);
        REQUIRE(std::abs(norm2(n) - 1) <= 1e-14);
        REQUIRE(max_abs_diff(Mat3<double>::outer(dd, n), C) <= 1e-10);
        double first = std::abs(n[0]) > 1e-14 ? n[0] : (std::abs(n[1]) > 1e-14 ? n[1] : n[2]);
        REQUIRE(first > 0);
    }
}

TEST_CASE("rational parsing") {
    CHECK(parse_rational("1/3") == Rational(1, 3));
    CHECK(parse_rational("-0.125") == Rational(-1, 8));
    CHECK(parse_rational("2.5e-1") == Rational(1, 4));
    CHECK(parse_rational(" 7 ") == Rational(7));
    CHECK_THROWS_AS(parse_rational("1/0"), InvalidInput);
    CHECK_THROWS_AS(parse_rational("abc"), InvalidInput);
    CHECK(rational_to_string(Rational(-4, 6)) == "-2/3");
}
