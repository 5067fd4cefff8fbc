#include <catch2/catch_amalgamated.hpp>

#include <cnslab/acceptance.hpp>
#include <cnslab/io.hpp>

#include <sstream>

using namespace cnslab;
using io::json;

namespace {

CubicSystem<Rational> coeffs(std::initializer_list<int> c) {
    CubicSystem<Rational> s;
    int j = 0;
    for (int x : c) s.coeff[j++] = x;
    return s;
}

} // namespace

TEST_CASE("system files") {
    SECTION("three input forms agree") {
        auto a = io::parse_system(json::parse(R"({"cnsa": ["1/3", 0, 0, 0, 0, 2, 0, 0]})"));
        CnsaSystem<Rational> sa;
        sa.lambda[0] = Rational(1, 3);
        sa.lambda[5] = 2;
        CHECK(a.system == embed_cnsa(sa));

        json c = json::object();
        c["coefficients"] = io::system_json(a.system);
        CHECK(io::parse_system(c).system == a.system);

        json r = json::object();
        r["rep"] = io::rep_json(to_rep(a.system));
        CHECK(io::parse_system(r).system == a.system);
    }
    SECTION("numbers and rational strings are exact") {
        CHECK(io::to_rational(json(0.1)) == Rational(1, 10));
        CHECK(io::to_rational(json("-2/6")) == Rational(-1, 3));
        CHECK(io::to_rational(json(7)) == Rational(7));
        CHECK(io::to_real(json("1/4")) == 0.25);
        CHECK_THROWS_AS(io::to_rational(json::array()), InvalidInput);
    }
    SECTION("malformed input") {
        CHECK_THROWS_AS(io::parse_system(json::parse(R"({"coefficients": [1, 2]})")), InvalidInput);
        CHECK_THROWS_AS(io::parse_system(json::parse(R"({"cnsa": [0,0,0,0,0,0,0,0], "coefficients": []})")), InvalidInput);
        CHECK_THROWS_AS(io::parse_system(json::parse(R"({"rep": {"C": [[1]]}})")), InvalidInput);
        CHECK_THROWS_AS(io::parse_system(json::parse("[1]")), InvalidInput);
        CHECK_THROWS_AS(io::load_json("/nonexistent/system.json"), InvalidInput);
    }
    SECTION("family parameters") {
        CnsaSystem<double> sa;
        sa.lambda[0] = 0.25;
        sa.lambda[5] = -1.5;
        auto [l1, l6] = io::sysnew_lambdas(embed_cnsa(sa));
        CHECK(l1 == 0.25);
        CHECK(l6 == -1.5);
        CHECK_THROWS_AS(io::sysnew_lambdas(to_double(coeffs({0, 2, -1, 0, 0, 1, -1, 0, 0, -2, 1, 0}))), InvalidInput);
    }
}

TEST_CASE("classify and conserved reports") {
    CnsaSystem<Rational> d21;
    d21.lambda[4] = 1;
    CHECK(io::canonical_json(canonicalize(embed_cnsa(d21)))["label"] == "Z7 x K7, kernel (0,0,0)");
    CHECK(io::canonical_json(canonicalize(CubicSystem<Rational>{}))["label"] == "rank0: (0,0,0)");
    auto two = coeffs({-2, 0, 0, 2, 1, 0, 0, -2, -1, 0, 0, 2});
    auto three = coeffs({0, 2, -1, 0, 0, 1, -1, 0, 0, -2, 1, 0});
    auto j2 = io::canonical_json(canonicalize(to_double(two)));
    CHECK(j2["label"] == "rank 2 - no canonical representative in paper");
    CHECK_FALSE(j2.contains("witness"));

    auto c2 = io::conserved_json(two, kDefaultRankTol);
    REQUIRE(c2["mass_like"].size() == 1);
    CHECK(c2["mass_like"][0]["abc"] == json({"1", "0", "-1"}));
    auto c2f = io::conserved_json(to_double(two), kDefaultRankTol);
    CHECK(c2f["mass_like"][0]["abc"] == json({1.0, 0.0, -1.0}));

    auto c3 = io::conserved_json(three, kDefaultRankTol);
    CHECK(c3["mass_like"].empty());
    CHECK(c3["global_existence"]["verdict"] != "global");

    CnsaSystem<Rational> bz;
    bz.lambda[0] = Rational(3, 7);
    bz.lambda[5] = Rational(3, 7);
    CHECK(io::conserved_json(embed_cnsa(bz), kDefaultRankTol)["imaginary_invariant"] == true);
    CHECK(io::conserved_json(three, kDefaultRankTol)["imaginary_invariant"] == false);
}

TEST_CASE("tidy") {
    CHECK(io::tidy(-0.0).get<double>() == 0.0);
    CHECK_FALSE(std::signbit(io::tidy(-0.0).get<double>()));
    CHECK(io::tidy(-0.9999999999999999).get<double>() == -1.0);
    CHECK(io::tidy(1e-300).get<double>() == Catch::Approx(1e-300));
    CHECK(io::tidy(Rational(2, 6)) == "1/3");
}

TEST_CASE("run configs") {
    auto c = io::parse_pde_config(json::parse(R"({
        "grid": {"L": 40, "N": 1024}, "t_end": 50, "dt": "1/500",
        "schedule": {"t_a": 2, "rho": 1.5, "t_b": 50},
        "u1": {"amplitude": 0.2, "width": 3, "phase-slope": 0.5},
        "u2": {"family": "gaussian", "amplitude": 0.1, "width": 2, "phase": -1}})"));
    CHECK(c.grid == Grid(40, 1024));
    CHECK(c.solver.dt0 == 0.002);
    CHECK(c.solver.schedule.rho == 1.5);
    CHECK(c.u1.phase_slope == 0.5);
    CHECK(c.u2.phase == -1);

    auto back = io::parse_pde_config(io::pde_config_json(c));
    CHECK(io::pde_config_json(back) == io::pde_config_json(c));

    auto phys = io::parse_pde_config(json::parse(R"({"t_switch": null, "u1": {"width": 1}})"));
    CHECK(std::isinf(phys.solver.t_switch));
    CHECK(phys.u2.amplitude == 0);

    CHECK_THROWS_AS(io::parse_pde_config(json::parse(R"({"grid": {"L": 40, "N": 1000}, "u1": {}})")), InvalidInput);
    CHECK_THROWS_AS(io::parse_pde_config(json::parse(R"({"t_end": 10})")), InvalidInput);
    CHECK_THROWS_AS(io::parse_pde_config(json::parse(R"({"u1": {"family": "sech"}})")), InvalidInput);
    CHECK_THROWS_AS(io::parse_pde_config(json::parse(R"({"dt": -1, "u1": {}})")), InvalidInput);

    auto o = io::parse_ode_config(json::parse(R"({"t1": 5, "initial": [[0.5, 0], [0, "1/4"]]})"));
    CHECK(o.ode.t1 == 5);
    CHECK(o.initial[1] == cplx(0, 0.25));
    CHECK(io::parse_ode_config(json::parse(R"({"initial": {"random": 0.3}})")).random_amplitude == 0.3);
    CHECK_THROWS_AS(io::parse_ode_config(json::parse(R"({"initial": [1, 2, 3]})")), InvalidInput);
    CHECK_THROWS_AS(io::parse_ode_config(json::parse(R"({"rel_tol": 0})")), InvalidInput);
}

TEST_CASE("manifest hash") {
    // published FNV-1a 64-bit test vectors
    CHECK(io::fnv1a_hex("") == "cbf29ce484222325");
    CHECK(io::fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(io::fnv1a_hex("foobar") == "85944171f73967e8");

    json a = json::parse(R"({"x": 1, "y": [1, 2]})"), b = json::parse(R"({"y": [1, 2], "x": 1})");
    CHECK(io::config_hash(a) == io::config_hash(b));
    b["x"] = 2;
    CHECK(io::config_hash(a) != io::config_hash(b));

    auto m = io::make_manifest("pde", a, 5, {"f.csv"}, 1.5);
    CHECK(m["config_hash"] == io::config_hash(a));
    CHECK(m["versions"].contains("fftw"));
    CHECK(m["seed"] == 5);
}

TEST_CASE("profile CSV round trip is bit exact") {
    Grid g(10, 64);
    Field w1(g.N), w2(g.N);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int k = 0; k < g.N; ++k) {
        w1[k] = {n(rng), n(rng) * 1e-17};
        w2[k] = {std::ldexp(n(rng), -900), -n(rng)};
    }
    auto path = std::filesystem::temp_directory_path() / "cnslab_profile_roundtrip.csv";
    {
        std::ofstream f(path);
        io::write_profile_csv(f, g, w1, w2);
    }
    auto back = io::read_profile_csv(path);
    REQUIRE(back.w1.size() == static_cast<size_t>(g.N));
    for (int k = 0; k < g.N; ++k) {
        REQUIRE(back.xi[k] == g.xi(k));
        REQUIRE(back.w1[k] == w1[k]);
        REQUIRE(back.w2[k] == w2[k]);
    }
    std::ofstream(path) << "x,1,2\n";
    CHECK_THROWS_AS(io::read_profile_csv(path), InvalidInput);
    std::filesystem::remove(path);
}

TEST_CASE("identical configs give identical snapshot bytes") {
    Grid g(30, 256);
    PointwiseCubic sys(to_double(coeffs({-2, 0, 0, 2, 1, 0, 0, -2, -1, 0, 0, 2})));
    SolverConfig c;
    c.t_end = 3;
    c.dt0 = 1e-2;
    c.ds0 = 1e-2;
    c.schedule = {0.5, 2, 3};
    auto once = [&] {
        auto snaps = run(sys, initial_state(g, {0.2, 2, 0, 0.3, 0}, {0.1, 1.5, 1, 0, 0}), g, c);
        std::ostringstream os;
        for (auto& st : snaps) {
            auto [w1, w2] = profile(g, st);
            io::write_profile_csv(os, g, w1, w2);
        }
        return os.str();
    };
    CHECK(once() == once());
}

TEST_CASE("analysis helpers") {
    ProfileSeries s;
    for (double t : {1.0, 10.0, 100.0, 1000.0}) {
        s.t.push_back(t);
        s.w1.push_back(Field{cplx(1)});
        s.w2.push_back(Field{std::polar(2.0, -3 * 0.5 * std::log(t))});
    }
    auto w = window(s, 10, 100);
    CHECK(w.t == std::vector<double>{10, 100});
    auto beta = derotated(s, 0, 0.5, cplx(1));
    for (auto& b : beta) CHECK(std::abs(b - cplx(2)) < 1e-14);
}

TEST_CASE("acceptance plumbing") {
    using namespace cnslab::acceptance;
    CHECK(suite_ids("algebra") == std::vector<int>{1, 2, 3, 10});
    CHECK(suite_ids("all").size() == 10);
    CHECK_THROWS_AS(suite_ids("nope"), InvalidInput);
    CHECK_THROWS_AS(run_criterion(11), InvalidInput);

    std::vector<int> seen;
    auto res = run_suite({10, 1}, 2, [&](const CriterionResult& r) { seen.push_back(r.id); });
    CHECK(seen == std::vector<int>{10, 1});
    for (auto& r : res) {
        CHECK(r.pass);
        CHECK(r.line().rfind("PASS [", 0) == 0);
    }
    CriterionResult f{3, "x", false, "d", 0.5};
    CHECK(f.line() == "FAIL [3] x: d (0.50 s)");
}
