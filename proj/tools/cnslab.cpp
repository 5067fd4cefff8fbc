#include <CLI11.hpp>

#include <cnslab/acceptance.hpp>
#include <cnslab/analysis.hpp>
#include <cnslab/io.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

using namespace cnslab;
using io::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    bool exact = false;
    double tol = kDefaultRankTol;
    std::vector<double> grid;      // N, L
    std::vector<double> schedule;  // t_a, rho, t_b
    std::vector<double> window;    // t_a, t_b for asym
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out;
    std::string system, config, run_dir, tag, suite = "all";
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path prepare_out(const Options& o, const char* fallback) {
    fs::path dir = o.out.empty() ? fs::path(fallback) : fs::path(o.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

int cmd_classify(const Options& o) {
    auto sf = io::load_system(o.system);
    CanonicalForm cf = o.exact ? canonicalize(sf.system, o.tol) : canonicalize(to_double(sf.system), o.tol);
    json j = io::canonical_json(cf);
    if (!sf.name.empty()) j["name"] = sf.name;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_conserved(const Options& o) {
    auto sf = io::load_system(o.system);
    json j = o.exact ? io::conserved_json(sf.system, o.tol) : io::conserved_json(to_double(sf.system), o.tol);
    if (!sf.name.empty()) j["name"] = sf.name;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_ode(const Options& o) {
    auto t0 = std::chrono::steady_clock::now();
    auto sf = io::load_system(o.system);
    auto cfg = io::parse_ode_config(io::load_json(o.config));
    auto sys = to_double(sf.system);
    Pair a0 = cfg.initial;
    if (cfg.random_amplitude > 0) {
        std::mt19937_64 rng(o.seed);
        a0 = sampling::random_pair(rng, cfg.random_amplitude);
    }
    auto tr = integrate(sys, a0, cfg.ode);

    std::vector<Vec3<double>> quads;
    for (auto& q : mass_like_kernel(to_rep(sys), o.tol)) quads.push_back(q.abc);
    json drift = json::array();
    for (auto& q : quads) drift.push_back({{"abc", {io::tidy(q[0]), io::tidy(q[1]), io::tidy(q[2])}}, {"max_drift", check_conservation(tr, q)}});
    if (imaginary_invariant(sys, 1e-12 * std::max(1.0, max_abs(b_matrix(sys))))) {
        double im0 = std::imag(std::conj(a0[0]) * a0[1]), worst = 0;
        for (auto& v : tr.y) worst = std::max(worst, std::abs(std::imag(std::conj(v[0]) * v[1]) - im0));
        drift.push_back({{"quantity", "Im(conj(u1) u2)"}, {"max_drift", worst}});
    }

    fs::path dir = prepare_out(o, "ode_run");
    {
        std::ofstream csv(dir / "trajectory.csv");
        write_trajectory_csv(csv, tr, quads);
    }
    json config{{"system", io::system_json(sys)}, {"ode", io::ode_config_json(cfg)}};
    json m = io::make_manifest("ode", config, o.seed, {"trajectory.csv"}, seconds_since(t0));
    m["initial"] = {{a0[0].real(), a0[0].imag()}, {a0[1].real(), a0[1].imag()}};
    m["drift"] = drift;
    m["steps"] = tr.size() - 1;
    io::write_json(dir / "manifest.json", m);
    std::cout << json{{"drift", drift}, {"out", dir.string()}}.dump(2) << "\n";
    return 0;
}

int cmd_pde(const Options& o) {
    auto t0 = std::chrono::steady_clock::now();
    auto sf = io::load_system(o.system);
    auto cfg = io::parse_pde_config(io::load_json(o.config));
    if (!o.grid.empty()) {
        if (o.grid.size() != 2) throw InvalidInput("--grid takes N,L");
        cfg.grid = Grid(o.grid[1], static_cast<int>(o.grid[0]));
    }
    if (!o.schedule.empty()) {
        if (o.schedule.size() != 3) throw InvalidInput("--schedule takes t_a,rho,t_b");
        cfg.solver.schedule = {o.schedule[0], o.schedule[1], o.schedule[2]};
    }
    cfg.solver.validate();
    auto sys = to_double(sf.system);
    const Grid& g = cfg.grid;
    auto snaps = run(PointwiseCubic(sys), initial_state(g, cfg.u1, cfg.u2), g, cfg.solver);

    fs::path dir = prepare_out(o, "pde_run");
    json list = json::array();
    std::vector<std::string> outputs;
    for (size_t i = 0; i < snaps.size(); ++i) {
        char pname[32], uname[32];
        std::snprintf(pname, sizeof pname, "profile_%04zu.csv", i);
        std::snprintf(uname, sizeof uname, "u_%04zu.csv", i);
        auto [w1, w2] = profile(g, snaps[i]);
        {
            std::ofstream f(dir / pname);
            io::write_profile_csv(f, g, w1, w2);
        }
        {
            auto [u1, u2] = physical_samples(g, snaps[i]);
            std::ofstream f(dir / uname);
            io::write_samples_csv(f, sample_points(g, snaps[i]), u1, u2);
        }
        json e = io::observables_json(observables(g, snaps[i]));
        e["frame"] = snaps[i].frame == Frame::Physical ? "physical" : "profile";
        e["profile"] = pname;
        e["samples"] = uname;
        list.push_back(e);
        outputs.push_back(pname);
        outputs.push_back(uname);
    }
    json config{{"system", io::system_json(sys)}, {"run", io::pde_config_json(cfg)}};
    json m = io::make_manifest("pde", config, o.seed, outputs, seconds_since(t0));
    m["snapshots"] = list;
    io::write_json(dir / "manifest.json", m);
    std::cout << "wrote " << snaps.size() << " snapshots to " << dir.string() << " (config " << m["config_hash"].get<std::string>()
              << ")\n";
    return 0;
}

struct LoadedRun {
    Grid grid;
    CubicSystem<double> system;
    ProfileSeries series;
    std::vector<double> linf2_scaled;  // ||u2||_inf sqrt(t) per snapshot
};

LoadedRun load_run(const fs::path& dir) {
    json m = io::load_json(dir / "manifest.json");
    if (m.value("command", "") != "pde") throw InvalidInput(dir.string() + " is not a pde run");
    LoadedRun r;
    try {
        const json& cfg = m["config"];
        r.grid = Grid(cfg["run"]["grid"]["L"].get<double>(), cfg["run"]["grid"]["N"].get<int>());
        for (int k = 0; k < 12; ++k) r.system.coeff[k] = cfg["system"][k].get<double>();
        for (auto& e : m["snapshots"]) {
            double t = e["t"].get<double>();
            auto p = io::read_profile_csv(dir / e["profile"].get<std::string>());
            if (static_cast<int>(p.w1.size()) != r.grid.N) throw GridMismatch("snapshot size differs from the grid");
            r.series.t.push_back(t);
            r.series.w1.push_back(std::move(p.w1));
            r.series.w2.push_back(std::move(p.w2));
            r.linf2_scaled.push_back(e["linf"][1].get<double>() * std::sqrt(t));
        }
    } catch (const json::exception& e) {
        throw InvalidInput("manifest: " + std::string(e.what()));
    }
    if (r.series.size() == 0) throw InsufficientSnapshots("run has no snapshots");
    return r;
}

/// Sup residual of the u1 prediction at the last snapshot, times sqrt(t), against sup|W1|.
json u1_residual(const LoadedRun& run, const Field& W1, double l1) {
    const Grid& g = run.grid;
    double t = run.series.t.back();
    PdeState sim{t, Frame::Profile, frame_from_profile(g, run.series.w1.back(), t),
                 frame_from_profile(g, run.series.w2.back(), t)};
    PdeState pred = AsymptoticPrediction::log_amplitude(l1, LogCase::ThreeLambda1, W1, Field(g.N)).state(t);
    pred.a2 = sim.a2;
    auto res = residual_norm(g, pred, sim);
    return {{"t", t}, {"sup_times_sqrt_t", res.sup * std::sqrt(t)}, {"l2", res.l2}, {"main_term", sup_norm(W1)}};
}

std::vector<std::string> g_rows;

void print_row(const std::string& q, const std::string& pred, const std::string& meas) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "  %-34s %-34s %s", q.c_str(), pred.c_str(), meas.c_str());
    g_rows.push_back(buf);
}

std::string cstr(cplx z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g%+.6gi", z.real(), z.imag());
    return buf;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

int cmd_asym(const Options& o) {
    fs::path dir(o.run_dir);
    auto run = load_run(dir);
    const Grid& g = run.grid;
    double t_max = run.series.t.back();
    double t_a = o.window.empty() ? std::min(100.0, t_max / 30) : o.window.at(0);
    double t_b = o.window.size() > 1 ? o.window[1] : t_max;
    json rep{{"tag", o.tag}, {"window", {t_a, t_b}}, {"run", dir.string()}};
    json table = json::array();
    auto row = [&](const std::string& q, const json& pred, const json& meas) {
        table.push_back({{"quantity", q}, {"predicted", pred}, {"measured", meas}});
    };

    print_row("quantity", "predicted", "measured");
    if (o.tag == "twomode") {
        auto [l1, l6] = io::sysnew_lambdas(run.system);
        auto r = analyze_two_mode(g, run.series, l1, l6, t_a, t_b);
        rep["xi0"] = r.xi0;
        rep["lambda_c"] = r.lambda_c;
        rep["omega"] = r.fit.omega;
        rep["amplitudes"] = {{"A", {r.fit.A.real(), r.fit.A.imag()}}, {"B", {r.fit.B.real(), r.fit.B.imag()}}};
        rep["fit_residual"] = r.fit.residual;
        rep["ill_conditioned"] = r.fit.ill_conditioned;
        rep["single_phasor"] = r.fit.single_phasor;
        row("omega", r.predicted, r.fit.omega);
        print_row("omega (lc|W1(xi0)|^2)", num(r.predicted), num(r.fit.omega) + " (" + num(100 * r.rel_error) + "% off)");
        for (auto& h : r.half_width) {
            row("omega at xi=" + num(h.xi), h.predicted, h.omega);
            print_row("omega at xi=" + num(h.xi), num(h.predicted), num(h.omega));
        }
        rep["u1_residual"] = u1_residual(run, extract_scattering_data(window(run.series, t_a, t_b), l1).W1, l1);
    } else if (o.tag == "log3" || o.tag == "log1") {
        auto [l1, l6] = io::sysnew_lambdas(run.system);
        LogCase c = o.tag == "log3" ? LogCase::ThreeLambda1 : LogCase::Lambda1;
        double want = c == LogCase::ThreeLambda1 ? 3 * l1 : l1;
        if (std::abs(l6 - want) > 1e-12 * std::max(1.0, std::abs(want)))
            throw InvalidInput("tag " + o.tag + " needs lambda6 = " + (c == LogCase::ThreeLambda1 ? "3 " : "") + "lambda1");
        auto r = analyze_log_amplitude(g, run.series, run.series.t, run.linf2_scaled, l1, c, t_a / 2, t_a, t_b);
        rep["xi0"] = r.xi0;
        rep["amplitude_fit"] = {{"slope", r.amplitude.slope.real()}, {"r2", r.amplitude.r2}};
        rep["slope"] = {r.slope.slope.real(), r.slope.slope.imag()};
        rep["W2"] = {r.W2.real(), r.W2.imag()};
        rep["fit_residual"] = r.slope.residual;
        row("slope direction (deg)", 0.0, r.angle_deg);
        row("|slope|/|W|", 1.0, r.magnitude_ratio);
        row("R^2 of ||u2||sqrt(t) vs log t", 1.0, r.amplitude.r2);
        print_row("slope (w-space, xi0)", cstr(r.predicted), cstr(r.slope.slope));
        print_row("angle (deg)", "0", num(r.angle_deg));
        print_row("R^2 ||u2||sqrt(t) vs log t", "1", num(r.amplitude.r2));
        rep["u1_residual"] = u1_residual(run, extract_scattering_data(window(run.series, t_a, t_b), l1).W1, l1);
    } else if (o.tag == "free") {
        auto win = window(run.series, t_a, t_b);
        if (win.size() == 0) throw InsufficientSnapshots("no snapshots in the window");
        Field W1 = win.w1.front();
        auto r = analyze_free(g, run.series, W1, t_a, t_b);
        rep["xi0"] = r.xi0;
        rep["slope"] = {r.slope.slope.real(), r.slope.slope.imag()};
        rep["oracle_slope"] = {r.oracle.slope.real(), r.oracle.slope.imag()};
        rep["display_ratio"] = r.display_ratio;
        rep["w1_drift"] = r.w1_drift;
        row("slope direction vs -i|W1|^2W1 (deg)", 0.0, r.angle_deg);
        row("|slope| vs oracle (rel)", 0.0, r.oracle_rel);
        row("|slope| / |display|", 1.0, r.display_ratio);
        print_row("slope (w-space, xi0)", cstr(r.display) + " (display)", cstr(r.slope.slope));
        print_row("oracle slope", cstr(r.oracle.slope), num(100 * r.oracle_rel) + "% off");
        print_row("angle to display (deg)", "0", num(r.angle_deg));
        print_row("|slope|/|display|", "1", num(r.display_ratio));
        rep["u1_residual"] = u1_residual(run, W1, 0.0);
    } else {
        throw InvalidInput("unknown tag '" + o.tag + "' (twomode, log3, log1, free)");
    }
    rep["table"] = table;
    io::write_json(dir / ("fit_" + o.tag + ".json"), rep);
    std::printf("%s fit on %s, window [%g, %g]\n", o.tag.c_str(), dir.string().c_str(), t_a, t_b);
    for (auto& line : g_rows) std::printf("%s\n", line.c_str());
    return 0;
}

int cmd_accept(const Options& o) {
    auto t0 = std::chrono::steady_clock::now();
    auto ids = acceptance::suite_ids(o.suite);
    auto results = acceptance::run_suite(ids, o.jobs, [](const auto& r) { std::cout << r.line() << std::endl; });
    std::vector<int> failed;
    json list = json::array();
    for (auto& r : results) {
        if (!r.pass) failed.push_back(r.id);
        list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}, {"seconds", r.seconds}});
    }
    if (!o.out.empty()) {
        fs::path dir = prepare_out(o, "accept");
        json m = io::make_manifest("accept", {{"suite", o.suite}}, o.seed, {}, seconds_since(t0));
        m["criteria"] = list;
        io::write_json(dir / "manifest.json", m);
    }
    if (failed.empty()) {
        std::cout << "suite " << o.suite << ": all " << results.size() << " criteria passed\n";
        return 0;
    }
    std::cout << "suite " << o.suite << ": failing criteria";
    for (int id : failed) std::cout << ' ' << id;
    std::cout << "\n";
    return 1;
}

int exit_code(const Error& e) {
    switch (e.error_class()) {
    case ErrorClass::Input: return 2;
    case ErrorClass::Numeric: return 3;
    case ErrorClass::FitPrecondition: return 4;
    }
    return 3;
}

} // namespace

int main(int argc, char** argv) {
    Options o;
    if (const char* env = std::getenv("CNSLAB_JOBS")) o.jobs = std::max(1, std::atoi(env));

    CLI::App app{"Classification and simulation of cubic NLS systems"};
    app.require_subcommand(1);
    auto algebra_flags = [&](CLI::App* c) {
        c->add_flag("--exact", o.exact, "exact rational arithmetic");
        c->add_option("--tol", o.tol, "relative rank tolerance")->check(CLI::PositiveNumber);
    };

    auto* classify = app.add_subcommand("classify", "canonical form of a system");
    classify->add_option("system", o.system, "system JSON")->required();
    algebra_flags(classify);

    auto* conserved = app.add_subcommand("conserved", "conserved quantities of a system");
    conserved->add_option("system", o.system, "system JSON")->required();
    algebra_flags(conserved);

    auto* ode = app.add_subcommand("ode", "integrate the spatially homogeneous ODE");
    ode->add_option("system", o.system, "system JSON")->required();
    ode->add_option("config", o.config, "ODE config JSON")->required();
    ode->add_option("--seed", o.seed, "seed for random initial data");
    ode->add_option("--out", o.out, "output directory");
    ode->add_option("--tol", o.tol, "relative rank tolerance for the kernel")->check(CLI::PositiveNumber);

    auto* pde = app.add_subcommand("pde", "split-step simulation with snapshots");
    pde->add_option("system", o.system, "system JSON")->required();
    pde->add_option("config", o.config, "run config JSON")->required();
    pde->add_option("--grid", o.grid, "N,L")->delimiter(',')->expected(2);
    pde->add_option("--schedule", o.schedule, "t_a,rho,t_b")->delimiter(',')->expected(3);
    pde->add_option("--seed", o.seed, "recorded in the manifest");
    pde->add_option("--out", o.out, "output directory");

    auto* asym = app.add_subcommand("asym", "fit a pde run against an asymptotic profile");
    asym->add_option("run", o.run_dir, "directory written by `pde`")->required()->check(CLI::ExistingDirectory);
    asym->add_option("tag", o.tag, "twomode, log3, log1 or free")->required();
    asym->add_option("--window", o.window, "t_a,t_b")->delimiter(',')->expected(2);

    auto* accept = app.add_subcommand("accept", "run acceptance criteria");
    accept->add_option("suite", o.suite, "algebra, ode, pde-quick or all");
    accept->add_option("--jobs", o.jobs, "worker threads (default CNSLAB_JOBS or 1)")->check(CLI::PositiveNumber);
    accept->add_option("--out", o.out, "write a manifest here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*classify) return cmd_classify(o);
        if (*conserved) return cmd_conserved(o);
        if (*ode) return cmd_ode(o);
        if (*pde) return cmd_pde(o);
        if (*asym) return cmd_asym(o);
        if (*accept) return cmd_accept(o);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
