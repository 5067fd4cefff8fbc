#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>
#include <json.hpp>

#include "classification.hpp"
#include "conservation.hpp"
#include "ode_sim.hpp"
#include "pde_sim.hpp"
#include "system_algebra.hpp"

namespace cnslab::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.1.0";

inline json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

inline void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

/// JSON number or string ("1/3", "-0.25", "2e-3") as an exact rational.
inline Rational to_rational(const json& v) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rational(v.get<long long>());
    if (v.is_number()) return parse_rational(v.dump());
    throw InvalidInput("expected a number or rational string, got " + v.dump());
}

inline double to_real(const json& v) { return v.is_number() ? v.get<double>() : to_double(to_rational(v)); }

template <class T>
json scalar_json(const T& x) {
    if constexpr (is_exact_v<T>) return rational_to_string(x);
    else return x;
}

// ---- systems ----

struct SystemFile {
    std::string name;
    CubicSystem<Rational> system;
};

/**
 * @brief Parse {"coefficients": [12]}, {"cnsa": [8 lambdas]} or {"rep": {"C": 3x3, "p", "q", "r"}}.
 *
 * Entries may be numbers or rational strings; the system is held exactly either way.
 */
inline SystemFile parse_system(const json& j) {
    if (!j.is_object()) throw InvalidInput("system file must be a JSON object");
    SystemFile out;
    out.name = j.value("name", "");
    int forms = j.contains("coefficients") + j.contains("cnsa") + j.contains("rep");
    if (forms != 1) throw InvalidInput("system needs exactly one of coefficients, cnsa, rep");
    auto array_of = [](const json& a, size_t n, const char* what) {
        if (!a.is_array() || a.size() != n)
            throw InvalidInput(std::string(what) + " must be an array of " + std::to_string(n) + " entries");
        std::vector<Rational> v;
        for (auto& x : a) v.push_back(to_rational(x));
        return v;
    };
    if (j.contains("coefficients")) {
        auto v = array_of(j["coefficients"], 12, "coefficients");
        std::copy(v.begin(), v.end(), out.system.coeff.begin());
    } else if (j.contains("cnsa")) {
        auto v = array_of(j["cnsa"], 8, "cnsa");
        CnsaSystem<Rational> sa;
        std::copy(v.begin(), v.end(), sa.lambda.begin());
        out.system = embed_cnsa(sa);
    } else {
        const json& r = j["rep"];
        MatrixKernelRep<Rational> rep;
        if (!r.contains("C") || !r["C"].is_array() || r["C"].size() != 3) throw InvalidInput("rep.C must be 3x3");
        for (int i = 0; i < 3; ++i) {
            auto row = array_of(r["C"][i], 3, "rep.C row");
            for (int k = 0; k < 3; ++k) rep.C(i, k) = row[k];
        }
        rep.p = to_rational(r.value("p", json(0)));
        rep.q = to_rational(r.value("q", json(0)));
        rep.r = to_rational(r.value("r", json(0)));
        out.system = from_rep(rep);
    }
    return out;
}

inline SystemFile load_system(const fs::path& path) { return parse_system(load_json(path)); }

/// lambda_1 and lambda_6 of a CNS_A system; InvalidInput when the system is not of that form.
inline std::pair<double, double> sysnew_lambdas(const CubicSystem<double>& s, double tol = 1e-12) {
    double l1 = s.coeff[0] / 3, l6 = s.coeff[8];
    CnsaSystem<double> sa;
    sa.lambda[0] = l1;
    sa.lambda[5] = l6;
    auto back = embed_cnsa(sa);
    for (int k = 0; k < 12; ++k)
        if (std::abs(back.coeff[k] - s.coeff[k]) > tol * std::max(1.0, std::abs(s.coeff[k])))
            throw InvalidInput("system is not of the (lambda1, lambda6) family");
    return {l1, l6};
}

/// Display form: rounded to 12 significant digits, no negative zero. Exact values pass through.
template <class T>
json tidy(const T& x) {
    if constexpr (is_exact_v<T>) {
        return rational_to_string(x);
    } else {
        if (x == 0) return 0.0;
        if (!std::isfinite(x)) return x;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", x);
        double r = std::strtod(buf, nullptr);
        return r == 0 ? 0.0 : r;
    }
}

template <class T>
json rep_json(const MatrixKernelRep<T>& rep) {
    json C = json::array();
    for (int i = 0; i < 3; ++i) C.push_back({tidy(rep.C(i, 0)), tidy(rep.C(i, 1)), tidy(rep.C(i, 2))});
    return {{"C", C}, {"p", tidy(rep.p)}, {"q", tidy(rep.q)}, {"r", tidy(rep.r)}};
}

template <class T>
json system_json(const CubicSystem<T>& s) {
    json c = json::array();
    for (auto& x : s.coeff) c.push_back(scalar_json(x));
    return c;
}

inline json canonical_json(const CanonicalForm& cf) {
    json j{{"label", cf.label()},
           {"stratum", cf.stratum.name()},
           {"has_representative", cf.has_representative},
           {"invariants",
            {{"rank", cf.invariants.rank},
             {"trace", cf.invariants.trace_zero ? "zero" : "nonzero"},
             {"sign_q2_minus_pr", cf.invariants.sign_q2_pr},
             {"b_zero", cf.invariants.b_zero}}}};
    if (cf.has_representative) {
        j["representative"] = rep_json(cf.representative);
        j["witness"] = {{tidy(cf.witness.a), tidy(cf.witness.b)}, {tidy(cf.witness.c), tidy(cf.witness.d)}};
        j["witness_error"] = witness_error(cf);
        j["in_listed_kernel_set"] = cf.listed_k_member;
    }
    if (cf.stratum.tag == Stratum::Rank0) j["rank0_index"] = cf.rank0_index;
    if (cf.zclass) {
        const auto& z = *cf.zclass;
        j["class"] = {{"j", z.j}, {"variant", z.variant}, {"sigma", z.sigma}, {"k", z.k}, {"theta", z.theta}};
    }
    return j;
}

template <class T>
json conserved_json(const CubicSystem<T>& s, double tol) {
    auto rep = to_rep(s);
    json kernel = json::array();
    for (auto& q : mass_like_kernel(rep, tol)) {
        auto cert = energy_certificate(rep, q.abc);
        kernel.push_back({{"abc", {tidy(q.abc[0]), tidy(q.abc[1]), tidy(q.abc[2])}},
                          {"energy_certificate", cert.valid}});
    }
    auto ge = global_existence_criterion(rep, tol);
    bool im = imaginary_invariant(s, is_exact_v<T> ? 0.0 : 1e-12 * std::max(1.0, max_abs(b_matrix(s))));
    return {{"mass_like", kernel},
            {"imaginary_invariant", im},
            {"global_existence", {{"verdict", ge.name()}, {"witness", {tidy(ge.witness[0]), tidy(ge.witness[1]), tidy(ge.witness[2])}}, {"margin", ge.margin}}}};
}

// ---- run configs ----

inline Gaussian parse_gaussian(const json& j) {
    if (!j.is_object()) throw InvalidInput("gaussian spec must be an object");
    Gaussian g;
    if (j.contains("family") && j["family"] != "gaussian") throw InvalidInput("only the gaussian family is supported");
    g.amplitude = to_real(j.value("amplitude", json(g.amplitude)));
    g.width = to_real(j.value("width", json(g.width)));
    g.center = to_real(j.value("center", json(g.center)));
    g.phase_slope = to_real(j.value("phase_slope", j.value("phase-slope", json(g.phase_slope))));
    g.phase = to_real(j.value("phase", json(g.phase)));
    if (!(g.width > 0)) throw InvalidInput("gaussian width must be positive");
    return g;
}

inline json gaussian_json(const Gaussian& g) {
    return {{"family", "gaussian"}, {"amplitude", g.amplitude}, {"width", g.width}, {"center", g.center},
            {"phase_slope", g.phase_slope}, {"phase", g.phase}};
}

struct PdeRunConfig {
    Grid grid;
    SolverConfig solver;
    Gaussian u1, u2;
};

inline PdeRunConfig parse_pde_config(const json& j) {
    PdeRunConfig c;
    c.u2.amplitude = 0;
    try {
        if (j.contains("grid")) c.grid = Grid(to_real(j["grid"].value("L", json(60))), j["grid"].value("N", 4096));
        auto& s = c.solver;
        s.t_end = to_real(j.value("t_end", json(s.t_end)));
        s.dt0 = to_real(j.value("dt", json(s.dt0)));
        s.ds0 = to_real(j.value("ds", json(s.ds0)));
        s.substeps = j.value("substeps", s.substeps);
        if (j.contains("t_switch"))
            s.t_switch = j["t_switch"].is_null() ? std::numeric_limits<double>::infinity() : to_real(j["t_switch"]);
        s.boundary_guard = to_real(j.value("boundary_guard", json(s.boundary_guard)));
        if (j.contains("schedule")) {
            auto& sc = j["schedule"];
            s.schedule = {to_real(sc.value("t_a", json(1))), to_real(sc.value("rho", json(1.25))),
                          to_real(sc.value("t_b", json(s.t_end)))};
        } else {
            s.schedule = {std::min(1.0, s.t_end), 1.25, s.t_end};
        }
        if (!j.contains("u1")) throw InvalidInput("run config needs u1");
        c.u1 = parse_gaussian(j["u1"]);
        if (j.contains("u2")) c.u2 = parse_gaussian(j["u2"]);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("run config: ") + e.what());
    }
    c.solver.validate();
    return c;
}

inline json pde_config_json(const PdeRunConfig& c) {
    const auto& s = c.solver;
    json j{{"grid", {{"L", c.grid.L}, {"N", c.grid.N}}},
           {"t_end", s.t_end},
           {"dt", s.dt0},
           {"ds", s.ds0},
           {"substeps", s.substeps},
           {"boundary_guard", s.boundary_guard},
           {"schedule", {{"t_a", s.schedule.t_a}, {"rho", s.schedule.rho}, {"t_b", s.schedule.t_b}}},
           {"u1", gaussian_json(c.u1)},
           {"u2", gaussian_json(c.u2)}};
    j["t_switch"] = std::isfinite(s.t_switch) ? json(s.t_switch) : json(nullptr);
    return j;
}

struct OdeRunConfig {
    OdeConfig ode;
    Pair initial{cplx(0.5), cplx(0)};
    double random_amplitude = 0;  // > 0: draw the initial pair from the seed
    int samples = 201;
};

inline OdeRunConfig parse_ode_config(const json& j) {
    OdeRunConfig c;
    try {
        c.ode.t0 = to_real(j.value("t0", json(0)));
        c.ode.t1 = to_real(j.value("t1", json(10)));
        c.ode.rel_tol = to_real(j.value("rel_tol", json(c.ode.rel_tol)));
        c.ode.abs_tol = to_real(j.value("abs_tol", json(c.ode.abs_tol)));
        c.ode.log_time = j.value("log_time", false);
        c.samples = j.value("samples", c.samples);
        if (j.contains("initial")) {
            auto& in = j["initial"];
            if (in.is_object() && in.contains("random")) {
                c.random_amplitude = to_real(in["random"]);
            } else if (in.is_array() && in.size() == 2) {
                for (int k = 0; k < 2; ++k) {
                    if (!in[k].is_array() || in[k].size() != 2) throw InvalidInput("initial entries are [re, im]");
                    c.initial[k] = cplx(to_real(in[k][0]), to_real(in[k][1]));
                }
            } else {
                throw InvalidInput("initial must be [[re,im],[re,im]] or {\"random\": amplitude}");
            }
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("ode config: ") + e.what());
    }
    if (c.samples < 2) throw InvalidInput("samples must be at least 2");
    c.ode.validate();
    return c;
}

inline json ode_config_json(const OdeRunConfig& c) {
    json j{{"t0", c.ode.t0}, {"t1", c.ode.t1}, {"rel_tol", c.ode.rel_tol}, {"abs_tol", c.ode.abs_tol},
           {"log_time", c.ode.log_time}, {"samples", c.samples}};
    if (c.random_amplitude > 0) j["initial"] = {{"random", c.random_amplitude}};
    else j["initial"] = {{c.initial[0].real(), c.initial[0].imag()}, {c.initial[1].real(), c.initial[1].imag()}};
    return j;
}

// ---- manifests ----

/// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Hash of the config as serialised by nlohmann (object keys sorted), so key order in the file does not matter.
inline std::string config_hash(const json& config) { return fnv1a_hex(config.dump()); }

inline json versions_json() {
    return {{"cnslab", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"fftw", std::string(fftw_version)},
            {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR)}};
}

inline json make_manifest(const std::string& command, const json& config, std::uint64_t seed,
                          const std::vector<std::string>& outputs, double wall_seconds) {
    return {{"command", command},       {"config_hash", config_hash(config)}, {"config", config},
            {"versions", versions_json()}, {"seed", seed},                    {"outputs", outputs},
            {"wall_seconds", wall_seconds}};
}

// ---- CSV ----

inline void write_profile_csv(std::ostream& os, const Grid& g, const Field& w1, const Field& w2) {
    os << "xi,re_w1,im_w1,re_w2,im_w2\n";
    os.precision(17);
    for (int k = 0; k < g.N; ++k)
        os << g.xi(k) << ',' << w1[k].real() << ',' << w1[k].imag() << ',' << w2[k].real() << ',' << w2[k].imag() << "\n";
}

inline void write_samples_csv(std::ostream& os, const std::vector<double>& x, const Field& u1, const Field& u2) {
    os << "x,re_u1,im_u1,re_u2,im_u2\n";
    os.precision(17);
    for (size_t k = 0; k < x.size(); ++k)
        os << x[k] << ',' << u1[k].real() << ',' << u1[k].imag() << ',' << u2[k].real() << ',' << u2[k].imag() << "\n";
}

struct ProfileCsv {
    std::vector<double> xi;
    Field w1, w2;
};

inline ProfileCsv read_profile_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line.rfind("xi,", 0) != 0) throw InvalidInput(path.string() + ": not a profile CSV");
    ProfileCsv out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double v[5];
        const char* p = line.c_str();
        for (int k = 0; k < 5; ++k) {
            char* end = nullptr;
            v[k] = std::strtod(p, &end);
            if (end == p) throw InvalidInput(path.string() + ": malformed row '" + line + "'");
            p = *end == ',' ? end + 1 : end;
        }
        out.xi.push_back(v[0]);
        out.w1.emplace_back(v[1], v[2]);
        out.w2.emplace_back(v[3], v[4]);
    }
    return out;
}

inline json observables_json(const Observables& o) {
    return {{"t", o.t},
            {"linf", {o.linf[0], o.linf[1]}},
            {"l2", {o.l2[0], o.l2[1]}},
            {"h01", {o.h01[0], o.h01[1]}},
            {"mass", {o.mass[0], o.mass[1], o.mass[2]}}};
}

} // namespace cnslab::io
