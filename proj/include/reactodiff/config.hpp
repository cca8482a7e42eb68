#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "reactodiff/deterministic.hpp"
#include "reactodiff/noise.hpp"

namespace reactodiff {

using json = nlohmann::ordered_json;

namespace cfg_detail {

inline void fail(const std::string& path, const std::string& what) {
    throw ConfigInvalid(path + ": " + what);
}

inline void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

inline void reject_unknown(const json& j, const std::string& path,
                           const std::set<std::string>& allowed) {
    for (const auto& item : j.items())
        if (!allowed.count(item.key())) fail(path + "." + item.key(), "unknown field");
}

inline double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

inline double num_or(const json& obj, const char* key, const std::string& path, double fallback) {
    if (!obj.contains(key)) return fallback;
    return num(obj.at(key), path + "." + key);
}

inline int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

inline std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

inline Vec num_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    Vec out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], path));
    return out;
}

/// A coefficient is a list of separable terms {t, x, y}, each a coefficient
/// array of the respective polynomial.
inline ScalarCoefficient coefficient(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of separable terms");
    std::vector<SeparableTerm> terms;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string tpath = path + "[" + std::to_string(i) + "]";
        expect_object(j[i], tpath);
        reject_unknown(j[i], tpath, {"t", "x", "y"});
        SeparableTerm term;
        if (j[i].contains("t")) term.poly_t = num_list(j[i]["t"], tpath + ".t");
        if (j[i].contains("x")) term.poly_x = num_list(j[i]["x"], tpath + ".x");
        if (j[i].contains("y")) term.poly_y = num_list(j[i]["y"], tpath + ".y");
        terms.push_back(std::move(term));
    }
    return ScalarCoefficient(std::move(terms));
}

} // namespace cfg_detail

struct InitialSpec {
    enum class Kind { sine, constant, nodes };
    Kind kind = Kind::sine;
    int mode = 1;
    double amplitude = 1.0;
    double value = 0.0;
    Vec nodes;

    Field build(const SpatialGrid& g) const {
        switch (kind) {
            case Kind::constant: return make_field(g, value);
            case Kind::nodes: {
                if (nodes.size() != static_cast<std::size_t>(g.total_nodes()))
                    throw ConfigInvalid("problem.initial.values: length does not match the grid");
                Field f = make_field(g);
                f.values = nodes;
                return f;
            }
            case Kind::sine: {
                const double pi = 3.14159265358979323846;
                return make_field(g, [&](double x, double y) {
                    double v = amplitude *
                               std::sin(mode * pi * (x - g.lo[0]) / (g.hi[0] - g.lo[0]));
                    if (g.dimension == 2)
                        v *= std::sin(mode * pi * (y - g.lo[1]) / (g.hi[1] - g.lo[1]));
                    return v;
                });
            }
        }
        return make_field(g);
    }
};

enum class ExperimentKind {
    deterministic_solve,
    estimate_audit,
    k_convergence,
    n_convergence,
    spde_ensemble,
    chs_sweep,
    factorization_compare,
    transition_table,
};

inline const char* experiment_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::deterministic_solve: return "deterministic_solve";
        case ExperimentKind::estimate_audit: return "estimate_audit";
        case ExperimentKind::k_convergence: return "k_convergence";
        case ExperimentKind::n_convergence: return "n_convergence";
        case ExperimentKind::spde_ensemble: return "spde_ensemble";
        case ExperimentKind::chs_sweep: return "chs_sweep";
        case ExperimentKind::factorization_compare: return "factorization_compare";
        case ExperimentKind::transition_table: return "transition_table";
    }
    return "?";
}

/// Fully validated experiment description. All invariants of the inner types
/// are checked at load; unknown fields are rejected with their path.
struct ExperimentConfig {
    // problem
    SpatialGrid grid;
    BoundaryCondition bc;
    CoefficientSet coeffs;
    std::optional<ReactionPolynomial> reaction; // zeta resolved at load
    double reported_sharp_zeta = 0.0;           // always computed, even when user-supplied
    InitialSpec initial;

    // noise
    int K = 32;
    double alpha = 0.2;
    BkSpec bk;

    // solver
    SolverOptions solver;
    double yosida_n = 1000.0;
    MildMode mode = MildMode::yosida_cascade;
    bool auto_shift = true;
    double dt = 1e-2;

    // run
    double s = 0.0, T = 1.0;
    std::uint64_t master_seed = 1;
    int n_paths = 1;
    ExperimentKind experiment = ExperimentKind::deterministic_solve;
    json params = json::object();

    json echo; // the exact config this was parsed from

    int n_steps() const {
        const double raw = (T - s) / dt;
        return static_cast<int>(std::llround(raw));
    }

    TimeGrid time_grid() const { return make_time_grid(s, T, n_steps()); }

    Problem build_problem() const {
        Problem p;
        p.coeffs = coeffs;
        p.grid = grid;
        p.bc = bc;
        p.reaction = reaction;
        if (auto_shift) return with_auto_shift(std::move(p), s, T);
        return p;
    }

    NoiseModel build_noise() const { return make_sine_noise_model(grid, K, alpha, bk); }
};

inline ExperimentConfig load_config(const json& root) {
    using namespace cfg_detail;
    ExperimentConfig c;
    c.echo = root;
    expect_object(root, "config");
    reject_unknown(root, "config", {"problem", "noise", "solver", "run"});
    if (!root.contains("problem") || !root.contains("solver") || !root.contains("run"))
        fail("config", "problem, solver, and run blocks are required");

    // --- problem ---
    const json& prob = root["problem"];
    expect_object(prob, "problem");
    reject_unknown(prob, "problem", {"grid", "bc", "coefficients", "reaction", "initial"});

    const json& grid = prob.at("grid");
    expect_object(grid, "problem.grid");
    reject_unknown(grid, "problem.grid", {"lo", "hi", "n_interior", "dimension"});
    const double lo = num(grid.at("lo"), "problem.grid.lo");
    const double hi = num(grid.at("hi"), "problem.grid.hi");
    const int n_int = integer(grid.at("n_interior"), "problem.grid.n_interior");
    const int dim = grid.contains("dimension") ? integer(grid["dimension"], "problem.grid.dimension") : 1;
    try {
        c.grid = build_grid(lo, hi, n_int, dim);
    } catch (const Error& e) {
        fail("problem.grid", e.what());
    }

    const std::string bc = prob.contains("bc") ? str(prob["bc"], "problem.bc") : "dirichlet";
    if (bc == "dirichlet") c.bc.kind = BcKind::dirichlet;
    else if (bc == "neumann") c.bc.kind = BcKind::neumann;
    else if (bc == "robin") c.bc.kind = BcKind::robin;
    else fail("problem.bc", "expected dirichlet|neumann|robin");

    c.coeffs.dimension = dim;
    if (prob.contains("coefficients")) {
        const json& co = prob["coefficients"];
        expect_object(co, "problem.coefficients");
        reject_unknown(co, "problem.coefficients",
                       {"a11", "a22", "a12", "drift1", "drift2", "a0", "ellipticity_floor"});
        if (co.contains("a11")) c.coeffs.a11 = coefficient(co["a11"], "problem.coefficients.a11");
        if (co.contains("a22")) c.coeffs.a22 = coefficient(co["a22"], "problem.coefficients.a22");
        if (co.contains("a12")) c.coeffs.a12 = coefficient(co["a12"], "problem.coefficients.a12");
        if (co.contains("drift1"))
            c.coeffs.drift1 = coefficient(co["drift1"], "problem.coefficients.drift1");
        if (co.contains("drift2"))
            c.coeffs.drift2 = coefficient(co["drift2"], "problem.coefficients.drift2");
        if (co.contains("a0")) c.coeffs.a0 = coefficient(co["a0"], "problem.coefficients.a0");
        c.coeffs.ellipticity_floor =
            num_or(co, "ellipticity_floor", "problem.coefficients", 1e-8);
    } else if (dim == 2) {
        c.coeffs = laplacian_coefficients(2);
    }
    if (c.coeffs.ellipticity_floor <= 0.0)
        fail("problem.coefficients.ellipticity_floor", "must be positive");

    if (prob.contains("reaction") && !prob["reaction"].is_null()) {
        const json& re = prob["reaction"];
        expect_object(re, "problem.reaction");
        reject_unknown(re, "problem.reaction", {"m", "C", "leading_floor", "zeta"});
        ReactionPolynomial r;
        r.m = integer(re.at("m"), "problem.reaction.m");
        if (r.m < 0) fail("problem.reaction.m", "must be >= 0");
        const json& C = re.at("C");
        if (!C.is_array() || C.size() != static_cast<std::size_t>(2 * r.m + 2))
            fail("problem.reaction.C", "expected 2m + 2 coefficient entries (k = 0..2m+1)");
        for (std::size_t k = 0; k < C.size(); ++k)
            r.C.push_back(coefficient(C[k], "problem.reaction.C[" + std::to_string(k) + "]"));
        r.leading_floor = num_or(re, "leading_floor", "problem.reaction", 1e-6);
        if (r.leading_floor <= 0.0) fail("problem.reaction.leading_floor", "must be positive");
        c.reaction = std::move(r);
    }

    if (prob.contains("initial")) {
        const json& in = prob["initial"];
        expect_object(in, "problem.initial");
        reject_unknown(in, "problem.initial", {"kind", "mode", "amplitude", "value", "values"});
        const std::string kind = str(in.at("kind"), "problem.initial.kind");
        if (kind == "sine") {
            c.initial.kind = InitialSpec::Kind::sine;
            if (in.contains("mode")) c.initial.mode = integer(in["mode"], "problem.initial.mode");
            c.initial.amplitude = num_or(in, "amplitude", "problem.initial", 1.0);
        } else if (kind == "constant") {
            c.initial.kind = InitialSpec::Kind::constant;
            c.initial.value = num_or(in, "value", "problem.initial", 0.0);
        } else if (kind == "nodes") {
            c.initial.kind = InitialSpec::Kind::nodes;
            c.initial.nodes = num_list(in.at("values"), "problem.initial.values");
        } else {
            fail("problem.initial.kind", "expected sine|constant|nodes");
        }
    }

    // --- noise ---
    if (root.contains("noise")) {
        const json& no = root["noise"];
        expect_object(no, "noise");
        reject_unknown(no, "noise", {"basis", "K", "alpha", "bk"});
        if (no.contains("basis") && str(no["basis"], "noise.basis") != "sine")
            fail("noise.basis", "only the sine basis is built in");
        if (no.contains("K")) c.K = integer(no["K"], "noise.K");
        if (c.K < 1) fail("noise.K", "must be >= 1");
        c.alpha = num_or(no, "alpha", "noise", 0.2);
        if (!(c.alpha > 0.0 && c.alpha < 0.5)) fail("noise.alpha", "must lie in (0, 1/2)");
        if (no.contains("bk")) {
            const json& bk = no["bk"];
            expect_object(bk, "noise.bk");
            reject_unknown(bk, "noise.bk", {"kind", "value", "exponent", "gamma"});
            const std::string kind = str(bk.at("kind"), "noise.bk.kind");
            if (kind == "constant") {
                c.bk.kind = BkSpec::Kind::constant;
                c.bk.value = num_or(bk, "value", "noise.bk", 1.0);
            } else if (kind == "power") {
                c.bk.kind = BkSpec::Kind::power;
                c.bk.value = num_or(bk, "value", "noise.bk", 1.0);
                c.bk.exponent = num_or(bk, "exponent", "noise.bk", 0.0);
            } else if (kind == "gamma") {
                c.bk.kind = BkSpec::Kind::gamma_fractional;
                c.bk.gamma = num_or(bk, "gamma", "noise.bk", 0.0);
                if (c.bk.gamma < 0.0) fail("noise.bk.gamma", "must be >= 0");
            } else {
                fail("noise.bk.kind", "expected constant|power|gamma");
            }
        }
    }

    // --- solver ---
    const json& so = root["solver"];
    expect_object(so, "solver");
    reject_unknown(so, "solver",
                   {"scheme", "dt", "picard_tol", "cascade_tol", "resolvent_tol", "k0",
                    "yosida_n", "mode", "auto_shift"});
    const std::string scheme = so.contains("scheme") ? str(so["scheme"], "solver.scheme")
                                                     : "implicit_euler";
    if (scheme == "implicit_euler") c.solver.scheme.kind = SchemeKind::implicit_euler;
    else if (scheme == "crank_nicolson") c.solver.scheme.kind = SchemeKind::crank_nicolson;
    else if (scheme == "yosida_product") c.solver.scheme.kind = SchemeKind::yosida_product;
    else fail("solver.scheme", "expected implicit_euler|crank_nicolson|yosida_product");
    c.dt = num(so.at("dt"), "solver.dt");
    if (!(c.dt > 0.0)) fail("solver.dt", "must be positive");
    c.solver.picard_tol = num_or(so, "picard_tol", "solver", 1e-12);
    c.solver.cascade_tol = num_or(so, "cascade_tol", "solver", 1e-3);
    c.solver.resolvent_tol = num_or(so, "resolvent_tol", "solver", 1e-12);
    c.solver.k0 = num_or(so, "k0", "solver", 0.0);
    c.yosida_n = num_or(so, "yosida_n", "solver", 1000.0);
    c.solver.scheme.yosida_index = c.yosida_n;
    if (so.contains("mode")) {
        const std::string mode = str(so["mode"], "solver.mode");
        if (mode == "yosida_cascade") c.mode = MildMode::yosida_cascade;
        else if (mode == "semi_implicit") c.mode = MildMode::semi_implicit;
        else fail("solver.mode", "expected yosida_cascade|semi_implicit");
    }
    if (so.contains("auto_shift")) {
        if (!so["auto_shift"].is_boolean()) fail("solver.auto_shift", "expected a boolean");
        c.auto_shift = so["auto_shift"].get<bool>();
    }

    // --- run ---
    const json& run = root["run"];
    expect_object(run, "run");
    reject_unknown(run, "run", {"s", "T", "master_seed", "n_paths", "experiment", "params"});
    c.s = num_or(run, "s", "run", 0.0);
    c.T = num(run.at("T"), "run.T");
    if (!(c.T > c.s)) fail("run.T", "must exceed run.s");
    if (run.contains("master_seed")) {
        if (!run["master_seed"].is_number_unsigned() && !run["master_seed"].is_number_integer())
            fail("run.master_seed", "expected an integer");
        c.master_seed = run["master_seed"].get<std::uint64_t>();
    }
    if (run.contains("n_paths")) c.n_paths = integer(run["n_paths"], "run.n_paths");
    if (c.n_paths < 1) fail("run.n_paths", "must be >= 1");
    const std::string exp = str(run.at("experiment"), "run.experiment");
    bool known = false;
    for (auto kind : {ExperimentKind::deterministic_solve, ExperimentKind::estimate_audit,
                      ExperimentKind::k_convergence, ExperimentKind::n_convergence,
                      ExperimentKind::spde_ensemble, ExperimentKind::chs_sweep,
                      ExperimentKind::factorization_compare, ExperimentKind::transition_table}) {
        if (exp == experiment_name(kind)) {
            c.experiment = kind;
            known = true;
        }
    }
    if (!known) fail("run.experiment", "unknown experiment kind '" + exp + "'");
    if (run.contains("params")) {
        expect_object(run["params"], "run.params");
        c.params = run["params"];
    }

    // dt must tile [s, T] so every module sees the same aligned grid
    const double steps = (c.T - c.s) / c.dt;
    if (std::abs(steps - std::llround(steps)) > 1e-9 * std::max(1.0, steps) || std::llround(steps) < 1)
        fail("solver.dt", "must divide T - s into a whole number of steps");

    // resolve zeta: always compute the sharp value; honor a user override
    if (c.reaction) {
        const SamplingLattice lattice = uniform_times(c.s, c.T, 9);
        c.reported_sharp_zeta = dissipativity_constant(*c.reaction, c.grid, lattice);
        if (root["problem"]["reaction"].contains("zeta") &&
            !root["problem"]["reaction"]["zeta"].is_null()) {
            const double user = num(root["problem"]["reaction"]["zeta"], "problem.reaction.zeta");
            if (user < c.reported_sharp_zeta - 1e-9)
                fail("problem.reaction.zeta",
                     "below the computed dissipativity constant " +
                         std::to_string(c.reported_sharp_zeta));
            c.reaction->zeta = user;
            c.reaction->zeta_user_supplied = true;
        } else {
            c.reaction->zeta = c.reported_sharp_zeta;
        }
    }
    return c;
}

inline ExperimentConfig load_config_string(const std::string& text) {
    json parsed;
    try {
        parsed = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigInvalid(std::string("config: JSON parse error: ") + e.what());
    }
    return load_config(parsed);
}

/// Machine-readable description of the accepted config fields, served by the
/// `schema` subcommand and documented in the README.
inline json config_schema() {
    return json::parse(R"schema({
  "problem": {
    "grid": {"lo": "number", "hi": "number", "n_interior": "int >= 1", "dimension": "1|2"},
    "bc": "dirichlet|neumann|robin (robin draws its coefficient from a0)",
    "coefficients": {
      "a11|a22|a12|drift1|drift2|a0": "[{t:[...], x:[...], y:[...]}] sum of separable polynomial terms",
      "ellipticity_floor": "number > 0"
    },
    "reaction": {
      "m": "int >= 0 (degree 2m+1)",
      "C": "array of 2m+2 coefficients, C[k] multiplies s^k; the leading term enters as -C_{2m+1} s^{2m+1}",
      "leading_floor": "number > 0",
      "zeta": "number|null (null: computed exactly from the roots of d2b/ds2)"
    },
    "initial": {"kind": "sine|constant|nodes", "mode": "int", "amplitude": "number", "value": "number", "values": "[...]"}
  },
  "noise": {
    "basis": "sine",
    "K": "int >= 1",
    "alpha": "number in (0, 1/2)",
    "bk": {"kind": "constant|power|gamma", "value": "number", "exponent": "number", "gamma": "number >= 0 (b_k = k^{-2 gamma})"}
  },
  "solver": {
    "scheme": "implicit_euler|crank_nicolson|yosida_product",
    "dt": "number > 0, must divide T - s",
    "picard_tol": "number", "cascade_tol": "number", "resolvent_tol": "number",
    "k0": "number (0: auto = 2 max(1, zeta))",
    "yosida_n": "number (index of the bounded approximant)",
    "mode": "yosida_cascade|semi_implicit",
    "auto_shift": "bool (audit A(t) and fold the dissipativity shift into zeta)"
  },
  "run": {
    "s": "number", "T": "number", "master_seed": "uint64", "n_paths": "int >= 1",
    "experiment": "deterministic_solve|estimate_audit|k_convergence|n_convergence|spde_ensemble|chs_sweep|factorization_compare|transition_table",
    "params": {
      "deterministic_solve": {"cross_check": "bool (default true)"},
      "estimate_audit": {"perturbation": "initial-spec object (default sine mode 1, amplitude 0.1)"},
      "k_convergence": {"k_values": "[numbers]", "slope_window": "[lo, hi] on the distance fit"},
      "n_convergence": {"n_values": "[numbers]", "k": "number"},
      "spde_ensemble": {"functionals": "[{kind: one|mode_mean|bounded_mode, mode: int}]", "output_stride": "int", "perturbation": "initial-spec for pathwise lipschitz audits"},
      "chs_sweep": {"sweep": "alpha|gamma", "values": "[numbers]", "chs_steps": "int (internal grid; must resolve mode K)"},
      "factorization_compare": {"step_counts": "[ints, ascending, each dividing the largest]"},
      "transition_table": {"functionals": "[...]", "audit_contraction": "bool"}
    }
  }
})schema");
}

} // namespace reactodiff
