#pragma once

#include <chrono>
#include <limits>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "reactodiff/config.hpp"
#include "reactodiff/stochastic.hpp"
#include "reactodiff/version.hpp"

namespace reactodiff {

/// 17 significant digits: doubles survive the round trip through text.
inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Table {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells) { rows.push_back(std::move(cells)); }
};

struct ReportBundle {
    json config_echo;
    std::string experiment;
    std::vector<Table> tables;
    json summary = json::object();
    bool overall_pass = true;
    double wall_seconds = 0.0;
};

namespace experiments_detail {

inline void append_estimate_table(std::vector<Table>& tables, const std::string& name,
                                  const EstimateReport& rep) {
    Table t;
    t.name = name;
    t.header = {"t", "lhs", "envelope", "margin", "pass"};
    for (const auto& row : rep.rows)
        t.add_row({fmt17(row.t), fmt17(row.lhs), fmt17(row.envelope), fmt17(row.margin),
                   row.pass ? "1" : "0"});
    tables.push_back(std::move(t));
}

inline FunctionalSpec parse_functional(const json& j, const std::string& path) {
    cfg_detail::expect_object(j, path);
    cfg_detail::reject_unknown(j, path, {"kind", "mode"});
    FunctionalSpec f;
    const std::string kind = cfg_detail::str(j.at("kind"), path + ".kind");
    if (kind == "one") f.kind = FunctionalSpec::Kind::one;
    else if (kind == "mode_mean") f.kind = FunctionalSpec::Kind::mode_mean;
    else if (kind == "bounded_mode") f.kind = FunctionalSpec::Kind::bounded_mode;
    else cfg_detail::fail(path + ".kind", "expected one|mode_mean|bounded_mode");
    if (j.contains("mode")) f.mode_index = cfg_detail::integer(j["mode"], path + ".mode");
    return f;
}

inline InitialSpec parse_perturbation(const json& j, const std::string& path) {
    cfg_detail::expect_object(j, path);
    cfg_detail::reject_unknown(j, path, {"kind", "mode", "amplitude", "value", "values"});
    InitialSpec spec;
    const std::string kind = cfg_detail::str(j.at("kind"), path + ".kind");
    if (kind == "sine") {
        spec.kind = InitialSpec::Kind::sine;
        if (j.contains("mode")) spec.mode = cfg_detail::integer(j["mode"], path + ".mode");
        spec.amplitude = cfg_detail::num_or(j, "amplitude", path, 0.1);
    } else if (kind == "constant") {
        spec.kind = InitialSpec::Kind::constant;
        spec.value = cfg_detail::num_or(j, "value", path, 0.1);
    } else {
        cfg_detail::fail(path + ".kind", "expected sine|constant");
    }
    return spec;
}

inline void run_deterministic_solve(const ExperimentConfig& cfg, ReportBundle& out) {
    cfg_detail::reject_unknown(cfg.params, "run.params", {"cross_check"});
    const Problem p = cfg.build_problem();
    const TimeGrid tg = cfg.time_grid();
    const Field x = cfg.initial.build(cfg.grid);
    const ForcingPath f = zero_forcing(tg, cfg.grid);
    const bool cross = !cfg.params.contains("cross_check") || cfg.params["cross_check"].get<bool>();

    SolverOptions opts = cfg.solver;
    opts.scheme.dt = tg.dt();
    double disagreement = 0.0;
    const Trajectory traj = (cross && p.reaction)
                                ? mild_solve_cross_checked(p, x, f, tg, opts, &disagreement)
                                : mild_solve(p, x, f, tg, cfg.mode, opts);

    Table t;
    t.name = "trajectory";
    t.header = {"t", "norm_H", "norm_sup"};
    for (int i = 0; i <= tg.n_steps; ++i)
        t.add_row({fmt17(tg.node(i)), fmt17(norm_h(traj.at(i))), fmt17(norm_sup(traj.at(i)))});
    out.tables.push_back(std::move(t));

    Table fin;
    fin.name = "final_state";
    fin.header = cfg.grid.dimension == 1 ? std::vector<std::string>{"node", "xi", "value"}
                                         : std::vector<std::string>{"node", "xi", "eta", "value"};
    for (int i = 0; i < cfg.grid.total_nodes(); ++i) {
        const auto xy = cfg.grid.node_coords(i);
        std::vector<std::string> row{std::to_string(i), fmt17(xy[0])};
        if (cfg.grid.dimension == 2) row.push_back(fmt17(xy[1]));
        row.push_back(fmt17(traj.back().values[static_cast<std::size_t>(i)]));
        fin.add_row(std::move(row));
    }
    out.tables.push_back(std::move(fin));

    out.summary["problem_shift"] = p.shift;
    out.summary["zeta_effective"] = p.zeta_eff();
    out.summary["cascade_k"] = traj.meta.k;
    out.summary["cascade_distance"] = traj.meta.cascade_distance;
    if (cross && p.reaction) out.summary["mode_disagreement"] = disagreement;
    for (double v : traj.back().values)
        if (!std::isfinite(v)) out.overall_pass = false;
}

inline void run_estimate_audit(const ExperimentConfig& cfg, ReportBundle& out) {
    cfg_detail::reject_unknown(cfg.params, "run.params", {"perturbation"});
    const Problem p = cfg.build_problem();
    const TimeGrid tg = cfg.time_grid();
    const Field x = cfg.initial.build(cfg.grid);
    InitialSpec pspec;
    pspec.amplitude = 0.1;
    if (cfg.params.contains("perturbation"))
        pspec = parse_perturbation(cfg.params["perturbation"], "run.params.perturbation");
    const Field z = x + pspec.build(cfg.grid);
    const ForcingPath f = zero_forcing(tg, cfg.grid);

    SolverOptions opts = cfg.solver;
    opts.scheme.dt = tg.dt();
    const Trajectory ya = mild_solve(p, x, f, tg, cfg.mode, opts);
    const Trajectory yb = mild_solve(p, z, f, tg, cfg.mode, opts);

    const std::vector<EstimateReport> reports = verify_estimates(ya, yb, p, f);
    Table combined;
    combined.name = "estimates";
    combined.header = {"t", "lhs", "envelope", "margin", "pass"};
    json pass_rates = json::object();
    for (const auto& rep : reports) {
        for (const auto& row : rep.rows)
            combined.add_row({fmt17(row.t), fmt17(row.lhs), fmt17(row.envelope), fmt17(row.margin),
                              row.pass ? "1" : "0"});
        append_estimate_table(out.tables, "estimates_" + rep.name, rep);
        pass_rates[rep.name] = rep.all_pass;
        out.overall_pass = out.overall_pass && rep.all_pass;
    }
    out.tables.insert(out.tables.begin(), std::move(combined));
    out.summary["envelopes"] = pass_rates;
    out.summary["zeta_effective"] = p.zeta_eff();
}

inline void run_k_convergence(const ExperimentConfig& cfg, ReportBundle& out) {
    cfg_detail::reject_unknown(cfg.params, "run.params", {"k_values", "slope_window"});
    const Problem p = cfg.build_problem();
    const TimeGrid tg = cfg.time_grid();
    Vec ks{4.0, 8.0, 16.0, 32.0, 64.0};
    if (cfg.params.contains("k_values"))
        ks = cfg_detail::num_list(cfg.params["k_values"], "run.params.k_values");
    Vec window{-1.4, -0.6};
    if (cfg.params.contains("slope_window"))
        window = cfg_detail::num_list(cfg.params["slope_window"], "run.params.slope_window");

    SolverOptions opts = cfg.solver;
    opts.scheme.dt = tg.dt();
    const KConvergence kc = k_convergence_study(p, cfg.initial.build(cfg.grid),
                                                zero_forcing(tg, cfg.grid), tg, opts, ks);
    Table t;
    t.name = "ksweep";
    t.header = {"k", "sup_dist_sq"};
    for (std::size_t i = 0; i < kc.ks.size(); ++i)
        t.add_row({fmt17(kc.ks[i]), fmt17(kc.sup_dist_sq[i])});
    out.tables.push_back(std::move(t));
    out.summary["slope_distance_fit"] = kc.slope;
    out.summary["slope_squared_fit"] = kc.slope_sq;
    out.summary["fitted_C"] = kc.fitted_C;
    out.overall_pass = out.overall_pass && kc.slope >= window[0] && kc.slope <= window[1];
}

inline void run_n_convergence(const ExperimentConfig& cfg, ReportBundle& out) {
    cfg_detail::reject_unknown(cfg.params, "run.params", {"n_values", "k"});
    const Problem p = cfg.build_problem();
    const TimeGrid tg = cfg.time_grid();
    Vec ns{100.0, 1000.0, 10000.0};
    if (cfg.params.contains("n_values"))
        ns = cfg_detail::num_list(cfg.params["n_values"], "run.params.n_values");
    const double k = cfg_detail::num_or(cfg.params, "k", "run.params",
                                        2.0 * std::max(1.0, p.zeta_eff()));

    SolverOptions opts = cfg.solver;
    opts.scheme.dt = tg.dt();
    const Field x = cfg.initial.build(cfg.grid);
    const ForcingPath f = zero_forcing(tg, cfg.grid);
    const Trajectory ref = mild_solve_k(p, k, x, f, tg, opts);
    Table t;
    t.name = "nsweep";
    t.header = {"n", "sup_dist_to_klevel"};
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double n : ns) {
        const double d = sup_distance(picard_solve_regularized(p, k, n, x, f, tg, opts), ref);
        monotone = monotone && d <= prev;
        prev = d;
        t.add_row({fmt17(n), fmt17(d)});
    }
    out.tables.push_back(std::move(t));
    out.summary["monotone_decrease"] = monotone;
    out.overall_pass = out.overall_pass && monotone;
}

inline void run_spde_ensemble(const ExperimentConfig& cfg, ReportBundle& out, int threads) {
    cfg_detail::reject_unknown(cfg.params, "run.params",
                               {"functionals", "output_stride", "perturbation"});
    const Problem p = cfg.build_problem();
    const TimeGrid tg = cfg.time_grid();
    const NoiseModel model = cfg.build_noise();
    const Field x = cfg.initial.build(cfg.grid);
    SolverOptions opts = cfg.solver;
    opts.scheme.dt = tg.dt();

    std::vector<FunctionalSpec> fns{{FunctionalSpec::Kind::mode_mean, 1}};
    if (cfg.params.contains("functionals")) {
        fns.clear();
        const json& list = cfg.params["functionals"];
        for (std::size_t i = 0; i < list.size(); ++i)
            fns.push_back(parse_functional(list[i],
                                           "run.params.functionals[" + std::to_string(i) + "]"));
    }
    int stride = std::max(1, tg.n_steps / 32);
    if (cfg.params.contains("output_stride"))
        stride = cfg_detail::integer(cfg.params["output_stride"], "run.params.output_stride");
    std::optional<Field> z_datum;
    if (cfg.params.contains("perturbation"))
        z_datum = x + parse_perturbation(cfg.params["perturbation"], "run.params.perturbation")
                          .build(cfg.grid);

    const PathEnsemble ens{cfg.master_seed, cfg.n_paths};
    struct PathOut {
        std::vector<std::vector<double>> functional_rows; // per sampled node
        Vec terminal;                                     // functional values at T
        bool env_pass = true;
        bool lip_pass = true;
    };
    std::vector<PathOut> results(static_cast<std::size_t>(cfg.n_paths));

    for_each_path(cfg.n_paths, threads, [&](int i) {
        const WienerPath w = sample_wiener(model, tg, ens.path_seed(i));
        const Trajectory z = convolve_direct(p, model, w, tg, opts);
        const Trajectory X = spde_solve(p, model, x, tg, cfg.mode, opts, w);
        PathOut& po = results[static_cast<std::size_t>(i)];
        for (int node = 0; node <= tg.n_steps; node += stride) {
            std::vector<double> row{tg.node(node)};
            for (const auto& fn : fns) row.push_back(eval_functional(fn, model, X.at(node)));
            po.functional_rows.push_back(std::move(row));
        }
        for (const auto& fn : fns) po.terminal.push_back(eval_functional(fn, model, X.back()));

        // pathwise state envelopes with f = Z
        ForcingPath fz;
        fz.time_grid = tg;
        fz.values = z.states;
        Trajectory y = X;
        for (int nidx = 0; nidx <= tg.n_steps; ++nidx)
            y.states[static_cast<std::size_t>(nidx)] =
                X.at(nidx) - z.at(nidx); // Y = X − Z satisfies the deterministic bound
        const EstimateReport sx = audit_state_envelope(y, p, fz, NormKind::H, "pathwise_state_bound_H");
        const EstimateReport se = audit_state_envelope(y, p, fz, NormKind::SupE, "pathwise_state_bound_E");
        po.env_pass = sx.all_pass && se.all_pass;

        if (z_datum) {
            const Trajectory Xz = spde_solve(p, model, *z_datum, tg, cfg.mode, opts, w);
            po.lip_pass = audit_lipschitz_envelope(X, Xz, p, NormKind::H, "pathwise_lipschitz_H").all_pass &&
                          audit_lipschitz_envelope(X, Xz, p, NormKind::SupE, "pathwise_lipschitz_E").all_pass;
        }
    });

    Table t;
    t.name = "ensemble";
    t.header = {"path_id", "t"};
    for (const auto& fn : fns) t.header.push_back(functional_name(fn.kind));
    for (int i = 0; i < cfg.n_paths; ++i)
        for (const auto& row : results[static_cast<std::size_t>(i)].functional_rows) {
            std::vector<std::string> cells{std::to_string(i), fmt17(row[0])};
            for (std::size_t j = 1; j < row.size(); ++j) cells.push_back(fmt17(row[j]));
            t.add_row(std::move(cells));
        }
    out.tables.push_back(std::move(t));

    json fsummary = json::array();
    for (std::size_t j = 0; j < fns.size(); ++j) {
        Vec vals(static_cast<std::size_t>(cfg.n_paths));
        for (int i = 0; i < cfg.n_paths; ++i)
            vals[static_cast<std::size_t>(i)] = results[static_cast<std::size_t>(i)].terminal[j];
        const double mean = pairwise_sum(vals) / cfg.n_paths;
        Vec sq(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) sq[i] = (vals[i] - mean) * (vals[i] - mean);
        const double var = cfg.n_paths > 1 ? pairwise_sum(sq) / (cfg.n_paths - 1) : 0.0;
        fsummary.push_back({{"functional", functional_name(fns[j].kind)},
                            {"mode", fns[j].mode_index},
                            {"terminal_mean", mean},
                            {"terminal_variance", var}});
    }
    out.summary["functionals"] = fsummary;

    int env_passes = 0, lip_passes = 0;
    for (const auto& r : results) {
        env_passes += r.env_pass ? 1 : 0;
        lip_passes += r.lip_pass ? 1 : 0;
    }
    out.summary["envelope_pass_rate"] = static_cast<double>(env_passes) / cfg.n_paths;
    out.summary["lipschitz_pass_rate"] = static_cast<double>(lip_passes) / cfg.n_paths;
    out.overall_pass = out.overall_pass && env_passes == cfg.n_paths && lip_passes == cfg.n_paths;
}

inline void run_chs_sweep(const ExperimentConfig& cfg, ReportBundle& out) {
    cfg_detail::reject_unknown(cfg.params, "run.params", {"sweep", "values", "chs_steps"});
    const Problem p = cfg.build_problem();
    const std::string sweep = cfg.params.contains("sweep")
                                  ? cfg_detail::str(cfg.params["sweep"], "run.params.sweep")
                                  : "alpha";
    if (sweep != "alpha" && sweep != "gamma")
        cfg_detail::fail("run.params.sweep", "expected alpha|gamma");
    Vec values{0.15, 0.20, 0.23, 0.27, 0.30};
    if (cfg.params.contains("values"))
        values = cfg_detail::num_list(cfg.params["values"], "run.params.values");
    int chs_steps = cfg.n_steps();
    if (cfg.params.contains("chs_steps"))
        chs_steps = cfg_detail::integer(cfg.params["chs_steps"], "run.params.chs_steps");
    const TimeGrid tg = make_time_grid(cfg.s, cfg.T, chs_steps);

    Table t;
    t.name = "chs";
    t.header = {sweep, "value_K", "value_K_half", "value_K_quarter", "diverging", "growth_exponent"};
    for (double v : values) {
        NoiseModel model;
        double alpha = cfg.alpha;
        if (sweep == "alpha") {
            if (!(v > 0.0 && v < 0.5))
                cfg_detail::fail("run.params.values", "alpha sweep values must lie in (0, 1/2)");
            alpha = v;
            model = make_sine_noise_model(cfg.grid, cfg.K, alpha, cfg.bk);
        } else {
            if (v < 0.0) cfg_detail::fail("run.params.values", "gamma must be >= 0");
            model = make_sine_noise_model(cfg.grid, cfg.K, alpha,
                                          BkSpec{.kind = BkSpec::Kind::gamma_fractional,
                                                 .gamma = v});
        }
        const ChsResult r = chs_estimate(p, model, cfg.s, cfg.T, alpha, tg);
        t.add_row({fmt17(v), fmt17(r.values_by_K[2]), fmt17(r.values_by_K[1]),
                   fmt17(r.values_by_K[0]), r.diverging ? "1" : "0", fmt17(r.growth_exponent)});
    }
    out.tables.push_back(std::move(t));
    out.summary["sweep"] = sweep;
}

inline void run_factorization_compare(const ExperimentConfig& cfg, ReportBundle& out) {
    cfg_detail::reject_unknown(cfg.params, "run.params", {"step_counts"});
    const Problem p = cfg.build_problem();
    const NoiseModel model = cfg.build_noise();
    std::vector<int> counts{512, 2048};
    if (cfg.params.contains("step_counts")) {
        counts.clear();
        for (double v : cfg_detail::num_list(cfg.params["step_counts"], "run.params.step_counts"))
            counts.push_back(static_cast<int>(v));
    }
    const int finest = counts.back();
    for (int c : counts)
        if (c < 1 || finest % c != 0)
            cfg_detail::fail("run.params.step_counts",
                             "counts must ascend and divide the largest");

    const TimeGrid fine_grid = make_time_grid(cfg.s, cfg.T, finest);
    const WienerPath fine_path = sample_wiener(model, fine_grid, cfg.master_seed);

    Table t;
    t.name = "factorization";
    t.header = {"n_steps", "dt", "sup_rel_err_H"};
    Vec errs;
    for (int c : counts) {
        const WienerPath w = c == finest ? fine_path : coarsen(fine_path, finest / c);
        const TimeGrid tg = w.time_grid;
        SolverOptions opts = cfg.solver;
        opts.scheme.dt = tg.dt();
        const Trajectory d = convolve_direct(p, model, w, tg, opts);
        const Trajectory f = convolve_factorized(p, model, w, tg, opts);
        double sup_err = 0.0, sup_ref = 0.0;
        for (int i = 0; i <= tg.n_steps; ++i) {
            sup_err = std::max(sup_err, norm_h(d.at(i) - f.at(i)));
            sup_ref = std::max(sup_ref, norm_h(d.at(i)));
        }
        const double rel = sup_err / sup_ref;
        errs.push_back(rel);
        t.add_row({std::to_string(c), fmt17(tg.dt()), fmt17(rel)});
    }
    out.tables.push_back(std::move(t));
    bool decreasing = true;
    for (std::size_t i = 1; i < errs.size(); ++i) decreasing = decreasing && errs[i] < errs[i - 1];
    out.summary["final_rel_err"] = errs.back();
    out.summary["decreasing"] = decreasing;
    if (errs.size() >= 2) out.summary["refinement_ratio"] = errs.front() / errs.back();
    out.overall_pass = out.overall_pass && decreasing;
}

inline void run_transition_table(const ExperimentConfig& cfg, ReportBundle& out, int threads) {
    cfg_detail::reject_unknown(cfg.params, "run.params", {"functionals", "audit_contraction"});
    const Problem p = cfg.build_problem();
    const TimeGrid tg = cfg.time_grid();
    const NoiseModel model = cfg.build_noise();
    const Field x = cfg.initial.build(cfg.grid);
    SolverOptions opts = cfg.solver;
    opts.scheme.dt = tg.dt();
    std::vector<FunctionalSpec> fns{{FunctionalSpec::Kind::one, 1},
                                    {FunctionalSpec::Kind::mode_mean, 1},
                                    {FunctionalSpec::Kind::bounded_mode, 1}};
    if (cfg.params.contains("functionals")) {
        fns.clear();
        const json& list = cfg.params["functionals"];
        for (std::size_t i = 0; i < list.size(); ++i)
            fns.push_back(parse_functional(list[i],
                                           "run.params.functionals[" + std::to_string(i) + "]"));
    }
    const bool audit = !cfg.params.contains("audit_contraction") ||
                       cfg.params["audit_contraction"].get<bool>();
    const PathEnsemble ens{cfg.master_seed, cfg.n_paths};

    Table t;
    t.name = "transition";
    t.header = {"functional", "mode", "estimate", "std_error"};
    for (const auto& fn : fns) {
        const TransitionEstimate est =
            transition_estimate(p, model, x, fn, tg, cfg.mode, opts, ens, threads);
        t.add_row({functional_name(fn.kind), std::to_string(fn.mode_index), fmt17(est.estimate),
                   fmt17(est.std_error)});
        if (audit) {
            if (fn.kind == FunctionalSpec::Kind::one)
                out.overall_pass = out.overall_pass && est.estimate == 1.0 && est.std_error == 0.0;
            if (fn.kind == FunctionalSpec::Kind::bounded_mode)
                out.overall_pass = out.overall_pass &&
                                   std::abs(est.estimate) <= 1.0 + 4.0 * est.std_error;
        }
    }
    out.tables.push_back(std::move(t));
}

} // namespace experiments_detail

inline ReportBundle run_experiment(const ExperimentConfig& cfg, int threads = 1) {
    const auto t0 = std::chrono::steady_clock::now();
    ReportBundle out;
    out.config_echo = cfg.echo;
    out.experiment = experiment_name(cfg.experiment);
    if (cfg.reaction) {
        out.summary["zeta"] = cfg.reaction->zeta;
        out.summary["zeta_sharp_computed"] = cfg.reported_sharp_zeta;
        out.summary["zeta_user_supplied"] = cfg.reaction->zeta_user_supplied;
    }
    switch (cfg.experiment) {
        case ExperimentKind::deterministic_solve:
            experiments_detail::run_deterministic_solve(cfg, out);
            break;
        case ExperimentKind::estimate_audit:
            experiments_detail::run_estimate_audit(cfg, out);
            break;
        case ExperimentKind::k_convergence:
            experiments_detail::run_k_convergence(cfg, out);
            break;
        case ExperimentKind::n_convergence:
            experiments_detail::run_n_convergence(cfg, out);
            break;
        case ExperimentKind::spde_ensemble:
            experiments_detail::run_spde_ensemble(cfg, out, threads);
            break;
        case ExperimentKind::chs_sweep:
            experiments_detail::run_chs_sweep(cfg, out);
            break;
        case ExperimentKind::factorization_compare:
            experiments_detail::run_factorization_compare(cfg, out);
            break;
        case ExperimentKind::transition_table:
            experiments_detail::run_transition_table(cfg, out, threads);
            break;
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

/// Atomic file write: temp + rename, so readers never observe partial output.
inline void write_file_atomic(const std::filesystem::path& target, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("emit_report: cannot open " + tmp.string());
        out << content;
        if (!out) throw IoFailure("emit_report: short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoFailure("emit_report: rename failed for " + target.string());
}

/// Writes report.json plus one CSV per table. Timestamps live only in
/// report.json; CSV bytes depend on (config, seed) alone.
inline std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                                      const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoFailure("emit_report: cannot create " + out_dir.string());

    std::vector<fs::path> written;
    for (const auto& table : bundle.tables) {
        std::string csv;
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            csv += table.header[i];
            csv += (i + 1 < table.header.size()) ? "," : "\n";
        }
        for (const auto& row : table.rows)
            for (std::size_t i = 0; i < row.size(); ++i) {
                csv += row[i];
                csv += (i + 1 < row.size()) ? "," : "\n";
            }
        const fs::path path = out_dir / (table.name + ".csv");
        write_file_atomic(path, csv);
        written.push_back(path);
    }

    json report;
    report["artifact_version"] = kVersion;
    report["experiment"] = bundle.experiment;
    report["overall_pass"] = bundle.overall_pass;
    report["summary"] = bundle.summary;
    report["wall_seconds"] = bundle.wall_seconds;
    report["generated_at_unix"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    report["config"] = bundle.config_echo;
    const fs::path rp = out_dir / "report.json";
    write_file_atomic(rp, report.dump(2) + "\n");
    written.push_back(rp);
    return written;
}

} // namespace reactodiff
