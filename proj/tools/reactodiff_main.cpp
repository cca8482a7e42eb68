// reactodiff CLI: run experiment configs, validate them, or print the schema.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "reactodiff/experiments.hpp"
#include "reactodiff/version.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw reactodiff::IoFailure("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int resolve_threads(int cli_threads) {
    if (cli_threads > 0) return cli_threads;
    if (const char* env = std::getenv("REACTODIFF_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1; // reference mode
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"reactodiff — non-autonomous reaction-diffusion testbed"};
    app.set_version_flag("--version", std::string(reactodiff::kVersion));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed_override = 0;
    bool seed_overridden = false;
    int threads = 0;

    CLI::App* run = app.add_subcommand("run", "run an experiment and emit its report");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed_override, "override run.master_seed")
        ->each([&](const std::string&) { seed_overridden = true; });
    run->add_option("--threads", threads,
                    "worker threads (default 1 = reference mode; REACTODIFF_THREADS as fallback)");

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
    validate->add_option("--config", config_path, "experiment config (JSON)")->required();

    app.add_subcommand("schema", "print the config schema");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("schema")) {
            std::cout << reactodiff::config_schema().dump(2) << "\n";
            return 0;
        }
        if (app.got_subcommand("validate")) {
            reactodiff::load_config_string(read_file(config_path));
            std::cout << "ok: " << config_path << "\n";
            return 0;
        }
        reactodiff::ExperimentConfig cfg = reactodiff::load_config_string(read_file(config_path));
        if (seed_overridden) {
            cfg.master_seed = seed_override;
            cfg.echo["run"]["master_seed"] = seed_override;
        }
        const reactodiff::ReportBundle bundle =
            reactodiff::run_experiment(cfg, resolve_threads(threads));
        const auto files = reactodiff::emit_report(bundle, out_dir);
        for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
        std::cout << (bundle.overall_pass ? "PASS" : "FAIL") << " " << bundle.experiment << " ("
                  << bundle.wall_seconds << "s)\n";
        return bundle.overall_pass ? 0 : 1;
    } catch (const reactodiff::ConfigInvalid& e) {
        std::cerr << "config invalid: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
