// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Uses only the C interface.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>

#include "ssrelay/ssrelay.h"

namespace {

enum Exit { kOk = 0, kConfig = 1, kNotConverged = 2, kStatistical = 3 };

struct Options {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
};

int report(ssr_status st, const char* what) {
    std::fprintf(stderr, "ssrelay: %s failed: %s\n", what, ssr_last_error());
    (void)st;
    return kConfig;
}

// Loads the config (or the built-in defaults) and applies --seed.
ssr_config* open_config(const Options& o) {
    ssr_config* cfg = nullptr;
    const ssr_status st =
        o.config.empty() ? ssr_config_parse("{}", &cfg) : ssr_config_load(o.config.c_str(), &cfg);
    if (st != SSR_OK) {
        report(st, "loading config");
        return nullptr;
    }
    if (o.seed) ssr_config_set_seed(cfg, *o.seed);
    return cfg;
}

std::string prepare_out(const Options& o, const char* name) {
    std::error_code ec;
    std::filesystem::create_directories(o.out, ec);
    return (std::filesystem::path(o.out) / name).string();
}

int cmd_validate(const Options& o) {
    ssr_config* cfg = open_config(o);
    if (!cfg) return kConfig;
    const ssr_status st = ssr_validate(cfg);
    if (st == SSR_OK) {
        std::printf("ok config_hash=%s\n", ssr_config_hash(cfg));
    } else {
        std::fprintf(stderr, "ssrelay: invalid config: %s\n", ssr_last_error());
    }
    ssr_config_free(cfg);
    return st == SSR_OK ? kOk : kConfig;
}

int cmd_solve(const Options& o) {
    ssr_config* cfg = open_config(o);
    if (!cfg) return kConfig;
    ssr_solution* sol = nullptr;
    ssr_status st = ssr_solve(cfg, o.threads, &sol);
    ssr_config_free(cfg);
    if (st != SSR_OK) return report(st, "solve");

    const auto table = prepare_out(o, "lookup_table.csv");
    const auto manifest = prepare_out(o, "solve_manifest.json");
    if ((st = ssr_solution_write_table(sol, table.c_str())) != SSR_OK ||
        (st = ssr_solution_write_manifest(sol, manifest.c_str())) != SSR_OK) {
        ssr_solution_free(sol);
        return report(st, "writing output");
    }
    const int converged = ssr_solution_converged(sol);
    std::fprintf(stderr, "solve: %zu states, %zu iterations, residual %.3g, %s, wall %.3f s\n",
                 ssr_solution_state_count(sol), ssr_solution_iterations(sol),
                 ssr_solution_residual(sol), converged ? "converged" : "NOT converged",
                 ssr_solution_wall_seconds(sol));
    ssr_solution_free(sol);
    return converged ? kOk : kNotConverged;
}

int cmd_sweep(const Options& o) {
    ssr_config* cfg = open_config(o);
    if (!cfg) return kConfig;
    const auto path = prepare_out(o, "sweep.csv");
    int converged = 0;
    const ssr_status st = ssr_sweep(cfg, o.threads, path.c_str(), &converged);
    ssr_config_free(cfg);
    if (st != SSR_OK) return report(st, "sweep");
    std::fprintf(stderr, "sweep: wrote %s%s\n", path.c_str(), converged ? "" : " (not all solves converged)");
    return converged ? kOk : kNotConverged;
}

int cmd_simulate(const Options& o) {
    ssr_config* cfg = open_config(o);
    if (!cfg) return kConfig;
    const auto path = prepare_out(o, "simulate.csv");
    int within = 0;
    const ssr_status st = ssr_simulate(cfg, o.threads, path.c_str(), &within);
    ssr_config_free(cfg);
    if (st != SSR_OK) return report(st, "simulate");
    std::fprintf(stderr, "simulate: wrote %s, %s\n", path.c_str(),
                 within ? "all checks within 3 standard errors" : "statistical check FAILED");
    return within ? kOk : kStatistical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ssrelay: sensing-based spectrum sharing with packet relaying"};
    app.set_version_flag("--version", ssr_version());
    app.require_subcommand(1);

    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON config file (defaults when omitted)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "RNG seed, overrides the config");
        sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
    };
    auto* solve = app.add_subcommand("solve", "solve the joint control MDP and write the lookup table");
    auto* sweep = app.add_subcommand("sweep", "write figure data for a pd, ic or pav sweep");
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo check of the closed-form throughputs");
    auto* validate = app.add_subcommand("validate", "check the config against the model constraints");
    for (auto* sub : {solve, sweep, simulate, validate}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    if (solve->parsed()) return cmd_solve(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (simulate->parsed()) return cmd_simulate(o);
    return cmd_validate(o);
}
