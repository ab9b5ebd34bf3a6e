// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/ssrelay.h"

#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "ssrelay/config.hpp"
#include "ssrelay/experiments.hpp"
#include "ssrelay/version.hpp"

struct ssr_config {
    ssrelay::RunConfig run;
    std::string resolved_text;
    std::string hash_text;

    void refresh() {
        resolved_text = run.resolved.dump();
        hash_text = run.hash_hex();
    }
};

struct ssr_solution {
    ssrelay::RunConfig run;
    ssrelay::SolveOutput out;
};

namespace {

thread_local std::string g_last_error;

ssr_status fail(ssr_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

template <typename Fn>
ssr_status guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        return fn();
    } catch (const ssrelay::ConfigError& e) {
        return fail(SSR_CONFIG, e.what());
    } catch (const ssrelay::DomainError& e) {
        return fail(SSR_DOMAIN, e.what());
    } catch (const std::bad_alloc&) {
        return fail(SSR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(SSR_INTERNAL, e.what());
    } catch (...) {
        return fail(SSR_INTERNAL, "unknown error");
    }
}

ssr_status write_file(const char* path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) return fail(SSR_IO, std::string("cannot open '") + path + "' for writing");
    os << text;
    os.close();
    if (!os) return fail(SSR_IO, std::string("failed writing '") + path + "'");
    return SSR_OK;
}

}  // namespace

extern "C" {

const char* ssr_version(void) { return ssrelay::kVersion; }

const char* ssr_last_error(void) { return g_last_error.c_str(); }

ssr_status ssr_config_parse(const char* json_text, ssr_config** out) {
    if (!json_text || !out) return fail(SSR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto cfg = std::make_unique<ssr_config>();
        cfg->run = ssrelay::parse_config_text(json_text);
        cfg->refresh();
        *out = cfg.release();
        return SSR_OK;
    });
}

ssr_status ssr_config_load(const char* path, ssr_config** out) {
    if (!path || !out) return fail(SSR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    {
        std::ifstream probe(path);
        if (!probe) return fail(SSR_IO, std::string("cannot open config file '") + path + "'");
    }
    return guarded([&] {
        auto cfg = std::make_unique<ssr_config>();
        cfg->run = ssrelay::load_config(path);
        cfg->refresh();
        *out = cfg.release();
        return SSR_OK;
    });
}

void ssr_config_free(ssr_config* cfg) { delete cfg; }

ssr_status ssr_config_set_seed(ssr_config* cfg, uint64_t seed) {
    if (!cfg) return fail(SSR_INVALID_ARGUMENT, "null config");
    cfg->run.seed = seed;
    cfg->run.resolved["seed"] = seed;
    cfg->refresh();
    return SSR_OK;
}

uint64_t ssr_config_seed(const ssr_config* cfg) { return cfg ? cfg->run.seed : 0; }

const char* ssr_config_resolved_json(const ssr_config* cfg) {
    return cfg ? cfg->resolved_text.c_str() : "";
}

const char* ssr_config_hash(const ssr_config* cfg) { return cfg ? cfg->hash_text.c_str() : ""; }

ssr_status ssr_validate(const ssr_config* cfg) {
    if (!cfg) return fail(SSR_INVALID_ARGUMENT, "null config");
    return guarded([&] {
        const auto& r = cfg->run;
        auto report = ssrelay::validate(r.params, r.grids, r.actions);
        if (!(r.costs.discount >= 0.0 && r.costs.discount < 1.0)) {
            report.violations.push_back({0, "discount must lie in [0, 1)"});
        }
        if (!(r.costs.s_const >= 0.0 && r.costs.c_const >= 0.0)) {
            report.violations.push_back({0, "cost constants must be >= 0"});
        }
        if (!(r.solver.epsilon > 0.0) || r.solver.max_iters == 0) {
            report.violations.push_back({0, "solver needs epsilon > 0 and max_iters >= 1"});
        }
        if (!report.ok()) return fail(SSR_CONFIG, report.describe());
        return SSR_OK;
    });
}

ssr_status ssr_solve(const ssr_config* cfg, unsigned threads, ssr_solution** out) {
    if (!cfg || !out) return fail(SSR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto sol = std::make_unique<ssr_solution>();
        sol->run = cfg->run;
        sol->out = ssrelay::run_solve(sol->run, threads);
        *out = sol.release();
        return SSR_OK;
    });
}

void ssr_solution_free(ssr_solution* sol) { delete sol; }

size_t ssr_solution_iterations(const ssr_solution* sol) {
    return sol ? sol->out.solution.values.iterations : 0;
}

double ssr_solution_residual(const ssr_solution* sol) {
    return sol ? sol->out.solution.values.final_residual() : 0.0;
}

int ssr_solution_converged(const ssr_solution* sol) {
    return sol && sol->out.solution.values.converged ? 1 : 0;
}

size_t ssr_solution_state_count(const ssr_solution* sol) {
    return sol ? sol->out.solution.values.values.size() : 0;
}

double ssr_solution_wall_seconds(const ssr_solution* sol) {
    return sol ? sol->out.wall_seconds : 0.0;
}

ssr_status ssr_solution_lookup(const ssr_solution* sol, size_t state, ssr_lookup_row* row) {
    if (!sol || !row) return fail(SSR_INVALID_ARGUMENT, "null argument");
    if (state >= sol->out.solution.values.values.size()) {
        return fail(SSR_INVALID_ARGUMENT, "state index out of range");
    }
    return guarded([&] {
        const auto& mdp = *sol->out.mdp;
        const auto s = mdp.state_at(state);
        const auto a = sol->out.solution.policy.at(state);
        const auto& g = mdp.grids();
        const auto& ag = mdp.actions();
        *row = {g.rho_p_levels[s.rho_p_idx], g.rho_s_levels[s.rho_s_idx], g.p_s_levels[s.p_s_idx],
                ag.pd_levels[s.prev_pd_idx],  ag.ic_levels[s.prev_ic_idx],  ag.pd_levels[a.pd_idx],
                ag.ic_levels[a.ic_idx],       sol->out.solution.values.values[state]};
        return SSR_OK;
    });
}

ssr_status ssr_solution_write_table(const ssr_solution* sol, const char* path) {
    if (!sol || !path) return fail(SSR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        std::ostringstream os;
        ssrelay::write_lookup_csv(os, sol->run, sol->out);
        return write_file(path, os.str());
    });
}

ssr_status ssr_solution_write_manifest(const ssr_solution* sol, const char* path) {
    if (!sol || !path) return fail(SSR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        return write_file(path, ssrelay::solve_manifest(sol->run, sol->out).dump(2) + "\n");
    });
}

ssr_status ssr_sweep(const ssr_config* cfg, unsigned threads, const char* path, int* all_converged) {
    if (!cfg || !path) return fail(SSR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto out = ssrelay::run_sweep(cfg->run, threads);
        if (all_converged) *all_converged = out.all_converged ? 1 : 0;
        return write_file(path, out.csv);
    });
}

ssr_status ssr_simulate(const ssr_config* cfg, unsigned threads, const char* path, int* all_within) {
    if (!cfg || !path) return fail(SSR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto out = ssrelay::run_simulate(cfg->run, threads);
        if (all_within) *all_within = out.all_within ? 1 : 0;
        return write_file(path, out.csv);
    });
}

}  // extern "C"
