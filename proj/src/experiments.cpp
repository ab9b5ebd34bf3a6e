// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ssrelay/sim.hpp"
#include "ssrelay/version.hpp"

namespace ssrelay {

using nlohmann::json;

namespace {

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    CsvWriter& cell(double x) { return raw(format_double(x)); }
    CsvWriter& cell(std::string_view s) { return raw(s); }
    void end() {
        os_ << '\n';
        first_ = true;
    }

private:
    CsvWriter& raw(std::string_view s) {
        if (!first_) os_ << ',';
        os_ << s;
        first_ = false;
        return *this;
    }
    std::ostream& os_;
    bool first_ = true;
};

void header(std::ostream& os, const json& m, std::initializer_list<std::string_view> columns) {
    os << "# " << m.dump() << '\n';
    CsvWriter w(os);
    for (auto c : columns) w.cell(c);
    w.end();
}

std::size_t top_power(const RunConfig& cfg) { return cfg.grids.p_s_levels.size() - 1; }

void require_nonempty(const std::vector<double>& v, const std::string& what) {
    if (v.empty()) throw ConfigError("sweep grid '" + what + "' is empty");
}

double J(const RelayMdp& mdp, const Solution& sol, const AugmentedState& s) {
    return sol.values.values[mdp.state_index(s)];
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

RelayMdp make_mdp(const RunConfig& cfg) {
    try {
        return RelayMdp(cfg.params, cfg.grids, cfg.actions, cfg.costs);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

std::size_t reference_rho_s(const RunConfig& cfg) {
    const double target = cfg.params.queue.rho_s();
    const auto& g = cfg.grids.rho_s_levels;
    std::size_t best = 0;
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (std::abs(g[i] - target) < std::abs(g[best] - target)) best = i;
    }
    return best;
}

std::size_t grid_index(const std::vector<double>& grid, double value, const std::string& what) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (std::abs(grid[i] - value) <= 1e-9) return i;
    }
    throw ConfigError(what + " value " + format_double(value) + " is not on the grid");
}

SolveOutput run_solve(const RunConfig& cfg, unsigned threads) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveOutput out;
    out.mdp = std::make_unique<RelayMdp>(make_mdp(cfg));
    try {
        cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto compiled = out.mdp->compile();
    out.solution = value_iteration(compiled, cfg.solver, {}, threads);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

json manifest(const RunConfig& cfg, const std::string& command) {
    json config = cfg.resolved;
    config.erase("seed");
    return {{"tool", "ssrelay"},   {"version", kVersion},        {"command", command},
            {"seed", cfg.seed},    {"config_hash", cfg.hash_hex()}, {"config", config}};
}

json solve_manifest(const RunConfig& cfg, const SolveOutput& out) {
    auto m = manifest(cfg, "solve");
    const auto& v = out.solution.values;
    m["iterations"] = v.iterations;
    m["final_residual"] = v.final_residual();
    m["converged"] = v.converged;
    m["states"] = v.values.size();
    return m;
}

void write_lookup_csv(std::ostream& os, const RunConfig& cfg, const SolveOutput& out) {
    header(os, solve_manifest(cfg, out),
           {"rho_p", "rho_s", "p_s", "prev_pd", "prev_ic", "opt_pd", "opt_ic", "value"});
    CsvWriter w(os);
    for (const auto& r : extract_lookup_table(out.solution.values, out.solution.policy, *out.mdp)) {
        w.cell(r.rho_p).cell(r.rho_s).cell(r.p_s).cell(r.prev_pd).cell(r.prev_ic);
        w.cell(r.opt_pd).cell(r.opt_ic).cell(r.value);
        w.end();
    }
}

std::vector<LookupRow> read_lookup_csv(std::istream& is) {
    std::vector<LookupRow> rows;
    std::string line;
    bool seen_header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) {
            seen_header = true;
            continue;
        }
        double f[8];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int i = 0; i < 8; ++i) {
            const auto res = std::from_chars(p, end, f[i]);
            if (res.ec != std::errc{}) throw std::runtime_error("malformed lookup row: " + line);
            p = res.ptr;
            if (i < 7) {
                if (p == end || *p != ',') throw std::runtime_error("malformed lookup row: " + line);
                ++p;
            }
        }
        rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7]});
    }
    return rows;
}

SweepOutput run_sweep(const RunConfig& cfg, unsigned threads) {
    const auto& spec = cfg.sweep;
    require_nonempty(spec.values, "sweep.values");
    require_nonempty(spec.rho_p, "sweep.rho_p");
    if (spec.variable != SweepVariable::Pav) require_nonempty(spec.fixed, "sweep.fixed");
    try {
        cfg.solver.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    std::vector<std::size_t> rp_idx;
    for (double r : spec.rho_p) rp_idx.push_back(grid_index(cfg.grids.rho_p_levels, r, "sweep.rho_p"));
    const std::size_t rs = reference_rho_s(cfg);

    SweepOutput out;
    std::ostringstream os;
    auto m = manifest(cfg, "sweep");
    m["reference_rho_s"] = cfg.grids.rho_s_levels[rs];
    m["reference_p_s_fraction"] = cfg.p_s_fractions.back();
    std::vector<json> runs;
    auto record = [&](const Solution& sol) {
        ++out.solves;
        out.all_converged = out.all_converged && sol.values.converged;
        runs.push_back({{"iterations", sol.values.iterations},
                        {"final_residual", sol.values.final_residual()},
                        {"converged", sol.values.converged}});
    };

    std::ostringstream body;
    CsvWriter w(body);
    if (spec.variable == SweepVariable::Pd || spec.variable == SweepVariable::Ic) {
        const bool pd_sweep = spec.variable == SweepVariable::Pd;
        std::vector<std::size_t> swept, fixed;
        for (double v : spec.values) {
            swept.push_back(pd_sweep ? grid_index(cfg.actions.pd_levels, v, "sweep.values (pd)")
                                     : grid_index(cfg.ic_levels_db, v, "sweep.values (ic_db)"));
        }
        for (double v : spec.fixed) {
            fixed.push_back(pd_sweep ? grid_index(cfg.ic_levels_db, v, "sweep.fixed (ic_db)")
                                     : grid_index(cfg.actions.pd_levels, v, "sweep.fixed (pd)"));
        }
        const auto mdp = make_mdp(cfg);
        const auto compiled = mdp.compile();
        const std::size_t ps = top_power(cfg);
        for (std::size_t f = 0; f < fixed.size(); ++f) {
            const ActionRestriction restriction{pd_sweep ? PolicyMode::FixedIc : PolicyMode::FixedPd,
                                                fixed[f]};
            const auto sol = value_iteration(compiled, cfg.solver, restriction, threads);
            record(sol);
            for (std::size_t r = 0; r < rp_idx.size(); ++r) {
                for (std::size_t k = 0; k < swept.size(); ++k) {
                    const std::size_t pd = pd_sweep ? swept[k] : fixed[f];
                    const std::size_t ic = pd_sweep ? fixed[f] : swept[k];
                    const double value = J(mdp, sol, {rp_idx[r], rs, ps, pd, ic});
                    if (pd_sweep) {
                        w.cell(cfg.actions.pd_levels[pd]).cell(cfg.ic_levels_db[ic]);
                    } else {
                        w.cell(cfg.ic_levels_db[ic]).cell(cfg.actions.pd_levels[pd]);
                    }
                    w.cell(cfg.grids.rho_p_levels[rp_idx[r]]).cell(value);
                    w.end();
                }
            }
        }
        m["runs"] = runs;
        if (pd_sweep) {
            header(os, m, {"pd", "ic_db", "rho_p", "J"});
        } else {
            header(os, m, {"ic_db", "pd", "rho_p", "J"});
        }
    } else {
        for (double pav_db : spec.values) {
            if (!std::isfinite(pav_db)) throw ConfigError("sweep.values (pav_db) must be finite");
            const auto point = cfg.with_p_av_db(pav_db);
            const auto mdp = make_mdp(point);
            const auto compiled = mdp.compile();
            const auto sol = value_iteration(compiled, point.solver, {}, threads);
            record(sol);
            const std::size_t ps = top_power(point);
            const std::size_t n_pd = point.actions.pd_levels.size();
            for (std::size_t r : rp_idx) {
                for (std::size_t ic = 0; ic < point.ic_levels_db.size(); ++ic) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (std::size_t pd = 0; pd < n_pd; ++pd) {
                        best = std::max(best, J(mdp, sol, {r, rs, ps, pd, ic}));
                    }
                    // Plateaus resolve to the highest Pd.
                    const double tol = 1e-9 * std::max(1.0, std::abs(best));
                    std::size_t arg = 0;
                    for (std::size_t pd = 0; pd < n_pd; ++pd) {
                        if (J(mdp, sol, {r, rs, ps, pd, ic}) >= best - tol) arg = pd;
                    }
                    const auto act = sol.policy.at(mdp.state_index({r, rs, ps, arg, ic}));
                    w.cell(pav_db).cell(point.grids.rho_p_levels[r]).cell(point.ic_levels_db[ic]);
                    w.cell(point.actions.pd_levels[arg]).cell(J(mdp, sol, {r, rs, ps, arg, ic}));
                    w.cell(point.actions.pd_levels[act.pd_idx]).cell(point.ic_levels_db[act.ic_idx]);
                    w.end();
                }
            }
        }
        m["runs"] = runs;
        header(os, m,
               {"pav_db", "rho_p", "ic_db", "argmax_pd", "value", "policy_pd", "policy_ic_db"});
    }
    os << body.str();
    out.csv = os.str();
    return out;
}

SimulateOutput run_simulate(const RunConfig& cfg, unsigned threads) {
    if (cfg.sim.regimes.empty()) throw ConfigError("'sim.regimes' is empty");
    SimConfig base;
    base.params = cfg.params;
    base.n_slots = cfg.sim.n_slots;
    base.replications = cfg.sim.replications;
    base.seed = cfg.seed;
    base.pd = cfg.sim.pd;
    base.ic = db_to_linear(cfg.sim.ic_db);
    base.p_s0 = cfg.sim.p_s_db ? db_to_linear(*cfg.sim.p_s_db) : cfg.params.p_av;

    SimulateOutput out;
    std::ostringstream body;
    CsvWriter w(body);
    auto row = [&](SimRegime regime, std::string_view metric, const Estimate& e,
                   std::optional<double> analytic) {
        w.cell(to_string(regime)).cell(metric).cell(e.value).cell(e.se);
        if (analytic) {
            const double z = z_score(e, *analytic);
            const bool ok = std::abs(z) < 3.0;
            out.all_within = out.all_within && ok;
            w.cell(*analytic).cell(z).cell(ok ? "1" : "0");
        } else {
            w.cell("").cell("").cell("1");
        }
        w.end();
    };

    std::unique_ptr<SolveOutput> solved;
    for (auto regime : cfg.sim.regimes) {
        SimConfig sc = base;
        switch (regime) {
            case SimRegime::Mixed:
                sc.pi1 = cfg.sim.pi1;
                sc.activity = cfg.sim.activity;
                break;
            case SimRegime::NoFalseAlarm: sc.forced = SensingOutcome::NoFalseAlarm; break;
            case SimRegime::FalseAlarm: sc.forced = SensingOutcome::FalseAlarm; break;
            case SimRegime::MissedDetection: sc.forced = SensingOutcome::MissedDetection; break;
            case SimRegime::Detection: sc.forced = SensingOutcome::Detection; break;
            case SimRegime::ClosedLoop: {
                if (!solved) solved = std::make_unique<SolveOutput>(run_solve(cfg, threads));
                out.all_within = out.all_within && solved->solution.values.converged;
                const auto& g = cfg.grids;
                const std::size_t rp = [&] {
                    std::size_t best = 0;
                    for (std::size_t i = 1; i < g.rho_p_levels.size(); ++i) {
                        if (std::abs(g.rho_p_levels[i] - cfg.params.queue.rho_p()) <
                            std::abs(g.rho_p_levels[best] - cfg.params.queue.rho_p())) {
                            best = i;
                        }
                    }
                    return best;
                }();
                sc.closed_loop = PolicyRun{solved->mdp.get(), &solved->solution.policy,
                                           {rp, reference_rho_s(cfg), top_power(cfg), 0, 0}};
                break;
            }
        }
        SimStats st;
        try {
            st = simulate(sc, threads);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        } catch (const DomainError& e) {
            throw ConfigError(e.what());
        }

        if (regime == SimRegime::ClosedLoop) {
            row(regime, "mu_s", st.mu_s, std::nullopt);
            row(regime, "mu_p", st.mu_p, std::nullopt);
            row(regime, "mean_rho_p", st.mean_rho_p, std::nullopt);
            row(regime, "mean_rho_s", st.mean_rho_s, std::nullopt);
            row(regime, "mean_pd", st.mean_pd, std::nullopt);
            row(regime, "mean_ic", st.mean_ic, std::nullopt);
        } else {
            const auto a = analytic_rates(sc);
            row(regime, "mu_s", st.mu_s, a.mu_s);
            row(regime, "mu_p", st.mu_p, a.mu_p);
            row(regime, "direct_p", st.direct_p, a.direct_p);
            for (auto o : kAllOutcomes) {
                const auto i = index_of(o);
                row(regime, "branch_s_" + std::string(to_string(o)), st.branch_s[i], a.branch_s[i]);
                row(regime, "branch_p_" + std::string(to_string(o)), st.branch_p[i], a.branch_p[i]);
            }
            const auto chi = outcome_frequency_check(st, a);
            out.all_within = out.all_within && chi.pass;
            w.cell(to_string(regime)).cell("outcome_chi2").cell(chi.statistic)
                .cell(static_cast<double>(chi.dof)).cell(chi.critical).cell("").cell(chi.pass ? "1" : "0");
            w.end();
        }
        const bool conserved = st.busy_slots == st.direct_busy + st.relayed_busy + st.lost_busy;
        out.all_within = out.all_within && conserved;
        w.cell(to_string(regime)).cell("busy_slot_balance")
            .cell(static_cast<double>(st.busy_slots))
            .cell("")
            .cell(static_cast<double>(st.direct_busy + st.relayed_busy + st.lost_busy))
            .cell("")
            .cell(conserved ? "1" : "0");
        w.end();
    }

    std::ostringstream os;
    auto m = manifest(cfg, "simulate");
    m["all_within"] = out.all_within;
    header(os, m, {"regime", "metric", "empirical", "se", "analytical", "z", "pass"});
    os << body.str();
    out.csv = os.str();
    return out;
}

}  // namespace ssrelay
