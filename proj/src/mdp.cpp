// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ssrelay {

namespace {

bool strictly_increasing(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (!(v[i - 1] < v[i])) return false;
    }
    return true;
}

bool all_finite(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_grid(std::vector<Violation>& out, const std::vector<double>& grid, const char* name,
                int constraint) {
    if (grid.empty()) {
        out.push_back({constraint, std::string(name) + " is empty"});
    } else if (!all_finite(grid) || !strictly_increasing(grid)) {
        out.push_back({constraint, std::string(name) + " must be finite and strictly increasing"});
    }
}

template <typename F>
void check_domain(std::vector<Violation>& out, F&& validator) {
    try {
        validator();
    } catch (const DomainError& e) {
        out.push_back({0, e.what()});
    }
}

}  // namespace

double constrained_power(const PowerPolicy& pp, double ic) {
    if (!(std::isfinite(ic) && ic > 0.0)) throw DomainError("interference level must be > 0");
    if (!(pp.p_av > 0.0 && pp.mean_g_sp > 0.0)) {
        throw DomainError("power policy needs p_av > 0 and mean_g_sp > 0");
    }
    return std::min(pp.p_av, ic / pp.mean_g_sp);
}

std::array<double, 4> sensing_outcome_distribution(double pi1, double pd, double pf) {
    const auto w = outcome_weights(pf, pd, pi1);
    return {w[index_of(SensingOutcome::FalseAlarm)], w[index_of(SensingOutcome::NoFalseAlarm)],
            w[index_of(SensingOutcome::MissedDetection)], w[index_of(SensingOutcome::Detection)]};
}

ChannelParams effective_channel(const ModelParams& params, double p0, double p1) {
    if (!(p0 > 0.0 && p1 > 0.0)) throw DomainError("transmit powers must be > 0");
    ChannelParams ch = params.channel;
    ch.beta_s = params.channel.beta_s * params.reference_power / p0;
    ch.beta_sp = params.channel.beta_s * params.reference_power / p1;
    return ch;
}

BirthDeath birth_death_step(double arrival, double service, bool at_bottom, bool at_top) {
    if (!(arrival >= 0.0 && arrival <= 1.0 && service >= 0.0 && service <= 1.0)) {
        throw DomainError("birth-death probabilities must lie in [0, 1]");
    }
    BirthDeath bd{service * (1.0 - arrival),
                  arrival * service + (1.0 - arrival) * (1.0 - service),
                  arrival * (1.0 - service)};
    if (at_top) {
        bd.stay += bd.up;
        bd.up = 0.0;
    }
    if (at_bottom) {
        bd.stay += bd.down;
        bd.down = 0.0;
    }
    return bd;
}

std::string ValidationReport::describe() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) os << "; ";
        const auto& v = violations[i];
        if (v.constraint > 0) os << "constraint " << v.constraint << ": ";
        os << v.message;
    }
    return os.str();
}

ValidationReport validate(const ModelParams& params, const StateGrids& grids,
                          const ActionGrids& actions) {
    ValidationReport report;
    auto& out = report.violations;

    const auto& q = params.queue;
    const struct {
        const char* name;
        double lambda;
        double mu;
    } queues[] = {{"secondary", q.lambda_s, q.mu_s_max},
                  {"primary", q.lambda_p, q.mu_p_max},
                  {"relay", q.lambda_ps, q.mu_ps_max}};
    for (const auto& qq : queues) {
        if (!(qq.lambda >= 0.0 && qq.lambda <= 1.0) || !(qq.mu > 0.0)) {
            out.push_back({0, std::string(qq.name) +
                                  " queue needs arrival probability in [0, 1] and mu_max > 0"});
        } else if (!(qq.lambda < qq.mu)) {
            std::ostringstream os;
            os << qq.name << " queue unstable: lambda=" << qq.lambda << " >= mu_max=" << qq.mu;
            out.push_back({1, os.str()});
        }
    }

    check_domain(out, [&] { params.channel.validate(); });
    check_domain(out, [&] { params.timing.validate(); });
    check_domain(out, [&] { params.sensing().validate(); });
    if (!(params.p_av > 0.0 && std::isfinite(params.p_av))) out.push_back({2, "p_av must be > 0"});
    if (!(params.mean_g_sp > 0.0)) out.push_back({0, "mean_g_sp must be > 0"});
    if (!(params.reference_power > 0.0)) out.push_back({0, "reference_power must be > 0"});

    check_grid(out, grids.rho_p_levels, "rho_p_levels", 0);
    check_grid(out, grids.rho_s_levels, "rho_s_levels", 0);
    for (const auto* g : {&grids.rho_p_levels, &grids.rho_s_levels}) {
        if (!std::all_of(g->begin(), g->end(), [](double r) { return r >= 0.0 && r < 1.0; })) {
            out.push_back({0, "utilization levels must lie in [0, 1)"});
        }
    }
    check_grid(out, grids.p_s_levels, "p_s_levels", 2);
    const double p_tol = params.p_av * 1e-12;
    for (double p : grids.p_s_levels) {
        if (!(p > 0.0 && p <= params.p_av + p_tol)) {
            std::ostringstream os;
            os << "transmit power level " << p << " outside (0, P_av=" << params.p_av << "]";
            out.push_back({2, os.str()});
            break;
        }
    }
    if (grids.p_s_stationary.size() != grids.p_s_levels.size()) {
        out.push_back({0, "p_s_stationary must have one probability per power level"});
    } else {
        const double total =
            std::accumulate(grids.p_s_stationary.begin(), grids.p_s_stationary.end(), 0.0);
        const bool nonneg = std::all_of(grids.p_s_stationary.begin(), grids.p_s_stationary.end(),
                                        [](double p) { return p >= 0.0; });
        if (!nonneg || std::abs(total - 1.0) > 1e-12) {
            out.push_back({0, "p_s_stationary must be a probability vector"});
        }
    }

    check_grid(out, actions.pd_levels, "pd_levels", 3);
    for (double pd : actions.pd_levels) {
        if (!(pd >= 0.0 && pd <= 1.0)) {
            std::ostringstream os;
            os << "detection probability " << pd << " outside [0, 1]";
            out.push_back({3, os.str()});
            break;
        }
    }

    check_grid(out, actions.ic_levels, "ic_levels", 4);
    if (!(actions.ic_min > 0.0 && actions.ic_min <= actions.ic_max &&
          std::isfinite(actions.ic_max))) {
        out.push_back({4, "interference range needs 0 < ic_min <= ic_max"});
    } else {
        const double tol = actions.ic_max * 1e-12;
        for (double ic : actions.ic_levels) {
            if (!(ic >= actions.ic_min - tol && ic <= actions.ic_max + tol)) {
                std::ostringstream os;
                os << "interference level " << ic << " outside [" << actions.ic_min << ", "
                   << actions.ic_max << "]";
                out.push_back({4, os.str()});
                break;
            }
        }
    }
    return report;
}

StateGrids default_state_grids(double p_av) {
    StateGrids g;
    for (int i = 0; i < 10; ++i) {
        g.rho_p_levels.push_back(i / 10.0);
        g.rho_s_levels.push_back(i / 10.0);
    }
    // Four power states, probabilities of Exp(1) gain bins [0, .5), [.5, 1), [1, 1.5), [1.5, inf).
    for (int i = 1; i <= 4; ++i) g.p_s_levels.push_back(p_av * i / 4.0);
    const double edges[] = {0.0, 0.5, 1.0, 1.5};
    for (int i = 0; i < 4; ++i) {
        const double hi = i + 1 < 4 ? std::exp(-edges[i + 1]) : 0.0;
        g.p_s_stationary.push_back(std::exp(-edges[i]) - hi);
    }
    return g;
}

ActionGrids default_action_grids() {
    ActionGrids a;
    for (int i = 0; i <= 10; ++i) a.pd_levels.push_back(i / 10.0);
    for (int db = -15; db <= 5; ++db) a.ic_levels.push_back(std::pow(10.0, db / 10.0));
    a.ic_min = a.ic_levels.front();
    a.ic_max = a.ic_levels.back();
    return a;
}

RelayMdp::RelayMdp(ModelParams params, StateGrids grids, ActionGrids actions, CostModel costs)
    : params_(std::move(params)),
      grids_(std::move(grids)),
      actions_(std::move(actions)),
      costs_(costs) {
    auto report = validate(params_, grids_, actions_);
    if (!(costs_.s_const >= 0.0 && costs_.c_const >= 0.0)) {
        report.violations.push_back({0, "cost constants must be >= 0"});
    }
    if (!(costs_.discount >= 0.0 && costs_.discount < 1.0)) {
        report.violations.push_back({0, "discount must lie in [0, 1)"});
    }
    if (!report.ok()) throw std::invalid_argument(report.describe());

    const auto sensing = params_.sensing();
    pf_cache_.reserve(actions_.pd_levels.size());
    for (double pd : actions_.pd_levels) {
        pf_cache_.push_back(false_alarm_from_detection(pd, sensing));
    }
}

std::size_t RelayMdp::env_count() const noexcept {
    return grids_.rho_p_levels.size() * grids_.rho_s_levels.size() * grids_.p_s_levels.size();
}

std::size_t RelayMdp::action_count() const noexcept {
    return actions_.pd_levels.size() * actions_.ic_levels.size();
}

std::size_t RelayMdp::env_index(std::size_t rp, std::size_t rs, std::size_t ps) const {
    return (rp * grids_.rho_s_levels.size() + rs) * grids_.p_s_levels.size() + ps;
}

std::size_t RelayMdp::state_index(const AugmentedState& s) const {
    if (s.rho_p_idx >= grids_.rho_p_levels.size() || s.rho_s_idx >= grids_.rho_s_levels.size() ||
        s.p_s_idx >= grids_.p_s_levels.size()) {
        throw std::out_of_range("augmented state index out of range");
    }
    return env_index(s.rho_p_idx, s.rho_s_idx, s.p_s_idx) * action_count() +
           action_index({s.prev_pd_idx, s.prev_ic_idx});
}

AugmentedState RelayMdp::state_at(std::size_t index) const {
    if (index >= state_count()) throw std::out_of_range("state index out of range");
    const auto a = action_at(index % action_count());
    std::size_t env = index / action_count();
    const std::size_t ps = env % grids_.p_s_levels.size();
    env /= grids_.p_s_levels.size();
    const std::size_t rs = env % grids_.rho_s_levels.size();
    const std::size_t rp = env / grids_.rho_s_levels.size();
    return {rp, rs, ps, a.pd_idx, a.ic_idx};
}

std::size_t RelayMdp::action_index(const ControlAction& a) const {
    if (a.pd_idx >= actions_.pd_levels.size() || a.ic_idx >= actions_.ic_levels.size()) {
        throw std::out_of_range("control action index out of range");
    }
    return a.pd_idx * actions_.ic_levels.size() + a.ic_idx;
}

ControlAction RelayMdp::action_at(std::size_t index) const {
    if (index >= action_count()) throw std::out_of_range("action index out of range");
    return {index / actions_.ic_levels.size(), index % actions_.ic_levels.size()};
}

double RelayMdp::throughput(const AugmentedState& s, const ControlAction& control) const {
    const double p0 = grids_.p_s_levels.at(s.p_s_idx);
    const double p1 = constrained_power({p0, params_.mean_g_sp}, actions_.ic_levels.at(control.ic_idx));
    const auto ch = effective_channel(params_, p0, p1);
    const double pd = actions_.pd_levels.at(control.pd_idx);
    const double pf = pf_cache_.at(control.pd_idx);
    const double pi1 = grids_.rho_p_levels.at(s.rho_p_idx);
    const double load = grids_.rho_s_levels.at(s.rho_s_idx);
    double g = 0.0;
    for (auto o : kAllOutcomes) {
        g += secondary_throughput(secondary_branch(o, pf, pd, pi1, ch), params_.timing, load, ch);
    }
    return g;
}

double RelayMdp::immediate_reward(const AugmentedState& s) const {
    return throughput(s, {s.prev_pd_idx, s.prev_ic_idx});
}

double RelayMdp::action_cost(const ControlAction& a) const {
    const double pd = actions_.pd_levels.at(a.pd_idx);
    const double p1 = constrained_power(params_.power_policy(), actions_.ic_levels.at(a.ic_idx));
    return costs_.s_const * pd + costs_.c_const * p1;
}

double RelayMdp::reward(const AugmentedState& s, const ControlAction& a) const {
    const double g = params_.reward_timing == RewardTiming::PreviousAction ? immediate_reward(s)
                                                                           : throughput(s, a);
    return g - action_cost(a);
}

std::vector<RelayMdp::EnvStep> RelayMdp::env_transition(std::size_t rp, std::size_t rs,
                                                        std::size_t ps,
                                                        const ControlAction& a) const {
    const std::size_t n_rp = grids_.rho_p_levels.size();
    const std::size_t n_rs = grids_.rho_s_levels.size();
    const std::size_t n_ps = grids_.p_s_levels.size();

    const double p0 = grids_.p_s_levels[ps];
    const double p1 = constrained_power({p0, params_.mean_g_sp}, actions_.ic_levels.at(a.ic_idx));
    const auto ch = effective_channel(params_, p0, p1);
    const double pd = actions_.pd_levels.at(a.pd_idx);
    const double pf = pf_cache_.at(a.pd_idx);
    const double pi1 = grids_.rho_p_levels[rp];
    const double load_s = grids_.rho_s_levels[rs];
    const auto weights = outcome_weights(pf, pd, pi1);

    // dense[(dp * 3 + ds) * n_ps + ps'] with dp, ds in {down, stay, up}
    std::vector<double> dense(9 * n_ps, 0.0);
    for (auto o : kAllOutcomes) {
        const double w = weights[index_of(o)];
        if (w == 0.0) continue;
        const auto f = forced_sensing(o);
        const double srv_p = primary_throughput(relay_branch(o, f.pf, f.pd, f.pi1, ch),
                                                params_.queue.rho_ps(), ch, f.pi1);
        const double srv_s = secondary_throughput(secondary_branch(o, f.pf, f.pd, f.pi1, ch),
                                                  params_.timing, load_s, ch);
        const auto bp = birth_death_step(params_.queue.lambda_p, srv_p, rp == 0, rp + 1 == n_rp);
        const auto bs = birth_death_step(params_.queue.lambda_s, srv_s, rs == 0, rs + 1 == n_rs);
        const std::array<double, 3> mp{bp.down, bp.stay, bp.up};
        const std::array<double, 3> ms{bs.down, bs.stay, bs.up};
        for (std::size_t dp = 0; dp < 3; ++dp) {
            if (mp[dp] == 0.0) continue;
            for (std::size_t ds = 0; ds < 3; ++ds) {
                if (ms[ds] == 0.0) continue;
                const double m = w * mp[dp] * ms[ds];
                for (std::size_t k = 0; k < n_ps; ++k) {
                    dense[(dp * 3 + ds) * n_ps + k] += m * grids_.p_s_stationary[k];
                }
            }
        }
    }

    std::vector<EnvStep> steps;
    for (std::size_t dp = 0; dp < 3; ++dp) {
        for (std::size_t ds = 0; ds < 3; ++ds) {
            for (std::size_t k = 0; k < n_ps; ++k) {
                const double p = dense[(dp * 3 + ds) * n_ps + k];
                if (p == 0.0) continue;
                steps.push_back({env_index(rp + dp - 1, rs + ds - 1, k), p});
            }
        }
    }
    std::sort(steps.begin(), steps.end(),
              [](const EnvStep& a, const EnvStep& b) { return a.env < b.env; });
    return steps;
}

TransitionRow RelayMdp::transition(const AugmentedState& s, const ControlAction& a) const {
    state_index(s);
    action_index(a);
    TransitionRow row;
    const std::size_t n_a = action_count();
    const std::size_t ai = action_index(a);
    for (const auto& step : env_transition(s.rho_p_idx, s.rho_s_idx, s.p_s_idx, a)) {
        row.push_back({state_at(step.env * n_a + ai), step.prob});
    }
    return row;
}

FiniteMdp RelayMdp::compile() const {
    const std::size_t n_a = action_count();
    const std::size_t n_s = state_count();
    std::vector<std::uint32_t> block(n_s);
    std::vector<double> state_reward(n_s, 0.0);
    const bool previous = params_.reward_timing == RewardTiming::PreviousAction;
    for (std::size_t i = 0; i < n_s; ++i) {
        block[i] = static_cast<std::uint32_t>(i / n_a);
        if (previous) state_reward[i] = immediate_reward(state_at(i));
    }
    FiniteMdp mdp(std::move(block), std::move(state_reward), env_count(),
                  actions_.pd_levels.size(), actions_.ic_levels.size());

    std::vector<SparseEntry> entries;
    for (std::size_t rp = 0; rp < grids_.rho_p_levels.size(); ++rp) {
        for (std::size_t rs = 0; rs < grids_.rho_s_levels.size(); ++rs) {
            for (std::size_t ps = 0; ps < grids_.p_s_levels.size(); ++ps) {
                const std::size_t env = env_index(rp, rs, ps);
                for (std::size_t ai = 0; ai < n_a; ++ai) {
                    const auto a = action_at(ai);
                    entries.clear();
                    for (const auto& step : env_transition(rp, rs, ps, a)) {
                        entries.push_back(
                            {static_cast<std::uint32_t>(step.env * n_a + ai), step.prob});
                    }
                    double r = -action_cost(a);
                    if (!previous) r += throughput({rp, rs, ps, 0, 0}, a);
                    mdp.add_row(env, ai, r, entries);
                }
            }
        }
    }
    return mdp;
}

}  // namespace ssrelay
