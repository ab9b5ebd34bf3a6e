// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "parallel.hpp"

namespace ssrelay {

namespace {

// States grouped by block, CSR layout.
struct BlockIndex {
    std::vector<std::size_t> offset;
    std::vector<std::uint32_t> states;

    explicit BlockIndex(const FiniteMdp& mdp) : offset(mdp.block_count() + 1, 0) {
        for (std::size_t s = 0; s < mdp.state_count(); ++s) ++offset[mdp.block_of(s) + 1];
        for (std::size_t b = 0; b < mdp.block_count(); ++b) offset[b + 1] += offset[b];
        states.resize(mdp.state_count());
        auto fill = offset;
        for (std::size_t s = 0; s < mdp.state_count(); ++s) {
            states[fill[mdp.block_of(s)]++] = static_cast<std::uint32_t>(s);
        }
    }
};

double expected_next(std::span<const SparseEntry> row, const std::vector<double>& values) {
    double acc = 0.0;
    for (const auto& e : row) acc += e.prob * values[e.next];
    return acc;
}

void check_restriction(const FiniteMdp& mdp, const ActionRestriction& r) {
    if (r.mode == PolicyMode::FixedIc && r.pinned >= mdp.ic_count()) {
        throw std::invalid_argument("pinned ic index " + std::to_string(r.pinned) + " out of range");
    }
    if (r.mode == PolicyMode::FixedPd && r.pinned >= mdp.pd_count()) {
        throw std::invalid_argument("pinned pd index " + std::to_string(r.pinned) + " out of range");
    }
}

// One synchronous backup. Writes next values and greedy actions, returns the
// sup-norm change.
double backup(const FiniteMdp& mdp, const BlockIndex& blocks, const std::vector<double>& values,
              double discount, const ActionRestriction& restriction, unsigned threads,
              std::vector<double>& next, std::vector<std::uint32_t>& greedy) {
    const std::size_t n_a = mdp.action_count();
    const std::size_t n_ic = mdp.ic_count();
    const unsigned chunks = detail::effective_threads(threads, mdp.block_count());
    std::vector<double> chunk_residual(chunks, 0.0);

    detail::parallel_chunks(mdp.block_count(), chunks,
                            [&](unsigned c, std::size_t begin, std::size_t end) {
        double residual = 0.0;
        for (std::size_t b = begin; b < end; ++b) {
            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_a = n_a;
            for (std::size_t a = 0; a < n_a; ++a) {
                if (!restriction.allows(a, n_ic)) continue;
                const double q =
                    mdp.action_reward(b, a) + discount * expected_next(mdp.row(b, a), values);
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            if (best_a == n_a) throw std::logic_error("no admissible action or NaN value");
            for (std::size_t k = blocks.offset[b]; k < blocks.offset[b + 1]; ++k) {
                const std::uint32_t s = blocks.states[k];
                next[s] = mdp.state_reward(s) + best;
                greedy[s] = static_cast<std::uint32_t>(best_a);
                residual = std::max(residual, std::abs(next[s] - values[s]));
            }
        }
        chunk_residual[c] = residual;
    });
    return *std::max_element(chunk_residual.begin(), chunk_residual.end());
}

}  // namespace

void SolverConfig::validate() const {
    if (!(epsilon > 0.0 && std::isfinite(epsilon))) {
        throw std::invalid_argument("solver epsilon must be > 0");
    }
    if (max_iters == 0) throw std::invalid_argument("solver max_iters must be >= 1");
    if (!(discount >= 0.0 && discount < 1.0)) {
        throw std::invalid_argument("discount must lie in [0, 1)");
    }
}

std::string_view to_string(PolicyMode mode) noexcept {
    switch (mode) {
        case PolicyMode::Joint: return "joint";
        case PolicyMode::FixedIc: return "fixed_ic";
        case PolicyMode::FixedPd: return "fixed_pd";
    }
    return "unknown";
}

std::optional<PolicyMode> policy_mode_from_string(std::string_view s) noexcept {
    if (s == "joint") return PolicyMode::Joint;
    if (s == "fixed_ic") return PolicyMode::FixedIc;
    if (s == "fixed_pd") return PolicyMode::FixedPd;
    return std::nullopt;
}

bool ActionRestriction::allows(std::size_t action, std::size_t n_ic) const noexcept {
    switch (mode) {
        case PolicyMode::Joint: return true;
        case PolicyMode::FixedIc: return action % n_ic == pinned;
        case PolicyMode::FixedPd: return action / n_ic == pinned;
    }
    return false;
}

Solution value_iteration(const FiniteMdp& mdp, const SolverConfig& cfg,
                         ActionRestriction restriction, unsigned threads) {
    cfg.validate();
    check_restriction(mdp, restriction);
    const BlockIndex blocks(mdp);

    Solution sol;
    sol.policy.restriction = restriction;
    sol.policy.n_pd = mdp.pd_count();
    sol.policy.n_ic = mdp.ic_count();
    sol.policy.action.assign(mdp.state_count(), 0);

    std::vector<double> current(mdp.state_count(), 0.0);
    std::vector<double> next(mdp.state_count(), 0.0);
    auto& vt = sol.values;
    while (vt.iterations < cfg.max_iters) {
        const double r = backup(mdp, blocks, current, cfg.discount, restriction, threads, next,
                                sol.policy.action);
        ++vt.iterations;
        vt.residuals.push_back(r);
        current.swap(next);
        if (r < cfg.epsilon) {
            vt.converged = true;
            break;
        }
    }
    vt.values = std::move(current);
    return sol;
}

std::vector<double> bellman_backup(const FiniteMdp& mdp, const std::vector<double>& values,
                                   double discount, ActionRestriction restriction,
                                   unsigned threads) {
    if (values.size() != mdp.state_count()) {
        throw std::invalid_argument("value vector size does not match the MDP");
    }
    check_restriction(mdp, restriction);
    const BlockIndex blocks(mdp);
    std::vector<double> next(mdp.state_count());
    std::vector<std::uint32_t> greedy(mdp.state_count());
    backup(mdp, blocks, values, discount, restriction, threads, next, greedy);
    return next;
}

ValueTable evaluate_policy(const FiniteMdp& mdp, const PolicyTable& policy,
                           const SolverConfig& cfg, unsigned threads) {
    cfg.validate();
    if (policy.action.size() != mdp.state_count() || policy.n_pd != mdp.pd_count() ||
        policy.n_ic != mdp.ic_count()) {
        throw std::invalid_argument("policy does not match the MDP");
    }
    for (auto a : policy.action) {
        if (a >= mdp.action_count()) throw std::invalid_argument("policy action out of range");
    }

    const std::size_t n = mdp.state_count();
    const unsigned chunks = detail::effective_threads(threads, n);
    std::vector<double> current(n, 0.0);
    std::vector<double> next(n, 0.0);
    std::vector<double> chunk_residual(chunks);
    ValueTable vt;
    while (vt.iterations < cfg.max_iters) {
        detail::parallel_chunks(n, chunks, [&](unsigned c, std::size_t begin, std::size_t end) {
            double residual = 0.0;
            for (std::size_t s = begin; s < end; ++s) {
                const auto b = mdp.block_of(s);
                const auto a = policy.action[s];
                next[s] = mdp.state_reward(s) + mdp.action_reward(b, a) +
                          cfg.discount * expected_next(mdp.row(b, a), current);
                residual = std::max(residual, std::abs(next[s] - current[s]));
            }
            chunk_residual[c] = residual;
        });
        const double r = *std::max_element(chunk_residual.begin(), chunk_residual.end());
        ++vt.iterations;
        vt.residuals.push_back(r);
        current.swap(next);
        if (r < cfg.epsilon) {
            vt.converged = true;
            break;
        }
    }
    vt.values = std::move(current);
    return vt;
}

bool contraction_holds(const ValueTable& values, double discount, double slack) {
    for (std::size_t k = 1; k < values.residuals.size(); ++k) {
        if (values.residuals[k] > discount * values.residuals[k - 1] + slack) return false;
    }
    return true;
}

std::vector<LookupRow> extract_lookup_table(const ValueTable& values, const PolicyTable& policy,
                                            const RelayMdp& mdp) {
    const std::size_t n = mdp.state_count();
    if (values.values.size() != n || policy.action.size() != n) {
        throw std::invalid_argument("value/policy tables do not match the MDP");
    }
    const auto& g = mdp.grids();
    const auto& ag = mdp.actions();
    std::vector<LookupRow> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = mdp.state_at(i);
        const auto a = mdp.action_at(policy.action[i]);
        rows.push_back({g.rho_p_levels[s.rho_p_idx], g.rho_s_levels[s.rho_s_idx],
                        g.p_s_levels[s.p_s_idx], ag.pd_levels[s.prev_pd_idx],
                        ag.ic_levels[s.prev_ic_idx], ag.pd_levels[a.pd_idx],
                        ag.ic_levels[a.ic_idx], values.values[i]});
    }
    return rows;
}

}  // namespace ssrelay
