// SPDX-License-Identifier: Apache-2.0
//
// Synchronous discounted value iteration over a FiniteMdp, restricted to
// the full (Pd, Ic) grid or to one pinned component, plus fixed-policy
// evaluation and lookup-table extraction.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "ssrelay/finite_mdp.hpp"
#include "ssrelay/mdp.hpp"

namespace ssrelay {

struct SolverConfig {
    double epsilon = 1e-6;
    std::size_t max_iters = 1000;
    double discount = 0.9;

    /// Throws std::invalid_argument on epsilon <= 0, max_iters == 0 or a
    /// discount outside [0, 1).
    void validate() const;
};

enum class PolicyMode {
    Joint,    // both Pd and Ic free
    FixedIc,  // Ic pinned, Pd optimized
    FixedPd,  // Pd pinned, Ic optimized
};

std::string_view to_string(PolicyMode mode) noexcept;
std::optional<PolicyMode> policy_mode_from_string(std::string_view s) noexcept;

/// Allowed subset of the action grid. `pinned` is an index into the ic grid
/// for FixedIc and into the pd grid for FixedPd; it is ignored for Joint.
struct ActionRestriction {
    PolicyMode mode = PolicyMode::Joint;
    std::size_t pinned = 0;

    bool allows(std::size_t action, std::size_t n_ic) const noexcept;
};

struct ValueTable {
    std::vector<double> values;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> residuals;  // sup-norm change of each backup

    double final_residual() const noexcept { return residuals.empty() ? 0.0 : residuals.back(); }
};

struct PolicyTable {
    std::vector<std::uint32_t> action;  // pd-major action index per state
    ActionRestriction restriction;
    std::size_t n_pd = 0;
    std::size_t n_ic = 0;

    ControlAction at(std::size_t state) const {
        return {action.at(state) / n_ic, action.at(state) % n_ic};
    }
};

struct Solution {
    ValueTable values;
    PolicyTable policy;
};

/// Runs backups J <- max_a Q(., a) from J = 0 until the sup-norm change
/// drops below epsilon or max_iters backups were made. The returned policy
/// is the greedy policy of the last backup; ties go to the lowest
/// (pd_idx, ic_idx). Results do not depend on `threads`.
Solution value_iteration(const FiniteMdp& mdp, const SolverConfig& cfg,
                         ActionRestriction restriction = {}, unsigned threads = 1);

/// One Bellman optimality backup of `values`.
std::vector<double> bellman_backup(const FiniteMdp& mdp, const std::vector<double>& values,
                                   double discount, ActionRestriction restriction = {},
                                   unsigned threads = 1);

/// Value of a stationary policy by iterating its restricted operator.
ValueTable evaluate_policy(const FiniteMdp& mdp, const PolicyTable& policy,
                           const SolverConfig& cfg, unsigned threads = 1);

/// True when r_{k+1} <= discount * r_k + slack along the residual history.
bool contraction_holds(const ValueTable& values, double discount, double slack = 1e-12);

struct LookupRow {
    double rho_p;
    double rho_s;
    double p_s;      // watts
    double prev_pd;
    double prev_ic;  // watts
    double opt_pd;
    double opt_ic;   // watts
    double value;
};

/// One row per augmented state, in state-index order.
std::vector<LookupRow> extract_lookup_table(const ValueTable& values, const PolicyTable& policy,
                                            const RelayMdp& mdp);

}  // namespace ssrelay
