// SPDX-License-Identifier: Apache-2.0
//
// Controlled Markov chain over augmented states
//   (rho_p, rho_s, P_s ; Pd', Ic')
// where (Pd', Ic') is the sensing/power control applied in the previous slot
// and the control chosen now is a (Pd, Ic) pair from finite grids.
//
// Per slot:
//  * the sensing outcome is drawn with pi1 = rho_p and (Pd, Pf(Pd));
//  * rho_p and rho_s take one quantized birth-death step (up on arrival
//    without service, down on service without arrival), with the service
//    probability equal to the primary / secondary throughput conditional on
//    the outcome;
//  * P_s is redrawn i.i.d. from its stationary distribution.
//
// Transmit power enters through the cut-offs: a transmission at power P uses
// beta * reference_power / P, so the constrained branches see
// beta_sp = beta_s * P_s0 / P_s1.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "ssrelay/finite_mdp.hpp"
#include "ssrelay/model.hpp"
#include "ssrelay/sensing.hpp"

namespace ssrelay {

struct StateGrids {
    std::vector<double> rho_p_levels;
    std::vector<double> rho_s_levels;
    std::vector<double> p_s_levels;      // watts
    std::vector<double> p_s_stationary;  // sums to one
};

struct ActionGrids {
    std::vector<double> pd_levels;
    std::vector<double> ic_levels;  // watts
    double ic_min = 0.0;
    double ic_max = 0.0;
};

struct AugmentedState {
    std::size_t rho_p_idx = 0;
    std::size_t rho_s_idx = 0;
    std::size_t p_s_idx = 0;
    std::size_t prev_pd_idx = 0;
    std::size_t prev_ic_idx = 0;

    friend auto operator<=>(const AugmentedState&, const AugmentedState&) = default;
};

struct ControlAction {
    std::size_t pd_idx = 0;
    std::size_t ic_idx = 0;

    friend auto operator<=>(const ControlAction&, const ControlAction&) = default;
};

struct CostModel {
    double s_const = 2.0;   // per unit Pd
    double c_const = 2.0;   // per watt of constrained power
    double discount = 0.9;
};

struct PowerPolicy {
    double p_av = 3.1622776601683795;
    double mean_g_sp = 1.0;
};

/// Which control the immediate secondary throughput is evaluated at.
enum class RewardTiming {
    PreviousAction,  // g(rho_p, rho_s, P_s; Pd', Ic'), costs on the chosen action
    ChosenAction,    // g evaluated at the chosen (Pd, Ic)
};

struct ModelParams {
    ChannelParams channel;  // beta_sp is derived from transmit powers
    QueueParams queue;
    SensingTiming timing;
    double gamma_se = 0.03162277660168379;
    double f_s = 1e6;
    double p_av = 3.1622776601683795;
    double mean_g_sp = 1.0;
    double reference_power = 3.1622776601683795;
    RewardTiming reward_timing = RewardTiming::PreviousAction;

    SensingConfig sensing() const { return {gamma_se, timing.tau, f_s}; }
    PowerPolicy power_policy() const { return {p_av, mean_g_sp}; }
};

/// Transmit power that keeps the mean interference at the PU-Rx within ic:
/// min(p_av, ic / mean_g_sp).
double constrained_power(const PowerPolicy& pp, double ic);

/// Outcome probabilities in case order
/// [idle & sensed busy, idle & sensed idle, busy & sensed idle, busy & sensed busy].
std::array<double, 4> sensing_outcome_distribution(double pi1, double pd, double pf);

/// Channel for one slot with unconstrained power p0 and constrained power p1.
ChannelParams effective_channel(const ModelParams& params, double p0, double p1);

struct BirthDeath {
    double down;
    double stay;
    double up;
};

/// One quantized step of a utilization level given per-slot arrival and
/// service probabilities. Moves blocked at a grid edge fold into `stay`.
BirthDeath birth_death_step(double arrival, double service, bool at_bottom, bool at_top);

struct TransitionEntry {
    AugmentedState next;
    double prob;
};
using TransitionRow = std::vector<TransitionEntry>;

struct Violation {
    int constraint;  // 1..4 for the optimization constraints, 0 for structural checks
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::string describe() const;
};

/// Checks queue stability (1), power range (2), detection grid (3), the
/// interference grid bounds (4) and the structural invariants of the grids.
ValidationReport validate(const ModelParams& params, const StateGrids& grids,
                          const ActionGrids& actions);

StateGrids default_state_grids(double p_av);
ActionGrids default_action_grids();

class RelayMdp {
public:
    /// Throws std::invalid_argument carrying ValidationReport::describe()
    /// when the inputs are invalid.
    RelayMdp(ModelParams params, StateGrids grids, ActionGrids actions, CostModel costs);

    const ModelParams& params() const noexcept { return params_; }
    const StateGrids& grids() const noexcept { return grids_; }
    const ActionGrids& actions() const noexcept { return actions_; }
    const CostModel& costs() const noexcept { return costs_; }

    std::size_t env_count() const noexcept;
    std::size_t action_count() const noexcept;
    std::size_t state_count() const noexcept { return env_count() * action_count(); }

    std::size_t state_index(const AugmentedState& s) const;
    AugmentedState state_at(std::size_t index) const;
    std::size_t action_index(const ControlAction& a) const;
    ControlAction action_at(std::size_t index) const;

    double false_alarm(std::size_t pd_idx) const { return pf_cache_.at(pd_idx); }

    /// Expected secondary throughput g at the environment of `s` under `control`.
    double throughput(const AugmentedState& s, const ControlAction& control) const;

    /// g evaluated at the state's previous action.
    double immediate_reward(const AugmentedState& s) const;

    /// s_const * Pd + c_const * P_s1(Ic).
    double action_cost(const ControlAction& a) const;

    /// One-step reward of choosing `a` in `s` under the configured timing.
    double reward(const AugmentedState& s, const ControlAction& a) const;

    TransitionRow transition(const AugmentedState& s, const ControlAction& a) const;

    /// Tabular form with one block per (rho_p, rho_s, P_s) environment.
    FiniteMdp compile() const;

private:
    struct EnvStep {
        std::size_t env;
        double prob;
    };
    std::size_t env_index(std::size_t rp, std::size_t rs, std::size_t ps) const;
    std::vector<EnvStep> env_transition(std::size_t rp, std::size_t rs, std::size_t ps,
                                        const ControlAction& a) const;

    ModelParams params_;
    StateGrids grids_;
    ActionGrids actions_;
    CostModel costs_;
    std::vector<double> pf_cache_;
};

}  // namespace ssrelay
