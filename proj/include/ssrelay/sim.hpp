// SPDX-License-Identifier: Apache-2.0
//
// Slot-level Monte-Carlo of the relay link pair. Each slot draws PU activity,
// the sensing verdict, exponential fades and queue backlog indicators, then
// counts secondary deliveries, direct primary deliveries and relayed primary
// deliveries. Replications use independent streams seeded from (seed, r) and
// are merged in replication order.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ssrelay/mdp.hpp"
#include "ssrelay/model.hpp"
#include "ssrelay/solver.hpp"

namespace ssrelay {

/// Two-level PU activity: pi1 alternates between levels[0] and levels[1]
/// with per-slot switching probabilities.
struct ActivityChain {
    std::array<double, 2> levels{0.2, 0.8};
    double p_low_to_high = 0.1;
    double p_high_to_low = 0.3;

    std::array<double, 2> stationary() const;
    double mean_activity() const;
};

/// Closed-loop run: the action at each slot is looked up in `policy` at the
/// current augmented state, and (rho_p, rho_s, P_s) evolve from slot events.
struct PolicyRun {
    const RelayMdp* mdp = nullptr;
    const PolicyTable* policy = nullptr;
    AugmentedState initial{};
};

struct SimConfig {
    std::uint64_t n_slots = 1'000'000;  // per replication total, split across replications
    std::uint64_t seed = 1;
    unsigned replications = 8;
    ModelParams params;

    // Open-loop settings.
    double pd = 0.8;
    double ic = 3.1622776601683795;  // watts
    double p_s0 = 3.1622776601683795;
    std::optional<double> pi1;  // defaults to lambda_p / mu_p_max
    std::optional<SensingOutcome> forced;
    std::optional<ActivityChain> activity;

    std::optional<PolicyRun> closed_loop;

    void validate() const;
    double activity_mean() const;
};

struct Estimate {
    double value = 0.0;
    double se = 0.0;
};

struct SimStats {
    std::uint64_t n_slots = 0;
    Estimate mu_s;
    Estimate mu_p;
    std::array<Estimate, 4> branch_s{};  // secondary delivery per outcome, by index_of
    std::array<Estimate, 4> branch_p{};  // relayed primary delivery per outcome
    Estimate direct_p;
    std::array<std::uint64_t, 4> outcome_count{};
    std::array<double, 4> outcome_freq{};
    Estimate busy_fraction;
    Estimate secondary_backlog;
    Estimate relay_backlog;
    Estimate mean_rho_p;  // closed loop only
    Estimate mean_rho_s;  // closed loop only
    Estimate mean_pd;
    Estimate mean_ic;

    std::uint64_t busy_slots = 0;
    std::uint64_t direct_busy = 0;
    std::uint64_t relayed_busy = 0;
    std::uint64_t lost_busy = 0;
};

/// Closed-form counterparts of the open-loop estimates.
struct AnalyticRates {
    double mu_s = 0.0;
    double mu_p = 0.0;
    std::array<double, 4> branch_s{};
    std::array<double, 4> branch_p{};
    double direct_p = 0.0;
    std::array<double, 4> outcome_prob{};
};

AnalyticRates analytic_rates(const SimConfig& cfg);

/// Throws std::invalid_argument for unstable or malformed configurations.
SimStats simulate(const SimConfig& cfg, unsigned threads = 1);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double critical = 0.0;  // 0.999 quantile
    bool pass = true;
};

/// Observed outcome counts against the analytic outcome probabilities.
ChiSquareResult outcome_frequency_check(const SimStats& stats, const AnalyticRates& expected);

/// (empirical - analytic) / se, 0 when both agree exactly with zero se.
double z_score(const Estimate& e, double analytic);

}  // namespace ssrelay
