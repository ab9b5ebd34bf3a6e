// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a JSON document whose sections mirror the model,
// grids, costs, solver, simulator and sweep settings. Unknown keys are
// rejected, missing keys take documented defaults, and keys ending in `_db`
// are decibel values converted to linear on load.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ssrelay/mdp.hpp"
#include "ssrelay/sim.hpp"
#include "ssrelay/solver.hpp"

namespace ssrelay {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double db_to_linear(double db);
double linear_to_db(double linear);

enum class SweepVariable { Pd, Ic, Pav };

struct SweepSpec {
    SweepVariable variable = SweepVariable::Pd;
    std::vector<double> values;     // pd, ic [dB] or P_av [dB]
    std::vector<double> fixed;      // ic [dB] for pd sweeps, pd for ic sweeps; unused for pav
    std::vector<double> rho_p;      // PU activity levels to report
};

enum class SimRegime { Mixed, NoFalseAlarm, FalseAlarm, MissedDetection, Detection, ClosedLoop };

struct SimSettings {
    std::uint64_t n_slots = 1'000'000;
    unsigned replications = 8;
    double pd = 0.8;
    double ic_db = 5.0;
    std::optional<double> p_s_db;  // defaults to P_av
    std::optional<double> pi1;
    std::optional<ActivityChain> activity;
    std::vector<SimRegime> regimes;
};

struct RunConfig {
    ModelParams params;
    StateGrids grids;
    ActionGrids actions;
    std::vector<double> ic_levels_db;
    std::vector<double> p_s_fractions;
    CostModel costs;
    SolverConfig solver;
    SimSettings sim;
    SweepSpec sweep;
    std::uint64_t seed = 1;

    /// Fully resolved document (defaults filled), keys sorted.
    nlohmann::json resolved;

    /// Canonical resolved JSON without the seed.
    std::string canonical() const;
    /// FNV-1a 64 of canonical().
    std::uint64_t hash() const;
    std::string hash_hex() const;

    /// Copy with P_av replaced (power levels follow as fractions of it).
    RunConfig with_p_av_db(double p_av_db) const;
};

/// Default document, every key present.
nlohmann::json default_document();

/// Throws ConfigError naming the offending key or value.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

std::string_view to_string(SimRegime r) noexcept;
std::string_view to_string(SweepVariable v) noexcept;

}  // namespace ssrelay
