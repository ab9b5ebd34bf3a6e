// SPDX-License-Identifier: Apache-2.0
//
// Drivers behind the command-line tool: solve, sweep and simulate runs over a
// RunConfig, with CSV output. Every CSV starts with a `# {manifest}` line.

#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ssrelay/config.hpp"
#include "ssrelay/mdp.hpp"
#include "ssrelay/solver.hpp"

namespace ssrelay {

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

/// Builds the MDP, turning validation failures into ConfigError.
RelayMdp make_mdp(const RunConfig& cfg);

/// Index of the rho_s level closest to lambda_s / mu_s_max (lower on ties).
std::size_t reference_rho_s(const RunConfig& cfg);

/// Index of `value` in `grid` within 1e-9, or ConfigError naming `what`.
std::size_t grid_index(const std::vector<double>& grid, double value, const std::string& what);

struct SolveOutput {
    std::unique_ptr<RelayMdp> mdp;
    Solution solution;
    double wall_seconds = 0.0;
};

SolveOutput run_solve(const RunConfig& cfg, unsigned threads);

nlohmann::json manifest(const RunConfig& cfg, const std::string& command);
nlohmann::json solve_manifest(const RunConfig& cfg, const SolveOutput& out);

void write_lookup_csv(std::ostream& os, const RunConfig& cfg, const SolveOutput& out);
std::vector<LookupRow> read_lookup_csv(std::istream& is);

struct SweepOutput {
    std::string csv;
    bool all_converged = true;
    std::size_t solves = 0;
};

/// Throws ConfigError for an empty grid or values off the model grids.
SweepOutput run_sweep(const RunConfig& cfg, unsigned threads);

struct SimulateOutput {
    std::string csv;
    bool all_within = true;
};

SimulateOutput run_simulate(const RunConfig& cfg, unsigned threads);

}  // namespace ssrelay
