// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <string>

#include "ssrelay/ssrelay.h"

namespace {

const char* kSmall = R"({
    "grids": {"rho_p_levels": [0.1, 0.5], "rho_s_levels": [0.0, 0.625],
              "p_s_fractions": [1.0], "p_s_stationary": [1.0],
              "pd_levels": [0.0, 0.5, 1.0], "ic_levels_db": [-5, 0, 5]}})";

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("version and null handling") {
    CHECK(std::string(ssr_version()) == "0.1.0");
    CHECK(ssr_config_parse(nullptr, nullptr) == SSR_INVALID_ARGUMENT);
    CHECK(std::string(ssr_last_error()) == "null argument");
    CHECK(ssr_validate(nullptr) == SSR_INVALID_ARGUMENT);
    CHECK(ssr_solution_iterations(nullptr) == 0);
    ssr_config_free(nullptr);
    ssr_solution_free(nullptr);
}

TEST_CASE("config errors carry a message") {
    ssr_config* cfg = nullptr;
    CHECK(ssr_config_parse(R"({"nope": 1})", &cfg) == SSR_CONFIG);
    CHECK(cfg == nullptr);
    CHECK(std::string(ssr_last_error()).find("unknown key 'nope'") != std::string::npos);
    CHECK(ssr_config_load("/nonexistent/x.json", &cfg) == SSR_IO);

    REQUIRE(ssr_config_parse(R"({"queue": {"lambda_p": 0.6}})", &cfg) == SSR_OK);
    CHECK(ssr_validate(cfg) == SSR_CONFIG);
    CHECK(std::string(ssr_last_error()).find("constraint 1") != std::string::npos);
    ssr_config_free(cfg);
}

TEST_CASE("seed and hash") {
    ssr_config* cfg = nullptr;
    REQUIRE(ssr_config_parse("{}", &cfg) == SSR_OK);
    CHECK(ssr_validate(cfg) == SSR_OK);
    const std::string hash = ssr_config_hash(cfg);
    CHECK(hash.size() == 16);
    CHECK(ssr_config_seed(cfg) == 1);
    CHECK(ssr_config_set_seed(cfg, 42) == SSR_OK);
    CHECK(ssr_config_seed(cfg) == 42);
    CHECK(std::string(ssr_config_hash(cfg)) == hash);
    CHECK(std::string(ssr_config_resolved_json(cfg)).find("\"seed\":42") != std::string::npos);
    ssr_config_free(cfg);
}

TEST_CASE("solve through the C interface") {
    ssr_config* cfg = nullptr;
    REQUIRE(ssr_config_parse(kSmall, &cfg) == SSR_OK);
    ssr_solution* sol = nullptr;
    REQUIRE(ssr_solve(cfg, 2, &sol) == SSR_OK);
    CHECK(ssr_solution_converged(sol) == 1);
    CHECK(ssr_solution_iterations(sol) > 1);
    CHECK(ssr_solution_residual(sol) < 1e-6);
    CHECK(ssr_solution_wall_seconds(sol) >= 0.0);
    const std::size_t n = ssr_solution_state_count(sol);
    CHECK(n == 2 * 2 * 1 * 9);

    ssr_lookup_row row{};
    REQUIRE(ssr_solution_lookup(sol, 0, &row) == SSR_OK);
    CHECK(row.rho_p == 0.1);
    CHECK(row.rho_s == 0.0);
    CHECK(row.prev_pd == 0.0);
    CHECK(ssr_solution_lookup(sol, n, &row) == SSR_INVALID_ARGUMENT);

    const std::string table = "capi_table.csv";
    const std::string manifest = "capi_manifest.json";
    CHECK(ssr_solution_write_table(sol, table.c_str()) == SSR_OK);
    CHECK(ssr_solution_write_manifest(sol, manifest.c_str()) == SSR_OK);
    CHECK(slurp(table).rfind("# {", 0) == 0);
    CHECK(slurp(manifest).find(ssr_config_hash(cfg)) != std::string::npos);
    CHECK(ssr_solution_write_table(sol, "/nonexistent/dir/t.csv") == SSR_IO);
    std::remove(table.c_str());
    std::remove(manifest.c_str());

    ssr_solution_free(sol);
    ssr_config_free(cfg);
}

TEST_CASE("sweep and simulate through the C interface") {
    ssr_config* cfg = nullptr;
    REQUIRE(ssr_config_parse(R"({
        "grids": {"rho_p_levels": [0.1, 0.5], "rho_s_levels": [0.0, 0.625],
                  "p_s_fractions": [1.0], "p_s_stationary": [1.0],
                  "pd_levels": [0.0, 0.5, 1.0], "ic_levels_db": [-5, 0, 5]},
        "sweep": {"variable": "pd", "values": [0, 0.5, 1], "fixed": [0], "rho_p": [0.1]},
        "sim": {"n_slots": 20000}})",
                             &cfg) == SSR_OK);
    int converged = -1;
    CHECK(ssr_sweep(cfg, 1, "capi_sweep.csv", &converged) == SSR_OK);
    CHECK(converged == 1);
    const auto sweep = slurp("capi_sweep.csv");
    CHECK(sweep.find("pd,ic_db,rho_p,J") != std::string::npos);
    int within = -1;
    CHECK(ssr_simulate(cfg, 2, "capi_sim.csv", &within) == SSR_OK);
    CHECK(within != -1);
    CHECK(slurp("capi_sim.csv").find("regime,metric,empirical,se,analytical,z,pass") != std::string::npos);
    std::remove("capi_sweep.csv");
    std::remove("capi_sim.csv");
    ssr_config_free(cfg);
}
