// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <random>

#include "ssrelay/solver.hpp"
#include "support/oracles.hpp"

using namespace ssrelay;

namespace {

RelayMdp compact_mdp() {
    ModelParams p;
    StateGrids g{{0.1, 0.4, 0.7}, {0.0, 0.3, 0.6}, {1.0, p.p_av}, {0.4, 0.6}};
    ActionGrids a{{0.0, 0.5, 1.0}, {0.1, 1.0}, 0.1, 1.0};
    return RelayMdp(p, g, a, CostModel{});
}

SolverConfig tight(double discount = 0.9) {
    SolverConfig c;
    c.epsilon = 1e-12;
    c.max_iters = 5000;
    c.discount = discount;
    return c;
}

}  // namespace

TEST_CASE("solver config validation") {
    CHECK_NOTHROW(SolverConfig{}.validate());
    CHECK_THROWS_AS((SolverConfig{0.0, 10, 0.9}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SolverConfig{1e-6, 0, 0.9}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((SolverConfig{1e-6, 10, 1.0}.validate()), std::invalid_argument);
    CHECK(policy_mode_from_string("fixed_ic") == PolicyMode::FixedIc);
    CHECK(to_string(PolicyMode::FixedPd) == "fixed_pd");
    CHECK_FALSE(policy_mode_from_string("both").has_value());
}

TEST_CASE("zero rewards stop after one backup") {
    auto m = FiniteMdp::plain(2, 2);
    const SparseEntry stay0[] = {{0, 1.0}};
    const SparseEntry stay1[] = {{1, 1.0}};
    m.add_row(0, 0, 0.0, stay0);
    m.add_row(0, 1, 0.0, stay1);
    m.add_row(1, 0, 0.0, stay1);
    m.add_row(1, 1, 0.0, stay0);
    const auto sol = value_iteration(m, SolverConfig{});
    CHECK(sol.values.iterations == 1);
    CHECK(sol.values.converged);
    CHECK(sol.values.values == std::vector<double>{0.0, 0.0});
    CHECK(sol.policy.action == std::vector<std::uint32_t>{0, 0});
}

TEST_CASE("single state fixed point") {
    auto m = FiniteMdp::plain(1, 1);
    const SparseEntry self[] = {{0, 1.0}};
    m.add_row(0, 0, 0.4, self);
    const auto sol = value_iteration(m, tight());
    CHECK(sol.values.converged);
    CHECK(sol.values.values[0] == doctest::Approx(4.0).epsilon(1e-10));
    // residual after k backups is 0.4 * 0.9^(k-1)
    CHECK(sol.values.residuals[0] == doctest::Approx(0.4));
    CHECK(sol.values.residuals[1] == doctest::Approx(0.36));
}

TEST_CASE("max_iters reports non-convergence") {
    auto m = FiniteMdp::plain(1, 1);
    const SparseEntry self[] = {{0, 1.0}};
    m.add_row(0, 0, 1.0, self);
    const auto sol = value_iteration(m, SolverConfig{1e-9, 5, 0.9});
    CHECK(sol.values.iterations == 5);
    CHECK_FALSE(sol.values.converged);
}

TEST_CASE("value iteration matches brute-force enumeration") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const auto dense = oracle::random_dense(rng, 3, 3, 0.9);
        const auto best = oracle::brute_force(dense);
        REQUIRE(best.policies == 27);
        const auto sol = value_iteration(oracle::to_finite(dense), tight());
        REQUIRE(sol.values.converged);
        for (std::size_t s = 0; s < 3; ++s) {
            CHECK(std::abs(sol.values.values[s] - best.values[s]) < 1e-9);
            CHECK(sol.policy.action[s] == best.policy[s]);
        }
    }
}

TEST_CASE("policy evaluation") {
    std::mt19937_64 rng(77);
    const auto dense = oracle::random_dense(rng, 4, 3, 0.8);
    const auto finite = oracle::to_finite(dense);
    const auto sol = value_iteration(finite, tight(0.8));

    SUBCASE("optimal policy reproduces the optimal values") {
        const auto v = evaluate_policy(finite, sol.policy, tight(0.8));
        for (std::size_t s = 0; s < 4; ++s) CHECK(std::abs(v.values[s] - sol.values.values[s]) < 1e-9);
    }
    SUBCASE("arbitrary policy matches the linear solve") {
        PolicyTable pol{{2, 0, 1, 2}, {}, 3, 1};
        const auto v = evaluate_policy(finite, pol, tight(0.8));
        const auto exact = oracle::policy_value(dense, {2, 0, 1, 2});
        for (std::size_t s = 0; s < 4; ++s) CHECK(std::abs(v.values[s] - exact(static_cast<long>(s))) < 1e-9);
    }
    SUBCASE("zero discount returns the rewards") {
        PolicyTable pol{{1, 1, 1, 1}, {}, 3, 1};
        const auto v = evaluate_policy(finite, pol, tight(0.0));
        for (std::size_t s = 0; s < 4; ++s) CHECK(v.values[s] == doctest::Approx(dense.reward[s * 3 + 1]));
    }
    SUBCASE("two-state cycle closed form") {
        auto m = FiniteMdp::plain(2, 1);
        const SparseEntry to1[] = {{1, 1.0}};
        const SparseEntry to0[] = {{0, 1.0}};
        m.add_row(0, 0, 1.0, to1);
        m.add_row(1, 0, 0.0, to0);
        const auto v = evaluate_policy(m, PolicyTable{{0, 0}, {}, 1, 1}, tight(0.5));
        CHECK(v.values[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
        CHECK(v.values[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
    }
}

TEST_CASE("relay MDP solve: contraction, greedy consistency, thread independence") {
    const auto mdp = compact_mdp();
    const auto finite = mdp.compile();
    const SolverConfig cfg{1e-9, 2000, 0.9};
    const auto one = value_iteration(finite, cfg, {}, 1);
    const auto four = value_iteration(finite, cfg, {}, 4);
    CHECK(one.values.converged);
    CHECK(contraction_holds(one.values, 0.9));
    CHECK(one.values.values == four.values.values);
    CHECK(one.policy.action == four.policy.action);
    CHECK(one.values.residuals == four.values.residuals);

    const auto next = bellman_backup(finite, one.values.values, 0.9);
    double gap = 0.0;
    for (std::size_t s = 0; s < next.size(); ++s) gap = std::max(gap, std::abs(next[s] - one.values.values[s]));
    CHECK(gap <= 0.9 * one.values.final_residual() + 1e-12);

    // greedy action attains the backup value
    for (std::size_t s = 0; s < finite.state_count(); s += 7) {
        const auto b = finite.block_of(s);
        const auto a = one.policy.action[s];
        double q = finite.state_reward(s) + finite.action_reward(b, a);
        for (const auto& e : finite.row(b, a)) q += 0.9 * e.prob * one.values.values[e.next];
        CHECK(q == doctest::Approx(next[s]).epsilon(1e-12));
    }
}

TEST_CASE("restricted modes only pick allowed actions") {
    const auto mdp = compact_mdp();
    const auto finite = mdp.compile();
    const SolverConfig cfg{1e-8, 2000, 0.9};
    const auto joint = value_iteration(finite, cfg);
    const auto fixed_ic = value_iteration(finite, cfg, {PolicyMode::FixedIc, 1});
    const auto fixed_pd = value_iteration(finite, cfg, {PolicyMode::FixedPd, 2});
    for (std::size_t s = 0; s < finite.state_count(); ++s) {
        CHECK(fixed_ic.policy.at(s).ic_idx == 1);
        CHECK(fixed_pd.policy.at(s).pd_idx == 2);
        CHECK(fixed_ic.values.values[s] <= joint.values.values[s] + 1e-7);
        CHECK(fixed_pd.values.values[s] <= joint.values.values[s] + 1e-7);
    }
    const ActionRestriction r{PolicyMode::FixedIc, 1};
    CHECK(r.allows(3, 2));
    CHECK_FALSE(r.allows(2, 2));
    CHECK(ActionRestriction{}.allows(4, 2));
}

TEST_CASE("ties resolve to the lowest action index") {
    auto m = FiniteMdp::plain(2, 3);
    const SparseEntry self0[] = {{0, 1.0}};
    const SparseEntry self1[] = {{1, 1.0}};
    for (std::size_t a = 0; a < 3; ++a) m.add_row(0, a, 0.5, self0);
    m.add_row(1, 0, 0.1, self1);
    m.add_row(1, 1, 0.7, self1);
    m.add_row(1, 2, 0.7, self1);
    const auto sol = value_iteration(m, tight());
    CHECK(sol.policy.action[0] == 0);
    CHECK(sol.policy.action[1] == 1);
}

TEST_CASE("lookup table extraction") {
    const auto mdp = compact_mdp();
    const auto sol = value_iteration(mdp.compile(), SolverConfig{1e-8, 2000, 0.9});
    const auto rows = extract_lookup_table(sol.values, sol.policy, mdp);
    REQUIRE(rows.size() == mdp.state_count());
    for (std::size_t i = 0; i < rows.size(); i += 5) {
        const auto s = mdp.state_at(i);
        const auto a = sol.policy.at(i);
        CHECK(rows[i].rho_p == mdp.grids().rho_p_levels[s.rho_p_idx]);
        CHECK(rows[i].rho_s == mdp.grids().rho_s_levels[s.rho_s_idx]);
        CHECK(rows[i].p_s == mdp.grids().p_s_levels[s.p_s_idx]);
        CHECK(rows[i].prev_pd == mdp.actions().pd_levels[s.prev_pd_idx]);
        CHECK(rows[i].prev_ic == mdp.actions().ic_levels[s.prev_ic_idx]);
        CHECK(rows[i].opt_pd == mdp.actions().pd_levels[a.pd_idx]);
        CHECK(rows[i].opt_ic == mdp.actions().ic_levels[a.ic_idx]);
        CHECK(rows[i].value == sol.values.values[i]);
    }
}

TEST_CASE("loose and tight tolerances agree on almost every argmax") {
    ModelParams p;
    const RelayMdp mdp(p, default_state_grids(p.p_av), default_action_grids(), CostModel{});
    const auto finite = mdp.compile();
    const auto loose = value_iteration(finite, SolverConfig{1e-3, 1000, 0.9}, {}, 0);
    const auto fine = value_iteration(finite, SolverConfig{1e-6, 1000, 0.9}, {}, 0);
    std::size_t same = 0;
    for (std::size_t s = 0; s < finite.state_count(); ++s) same += loose.policy.action[s] == fine.policy.action[s];
    CHECK(static_cast<double>(same) >= 0.99 * static_cast<double>(finite.state_count()));
}
