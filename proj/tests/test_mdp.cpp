// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "ssrelay/mdp.hpp"

using namespace ssrelay;

namespace {

constexpr double kPav = 3.1622776601683795;  // 5 dB
constexpr double kRewardExample = 0.3958663703907323;

RelayMdp default_mdp(RewardTiming timing = RewardTiming::PreviousAction) {
    ModelParams p;
    p.reward_timing = timing;
    return RelayMdp(p, default_state_grids(p.p_av), default_action_grids(), CostModel{});
}

// Two-level rho_p grid, single level elsewhere.
RelayMdp small_mdp(double lambda_p, ChannelParams ch = {}) {
    ModelParams p;
    p.channel = ch;
    p.queue.lambda_p = lambda_p;
    StateGrids g{{0.0, 0.5}, {0.0, 0.5}, {kPav}, {1.0}};
    ActionGrids a{{0.0, 0.5, 1.0}, {0.1, 1.0}, 0.1, 1.0};
    return RelayMdp(p, g, a, CostModel{});
}

bool has_constraint(const ValidationReport& r, int c) {
    for (const auto& v : r.violations) {
        if (v.constraint == c) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("constrained power") {
    CHECK(constrained_power({kPav, 1.0}, 10.0) == kPav);
    CHECK(constrained_power({kPav, 1.0}, 0.0316) == 0.0316);
    CHECK(constrained_power({kPav, 1.0}, kPav) == kPav);
    CHECK(constrained_power({kPav, 2.0}, 1.0) == 0.5);
    CHECK_THROWS_AS(constrained_power({kPav, 1.0}, 0.0), DomainError);
    CHECK_THROWS_AS(constrained_power({kPav, 1.0}, -1.0), DomainError);
    double prev = 0.0;
    for (int db = -30; db <= 20; ++db) {
        const double p = constrained_power({kPav, 1.0}, std::pow(10.0, db / 10.0));
        CHECK(p >= prev);
        CHECK(p <= kPav);
        prev = p;
    }
}

TEST_CASE("sensing outcome distribution in case order") {
    auto d = sensing_outcome_distribution(0.0, 0.5, 0.3);
    CHECK(d[0] == doctest::Approx(0.3));
    CHECK(d[1] == doctest::Approx(0.7));
    CHECK(d[2] == 0.0);
    CHECK(d[3] == 0.0);
    d = sensing_outcome_distribution(1.0, 0.9, 0.3);
    CHECK(d[0] == 0.0);
    CHECK(d[1] == 0.0);
    CHECK(d[2] == doctest::Approx(0.1));
    CHECK(d[3] == doctest::Approx(0.9));
    d = sensing_outcome_distribution(0.5, 0.8, 0.2);
    CHECK(d[0] == doctest::Approx(0.1));
    CHECK(d[1] == doctest::Approx(0.4));
    CHECK(d[2] == doctest::Approx(0.1));
    CHECK(d[3] == doctest::Approx(0.4));
    CHECK(d[0] + d[1] + d[2] + d[3] == doctest::Approx(1.0));
}

TEST_CASE("birth-death step") {
    const auto mid = birth_death_step(0.3, 0.5, false, false);
    CHECK(mid.up == doctest::Approx(0.15));
    CHECK(mid.down == doctest::Approx(0.35));
    CHECK(mid.stay == doctest::Approx(0.5));
    const auto bottom = birth_death_step(0.3, 0.5, true, false);
    CHECK(bottom.down == 0.0);
    CHECK(bottom.stay == doctest::Approx(0.85));
    const auto top = birth_death_step(0.3, 0.5, false, true);
    CHECK(top.up == 0.0);
    CHECK(top.stay == doctest::Approx(0.65));
    CHECK_THROWS_AS(birth_death_step(1.2, 0.5, false, false), DomainError);
}

TEST_CASE("default grids") {
    const auto g = default_state_grids(kPav);
    CHECK(g.rho_p_levels.size() == 10);
    CHECK(g.p_s_levels.back() == kPav);
    double total = 0.0;
    for (double p : g.p_s_stationary) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.p_s_stationary[0] == doctest::Approx(1.0 - std::exp(-0.5)));
    CHECK(g.p_s_stationary[3] == doctest::Approx(std::exp(-1.5)));
    const auto m = default_mdp();
    CHECK(m.state_count() == 92400);
    CHECK(m.action_count() == 231);
}

TEST_CASE("state and action indexing round trip") {
    const auto m = default_mdp();
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<std::size_t> pick(0, m.state_count() - 1);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t s = pick(rng);
        CHECK(m.state_index(m.state_at(s)) == s);
    }
    for (std::size_t a = 0; a < m.action_count(); ++a) CHECK(m.action_index(m.action_at(a)) == a);
    CHECK(m.action_index({1, 0}) == 21);
    CHECK_THROWS_AS(m.state_at(m.state_count()), std::out_of_range);
    CHECK_THROWS_AS(m.action_index({11, 0}), std::out_of_range);
}

TEST_CASE("validation names the violated constraint") {
    ModelParams p;
    auto g = default_state_grids(p.p_av);
    auto a = default_action_grids();
    CHECK(validate(p, g, a).ok());

    auto unstable = p;
    unstable.queue.lambda_p = unstable.queue.mu_p_max;
    auto r = validate(unstable, g, a);
    CHECK(has_constraint(r, 1));
    CHECK(r.describe().find("constraint 1") != std::string::npos);

    auto bad_pd = a;
    bad_pd.pd_levels.push_back(1.2);
    CHECK(has_constraint(validate(p, g, bad_pd), 3));

    auto bad_power = g;
    bad_power.p_s_levels.back() = 2.0 * p.p_av;
    CHECK(has_constraint(validate(p, bad_power, a), 2));

    auto bad_ic = a;
    bad_ic.ic_levels.push_back(100.0);
    CHECK(has_constraint(validate(p, g, bad_ic), 4));

    auto bad_stationary = g;
    bad_stationary.p_s_stationary[0] += 1e-6;
    CHECK(has_constraint(validate(p, bad_stationary, a), 0));

    auto unsorted = g;
    std::swap(unsorted.rho_p_levels[0], unsorted.rho_p_levels[1]);
    CHECK(has_constraint(validate(p, unsorted, a), 0));

    CHECK_THROWS_AS(RelayMdp(unstable, g, a, CostModel{}), std::invalid_argument);
    CHECK_THROWS_AS(RelayMdp(p, g, a, CostModel{2.0, 2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("reward examples") {
    SUBCASE("empty secondary queue earns only the costs") {
        const auto m = default_mdp();
        const AugmentedState s{3, 0, 2, 7, 9};
        const ControlAction a{4, 12};
        CHECK(m.immediate_reward(s) == 0.0);
        CHECK(m.reward(s, a) == doctest::Approx(-m.action_cost(a)).epsilon(1e-15));
    }
    SUBCASE("composed closed form") {
        ModelParams p;
        p.channel.beta_s = 0.0;
        StateGrids g{{0.0, 0.5}, {0.0, 0.625}, {kPav}, {1.0}};
        ActionGrids a{{0.0, 1.0}, {kPav}, kPav, kPav};
        const RelayMdp m(p, g, a, CostModel{0.0, 0.0, 0.9});
        CHECK(m.reward({0, 1, 0, 0, 0}, {1, 0}) == doctest::Approx(kRewardExample).epsilon(1e-14));
    }
    SUBCASE("linear cost at the grid corner") {
        const auto m = default_mdp();
        const ControlAction a{10, 20};
        const double p1 = constrained_power(m.params().power_policy(), m.actions().ic_levels[20]);
        CHECK(m.action_cost(a) == doctest::Approx(2.0 * 1.0 + 2.0 * p1).epsilon(1e-15));
    }
    SUBCASE("reward bound") {
        const auto m = default_mdp();
        const auto compiled = m.compile();
        CHECK(compiled.reward_bound() <= 1.0 + 2.0 + 2.0 * m.params().p_av);
    }
}

TEST_CASE("reward timing switch") {
    const auto prev = default_mdp(RewardTiming::PreviousAction);
    const auto chosen = default_mdp(RewardTiming::ChosenAction);
    const AugmentedState s{5, 6, 3, 2, 4};
    const ControlAction a{8, 15};
    CHECK(prev.reward(s, a) == doctest::Approx(prev.throughput(s, {2, 4}) - prev.action_cost(a)));
    CHECK(chosen.reward(s, a) == doctest::Approx(chosen.throughput(s, a) - chosen.action_cost(a)));
    const auto c = chosen.compile();
    const auto idx = chosen.state_index(s);
    CHECK(c.state_reward(idx) == 0.0);
    CHECK(c.action_reward(c.block_of(idx), chosen.action_index(a)) ==
          doctest::Approx(chosen.reward(s, a)).epsilon(1e-15));
}

TEST_CASE("transition rows are distributions that remember the action") {
    const auto m = default_mdp();
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> ps(0, m.state_count() - 1);
    std::uniform_int_distribution<std::size_t> pa(0, m.action_count() - 1);
    for (int i = 0; i < 2000; ++i) {
        const auto s = m.state_at(ps(rng));
        const auto a = m.action_at(pa(rng));
        double total = 0.0;
        for (const auto& e : m.transition(s, a)) {
            CHECK(e.prob > 0.0);
            CHECK(e.next.prev_pd_idx == a.pd_idx);
            CHECK(e.next.prev_ic_idx == a.ic_idx);
            CHECK(std::abs(static_cast<long>(e.next.rho_p_idx) - static_cast<long>(s.rho_p_idx)) <= 1);
            CHECK(std::abs(static_cast<long>(e.next.rho_s_idx) - static_cast<long>(s.rho_s_idx)) <= 1);
            total += e.prob;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("compiled rows match the transition function") {
    const auto m = small_mdp(0.3);
    const auto c = m.compile();
    CHECK_NOTHROW(c.check());
    for (std::size_t i = 0; i < m.state_count(); ++i) {
        const auto s = m.state_at(i);
        for (std::size_t ai = 0; ai < m.action_count(); ++ai) {
            const auto row = m.transition(s, m.action_at(ai));
            const auto compiled = c.row(c.block_of(i), ai);
            REQUIRE(row.size() == compiled.size());
            for (std::size_t k = 0; k < row.size(); ++k) {
                CHECK(m.state_index(row[k].next) == compiled[k].next);
                CHECK(row[k].prob == compiled[k].prob);
            }
            CHECK(c.state_reward(i) + c.action_reward(c.block_of(i), ai) ==
                  doctest::Approx(m.reward(s, m.action_at(ai))).epsilon(1e-15));
        }
    }
}

TEST_CASE("empty primary queue is absorbing without arrivals") {
    const auto m = small_mdp(0.0);
    for (std::size_t ai = 0; ai < m.action_count(); ++ai) {
        double stay = 0.0;
        for (const auto& e : m.transition({0, 1, 0, 0, 0}, m.action_at(ai))) {
            if (e.next.rho_p_idx == 0) stay += e.prob;
        }
        CHECK(stay == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("rho_p marginal is the outcome-mixed birth-death chain") {
    ChannelParams ch;
    ch.gamma_sp = 2.0;
    const auto m = small_mdp(0.3, ch);
    const AugmentedState s{1, 1, 0, 0, 0};
    for (std::size_t ai = 0; ai < m.action_count(); ++ai) {
        const auto a = m.action_at(ai);
        std::map<std::size_t, double> marginal;
        for (const auto& e : m.transition(s, a)) marginal[e.next.rho_p_idx] += e.prob;

        // Hand composition from the closed forms.
        const double p0 = kPav;
        const double p1 = constrained_power({p0, 1.0}, m.actions().ic_levels[a.ic_idx]);
        const auto eff = effective_channel(m.params(), p0, p1);
        const double pd = m.actions().pd_levels[a.pd_idx];
        const auto w = outcome_weights(m.false_alarm(a.pd_idx), pd, 0.5);
        double down = 0.0;
        for (auto o : kAllOutcomes) {
            const auto f = forced_sensing(o);
            const double srv = primary_throughput(relay_branch(o, f.pf, f.pd, f.pi1, eff),
                                                  m.params().queue.rho_ps(), eff, f.pi1);
            down += w[index_of(o)] * srv * (1.0 - 0.3);
        }
        // top level: up folds into stay
        CHECK(marginal[0] == doctest::Approx(down).epsilon(1e-13));
        CHECK(marginal[1] == doctest::Approx(1.0 - down).epsilon(1e-13));
    }
}

TEST_CASE("effective channel scales cut-offs with power") {
    ModelParams p;
    p.channel.beta_s = 2.0;
    const auto ch = effective_channel(p, p.reference_power, p.reference_power / 4.0);
    CHECK(ch.beta_s == doctest::Approx(2.0));
    CHECK(ch.beta_sp == doctest::Approx(8.0));
    CHECK_THROWS_AS(effective_channel(p, 0.0, 1.0), DomainError);
}
