// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/sim.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "ssrelay/sensing.hpp"

namespace ssrelay {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t replication)
        : engine_(splitmix64(seed ^ splitmix64(replication + 1))) {}

    // 53-bit uniform in [0, 1); spelled out so the stream is portable.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform() < p; }
    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

private:
    std::mt19937_64 engine_;
};

struct Accumulator {
    double n = 0.0;
    double sum = 0.0;
    double sumsq = 0.0;

    void add(double x) {
        n += 1.0;
        sum += x;
        sumsq += x * x;
    }
    void merge(const Accumulator& o) {
        n += o.n;
        sum += o.sum;
        sumsq += o.sumsq;
    }
    Estimate estimate() const {
        if (n == 0.0) return {};
        const double mean = sum / n;
        if (n < 2.0) return {mean, 0.0};
        const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
        return {mean, std::sqrt(var / n)};
    }
};

struct Tally {
    Accumulator mu_s, mu_p, direct_p, busy, q_s, q_ps, rho_p, rho_s, pd, ic;
    std::array<Accumulator, 4> branch_s, branch_p;
    std::array<std::uint64_t, 4> outcomes{};
    std::uint64_t busy_slots = 0, direct_busy = 0, relayed_busy = 0, lost_busy = 0;

    void merge(const Tally& o) {
        for (auto [a, b] : {std::pair{&mu_s, &o.mu_s}, {&mu_p, &o.mu_p}, {&direct_p, &o.direct_p},
                            {&busy, &o.busy}, {&q_s, &o.q_s}, {&q_ps, &o.q_ps},
                            {&rho_p, &o.rho_p}, {&rho_s, &o.rho_s}, {&pd, &o.pd}, {&ic, &o.ic}}) {
            a->merge(*b);
        }
        for (std::size_t i = 0; i < 4; ++i) {
            branch_s[i].merge(o.branch_s[i]);
            branch_p[i].merge(o.branch_p[i]);
            outcomes[i] += o.outcomes[i];
        }
        busy_slots += o.busy_slots;
        direct_busy += o.direct_busy;
        relayed_busy += o.relayed_busy;
        lost_busy += o.lost_busy;
    }
};

struct SlotInput {
    double pi1;
    double pd;
    double pf;
    double secondary_load;
    ChannelParams ch;
};

struct SlotResult {
    bool secondary_ok;
    bool primary_delivered;
};

SlotResult run_slot(const SlotInput& in, const SimConfig& cfg, Stream& rng, Tally& t) {
    const auto& ch = in.ch;
    const double relay_load = cfg.params.queue.rho_ps();

    bool busy;
    bool sensed_busy;
    if (cfg.forced) {
        busy = primary_busy(*cfg.forced);
        sensed_busy = constrained(*cfg.forced);
        rng.uniform();
        rng.uniform();
    } else {
        busy = rng.bernoulli(in.pi1);
        sensed_busy = rng.bernoulli(busy ? in.pd : in.pf);
    }
    const auto outcome =
        static_cast<SensingOutcome>((busy ? 0b10u : 0u) | (sensed_busy ? 0b01u : 0u));
    const std::size_t oi = index_of(outcome);
    ++t.outcomes[oi];

    const double x_p = rng.exponential(ch.gamma_p);
    const bool q_s = rng.bernoulli(in.secondary_load);
    const bool q_ps = rng.bernoulli(relay_load);
    const double x_s = rng.exponential(ch.gamma_s);
    const double x_sp = rng.exponential(ch.gamma_sp);

    const double cutoff = constrained(outcome) ? ch.beta_sp : ch.beta_s;
    const double penalty = busy ? 1.0 + ch.gamma_ps : 1.0;
    const bool primary_ok = x_p >= ch.beta_p;

    // Own traffic only while the primary link is up; relaying otherwise.
    const bool secondary_ok = q_s && primary_ok && x_s >= cutoff * penalty;
    const bool relayed = !primary_ok && q_ps && x_sp >= cutoff * penalty;
    const bool direct = busy && x_p >= ch.beta_p * (1.0 + ch.gamma_sp);

    // Secondary deliveries are counted here and scaled by (T - tau) / T at the end.
    const double s_gain = secondary_ok ? 1.0 : 0.0;
    t.mu_s.add(s_gain);
    t.mu_p.add(direct || relayed ? 1.0 : 0.0);
    t.direct_p.add(direct ? 1.0 : 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
        t.branch_s[i].add(i == oi ? s_gain : 0.0);
        t.branch_p[i].add(i == oi && relayed ? 1.0 : 0.0);
    }
    t.busy.add(busy ? 1.0 : 0.0);
    t.q_s.add(q_s ? 1.0 : 0.0);
    t.q_ps.add(q_ps ? 1.0 : 0.0);
    if (busy) {
        ++t.busy_slots;
        if (direct) {
            ++t.direct_busy;
        } else if (relayed) {
            ++t.relayed_busy;
        } else {
            ++t.lost_busy;
        }
    }
    return {secondary_ok, direct || relayed};
}

ChannelParams open_loop_channel(const SimConfig& cfg) {
    const double p1 = constrained_power({cfg.p_s0, cfg.params.mean_g_sp}, cfg.ic);
    return effective_channel(cfg.params, cfg.p_s0, p1);
}

Tally run_open_loop(const SimConfig& cfg, std::uint64_t slots, Stream& rng) {
    Tally t;
    SlotInput in{cfg.activity_mean(), cfg.pd,
                 false_alarm_from_detection(cfg.pd, cfg.params.sensing()),
                 cfg.params.queue.rho_s(), open_loop_channel(cfg)};
    std::size_t level = 0;
    if (cfg.activity) {
        const auto pi = cfg.activity->stationary();
        level = rng.bernoulli(pi[1]) ? 1 : 0;
    }
    for (std::uint64_t k = 0; k < slots; ++k) {
        if (cfg.activity) {
            const auto& a = *cfg.activity;
            in.pi1 = a.levels[level];
            run_slot(in, cfg, rng, t);
            const double flip = level == 0 ? a.p_low_to_high : a.p_high_to_low;
            if (rng.bernoulli(flip)) level ^= 1;
        } else {
            run_slot(in, cfg, rng, t);
        }
    }
    return t;
}

std::size_t step_level(std::size_t idx, std::size_t n, bool arrival, bool served) {
    if (arrival && !served && idx + 1 < n) return idx + 1;
    if (served && !arrival && idx > 0) return idx - 1;
    return idx;
}

Tally run_closed_loop(const SimConfig& cfg, std::uint64_t slots, Stream& rng) {
    const auto& mdp = *cfg.closed_loop->mdp;
    const auto& policy = *cfg.closed_loop->policy;
    const auto& g = mdp.grids();
    const auto& ag = mdp.actions();
    const auto& q = mdp.params().queue;
    Tally t;
    auto s = cfg.closed_loop->initial;
    for (std::uint64_t k = 0; k < slots; ++k) {
        const auto a = policy.at(mdp.state_index(s));
        const double p0 = g.p_s_levels[s.p_s_idx];
        const double p1 = constrained_power({p0, mdp.params().mean_g_sp}, ag.ic_levels[a.ic_idx]);
        const SlotInput in{g.rho_p_levels[s.rho_p_idx], ag.pd_levels[a.pd_idx],
                           mdp.false_alarm(a.pd_idx), g.rho_s_levels[s.rho_s_idx],
                           effective_channel(mdp.params(), p0, p1)};
        t.rho_p.add(in.pi1);
        t.rho_s.add(in.secondary_load);
        t.pd.add(in.pd);
        t.ic.add(ag.ic_levels[a.ic_idx]);
        const auto r = run_slot(in, cfg, rng, t);

        const bool arrival_p = rng.bernoulli(q.lambda_p);
        const bool arrival_s = rng.bernoulli(q.lambda_s);
        s.rho_p_idx = step_level(s.rho_p_idx, g.rho_p_levels.size(), arrival_p, r.primary_delivered);
        s.rho_s_idx = step_level(s.rho_s_idx, g.rho_s_levels.size(), arrival_s, r.secondary_ok);
        const double u = rng.uniform();
        double cdf = 0.0;
        std::size_t next_ps = g.p_s_stationary.size() - 1;
        for (std::size_t i = 0; i < g.p_s_stationary.size(); ++i) {
            cdf += g.p_s_stationary[i];
            if (u < cdf) {
                next_ps = i;
                break;
            }
        }
        s.p_s_idx = next_ps;
        s.prev_pd_idx = a.pd_idx;
        s.prev_ic_idx = a.ic_idx;
    }
    return t;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

std::array<double, 2> ActivityChain::stationary() const {
    const double total = p_low_to_high + p_high_to_low;
    if (!(total > 0.0)) return {1.0, 0.0};
    return {p_high_to_low / total, p_low_to_high / total};
}

double ActivityChain::mean_activity() const {
    const auto pi = stationary();
    return pi[0] * levels[0] + pi[1] * levels[1];
}

void SimConfig::validate() const {
    require(n_slots >= 1, "n_slots must be >= 1");
    require(replications >= 1, "replications must be >= 1");
    const auto& q = params.queue;
    require(q.lambda_s < q.mu_s_max && q.lambda_p < q.mu_p_max && q.lambda_ps < q.mu_ps_max,
            "constraint 1: queue unstable (lambda >= mu_max)");
    require(q.lambda_s >= 0.0 && q.lambda_p >= 0.0 && q.lambda_ps >= 0.0 && q.lambda_s <= 1.0 &&
                q.lambda_p <= 1.0,
            "arrival probabilities must lie in [0, 1]");
    params.channel.validate();
    params.timing.validate();
    params.sensing().validate();
    if (closed_loop) {
        require(closed_loop->mdp && closed_loop->policy, "closed-loop run needs an MDP and a policy");
        require(!forced && !activity && !pi1, "closed-loop run takes PU activity from the state");
        require(closed_loop->policy->action.size() == closed_loop->mdp->state_count(),
                "policy does not match the MDP");
        closed_loop->mdp->state_index(closed_loop->initial);
        return;
    }
    require(pd >= 0.0 && pd <= 1.0, "constraint 3: pd outside [0, 1]");
    require(ic > 0.0 && std::isfinite(ic), "interference level must be > 0");
    require(p_s0 > 0.0 && p_s0 <= params.p_av * (1.0 + 1e-12), "constraint 2: p_s0 outside (0, P_av]");
    if (pi1) require(*pi1 >= 0.0 && *pi1 <= 1.0, "pi1 must lie in [0, 1]");
    require(q.rho_p() <= 1.0 && q.rho_s() <= 1.0 && q.rho_ps() <= 1.0, "utilization above one");
    if (activity) {
        const auto& a = *activity;
        require(a.levels[0] >= 0.0 && a.levels[0] <= 1.0 && a.levels[1] >= 0.0 && a.levels[1] <= 1.0,
                "activity levels must lie in [0, 1]");
        require(a.p_low_to_high >= 0.0 && a.p_low_to_high <= 1.0 && a.p_high_to_low >= 0.0 &&
                    a.p_high_to_low <= 1.0,
                "activity switching probabilities must lie in [0, 1]");
        require(!pi1, "pi1 and an activity chain are exclusive");
    }
    require(!(forced && activity), "forced outcome and activity chain are exclusive");
}

double SimConfig::activity_mean() const {
    if (forced) return forced_sensing(*forced).pi1;
    if (activity) return activity->mean_activity();
    return pi1 ? *pi1 : params.queue.rho_p();
}

AnalyticRates analytic_rates(const SimConfig& cfg) {
    if (cfg.closed_loop) throw std::invalid_argument("no closed form for a closed-loop run");
    const auto ch = open_loop_channel(cfg);
    ForcedSensing s{cfg.activity_mean(), false_alarm_from_detection(cfg.pd, cfg.params.sensing()),
                    cfg.pd};
    if (cfg.forced) s = forced_sensing(*cfg.forced);

    AnalyticRates r;
    const double outage = 1.0 - success_probability(ch.beta_p, ch.gamma_p);
    const double relay_load = cfg.params.queue.rho_ps();
    r.direct_p = success_probability(ch.beta_p, ch.gamma_p, ch.gamma_sp) * s.pi1;
    r.mu_p = r.direct_p;
    for (auto o : kAllOutcomes) {
        const auto i = index_of(o);
        r.branch_s[i] = secondary_throughput(secondary_branch(o, s.pf, s.pd, s.pi1, ch),
                                             cfg.params.timing, cfg.params.queue.rho_s(), ch);
        r.branch_p[i] = relay_branch(o, s.pf, s.pd, s.pi1, ch) * relay_load * outage;
        r.mu_s += r.branch_s[i];
        r.mu_p += r.branch_p[i];
    }
    r.outcome_prob = outcome_weights(s.pf, s.pd, s.pi1);
    return r;
}

SimStats simulate(const SimConfig& cfg, unsigned threads) {
    cfg.validate();
    const unsigned reps = cfg.replications;
    std::vector<Tally> tallies(reps);
    const unsigned chunks = detail::effective_threads(threads, reps);
    detail::parallel_chunks(reps, chunks, [&](unsigned, std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::uint64_t slots = cfg.n_slots / reps + (r < cfg.n_slots % reps ? 1 : 0);
            Stream rng(cfg.seed, r);
            tallies[r] = cfg.closed_loop ? run_closed_loop(cfg, slots, rng)
                                         : run_open_loop(cfg, slots, rng);
        }
    });
    Tally total;
    for (const auto& t : tallies) total.merge(t);

    const double frame = cfg.params.timing.frame_factor();
    auto scaled = [frame](const Accumulator& a) {
        auto e = a.estimate();
        return Estimate{e.value * frame, e.se * frame};
    };
    SimStats st;
    st.n_slots = cfg.n_slots;
    st.mu_s = scaled(total.mu_s);
    st.mu_p = total.mu_p.estimate();
    st.direct_p = total.direct_p.estimate();
    for (std::size_t i = 0; i < 4; ++i) {
        st.branch_s[i] = scaled(total.branch_s[i]);
        st.branch_p[i] = total.branch_p[i].estimate();
        st.outcome_count[i] = total.outcomes[i];
        st.outcome_freq[i] = static_cast<double>(total.outcomes[i]) / static_cast<double>(cfg.n_slots);
    }
    st.busy_fraction = total.busy.estimate();
    st.secondary_backlog = total.q_s.estimate();
    st.relay_backlog = total.q_ps.estimate();
    st.mean_rho_p = total.rho_p.estimate();
    st.mean_rho_s = total.rho_s.estimate();
    st.mean_pd = total.pd.estimate();
    st.mean_ic = total.ic.estimate();
    st.busy_slots = total.busy_slots;
    st.direct_busy = total.direct_busy;
    st.relayed_busy = total.relayed_busy;
    st.lost_busy = total.lost_busy;
    return st;
}

ChiSquareResult outcome_frequency_check(const SimStats& stats, const AnalyticRates& expected) {
    ChiSquareResult res;
    const auto n = static_cast<double>(stats.n_slots);
    int categories = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double e = expected.outcome_prob[i] * n;
        const auto o = static_cast<double>(stats.outcome_count[i]);
        if (e <= 0.0) {
            if (o > 0.0) res.statistic = std::numeric_limits<double>::infinity();
            continue;
        }
        ++categories;
        res.statistic += (o - e) * (o - e) / e;
    }
    res.dof = std::max(categories - 1, 0);
    if (res.dof == 0) {
        res.critical = 0.0;
        res.pass = res.statistic == 0.0;
    } else {
        res.critical = boost::math::quantile(boost::math::chi_squared(res.dof), 0.999);
        res.pass = res.statistic <= res.critical;
    }
    return res;
}

double z_score(const Estimate& e, double analytic) {
    const double diff = e.value - analytic;
    if (e.se > 0.0) return diff / e.se;
    if (std::abs(diff) <= 1e-15 * std::max(1.0, std::abs(analytic))) return 0.0;
    return diff > 0.0 ? std::numeric_limits<double>::infinity()
                      : -std::numeric_limits<double>::infinity();
}

}  // namespace ssrelay
