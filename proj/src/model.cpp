// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/model.hpp"

#include <cmath>
#include <string>

namespace ssrelay {

namespace {

void require_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
    }
}

void require_positive(double x, const char* name) {
    if (!(std::isfinite(x) && x > 0.0)) {
        throw DomainError(std::string(name) + " must be finite and > 0, got " + std::to_string(x));
    }
}

void require_non_negative(double x, const char* name) {
    if (!(std::isfinite(x) && x >= 0.0)) {
        throw DomainError(std::string(name) + " must be finite and >= 0, got " +
                          std::to_string(x));
    }
}

// Probability weight of a branch: (1-pf)pi0, pf*pi0, (1-pd)pi1, pd*pi1.
double branch_weight(SensingOutcome outcome, double pf, double pd, double pi1) {
    const double pi0 = 1.0 - pi1;
    switch (outcome) {
        case SensingOutcome::NoFalseAlarm: return (1.0 - pf) * pi0;
        case SensingOutcome::FalseAlarm: return pf * pi0;
        case SensingOutcome::MissedDetection: return (1.0 - pd) * pi1;
        case SensingOutcome::Detection: return pd * pi1;
    }
    return 0.0;
}

double branch_rate(SensingOutcome outcome, double pf, double pd, double pi1, double gamma,
                   const ChannelParams& ch) {
    require_probability(pf, "pf");
    require_probability(pd, "pd");
    require_probability(pi1, "pi1");
    const double beta = constrained(outcome) ? ch.beta_sp : ch.beta_s;
    const double interf = primary_busy(outcome) ? ch.gamma_ps : 0.0;
    return branch_weight(outcome, pf, pd, pi1) * success_probability(beta, gamma, interf);
}

}  // namespace

std::string_view to_string(SensingOutcome o) noexcept {
    switch (o) {
        case SensingOutcome::NoFalseAlarm: return "00";
        case SensingOutcome::FalseAlarm: return "01";
        case SensingOutcome::MissedDetection: return "10";
        case SensingOutcome::Detection: return "11";
    }
    return "??";
}

void ChannelParams::validate() const {
    require_positive(gamma_s, "gamma_s");
    require_positive(gamma_p, "gamma_p");
    require_positive(gamma_sp, "gamma_sp");
    require_positive(gamma_ps, "gamma_ps");
    require_non_negative(beta_s, "beta_s");
    require_non_negative(beta_sp, "beta_sp");
    require_non_negative(beta_p, "beta_p");
    require_positive(n0, "n0");
}

void SensingTiming::validate() const {
    require_positive(t_frame, "t_frame");
    require_non_negative(tau, "tau");
    if (!(tau < t_frame)) throw DomainError("sensing time tau must be shorter than the frame");
}

double SensingTiming::frame_factor() const {
    validate();
    return (t_frame - tau) / t_frame;
}

double success_probability(double beta, double gamma, double gamma_interf) {
    require_non_negative(beta, "beta");
    require_positive(gamma, "gamma");
    require_non_negative(gamma_interf, "gamma_interf");
    return std::exp(-beta * (1.0 + gamma_interf) / gamma);
}

double secondary_branch(SensingOutcome outcome, double pf, double pd, double pi1,
                        const ChannelParams& ch) {
    return branch_rate(outcome, pf, pd, pi1, ch.gamma_s, ch);
}

double relay_branch(SensingOutcome outcome, double pf, double pd, double pi1,
                    const ChannelParams& ch) {
    return branch_rate(outcome, pf, pd, pi1, ch.gamma_sp, ch);
}

double secondary_throughput(double branch_rate, const SensingTiming& timing,
                            double secondary_load, const ChannelParams& ch) {
    require_probability(branch_rate, "branch_rate");
    require_probability(secondary_load, "secondary_load");
    return timing.frame_factor() * branch_rate * secondary_load *
           success_probability(ch.beta_p, ch.gamma_p);
}

double secondary_throughput(double branch_rate, const SensingTiming& timing,
                            const QueueParams& q, const ChannelParams& ch) {
    return secondary_throughput(branch_rate, timing, q.rho_s(), ch);
}

double primary_throughput(double relay_rate, double relay_load, const ChannelParams& ch,
                          double pi1) {
    require_probability(relay_rate, "relay_rate");
    require_probability(relay_load, "relay_load");
    require_probability(pi1, "pi1");
    const double direct = success_probability(ch.beta_p, ch.gamma_p, ch.gamma_sp) * pi1;
    const double outage = 1.0 - success_probability(ch.beta_p, ch.gamma_p);
    return direct + relay_rate * relay_load * outage;
}

double primary_throughput(double relay_rate, const QueueParams& q, const ChannelParams& ch,
                          double pi1) {
    return primary_throughput(relay_rate, q.rho_ps(), ch, pi1);
}

std::array<double, 4> outcome_weights(double pf, double pd, double pi1) {
    require_probability(pf, "pf");
    require_probability(pd, "pd");
    require_probability(pi1, "pi1");
    std::array<double, 4> w{};
    for (auto o : kAllOutcomes) w[index_of(o)] = branch_weight(o, pf, pd, pi1);
    return w;
}

ForcedSensing forced_sensing(SensingOutcome outcome) noexcept {
    switch (outcome) {
        case SensingOutcome::NoFalseAlarm: return {0.0, 0.0, 0.0};
        case SensingOutcome::FalseAlarm: return {0.0, 1.0, 0.0};
        case SensingOutcome::MissedDetection: return {1.0, 0.0, 0.0};
        case SensingOutcome::Detection: return {1.0, 0.0, 1.0};
    }
    return {0.0, 0.0, 0.0};
}

}  // namespace ssrelay
