// SPDX-License-Identifier: Apache-2.0
//
// Closed-form throughputs of a sensing-based spectrum-sharing link pair with
// secondary relaying of primary packets. All SNRs and cut-offs are linear;
// every success probability is a Rayleigh non-outage probability
// exp(-beta * (1 + gamma_interf) / gamma).

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ssrelay {

/// Raised when an argument lies outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Result of one sensing decision. The enumerator value is the two-bit
/// (true channel state, sensing verdict) code: 0 = idle, 1 = busy.
enum class SensingOutcome : std::uint8_t {
    NoFalseAlarm = 0b00,
    FalseAlarm = 0b01,
    MissedDetection = 0b10,
    Detection = 0b11,
};

inline constexpr std::array<SensingOutcome, 4> kAllOutcomes = {
    SensingOutcome::NoFalseAlarm, SensingOutcome::FalseAlarm,
    SensingOutcome::MissedDetection, SensingOutcome::Detection};

/// True when the primary user is actually transmitting in this outcome.
constexpr bool primary_busy(SensingOutcome o) noexcept {
    return (static_cast<unsigned>(o) & 0b10u) != 0;
}

/// True when the secondary transmits under the interference constraint.
constexpr bool constrained(SensingOutcome o) noexcept {
    return (static_cast<unsigned>(o) & 0b01u) != 0;
}

constexpr std::size_t index_of(SensingOutcome o) noexcept {
    return static_cast<std::size_t>(o);
}

std::string_view to_string(SensingOutcome o) noexcept;

struct ChannelParams {
    double gamma_s = 10.0;  // SU-Tx -> SU-Rx mean SNR
    double gamma_p = 10.0;  // PU-Tx -> PU-Rx mean SNR
    double gamma_sp = 1.0;  // SU-Tx -> PU-Rx mean SNR
    double gamma_ps = 1.0;  // PU-Tx -> SU-Rx mean SNR (interference at SU-Rx)
    double beta_s = 1.0;    // cut-off, unconstrained transmission
    double beta_sp = 1.0;   // cut-off, constrained transmission
    double beta_p = 1.0;    // cut-off, primary link
    double n0 = 1.0;        // noise power

    /// Throws DomainError unless SNRs and n0 are positive and cut-offs are
    /// non-negative (all finite).
    void validate() const;
};

struct QueueParams {
    double lambda_s = 0.5;
    double lambda_p = 0.3;
    double lambda_ps = 0.2;
    double mu_s_max = 0.8;
    double mu_p_max = 0.6;
    double mu_ps_max = 0.4;

    double rho_s() const noexcept { return lambda_s / mu_s_max; }
    double rho_p() const noexcept { return lambda_p / mu_p_max; }
    double rho_ps() const noexcept { return lambda_ps / mu_ps_max; }
};

struct SensingTiming {
    double tau = 0.3e-3;     // seconds
    double t_frame = 1e-3;   // seconds

    void validate() const;
    /// Fraction of the frame left for data, (T - tau) / T.
    double frame_factor() const;
};

/// exp(-beta * (1 + gamma_interf) / gamma).
double success_probability(double beta, double gamma, double gamma_interf = 0.0);

/// Secondary throughput of one sensing branch, including the branch's
/// probability weight (1-pf)pi0, pf*pi0, (1-pd)pi1 or pd*pi1.
double secondary_branch(SensingOutcome outcome, double pf, double pd, double pi1,
                        const ChannelParams& ch);

/// Relayed primary throughput of one sensing branch (SU -> PU-Rx link).
double relay_branch(SensingOutcome outcome, double pf, double pd, double pi1,
                    const ChannelParams& ch);

/// Frame-level secondary throughput for a branch rate; `secondary_load` is
/// the utilization lambda_s / mu_s_max.
double secondary_throughput(double branch_rate, const SensingTiming& timing,
                            double secondary_load, const ChannelParams& ch);
double secondary_throughput(double branch_rate, const SensingTiming& timing,
                            const QueueParams& q, const ChannelParams& ch);

/// Primary throughput: own link (with SU interference) plus relayed traffic
/// while the primary link is in outage. `relay_load` is lambda_ps / mu_ps_max.
double primary_throughput(double relay_rate, double relay_load, const ChannelParams& ch,
                          double pi1);
double primary_throughput(double relay_rate, const QueueParams& q, const ChannelParams& ch,
                          double pi1);

/// Branch probability weights of the four outcomes, indexed by index_of().
std::array<double, 4> outcome_weights(double pf, double pd, double pi1);

/// (pi1, pf, pd) that force `outcome` with probability one. Evaluating any
/// branch formula at these values yields the rate conditional on the outcome.
struct ForcedSensing {
    double pi1;
    double pf;
    double pd;
};
ForcedSensing forced_sensing(SensingOutcome outcome) noexcept;

}  // namespace ssrelay
