// SPDX-License-Identifier: Apache-2.0
//
// Energy detector over complex samples: for N = round(tau * f_s) samples at
// sensed SNR g and normalized threshold e = eta / n0,
//   Pd = Q((e - g - 1) * sqrt(N / (2g + 1)))
//   Pf = Q((e - 1) * sqrt(N))
// so Pf(Pd) = Q(Qinv(Pd) * sqrt(2g + 1) + sqrt(N) * g).

#pragma once

#include <cstdint>

namespace ssrelay {

/// Gaussian tail probability P(N(0,1) > x).
double q_function(double x);

/// Inverse of q_function on (0, 1). Throws DomainError at 0 and 1.
double q_inverse(double p);

struct SensingConfig {
    double gamma_se = 0.03162277660168379;  // -15 dB
    double tau = 0.3e-3;                    // seconds
    double f_s = 1e6;                       // Hz

    void validate() const;
    /// round(tau * f_s), at least 1.
    std::int64_t n_samples() const;
};

/// False-alarm probability that accompanies detection probability `pd`.
/// Boundary convention: Pf(0) = 0 and Pf(1) = 1.
double false_alarm_from_detection(double pd, const SensingConfig& cfg);

/// Threshold eta (energy units of n0) achieving `pd`; pd must lie in (0, 1).
double threshold_from_detection(double pd, const SensingConfig& cfg, double n0 = 1.0);

/// Detection probability achieved by threshold `eta`.
double detection_from_threshold(double eta, const SensingConfig& cfg, double n0 = 1.0);

/// False-alarm probability achieved by threshold `eta`.
double false_alarm_from_threshold(double eta, const SensingConfig& cfg, double n0 = 1.0);

}  // namespace ssrelay
