// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/sensing.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ssrelay/model.hpp"

namespace ssrelay {

double q_function(double x) {
    if (std::isnan(x)) throw DomainError("q_function: NaN argument");
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double q_inverse(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("q_inverse: probability must lie in (0, 1), got " + std::to_string(p));
    }
    return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

void SensingConfig::validate() const {
    if (!(std::isfinite(gamma_se) && gamma_se > 0.0)) throw DomainError("gamma_se must be > 0");
    if (!(std::isfinite(tau) && tau >= 0.0)) throw DomainError("sensing tau must be >= 0");
    if (!(std::isfinite(f_s) && f_s > 0.0)) throw DomainError("f_s must be > 0");
}

std::int64_t SensingConfig::n_samples() const {
    validate();
    return std::max<std::int64_t>(1, std::llround(tau * f_s));
}

double false_alarm_from_detection(double pd, const SensingConfig& cfg) {
    if (!(pd >= 0.0 && pd <= 1.0)) throw DomainError("pd must lie in [0, 1]");
    const auto n = static_cast<double>(cfg.n_samples());
    if (pd == 0.0) return 0.0;
    if (pd == 1.0) return 1.0;
    const double g = cfg.gamma_se;
    const double pf = q_function(q_inverse(pd) * std::sqrt(2.0 * g + 1.0) + std::sqrt(n) * g);
    return std::clamp(pf, 0.0, 1.0);
}

double threshold_from_detection(double pd, const SensingConfig& cfg, double n0) {
    const auto n = static_cast<double>(cfg.n_samples());
    const double g = cfg.gamma_se;
    return (q_inverse(pd) * std::sqrt((2.0 * g + 1.0) / n) + g + 1.0) * n0;
}

double detection_from_threshold(double eta, const SensingConfig& cfg, double n0) {
    const auto n = static_cast<double>(cfg.n_samples());
    const double g = cfg.gamma_se;
    return q_function((eta / n0 - g - 1.0) * std::sqrt(n / (2.0 * g + 1.0)));
}

double false_alarm_from_threshold(double eta, const SensingConfig& cfg, double n0) {
    const auto n = static_cast<double>(cfg.n_samples());
    return q_function((eta / n0 - 1.0) * std::sqrt(n));
}

}  // namespace ssrelay
