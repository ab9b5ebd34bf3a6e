// SPDX-License-Identifier: Apache-2.0

#include "ssrelay/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ssrelay {

using nlohmann::json;

namespace {

json range(double first, double last, double step) {
    json out = json::array();
    const auto n = static_cast<int>(std::llround((last - first) / step));
    for (int i = 0; i <= n; ++i) out.push_back(first + i * step);
    return out;
}

json tenths(int n) {
    json out = json::array();
    for (int i = 0; i < n; ++i) out.push_back(i / 10.0);
    return out;
}

json activity_template() {
    const ActivityChain a;
    return {{"levels", {a.levels[0], a.levels[1]}},
            {"p_low_to_high", a.p_low_to_high},
            {"p_high_to_low", a.p_high_to_low}};
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

bool same_kind(const json& value, const json& like) {
    if (like.is_number()) return value.is_number();
    if (like.is_string()) return value.is_string();
    if (like.is_boolean()) return value.is_boolean();
    if (like.is_array()) return value.is_array();
    return false;
}

// Overlays `user` on `defaults`. Null defaults are optional values: they
// accept null, a number, or (for `activity`) an object of the template shape.
json overlay(const json& user, const json& defaults, const std::string& path) {
    if (!user.is_object()) throw ConfigError("'" + path + "' must be an object");
    json out = defaults;
    for (const auto& [key, value] : user.items()) {
        const std::string where = join(path, key);
        if (!defaults.contains(key)) throw ConfigError("unknown key '" + where + "'");
        const json& d = defaults.at(key);
        if (d.is_object()) {
            out[key] = overlay(value, d, where);
        } else if (d.is_null()) {
            if (value.is_null()) {
                out[key] = nullptr;
            } else if (key == "activity") {
                out[key] = overlay(value, activity_template(), where);
            } else if (value.is_number()) {
                out[key] = value;
            } else {
                throw ConfigError("'" + where + "' must be a number or null");
            }
        } else if (!same_kind(value, d)) {
            throw ConfigError("'" + where + "' has the wrong type");
        } else {
            out[key] = value;
        }
    }
    return out;
}

double number(const json& doc, const char* section, const char* key) {
    const auto& v = doc.at(section).at(key);
    if (!v.is_number()) throw ConfigError(std::string("'") + section + "." + key + "' must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(std::string("'") + section + "." + key + "' must be finite");
    return x;
}

std::vector<double> numbers(const json& doc, const char* section, const char* key) {
    const auto& v = doc.at(section).at(key);
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) {
            throw ConfigError(std::string("'") + section + "." + key + "' must contain numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

std::uint64_t count(const json& v, const std::string& where) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    throw ConfigError("'" + where + "' must be a non-negative integer");
}

std::optional<SimRegime> regime_from_string(const std::string& s) {
    for (auto r : {SimRegime::Mixed, SimRegime::NoFalseAlarm, SimRegime::FalseAlarm,
                   SimRegime::MissedDetection, SimRegime::Detection, SimRegime::ClosedLoop}) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

std::string_view to_string(SimRegime r) noexcept {
    switch (r) {
        case SimRegime::Mixed: return "mixed";
        case SimRegime::NoFalseAlarm: return "no_false_alarm";
        case SimRegime::FalseAlarm: return "false_alarm";
        case SimRegime::MissedDetection: return "missed_detection";
        case SimRegime::Detection: return "detection";
        case SimRegime::ClosedLoop: return "closed_loop";
    }
    return "unknown";
}

std::string_view to_string(SweepVariable v) noexcept {
    switch (v) {
        case SweepVariable::Pd: return "pd";
        case SweepVariable::Ic: return "ic";
        case SweepVariable::Pav: return "pav";
    }
    return "unknown";
}

json default_document() {
    const ChannelParams ch;
    const QueueParams q;
    const SensingTiming t;
    const CostModel c;
    const SolverConfig s;
    const SimSettings sim;
    const auto grids = default_state_grids(1.0);

    json doc;
    doc["seed"] = 1;
    doc["channel"] = {{"gamma_s_db", 10.0}, {"gamma_p_db", 10.0}, {"gamma_sp_db", 0.0},
                      {"gamma_ps_db", 0.0}, {"beta_s", ch.beta_s},  {"beta_p", ch.beta_p},
                      {"n0", ch.n0}};
    doc["queue"] = {{"lambda_s", q.lambda_s},   {"mu_s_max", q.mu_s_max},
                    {"lambda_p", q.lambda_p},   {"mu_p_max", q.mu_p_max},
                    {"lambda_ps", q.lambda_ps}, {"mu_ps_max", q.mu_ps_max}};
    doc["timing"] = {{"tau", t.tau}, {"t_frame", t.t_frame}};
    doc["sensing"] = {{"gamma_se_db", -15.0}, {"f_s", 1e6}};
    doc["power"] = {{"p_av_db", 5.0}, {"mean_g_sp_db", 0.0}, {"reference_power_db", 5.0}};
    doc["model"] = {{"reward_timing", "previous_action"}};
    doc["grids"] = {{"rho_p_levels", tenths(10)},
                    {"rho_s_levels", tenths(10)},
                    {"p_s_fractions", {0.25, 0.5, 0.75, 1.0}},
                    {"p_s_stationary", grids.p_s_stationary},
                    {"pd_levels", tenths(11)},
                    {"ic_levels_db", range(-15.0, 5.0, 1.0)},
                    {"ic_min_db", -15.0},
                    {"ic_max_db", 5.0}};
    doc["costs"] = {{"s_const", c.s_const}, {"c_const", c.c_const}, {"discount", c.discount}};
    doc["solver"] = {{"epsilon", s.epsilon}, {"max_iters", s.max_iters}};
    doc["sim"] = {{"n_slots", sim.n_slots},
                  {"replications", sim.replications},
                  {"pd", sim.pd},
                  {"ic_db", sim.ic_db},
                  {"p_s_db", nullptr},
                  {"pi1", nullptr},
                  {"activity", nullptr},
                  {"regimes", {"mixed", "no_false_alarm", "false_alarm", "missed_detection",
                               "detection"}}};
    doc["sweep"] = {{"variable", "pd"},
                    {"values", tenths(11)},
                    {"fixed", {-15.0, -5.0, 5.0}},
                    {"rho_p", {0.1, 0.9}}};
    return doc;
}

RunConfig parse_config(const json& user) {
    RunConfig cfg;
    json doc;
    try {
        doc = overlay(user, default_document(), "");
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    cfg.resolved = doc;
    try {
        cfg.seed = count(doc.at("seed"), "seed");

        auto& p = cfg.params;
        p.channel.gamma_s = db_to_linear(number(doc, "channel", "gamma_s_db"));
        p.channel.gamma_p = db_to_linear(number(doc, "channel", "gamma_p_db"));
        p.channel.gamma_sp = db_to_linear(number(doc, "channel", "gamma_sp_db"));
        p.channel.gamma_ps = db_to_linear(number(doc, "channel", "gamma_ps_db"));
        p.channel.beta_s = number(doc, "channel", "beta_s");
        p.channel.beta_sp = p.channel.beta_s;
        p.channel.beta_p = number(doc, "channel", "beta_p");
        p.channel.n0 = number(doc, "channel", "n0");

        p.queue.lambda_s = number(doc, "queue", "lambda_s");
        p.queue.mu_s_max = number(doc, "queue", "mu_s_max");
        p.queue.lambda_p = number(doc, "queue", "lambda_p");
        p.queue.mu_p_max = number(doc, "queue", "mu_p_max");
        p.queue.lambda_ps = number(doc, "queue", "lambda_ps");
        p.queue.mu_ps_max = number(doc, "queue", "mu_ps_max");

        p.timing.tau = number(doc, "timing", "tau");
        p.timing.t_frame = number(doc, "timing", "t_frame");
        p.gamma_se = db_to_linear(number(doc, "sensing", "gamma_se_db"));
        p.f_s = number(doc, "sensing", "f_s");
        p.p_av = db_to_linear(number(doc, "power", "p_av_db"));
        p.mean_g_sp = db_to_linear(number(doc, "power", "mean_g_sp_db"));
        p.reference_power = db_to_linear(number(doc, "power", "reference_power_db"));

        const auto timing = doc.at("model").at("reward_timing").get<std::string>();
        if (timing == "previous_action") {
            p.reward_timing = RewardTiming::PreviousAction;
        } else if (timing == "chosen_action") {
            p.reward_timing = RewardTiming::ChosenAction;
        } else {
            throw ConfigError("'model.reward_timing' must be previous_action or chosen_action");
        }

        cfg.grids.rho_p_levels = numbers(doc, "grids", "rho_p_levels");
        cfg.grids.rho_s_levels = numbers(doc, "grids", "rho_s_levels");
        cfg.p_s_fractions = numbers(doc, "grids", "p_s_fractions");
        for (double f : cfg.p_s_fractions) cfg.grids.p_s_levels.push_back(f * p.p_av);
        cfg.grids.p_s_stationary = numbers(doc, "grids", "p_s_stationary");
        cfg.actions.pd_levels = numbers(doc, "grids", "pd_levels");
        cfg.ic_levels_db = numbers(doc, "grids", "ic_levels_db");
        for (double db : cfg.ic_levels_db) cfg.actions.ic_levels.push_back(db_to_linear(db));
        cfg.actions.ic_min = db_to_linear(number(doc, "grids", "ic_min_db"));
        cfg.actions.ic_max = db_to_linear(number(doc, "grids", "ic_max_db"));

        cfg.costs.s_const = number(doc, "costs", "s_const");
        cfg.costs.c_const = number(doc, "costs", "c_const");
        cfg.costs.discount = number(doc, "costs", "discount");
        cfg.solver.epsilon = number(doc, "solver", "epsilon");
        cfg.solver.max_iters = count(doc.at("solver").at("max_iters"), "solver.max_iters");
        cfg.solver.discount = cfg.costs.discount;

        const auto& sim = doc.at("sim");
        cfg.sim.n_slots = count(sim.at("n_slots"), "sim.n_slots");
        cfg.sim.replications = static_cast<unsigned>(count(sim.at("replications"), "sim.replications"));
        cfg.sim.pd = number(doc, "sim", "pd");
        cfg.sim.ic_db = number(doc, "sim", "ic_db");
        if (!sim.at("p_s_db").is_null()) cfg.sim.p_s_db = sim.at("p_s_db").get<double>();
        if (!sim.at("pi1").is_null()) cfg.sim.pi1 = sim.at("pi1").get<double>();
        if (const auto& a = sim.at("activity"); !a.is_null()) {
            ActivityChain chain;
            const auto& lv = a.at("levels");
            if (lv.size() != 2 || !lv[0].is_number() || !lv[1].is_number()) {
                throw ConfigError("'sim.activity.levels' must hold two numbers");
            }
            chain.levels = {lv[0].get<double>(), lv[1].get<double>()};
            chain.p_low_to_high = a.at("p_low_to_high").get<double>();
            chain.p_high_to_low = a.at("p_high_to_low").get<double>();
            cfg.sim.activity = chain;
        }
        for (const auto& r : sim.at("regimes")) {
            const auto regime = r.is_string() ? regime_from_string(r.get<std::string>()) : std::nullopt;
            if (!regime) throw ConfigError("'sim.regimes' has an unknown regime " + r.dump());
            cfg.sim.regimes.push_back(*regime);
        }

        const auto variable = doc.at("sweep").at("variable").get<std::string>();
        if (variable == "pd") {
            cfg.sweep.variable = SweepVariable::Pd;
        } else if (variable == "ic") {
            cfg.sweep.variable = SweepVariable::Ic;
        } else if (variable == "pav") {
            cfg.sweep.variable = SweepVariable::Pav;
        } else {
            throw ConfigError("'sweep.variable' must be pd, ic or pav");
        }
        cfg.sweep.values = numbers(doc, "sweep", "values");
        cfg.sweep.fixed = numbers(doc, "sweep", "fixed");
        cfg.sweep.rho_p = numbers(doc, "sweep", "rho_p");
    } catch (const json::exception& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string RunConfig::canonical() const {
    json doc = resolved;
    doc.erase("seed");
    return doc.dump();
}

std::uint64_t RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string RunConfig::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

RunConfig RunConfig::with_p_av_db(double p_av_db) const {
    json doc = resolved;
    doc["power"]["p_av_db"] = p_av_db;
    return parse_config(doc);
}

}  // namespace ssrelay
