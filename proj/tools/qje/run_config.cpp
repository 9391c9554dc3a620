#include "qje/run_config.hpp"

#include <fstream>

#include <json.hpp>

namespace qje::cli {

using nlohmann::json;

RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.preset = name;
    if (name == "je-full") {
        // full sweep defaults are the struct defaults
    } else if (name == "je-quick") {
        cfg.beta_abs_lambda = {0.5};
        cfg.tau_us = {50.0, 200.0};
        cfg.n_steps = 4000;
    } else if (name == "readout-typical") {
        // TraceModel defaults
    } else if (name == "readout-nojump") {
        cfg.trace.survival_per_unit = {1.0, 1.0, 1.0};
        cfg.n_bundles = 4000;
    } else if (name == "rwa-scan") {
        cfg.tau_us = {200.0};
    } else {
        throw ConfigError("unknown preset: " + name);
    }
    return cfg;
}

namespace {

std::vector<double> number_or_array(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number()) throw ConfigError("config field '" + key + "': expected numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }
    throw ConfigError("config field '" + key + "': expected a number or an array");
}

void apply_trace(TraceModel& trace, const json& j) {
    for (const auto& [key, value] : j.items()) {
        if (key == "rate_bright") trace.rate_bright = value.get<double>();
        else if (key == "rate_dark") trace.rate_dark = value.get<double>();
        else if (key == "unit_duration") trace.unit_duration = value.get<double>();
        else if (key == "repeats_per_bundle") trace.repeats_per_bundle = value.get<int>();
        else if (key == "survival_per_unit") {
            const auto v = number_or_array(value, key);
            if (v.size() != 3) throw ConfigError("trace.survival_per_unit: expected 3 values");
            trace.survival_per_unit = {v[0], v[1], v[2]};
        } else {
            throw ConfigError("unknown config field: trace." + key);
        }
    }
}

}  // namespace

namespace {

json load_config_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config file " + path + ": expected a JSON object");
    return j;
}

}  // namespace

std::optional<std::string> preset_from_file(const std::string& path) {
    const json j = load_config_json(path);
    if (!j.contains("preset")) return std::nullopt;
    try {
        return j["preset"].get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }
}

void apply_json_file(RunConfig& cfg, const std::string& path) {
    const json j = load_config_json(path);
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "preset") continue;
            else if (key == "beta_abs_lambda") cfg.beta_abs_lambda = number_or_array(value, key);
            else if (key == "tau_us") cfg.tau_us = number_or_array(value, key);
            else if (key == "n_steps") cfg.n_steps = value.get<long>();
            else if (key == "seed") cfg.seed = value.get<uint64_t>();
            else if (key == "lambda") cfg.lambda = value.get<double>();
            else if (key == "readout_fidelity") cfg.readout_fidelity = value.get<double>();
            else if (key == "literal_f90") cfg.literal_f90 = value.get<bool>();
            else if (key == "renormalize_excluded") cfg.renormalize_excluded = value.get<bool>();
            else if (key == "output_dir") cfg.output_dir = value.get<std::string>();
            else if (key == "trace") apply_trace(cfg.trace, value);
            else if (key == "n_bundles") cfg.n_bundles = value.get<long>();
            else if (key == "bundle_max") cfg.bundle_max = value.get<int>();
            else if (key == "hist_bundle") cfg.hist_bundle = value.get<int>();
            else if (key == "readout_target") cfg.readout_target = value.get<int>();
            else if (key == "initial_state") cfg.initial_state = value.get<int>();
            else if (key == "mc_runs") cfg.mc_runs = value.get<long>();
            else if (key == "carrier_ratios") cfg.carrier_ratios = number_or_array(value, key);
            else if (key == "diag_only") cfg.diag_only = value.get<bool>();
            else if (key == "rwa_steps") cfg.rwa_steps = value.get<long>();
            else throw ConfigError("unknown config field: " + key);
        }
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path + ": " + e.what());
    }

    for (double t : cfg.tau_us)
        if (!(t > 0.0)) throw ConfigError("tau_us values must be positive");
}

std::string config_echo(const RunConfig& cfg) {
    json j{
        {"preset", cfg.preset},
        {"beta_abs_lambda", cfg.beta_abs_lambda},
        {"tau_us", cfg.tau_us},
        {"n_steps", cfg.n_steps},
        {"seed", cfg.seed},
        {"lambda", cfg.lambda},
        {"renormalize_excluded", cfg.renormalize_excluded},
        {"output_dir", cfg.output_dir},
        {"n_bundles", cfg.n_bundles},
        {"bundle_max", cfg.bundle_max},
        {"hist_bundle", cfg.hist_bundle},
        {"readout_target", cfg.readout_target},
        {"initial_state", cfg.initial_state},
        {"mc_runs", cfg.mc_runs},
        {"carrier_ratios", cfg.carrier_ratios},
        {"diag_only", cfg.diag_only},
        {"rwa_steps", cfg.rwa_steps},
        {"trace",
         {{"rate_bright", cfg.trace.rate_bright},
          {"rate_dark", cfg.trace.rate_dark},
          {"unit_duration", cfg.trace.unit_duration},
          {"repeats_per_bundle", cfg.trace.repeats_per_bundle},
          {"survival_per_unit", cfg.trace.survival_per_unit}}},
    };
    if (cfg.readout_fidelity) j["readout_fidelity"] = *cfg.readout_fidelity;
    if (cfg.literal_f90) j["literal_f90"] = true;
    return j.dump();
}

}  // namespace qje::cli
