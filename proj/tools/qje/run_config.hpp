// Run configuration shared by all CLI subcommands: presets, JSON config
// files, environment seed override, flag overrides.  Precedence, lowest to
// highest: built-in preset < config file < QJE_SEED (seed only) < flags.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qje/protocol.hpp"
#include "qje/readout.hpp"

namespace qje::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string preset = "je-full";
    std::vector<double> beta_abs_lambda{0.0, 0.5, 0.7};
    std::vector<double> tau_us{5.0, 50.0, 125.0, 200.0, 2500.0};
    long n_steps = 20000;
    uint64_t seed = 1;
    double lambda = kLambdaDefault;  // rad/s

    std::optional<double> readout_fidelity;  // when set, je-run applies the channel
    bool literal_f90 = false;                // use the {0.81, 0.095} probability set
    bool renormalize_excluded = true;
    std::string output_dir = "out";

    // trace simulation / calibration
    TraceModel trace;
    long n_bundles = 30000;
    int bundle_max = 15;
    int hist_bundle = 9;
    int readout_target = +1;
    int initial_state = +1;

    // analysis
    long mc_runs = 10000;

    // rotating-frame check
    std::vector<double> carrier_ratios{100.0, 50.0, 25.0};
    bool diag_only = false;
    long rwa_steps = 0;  // 0: choose 4x the per-carrier minimum
};

RunConfig preset_config(const std::string& name);

// Preset named inside a config file, if any.
std::optional<std::string> preset_from_file(const std::string& path);

// Merge a JSON config document into cfg; the "preset" key is ignored here
// (resolve it first via preset_from_file) and unknown fields are rejected.
void apply_json_file(RunConfig& cfg, const std::string& path);

// Compact single-line JSON echo of the effective configuration.
std::string config_echo(const RunConfig& cfg);

}  // namespace qje::cli
