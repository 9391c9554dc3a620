// qje — command-line laboratory for two-point-measurement work statistics on
// a driven spin-1 system: Jarzynski-equality sweeps, adiabaticity factors,
// instantaneous-eigenstate overlap traces, single-shot-readout simulation and
// calibration, readout-channel tables, Monte Carlo error analysis and
// rotating-frame engineering checks.
//
// Exit status: 0 success, 2 configuration error, 3 numerical-guard violation.

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qje/analysis.hpp"
#include "qje/emit.hpp"
#include "qje/evolution.hpp"
#include "qje/protocol.hpp"
#include "qje/pulses.hpp"
#include "qje/readout.hpp"
#include "qje/run_config.hpp"
#include "qje/thermo.hpp"

namespace qje::cli {
namespace {

using nlohmann::json;

uint64_t splitmix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Fixed-size worker pool; any exception is rethrown after all workers join.
void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    const size_t workers = std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

Schedule make_schedule(const RunConfig& cfg, double tau_us) {
    return {cfg.lambda, tau_us * 1e-6, cfg.diag_only ? RampKind::diag_only : RampKind::tent};
}

std::optional<MeasurementChannel> channel_from_config(const RunConfig& cfg) {
    if (cfg.literal_f90) return measurement_channel(jump_model_f90());
    if (cfg.readout_fidelity)
        return measurement_channel(jump_model_from_fidelity(*cfg.readout_fidelity));
    return std::nullopt;
}

const char* label_name(int label) {
    switch (label) {
        case +1: return "+1";
        case 0: return "0";
        default: return "-1";
    }
}

// ── je-run ───────────────────────────────────────────────────────────────────

int cmd_je_run(const RunConfig& cfg, const std::string& out_name) {
    struct Row {
        double beta_abs_lambda, tau_us, lhs, rhs, diff, adiabaticity;
    };
    std::vector<std::pair<double, double>> grid;  // sorted (beta, tau)
    for (double b : cfg.beta_abs_lambda)
        for (double t : cfg.tau_us) grid.emplace_back(b, t);
    std::sort(grid.begin(), grid.end());

    const auto channel = channel_from_config(cfg);
    std::vector<Row> rows(grid.size());
    parallel_for(grid.size(), [&](size_t i) {
        const auto [beta_abs_lambda, tau_us] = grid[i];
        const Schedule s = make_schedule(cfg, tau_us);
        const double beta = beta_abs_lambda / std::abs(s.lambda);
        const double fa = adiabaticity_factor(s, 10001);
        Row row{beta_abs_lambda, tau_us, 0.0, 0.0, 0.0, fa};
        if (channel) {
            row.rhs = free_energy_ratio(h_of_t(0.0, s), h_of_t(s.tau, s), beta);
            row.diff = je_deviation(s, beta, *channel, cfg.n_steps, cfg.renormalize_excluded);
            row.lhs = row.rhs + row.diff;
        } else {
            const JeResult je = je_check(s, beta, cfg.n_steps);
            row.lhs = je.lhs;
            row.rhs = je.rhs;
            row.diff = je.difference;
        }
        rows[i] = row;
    });

    std::string csv = csv_header(cfg, "beta_abs_lambda,tau_us,lhs,rhs,diff,adiabaticity");
    for (const Row& r : rows)
        csv += fmt(r.beta_abs_lambda) + "," + fmt(r.tau_us) + "," + fmt(r.lhs) + "," +
               fmt(r.rhs) + "," + fmt(r.diff) + "," + fmt(r.adiabaticity) + "\n";
    write_file(cfg.output_dir, out_name, csv);
    std::cout << output_path(cfg.output_dir, out_name) << "\n";
    return 0;
}

// ── adiabaticity ─────────────────────────────────────────────────────────────

int cmd_adiabaticity(const RunConfig& cfg, long grid_points) {
    std::vector<double> taus = cfg.tau_us;
    std::sort(taus.begin(), taus.end());
    std::vector<double> fa(taus.size());
    parallel_for(taus.size(), [&](size_t i) {
        fa[i] = adiabaticity_factor(make_schedule(cfg, taus[i]), grid_points);
    });
    std::string csv = csv_header(cfg, "tau_us,adiabaticity,grid_points");
    for (size_t i = 0; i < taus.size(); ++i)
        csv += fmt(taus[i]) + "," + fmt(fa[i]) + "," + std::to_string(grid_points) + "\n";
    write_file(cfg.output_dir, "adiabaticity.csv", csv);
    std::cout << output_path(cfg.output_dir, "adiabaticity.csv") << "\n";
    return 0;
}

// ── overlap ──────────────────────────────────────────────────────────────────

int cmd_overlap(const RunConfig& cfg, std::optional<int> only_label) {
    std::vector<int> labels = only_label ? std::vector<int>{*only_label}
                                         : std::vector<int>{+1, 0, -1};
    for (double tau_us : cfg.tau_us) {
        const Schedule s = make_schedule(cfg, tau_us);
        for (int label : labels) {
            const OverlapTrace trace = overlap_trace(s, label, cfg.n_steps);
            std::string csv = csv_header(cfg, "time_s,p_plus1,p_0,p_minus1");
            for (size_t i = 0; i < trace.times.size(); ++i)
                csv += fmt(trace.times[i]) + "," + fmt(trace.overlaps[i][0]) + "," +
                       fmt(trace.overlaps[i][1]) + "," + fmt(trace.overlaps[i][2]) + "\n";
            const std::string suffix = label == +1 ? "p1" : (label == 0 ? "0" : "m1");
            const std::string name =
                "overlap_tau" + fmt(tau_us) + "us_" + suffix + ".csv";
            write_file(cfg.output_dir, name, csv);
            std::cout << output_path(cfg.output_dir, name) << "\n";
        }
    }
    return 0;
}

// ── traces ───────────────────────────────────────────────────────────────────

int cmd_traces(const RunConfig& cfg) {
    const TraceResult trace = simulate_trace(cfg.trace, cfg.n_bundles, cfg.readout_target,
                                             cfg.initial_state, cfg.seed);
    std::string csv = csv_header(cfg, "bundle_index,photon_count,true_state");
    for (size_t i = 0; i < trace.photon_counts.size(); ++i)
        csv += std::to_string(i) + "," + std::to_string(trace.photon_counts[i]) + "," +
               std::to_string(trace.states[i]) + "\n";
    write_file(cfg.output_dir, "trace.csv", csv);

    // Histogram at the cascaded readout size (hist_bundle consecutive bundles).
    std::map<long, long> hist;
    const long points = static_cast<long>(trace.photon_counts.size()) / cfg.hist_bundle;
    for (long i = 0; i < points; ++i) {
        long sum = 0;
        for (int j = 0; j < cfg.hist_bundle; ++j)
            sum += trace.photon_counts[static_cast<size_t>(i * cfg.hist_bundle + j)];
        ++hist[sum];
    }
    std::string hcsv = csv_header(cfg, "photon_count,frequency");
    for (const auto& [count, freq] : hist)
        hcsv += std::to_string(count) + "," + std::to_string(freq) + "\n";
    write_file(cfg.output_dir, "histogram.csv", hcsv);

    std::cout << output_path(cfg.output_dir, "trace.csv") << "\n"
              << output_path(cfg.output_dir, "histogram.csv") << "\n";
    return 0;
}

// ── readout-calibrate ────────────────────────────────────────────────────────

int cmd_readout_calibrate(const RunConfig& cfg) {
    // Two independent traces starting on and off the readout target, so both
    // platforms are present even when jumps are rare (or disabled).
    const TraceResult on_target = simulate_trace(cfg.trace, cfg.n_bundles, cfg.readout_target,
                                                 cfg.readout_target, cfg.seed);
    const TraceResult off_target = simulate_trace(cfg.trace, cfg.n_bundles, cfg.readout_target,
                                                  0, splitmix(cfg.seed));
    std::vector<long> counts = on_target.photon_counts;
    counts.insert(counts.end(), off_target.photon_counts.begin(),
                  off_target.photon_counts.end());

    json calibration = json::array();
    double best_f = -1.0;
    json best;
    for (int b = 1; b <= cfg.bundle_max; ++b) {
        const ThresholdResult r = optimize_threshold(counts, b);
        json row{{"b", b}, {"threshold", r.threshold}, {"fidelity", r.fidelity}};
        calibration.push_back(row);
        if (r.fidelity > best_f) {
            best_f = r.fidelity;
            best = row;
        }
    }

    json out{{"seed", cfg.seed},
             {"config", json::parse(config_echo(cfg))},
             {"calibration", calibration},
             {"best", best}};
    write_file(cfg.output_dir, "calibration.json", out.dump(2) + "\n");
    std::cout << output_path(cfg.output_dir, "calibration.json") << "\n";
    return 0;
}

// ── channel ──────────────────────────────────────────────────────────────────

int cmd_channel(const RunConfig& cfg, double fidelity) {
    const JumpModel jm =
        cfg.literal_f90 ? jump_model_f90() : jump_model_from_fidelity(fidelity);
    const MeasurementChannel ch = measurement_channel(jm);

    json table = json::array();
    const int labels[3] = {+1, 0, -1};
    for (int pre = 0; pre < 3; ++pre)
        for (int outcome = 0; outcome < 3; ++outcome)
            for (int post = 0; post < 3; ++post)
                table.push_back({{"pre", label_name(labels[pre])},
                                 {"outcome", label_name(labels[outcome])},
                                 {"post", label_name(labels[post])},
                                 {"probability",
                                  ch.table[static_cast<size_t>(pre)]
                                          [static_cast<size_t>(outcome)]
                                          [static_cast<size_t>(post)]}});
    json out{{"jump_model",
              {{"p_plus", jm.p_plus},
               {"p_zero", jm.p_zero},
               {"p_minus", jm.p_minus},
               {"p_zero_up", jm.p_zero_up},
               {"p_zero_down", jm.p_zero_down}}},
             {"excluded_mass",
              {{"+1", ch.excluded_mass[0]}, {"0", ch.excluded_mass[1]},
               {"-1", ch.excluded_mass[2]}}},
             {"table", table}};
    write_file(cfg.output_dir, "channel.json", out.dump(2) + "\n");
    std::cout << output_path(cfg.output_dir, "channel.json") << "\n";
    return 0;
}

// ── mc ───────────────────────────────────────────────────────────────────────

JointProbabilities parse_mc_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open mc input: " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("mc input " + path + ": " + e.what());
    }

    auto read_matrix = [&](const char* field) {
        const auto& v = j.at(field);
        if (!v.is_array() || v.size() != 3)
            throw ConfigError(std::string("mc input: field '") + field + "' must be a 3x3 array");
        std::array<std::array<double, 3>, 3> m{};
        for (int r = 0; r < 3; ++r) {
            const auto& row = v[static_cast<size_t>(r)];
            if (!row.is_array() || row.size() != 3)
                throw ConfigError(std::string("mc input: field '") + field +
                                  "' must be a 3x3 array");
            for (int c = 0; c < 3; ++c)
                m[static_cast<size_t>(r)][static_cast<size_t>(c)] =
                    row[static_cast<size_t>(c)].get<double>();
        }
        return m;
    };

    try {
        if (j.contains("counts")) {
            JointCounts counts;
            const auto m = read_matrix("counts");
            long total = 0;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    const auto v = static_cast<long>(
                        m[static_cast<size_t>(r)][static_cast<size_t>(c)]);
                    counts.counts[static_cast<size_t>(r)][static_cast<size_t>(c)] = v;
                    total += v;
                }
            counts.total = j.contains("total") ? j["total"].get<long>() : total;
            return joint_from_counts(counts);
        }
        JointProbabilities jp;
        jp.p = read_matrix("probabilities");
        jp.sigma = read_matrix("sigmas");
        return jp;
    } catch (const json::exception& e) {
        throw ConfigError("mc input " + path + ": " + e.what());
    }
}

int cmd_mc(const RunConfig& cfg, const std::string& input, const std::string& out_name) {
    const JointProbabilities jp = parse_mc_input(input);
    const Schedule s = make_schedule(cfg, cfg.tau_us.front());
    const McSummary summary =
        mc_pipeline(jp, h_of_t(0.0, s), h_of_t(s.tau, s), cfg.mc_runs, cfg.seed);

    json out{{"beta_exp_mean", summary.beta_mean}, {"beta_exp_std", summary.beta_std},
             {"lhs_mean", summary.lhs_mean},       {"lhs_std", summary.lhs_std},
             {"rhs_mean", summary.rhs_mean},       {"rhs_std", summary.rhs_std},
             {"K", summary.runs},                  {"seed", summary.seed}};
    const std::string text = out.dump(2) + "\n";
    std::cout << text;
    if (!out_name.empty()) write_file(cfg.output_dir, out_name, text);
    return 0;
}

// ── rwa-check ────────────────────────────────────────────────────────────────

int cmd_rwa_check(const RunConfig& cfg) {
    struct Row {
        double ratio, tau_us, fidelity;
    };
    std::vector<std::pair<double, double>> grid;
    for (double r : cfg.carrier_ratios)
        for (double t : cfg.tau_us) grid.emplace_back(r, t);
    std::sort(grid.begin(), grid.end());

    std::vector<Row> rows(grid.size());
    parallel_for(grid.size(), [&](size_t i) {
        const auto [ratio, tau_us] = grid[i];
        LabFrameParams params;
        params.schedule = make_schedule(cfg, tau_us);
        params.carrier_scale = carrier_scale_for_ratio(params, ratio);
        const long steps = cfg.rwa_steps > 0 ? cfg.rwa_steps : 4 * rwa_min_steps(params);
        rows[i] = {ratio, tau_us, rwa_fidelity(params, steps)};
    });

    std::string csv = csv_header(cfg, "carrier_over_lambda,tau_us,fidelity");
    for (const Row& r : rows)
        csv += fmt(r.ratio) + "," + fmt(r.tau_us) + "," + fmt(r.fidelity) + "\n";
    write_file(cfg.output_dir, "rwa_check.csv", csv);
    std::cout << output_path(cfg.output_dir, "rwa_check.csv") << "\n";
    return 0;
}

// ── option plumbing ──────────────────────────────────────────────────────────

struct Overrides {
    std::string config_file;
    std::string preset;
    std::vector<double> beta_abs_lambda;
    std::vector<double> tau_us;
    std::optional<long> n_steps;
    std::optional<uint64_t> seed;
    std::optional<double> readout_fidelity;
    bool literal_f90 = false;
    bool raw_excluded = false;
    std::string output_dir;
    std::optional<long> n_bundles;
    std::optional<int> bundle_max;
    std::optional<long> mc_runs;
    std::vector<double> carrier_ratios;
    bool diag_only = false;
};

RunConfig assemble_config(const Overrides& ov) {
    // preset precedence: --preset flag > config-file "preset" > default
    std::string preset = "je-full";
    if (!ov.config_file.empty())
        if (const auto named = preset_from_file(ov.config_file)) preset = *named;
    if (!ov.preset.empty()) preset = ov.preset;

    RunConfig cfg = preset_config(preset);
    // QJE_SEED replaces the built-in default seed; config files and --seed
    // still take precedence.
    if (const char* env = std::getenv("QJE_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("QJE_SEED is not an unsigned integer");
        }
    }
    if (!ov.config_file.empty()) apply_json_file(cfg, ov.config_file);

    if (!ov.beta_abs_lambda.empty()) cfg.beta_abs_lambda = ov.beta_abs_lambda;
    if (!ov.tau_us.empty()) cfg.tau_us = ov.tau_us;
    if (ov.n_steps) cfg.n_steps = *ov.n_steps;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.readout_fidelity) cfg.readout_fidelity = ov.readout_fidelity;
    if (ov.literal_f90) cfg.literal_f90 = true;
    if (ov.raw_excluded) cfg.renormalize_excluded = false;
    if (!ov.output_dir.empty()) cfg.output_dir = ov.output_dir;
    if (ov.n_bundles) cfg.n_bundles = *ov.n_bundles;
    if (ov.bundle_max) cfg.bundle_max = *ov.bundle_max;
    if (ov.mc_runs) cfg.mc_runs = *ov.mc_runs;
    if (!ov.carrier_ratios.empty()) cfg.carrier_ratios = ov.carrier_ratios;
    if (ov.diag_only) cfg.diag_only = true;

    for (double t : cfg.tau_us)
        if (!(t > 0.0)) throw ConfigError("tau_us values must be positive");
    return cfg;
}

int run(int argc, char** argv) {
    CLI::App app{"Numerical laboratory for Jarzynski-equality work statistics on a driven spin-1 system"};
    app.require_subcommand(1);

    Overrides ov;
    app.add_option("--config", ov.config_file, "JSON config file");
    app.add_option("--preset", ov.preset, "named preset (je-full, je-quick, readout-typical, readout-nojump, rwa-scan)");
    app.add_option("--beta-abs-lambda", ov.beta_abs_lambda, "effective temperature knob beta*|lambda|");
    app.add_option("--tau-us", ov.tau_us, "switching durations in microseconds");
    long n_steps_flag = 0;
    auto* n_steps_opt = app.add_option("--n-steps", n_steps_flag, "propagation steps");
    uint64_t seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "RNG seed (QJE_SEED overrides the default)");
    double fid_flag = 0.0;
    auto* fid_opt = app.add_option("--readout-fidelity", fid_flag, "apply the readout channel at this fidelity");
    app.add_flag("--literal-f90", ov.literal_f90, "use the literal {0.81, 0.095} jump-probability set");
    app.add_flag("--raw-excluded", ov.raw_excluded, "keep excluded-event mass (no renormalization)");
    app.add_option("--output-dir", ov.output_dir, "output directory (default: out)");
    long bundles_flag = 0;
    auto* bundles_opt = app.add_option("--n-bundles", bundles_flag, "trace length in 100-repeat bundles");
    int bmax_flag = 0;
    auto* bmax_opt = app.add_option("--bundle-max", bmax_flag, "largest bundle size to calibrate");
    long runs_flag = 0;
    auto* runs_opt = app.add_option("--mc-runs,-K", runs_flag, "Monte Carlo resampling runs");
    app.add_option("--carrier-ratios", ov.carrier_ratios, "min-carrier / |lambda| ratios to scan");
    app.add_flag("--diag-only", ov.diag_only, "switch off the transverse ramp (b == 0)");

    auto* je_run = app.add_subcommand("je-run", "Jarzynski sweep over (beta, tau)");
    std::string je_out = "je_run.csv";
    je_run->add_option("--out", je_out, "output CSV name");

    auto* adiab = app.add_subcommand("adiabaticity", "adiabaticity factor per tau");
    long grid_points = 10001;
    adiab->add_option("--grid-points", grid_points, "initial minimization grid size");

    auto* overlap = app.add_subcommand("overlap", "instantaneous-eigenstate overlap traces");
    int overlap_label = 2;  // sentinel
    auto* overlap_opt = overlap->add_option("--initial", overlap_label, "initial level (+1, 0, -1); default all");

    app.add_subcommand("traces", "simulate a photon-count readout trace");
    app.add_subcommand("readout-calibrate", "threshold/fidelity calibration per bundle size");

    auto* channel = app.add_subcommand("channel", "emit the cascaded-readout channel table");
    double channel_fidelity = 0.98;
    channel->add_option("--fidelity", channel_fidelity, "single-shot readout fidelity");

    auto* mc = app.add_subcommand("mc", "Monte Carlo resampling of a measured joint distribution");
    std::string mc_input;
    mc->add_option("--input", mc_input, "joint-probability JSON")->required();
    std::string mc_out;
    mc->add_option("--out", mc_out, "also write the summary JSON here");

    app.add_subcommand("rwa-check", "engineered-propagator fidelity vs carrier ratio");

    // global options may follow the subcommand name
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (n_steps_opt->count()) ov.n_steps = n_steps_flag;
        if (seed_opt->count()) ov.seed = seed_flag;
        if (fid_opt->count()) ov.readout_fidelity = fid_flag;
        if (bundles_opt->count()) ov.n_bundles = bundles_flag;
        if (bmax_opt->count()) ov.bundle_max = bmax_flag;
        if (runs_opt->count()) ov.mc_runs = runs_flag;
        const RunConfig cfg = assemble_config(ov);

        if (je_run->parsed()) return cmd_je_run(cfg, je_out);
        if (adiab->parsed()) return cmd_adiabaticity(cfg, grid_points);
        if (overlap->parsed())
            return cmd_overlap(cfg, overlap_opt->count() ? std::optional<int>(overlap_label)
                                                         : std::nullopt);
        if (app.get_subcommand("traces")->parsed()) return cmd_traces(cfg);
        if (app.get_subcommand("readout-calibrate")->parsed()) return cmd_readout_calibrate(cfg);
        if (channel->parsed()) return cmd_channel(cfg, channel_fidelity);
        if (mc->parsed()) return cmd_mc(cfg, mc_input, mc_out);
        if (app.get_subcommand("rwa-check")->parsed()) return cmd_rwa_check(cfg);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical guard: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace
}  // namespace qje::cli

int main(int argc, char** argv) { return qje::cli::run(argc, argv); }
