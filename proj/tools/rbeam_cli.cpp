// SPDX-License-Identifier: Apache-2.0
//
// rbeam - resonant beam positioning simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Batch front end: parses an experiment config, runs the described
// resonance / spectrum / RMSE / amplifier-curve experiment and writes CSV
// and JSON artifacts for plotting and regression diffs.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "rbeam/rbeam.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum ExitCode : int {
    kOk = 0,
    kOtherError = 1,
    kConfigError = 2,
    kIoError = 3,
    kNumericError = 4,
};

struct RunArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int workers = 0;
    bool dry_run = false;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::ios_base::failure("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::ofstream open_output(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::ios_base::failure("cannot write '" + path.string() + "'");
    return out;
}

std::string output_stem(const rbeam::ExperimentConfig& cfg, const std::string& config_path)
{
    if (!cfg.label.empty())
        return cfg.label;
    return fs::path(config_path).stem().string();
}

std::string describe_row(const rbeam::ExperimentConfig& cfg, size_t index)
{
    if (!cfg.has_sweep)
        return "single";
    std::ostringstream os;
    for (size_t i = 0; i < cfg.sweep_parameters.size(); ++i) {
        if (i)
            os << ' ';
        os << cfg.sweep_parameters[i] << '=' << cfg.sweep_rows[index][i];
    }
    return os.str();
}

std::vector<std::string> sweep_cells(const rbeam::ExperimentConfig& cfg, size_t index)
{
    if (!cfg.has_sweep)
        return {};
    return cfg.sweep_rows[index];
}

json scenario_json(const rbeam::Scenario& s)
{
    return json{{"mode", s.mode == rbeam::PositioningMode::RBPS ? "rbps" : "aps"},
                {"distance_m", s.distance},
                {"theta_deg", rbeam::rad2deg(s.true_direction.theta)},
                {"phi_deg", rbeam::rad2deg(s.true_direction.phi)},
                {"bs_side", s.bs_side},
                {"pt_side", s.pt_side},
                {"noise_power_w", s.noise_power},
                {"seed_power_w", s.seed_power},
                {"feedback_ratio", s.divider.feedback_ratio},
                {"trials", s.trials},
                {"snapshots", s.snapshot_count},
                {"master_seed", s.rng_master_seed}};
}

int run_resonance_kind(const rbeam::ExperimentConfig& cfg,
                       const std::vector<rbeam::Scenario>& scenarios,
                       const fs::path& out_dir, const std::string& stem, json& aggregate)
{
    std::ofstream summary = open_output(out_dir / (stem + "_summary.csv"));
    rbeam::CsvWriter sw(summary);
    std::vector<std::string> header = {"index"};
    for (const auto& p : cfg.sweep_parameters)
        header.push_back(p);
    for (const char* c : {"eta", "eta_pt", "pt_out_power_w", "bs_out_power_w",
                          "iterations", "converged", "dark", "sustain_first_iteration"})
        header.push_back(c);
    sw.header(header);

    for (size_t i = 0; i < scenarios.size(); ++i) {
        const rbeam::Scenario& s = scenarios[i];
        rbeam::ResonanceOptions opt;
        opt.seed_power_w = s.seed_power;
        opt.max_iters = s.max_iterations;
        opt.tol = s.tolerance;

        std::ofstream trace_file;
        if (cfg.write_resonance_trace) {
            trace_file = open_output(out_dir / (stem + "_trace" + std::to_string(i) + ".csv"));
            trace_file << "iteration,eta,eta_pt,pt_in_power_w,pt_out_power_w,"
                          "bs_out_power_w,bs_in_power_w,sustain\n";
            opt.sink = [&trace_file](const rbeam::IterationTrace& t) {
                trace_file << t.iteration << ',' << rbeam::format_float(t.efficiency)
                           << ',' << rbeam::format_float(t.reverse_efficiency) << ','
                           << rbeam::format_float(t.pt_in_power_w) << ','
                           << rbeam::format_float(t.pt_out_power_w) << ','
                           << rbeam::format_float(t.bs_out_power_w) << ','
                           << rbeam::format_float(t.bs_in_power_w) << ','
                           << (t.sustain_condition ? 1 : 0) << '\n';
            };
        }

        const rbeam::ResonanceResult res =
            rbeam::run_resonance(s.bs_array(), s.pt_array(), s.amplifier, s.divider,
                                 s.pattern, opt, s.wavelength);
        // A dark loop carries no sustained power; report zero efficiency.
        const double eta = res.dark ? 0.0 : res.efficiency_history.back();
        const double eta_pt = res.dark ? 0.0 : res.reverse_efficiency_history.back();
        const double pt_power = res.pt_out_power_history.back();
        const double bs_power = res.bs_out_power_history.back();

        std::vector<std::string> row = {std::to_string(i)};
        for (const auto& cell : sweep_cells(cfg, i))
            row.push_back(cell);
        row.push_back(rbeam::format_float(eta));
        row.push_back(rbeam::format_float(eta_pt));
        row.push_back(rbeam::format_float(pt_power));
        row.push_back(rbeam::format_float(bs_power));
        row.push_back(std::to_string(res.iterations_run));
        row.push_back(res.converged ? "1" : "0");
        row.push_back(res.dark ? "1" : "0");
        row.push_back(std::to_string(res.sustain_first_iteration));
        sw.row(row);

        aggregate["scenarios"].push_back(
            json{{"index", i},
                 {"case", describe_row(cfg, i)},
                 {"scenario", scenario_json(s)},
                 {"eta", eta},
                 {"eta_pt", eta_pt},
                 {"pt_out_power_w", pt_power},
                 {"bs_out_power_w", bs_power},
                 {"iterations", res.iterations_run},
                 {"converged", res.converged},
                 {"dark", res.dark}});

        std::cout << "[" << i << "] resonance " << describe_row(cfg, i)
                  << ": eta=" << rbeam::format_float(eta)
                  << " pt_out=" << rbeam::format_float(pt_power) << " W"
                  << " iters=" << res.iterations_run
                  << (res.dark ? " dark" : (res.converged ? " converged" : " not-converged"))
                  << "\n";
    }
    return kOk;
}

int run_spectrum_kind(const rbeam::ExperimentConfig& cfg,
                      const std::vector<rbeam::Scenario>& scenarios,
                      const fs::path& out_dir, const std::string& stem, json& aggregate,
                      int workers)
{
    std::ofstream summary = open_output(out_dir / (stem + "_summary.csv"));
    rbeam::CsvWriter sw(summary);
    std::vector<std::string> header = {"index"};
    for (const auto& p : cfg.sweep_parameters)
        header.push_back(p);
    for (const char* c : {"theta_hat_deg", "phi_hat_deg", "peak_db", "peak_to_median_db",
                          "low_confidence"})
        header.push_back(c);
    sw.header(header);

    for (size_t i = 0; i < scenarios.size(); ++i) {
        rbeam::Scenario s = scenarios[i];
        s.search.workers = workers;
        const rbeam::FieldState field = rbeam::scenario_signal_field(s);
        const rbeam::SnapshotBatch batch = rbeam::synthesize_snapshots(
            field, s.noise_power, s.snapshot_count,
            rbeam::derive_seed(s.rng_master_seed, 0));
        const rbeam::DoaEstimate est =
            rbeam::estimate_doa(batch, s.bs_array(), s.wavelength, s.search);

        if (cfg.write_spectrum_grid) {
            const rbeam::SpectrumEvaluator eval(
                rbeam::principal_signal_basis(batch, 1), s.bs_array(), s.wavelength);
            rbeam::GridSpec grid = s.search;
            grid.workers = workers;
            const rbeam::SpectrumGrid g = rbeam::spectrum_grid(eval, grid);
            std::ofstream gf =
                open_output(out_dir / (stem + "_spectrum" + std::to_string(i) + ".csv"));
            gf << "theta_deg,phi_deg,spectrum_db\n";
            for (size_t ti = 0; ti < g.theta_deg.size(); ++ti)
                for (size_t pi = 0; pi < g.phi_deg.size(); ++pi)
                    gf << rbeam::format_float(g.theta_deg[ti]) << ','
                       << rbeam::format_float(g.phi_deg[pi]) << ','
                       << rbeam::format_float(
                              10.0 * std::log10(g.value(static_cast<int>(ti),
                                                        static_cast<int>(pi))))
                       << '\n';
        }

        const double peak_db = 10.0 * std::log10(est.peak_value);
        const double ratio_db = 10.0 * std::log10(est.peak_to_median);
        std::vector<std::string> row = {std::to_string(i)};
        for (const auto& cell : sweep_cells(cfg, i))
            row.push_back(cell);
        row.push_back(rbeam::format_float(rbeam::rad2deg(est.theta_hat)));
        row.push_back(rbeam::format_float(rbeam::rad2deg(est.phi_hat)));
        row.push_back(rbeam::format_float(peak_db));
        row.push_back(rbeam::format_float(ratio_db));
        row.push_back(est.low_confidence ? "1" : "0");
        sw.row(row);

        aggregate["scenarios"].push_back(json{{"index", i},
                                              {"case", describe_row(cfg, i)},
                                              {"scenario", scenario_json(s)},
                                              {"theta_hat_deg", rbeam::rad2deg(est.theta_hat)},
                                              {"phi_hat_deg", rbeam::rad2deg(est.phi_hat)},
                                              {"peak_db", peak_db},
                                              {"peak_to_median_db", ratio_db},
                                              {"low_confidence", est.low_confidence}});

        std::cout << "[" << i << "] spectrum " << describe_row(cfg, i) << ": peak at ("
                  << rbeam::format_float(rbeam::rad2deg(est.theta_hat)) << ", "
                  << rbeam::format_float(rbeam::rad2deg(est.phi_hat))
                  << ") deg, peak/median=" << rbeam::format_float(ratio_db) << " dB"
                  << (est.low_confidence ? " low-confidence" : "") << "\n";
    }
    return kOk;
}

int run_rmse_kind(const rbeam::ExperimentConfig& cfg,
                  const std::vector<rbeam::Scenario>& scenarios, const fs::path& out_dir,
                  const std::string& stem, json& aggregate, int workers)
{
    std::ofstream summary = open_output(out_dir / (stem + "_summary.csv"));
    rbeam::CsvWriter sw(summary);
    std::vector<std::string> header = {"index"};
    for (const auto& p : cfg.sweep_parameters)
        header.push_back(p);
    for (const char* c : {"rmse_m", "mean_theta_err_deg", "mean_phi_err_deg",
                          "low_confidence_count"})
        header.push_back(c);
    sw.header(header);

    const std::vector<rbeam::SweepEntry> results = rbeam::sweep(scenarios, workers);

    bool any_failed = false;
    for (size_t i = 0; i < results.size(); ++i) {
        const rbeam::SweepEntry& entry = results[i];
        if (!entry.ok) {
            any_failed = true;
            std::cout << "[" << i << "] rmse " << describe_row(cfg, i)
                      << ": ERROR " << entry.error << "\n";
            aggregate["scenarios"].push_back(
                json{{"index", i}, {"case", describe_row(cfg, i)}, {"error", entry.error}});
            continue;
        }
        const rbeam::RmseReport& rep = entry.report;

        if (cfg.write_trial_csv) {
            std::ofstream tf =
                open_output(out_dir / (stem + "_trials" + std::to_string(i) + ".csv"));
            tf << "trial,theta_hat_deg,phi_hat_deg,dx_m,dy_m,dz_m,err_m,low_confidence\n";
            for (size_t t = 0; t < rep.trials.size(); ++t) {
                const rbeam::TrialRecord& rec = rep.trials[t];
                tf << t << ',' << rbeam::format_float(rbeam::rad2deg(rec.estimate.theta_hat))
                   << ',' << rbeam::format_float(rbeam::rad2deg(rec.estimate.phi_hat)) << ','
                   << rbeam::format_float(rec.error.dx) << ','
                   << rbeam::format_float(rec.error.dy) << ','
                   << rbeam::format_float(rec.error.dz) << ','
                   << rbeam::format_float(rec.error.norm()) << ','
                   << (rec.estimate.low_confidence ? 1 : 0) << '\n';
            }
        }

        std::vector<std::string> row = {std::to_string(i)};
        for (const auto& cell : sweep_cells(cfg, i))
            row.push_back(cell);
        row.push_back(rbeam::format_float(rep.rmse));
        row.push_back(rbeam::format_float(rbeam::rad2deg(rep.mean_theta_err)));
        row.push_back(rbeam::format_float(rbeam::rad2deg(rep.mean_phi_err)));
        row.push_back(std::to_string(rep.low_confidence_count));
        sw.row(row);

        aggregate["scenarios"].push_back(
            json{{"index", i},
                 {"case", describe_row(cfg, i)},
                 {"scenario", scenario_json(rep.config_echo)},
                 {"rmse_m", rep.rmse},
                 {"mean_theta_err_deg", rbeam::rad2deg(rep.mean_theta_err)},
                 {"mean_phi_err_deg", rbeam::rad2deg(rep.mean_phi_err)},
                 {"low_confidence_count", rep.low_confidence_count}});

        std::cout << "[" << i << "] rmse " << describe_row(cfg, i)
                  << ": rmse=" << rbeam::format_float(rep.rmse) << " m (trials="
                  << rep.trials.size() << ", low_conf=" << rep.low_confidence_count
                  << ")\n";
    }
    return any_failed ? kNumericError : kOk;
}

int run_amp_curve_kind(const rbeam::ExperimentConfig& cfg, const fs::path& out_dir,
                       const std::string& stem, json& aggregate)
{
    rbeam::AmplifierModel amp;
    amp.small_signal_gain_db = cfg.amp_gain_db;
    amp.max_output_w = cfg.amp_max_output_w;
    amp.knee_sharpness = cfg.amp_knee;

    std::ofstream out = open_output(out_dir / (stem + "_amp_curve.csv"));
    out << "input_w,output_w,gain_linear\n";
    const double lmin = std::log10(cfg.amp_input_min_w);
    const double lmax = std::log10(cfg.amp_input_max_w);
    for (int i = 0; i < cfg.amp_points; ++i) {
        const double p_in =
            std::pow(10.0, lmin + (lmax - lmin) * i / (cfg.amp_points - 1));
        const double p_out = amp.output_power(p_in);
        out << rbeam::format_float(p_in) << ',' << rbeam::format_float(p_out) << ','
            << rbeam::format_float(p_out / p_in) << '\n';
    }
    aggregate["scenarios"].push_back(json{{"points", cfg.amp_points},
                                          {"gain_db", cfg.amp_gain_db},
                                          {"max_output_w", cfg.amp_max_output_w}});
    std::cout << "[0] amp_curve: " << cfg.amp_points << " points, gain "
              << cfg.amp_gain_db << " dB, cap " << cfg.amp_max_output_w << " W\n";
    return kOk;
}

int run_command(const RunArgs& args)
{
    rbeam::ExperimentConfig cfg;
    try {
        cfg = rbeam::parse_config(read_file(args.config_path));
    } catch (const rbeam::ConfigError& e) {
        std::cerr << "config error: " << args.config_path << ": " << e.what() << "\n";
        return kConfigError;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIoError;
    }

    if (args.seed)
        cfg.master_seed = *args.seed;
    if (!args.out_dir.empty())
        cfg.output_directory = args.out_dir;

    if (args.dry_run) {
        std::cout << rbeam::emit_config(cfg);
        return kOk;
    }

    try {
        const fs::path out_dir(cfg.output_directory);
        fs::create_directories(out_dir);
        const std::string stem = output_stem(cfg, args.config_path);
        const std::vector<rbeam::Scenario> scenarios = rbeam::expand_scenarios(cfg);

        json aggregate;
        aggregate["label"] = stem;
        aggregate["config"] = rbeam::emit_config(cfg);
        aggregate["scenarios"] = json::array();

        int rc = kOk;
        switch (cfg.kind) {
        case rbeam::ExperimentKind::Resonance:
            aggregate["kind"] = "resonance";
            rc = run_resonance_kind(cfg, scenarios, out_dir, stem, aggregate);
            break;
        case rbeam::ExperimentKind::Spectrum:
            aggregate["kind"] = "spectrum";
            rc = run_spectrum_kind(cfg, scenarios, out_dir, stem, aggregate, args.workers);
            break;
        case rbeam::ExperimentKind::Rmse:
            aggregate["kind"] = "rmse";
            rc = run_rmse_kind(cfg, scenarios, out_dir, stem, aggregate, args.workers);
            break;
        case rbeam::ExperimentKind::AmpCurve:
            aggregate["kind"] = "amp_curve";
            rc = run_amp_curve_kind(cfg, out_dir, stem, aggregate);
            break;
        }

        if (cfg.write_aggregate_json) {
            std::ofstream jf = open_output(out_dir / (stem + "_aggregate.json"));
            jf << aggregate.dump(2) << "\n";
        }
        return rc;
    } catch (const rbeam::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIoError;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumericError;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"resonant-beam positioning simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", run_args.config_path, "experiment config path")->required();
    run->add_option("--out", run_args.out_dir, "output directory (overrides config)");
    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt =
        run->add_option("--seed", seed_value, "override the master seed");
    run->add_option("--workers", run_args.workers, "worker thread count (0 = auto)");
    run->add_flag("--dry-run", run_args.dry_run, "echo the effective config and exit");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "check a config and exit");
    validate->add_option("config", validate_path, "experiment config path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (run->parsed()) {
        if (*seed_opt)
            run_args.seed = seed_value;
        return run_command(run_args);
    }
    if (validate->parsed()) {
        try {
            rbeam::parse_config(read_file(validate_path));
        } catch (const rbeam::ConfigError& e) {
            std::cerr << "config error: " << validate_path << ": " << e.what() << "\n";
            return kConfigError;
        } catch (const std::ios_base::failure& e) {
            std::cerr << "io error: " << e.what() << "\n";
            return kIoError;
        }
        std::cout << validate_path << ": ok\n";
        return kOk;
    }
    return kOtherError;
}
