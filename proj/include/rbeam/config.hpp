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

#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbeam/evaluation.hpp"

namespace rbeam {

/// Parse or validation failure, carrying the 1-based line number when the
/// offending text is known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(int line, const std::string& message)
        : std::runtime_error(line > 0
                                 ? "line " + std::to_string(line) + ": " + message
                                 : message),
          line_(line)
    {
    }

    int line() const { return line_; }

private:
    int line_;
};

enum class ExperimentKind { Resonance, Spectrum, Rmse, AmpCurve };

/// Declarative description of one experiment. Defaults reproduce the
/// reference setup: 30 GHz carrier (1 cm wavelength), quarter-wavelength
/// spacing, 40 x 40 arrays, feedback ratio 0.004, 200 loop iterations,
/// 100 Monte Carlo trials, 1 mW seed power, 0.02 mW per-element noise.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Resonance;
    std::string label;

    // [scenario]
    std::string mode = "rbps";
    double distance_m = 2.0;
    double theta_deg = 0.0;
    double phi_deg = 0.0;
    int bs_side = 40;
    int pt_side = 40;
    double spacing_m = 0.0025;
    double wavelength_m = 0.01;
    double noise_power_w = 2e-5;
    double seed_power_w = 1e-3;
    int trials = 100;
    int snapshots = 128;
    std::uint64_t master_seed = 1;
    double feedback_ratio = 0.004;
    double amp_gain_db = 24.0;
    double amp_max_output_w = 1.0;
    double amp_knee = 1.0;
    int max_iterations = 200;
    double tolerance = 1e-6;
    double pattern_max_gain_dbi = 4.97;
    double pattern_exponent = -1.0; // negative = directivity-normalized default

    // [search]
    double theta_max_deg = 70.0;
    double coarse_step_deg = 0.5;
    double refine_resolution_deg = 0.005;

    // [sweep] - optional; a config is either a single run or a sweep
    bool has_sweep = false;
    std::vector<std::string> sweep_parameters;
    std::vector<std::vector<std::string>> sweep_rows;

    // [amp_curve]
    double amp_input_min_w = 1e-6;
    double amp_input_max_w = 10.0;
    int amp_points = 200;

    // [output]
    std::string output_directory = "out";
    bool write_resonance_trace = false;
    bool write_spectrum_grid = false;
    bool write_trial_csv = true;
    bool write_aggregate_json = true;

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& v, int line)
{
    size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected a number, got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError(line, "trailing characters in number '" + v + "'");
    return x;
}

inline int parse_int(const std::string& v, int line)
{
    size_t pos = 0;
    long x = 0;
    try {
        x = std::stol(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected an integer, got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError(line, "trailing characters in integer '" + v + "'");
    return static_cast<int>(x);
}

inline std::uint64_t parse_u64(const std::string& v, int line)
{
    size_t pos = 0;
    unsigned long long x = 0;
    try {
        x = std::stoull(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(line, "expected an unsigned integer, got '" + v + "'");
    }
    if (pos != v.size())
        throw ConfigError(line, "trailing characters in integer '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& v, int line)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError(line, "expected a boolean, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(v);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty())
            out.push_back(cur);
    }
    return out;
}

inline std::vector<std::string> split_row(const std::string& row)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : row) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty())
        out.push_back(cur);
    return out;
}

inline std::string full_precision(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

} // namespace detail

/// Keys a sweep may vary. Each maps onto one scenario field.
inline const std::vector<std::string>& sweepable_keys()
{
    static const std::vector<std::string> keys = {
        "mode",           "distance_m",    "theta_deg",      "phi_deg",
        "bs_side",        "pt_side",       "spacing_m",      "wavelength_m",
        "noise_power_w",  "seed_power_w",  "trials",         "snapshots",
        "master_seed",    "feedback_ratio", "amp_gain_db",   "amp_max_output_w",
        "max_iterations", "tolerance"};
    return keys;
}

inline void validate_config(const ExperimentConfig& c)
{
    auto require = [](bool ok, const std::string& what) {
        if (!ok)
            throw ConfigError(0, "invalid value for " + what);
    };
    require(c.mode == "rbps" || c.mode == "aps", "scenario.mode (rbps|aps)");
    require(c.distance_m > 0.0, "scenario.distance_m (must be > 0)");
    require(c.theta_deg >= 0.0 && c.theta_deg <= 90.0, "scenario.theta_deg (0..90)");
    require(c.bs_side >= 1, "scenario.bs_side (must be >= 1)");
    require(c.pt_side >= 1, "scenario.pt_side (must be >= 1)");
    require(c.spacing_m > 0.0, "scenario.spacing_m (must be > 0)");
    require(c.wavelength_m > 0.0, "scenario.wavelength_m (must be > 0)");
    require(c.noise_power_w >= 0.0, "scenario.noise_power_w (must be >= 0)");
    require(c.seed_power_w > 0.0, "scenario.seed_power_w (must be > 0)");
    require(c.trials >= 1, "scenario.trials (must be >= 1)");
    require(c.snapshots >= 1, "scenario.snapshots (must be >= 1)");
    require(c.feedback_ratio > 0.0 && c.feedback_ratio < 1.0,
            "scenario.feedback_ratio (must be in (0,1))");
    require(c.amp_max_output_w > 0.0, "scenario.amp_max_output_w (must be > 0)");
    require(c.amp_knee > 0.0, "scenario.amp_knee (must be > 0)");
    require(c.max_iterations >= 1, "scenario.max_iterations (must be >= 1)");
    require(c.tolerance >= 0.0, "scenario.tolerance (must be >= 0)");
    require(c.theta_max_deg > 0.0 && c.theta_max_deg <= 90.0,
            "search.theta_max_deg (0..90)");
    require(c.coarse_step_deg > 0.0, "search.coarse_step_deg (must be > 0)");
    require(c.refine_resolution_deg > 0.0 &&
                c.refine_resolution_deg <= c.coarse_step_deg,
            "search.refine_resolution_deg (must be in (0, coarse_step])");
    require(c.amp_input_min_w > 0.0 && c.amp_input_max_w > c.amp_input_min_w,
            "amp_curve input range");
    require(c.amp_points >= 2, "amp_curve.points (must be >= 2)");

    if (c.has_sweep) {
        if (c.sweep_parameters.empty())
            throw ConfigError(0, "sweep.parameters missing");
        if (c.sweep_rows.empty())
            throw ConfigError(0, "sweep.values missing");
        for (const std::string& p : c.sweep_parameters) {
            bool known = false;
            for (const std::string& k : sweepable_keys())
                known = known || k == p;
            if (!known)
                throw ConfigError(0, "unknown sweep parameter '" + p + "'");
        }
        for (const auto& row : c.sweep_rows)
            if (row.size() != c.sweep_parameters.size())
                throw ConfigError(0, "sweep row width does not match parameters");
    }
}

/// Parse the key-value experiment description. Sections: [experiment],
/// [scenario], [search], [sweep], [amp_curve], [output]. '#' starts a
/// comment. Unknown sections or keys are rejected with their line number.
inline ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    std::istringstream is(text);
    std::string raw;
    std::string section;
    int line_no = 0;

    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        if (hash != std::string::npos)
            raw = raw.substr(0, hash);
        const std::string line = detail::trim(raw);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(line_no, "unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "experiment" && section != "scenario" && section != "search" &&
                section != "sweep" && section != "amp_curve" && section != "output")
                throw ConfigError(line_no, "unknown section [" + section + "]");
            if (section == "sweep")
                c.has_sweep = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(line_no, "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(line_no, "empty key");
        if (section.empty())
            throw ConfigError(line_no, "key '" + key + "' outside any section");

        using detail::parse_bool;
        using detail::parse_double;
        using detail::parse_int;
        using detail::parse_u64;

        if (section == "experiment") {
            if (key == "kind") {
                if (value == "resonance")
                    c.kind = ExperimentKind::Resonance;
                else if (value == "spectrum")
                    c.kind = ExperimentKind::Spectrum;
                else if (value == "rmse")
                    c.kind = ExperimentKind::Rmse;
                else if (value == "amp_curve")
                    c.kind = ExperimentKind::AmpCurve;
                else
                    throw ConfigError(line_no, "unknown experiment kind '" + value + "'");
            } else if (key == "label") {
                c.label = value;
            } else {
                throw ConfigError(line_no, "unknown key 'experiment." + key + "'");
            }
        } else if (section == "scenario") {
            if (key == "mode")
                c.mode = value;
            else if (key == "distance_m")
                c.distance_m = parse_double(value, line_no);
            else if (key == "theta_deg")
                c.theta_deg = parse_double(value, line_no);
            else if (key == "phi_deg")
                c.phi_deg = parse_double(value, line_no);
            else if (key == "bs_side")
                c.bs_side = parse_int(value, line_no);
            else if (key == "pt_side")
                c.pt_side = parse_int(value, line_no);
            else if (key == "spacing_m")
                c.spacing_m = parse_double(value, line_no);
            else if (key == "wavelength_m")
                c.wavelength_m = parse_double(value, line_no);
            else if (key == "noise_power_w")
                c.noise_power_w = parse_double(value, line_no);
            else if (key == "seed_power_w")
                c.seed_power_w = parse_double(value, line_no);
            else if (key == "trials")
                c.trials = parse_int(value, line_no);
            else if (key == "snapshots")
                c.snapshots = parse_int(value, line_no);
            else if (key == "master_seed")
                c.master_seed = parse_u64(value, line_no);
            else if (key == "feedback_ratio")
                c.feedback_ratio = parse_double(value, line_no);
            else if (key == "amp_gain_db")
                c.amp_gain_db = parse_double(value, line_no);
            else if (key == "amp_max_output_w")
                c.amp_max_output_w = parse_double(value, line_no);
            else if (key == "amp_knee")
                c.amp_knee = parse_double(value, line_no);
            else if (key == "max_iterations")
                c.max_iterations = parse_int(value, line_no);
            else if (key == "tolerance")
                c.tolerance = parse_double(value, line_no);
            else if (key == "pattern_max_gain_dbi")
                c.pattern_max_gain_dbi = parse_double(value, line_no);
            else if (key == "pattern_exponent")
                c.pattern_exponent = parse_double(value, line_no);
            else
                throw ConfigError(line_no, "unknown key 'scenario." + key + "'");
        } else if (section == "search") {
            if (key == "theta_max_deg")
                c.theta_max_deg = parse_double(value, line_no);
            else if (key == "coarse_step_deg")
                c.coarse_step_deg = parse_double(value, line_no);
            else if (key == "refine_resolution_deg")
                c.refine_resolution_deg = parse_double(value, line_no);
            else
                throw ConfigError(line_no, "unknown key 'search." + key + "'");
        } else if (section == "sweep") {
            if (key == "parameters")
                c.sweep_parameters = detail::split_list(value, ',');
            else if (key == "values") {
                c.sweep_rows.clear();
                for (const std::string& row : detail::split_list(value, ';'))
                    c.sweep_rows.push_back(detail::split_row(row));
            } else
                throw ConfigError(line_no, "unknown key 'sweep." + key + "'");
        } else if (section == "amp_curve") {
            if (key == "input_min_w")
                c.amp_input_min_w = parse_double(value, line_no);
            else if (key == "input_max_w")
                c.amp_input_max_w = parse_double(value, line_no);
            else if (key == "points")
                c.amp_points = parse_int(value, line_no);
            else
                throw ConfigError(line_no, "unknown key 'amp_curve." + key + "'");
        } else if (section == "output") {
            if (key == "directory")
                c.output_directory = value;
            else if (key == "resonance_trace")
                c.write_resonance_trace = parse_bool(value, line_no);
            else if (key == "spectrum_grid")
                c.write_spectrum_grid = parse_bool(value, line_no);
            else if (key == "trial_csv")
                c.write_trial_csv = parse_bool(value, line_no);
            else if (key == "aggregate_json")
                c.write_aggregate_json = parse_bool(value, line_no);
            else
                throw ConfigError(line_no, "unknown key 'output." + key + "'");
        }
    }
    validate_config(c);
    return c;
}

/// Canonical text form; parse(emit(c)) == c for every valid config.
inline std::string emit_config(const ExperimentConfig& c)
{
    using detail::full_precision;
    std::ostringstream os;
    os << "[experiment]\n";
    os << "kind = ";
    switch (c.kind) {
    case ExperimentKind::Resonance: os << "resonance"; break;
    case ExperimentKind::Spectrum: os << "spectrum"; break;
    case ExperimentKind::Rmse: os << "rmse"; break;
    case ExperimentKind::AmpCurve: os << "amp_curve"; break;
    }
    os << "\n";
    if (!c.label.empty())
        os << "label = " << c.label << "\n";
    os << "\n[scenario]\n";
    os << "mode = " << c.mode << "\n";
    os << "distance_m = " << full_precision(c.distance_m) << "\n";
    os << "theta_deg = " << full_precision(c.theta_deg) << "\n";
    os << "phi_deg = " << full_precision(c.phi_deg) << "\n";
    os << "bs_side = " << c.bs_side << "\n";
    os << "pt_side = " << c.pt_side << "\n";
    os << "spacing_m = " << full_precision(c.spacing_m) << "\n";
    os << "wavelength_m = " << full_precision(c.wavelength_m) << "\n";
    os << "noise_power_w = " << full_precision(c.noise_power_w) << "\n";
    os << "seed_power_w = " << full_precision(c.seed_power_w) << "\n";
    os << "trials = " << c.trials << "\n";
    os << "snapshots = " << c.snapshots << "\n";
    os << "master_seed = " << c.master_seed << "\n";
    os << "feedback_ratio = " << full_precision(c.feedback_ratio) << "\n";
    os << "amp_gain_db = " << full_precision(c.amp_gain_db) << "\n";
    os << "amp_max_output_w = " << full_precision(c.amp_max_output_w) << "\n";
    os << "amp_knee = " << full_precision(c.amp_knee) << "\n";
    os << "max_iterations = " << c.max_iterations << "\n";
    os << "tolerance = " << full_precision(c.tolerance) << "\n";
    os << "pattern_max_gain_dbi = " << full_precision(c.pattern_max_gain_dbi) << "\n";
    os << "pattern_exponent = " << full_precision(c.pattern_exponent) << "\n";
    os << "\n[search]\n";
    os << "theta_max_deg = " << full_precision(c.theta_max_deg) << "\n";
    os << "coarse_step_deg = " << full_precision(c.coarse_step_deg) << "\n";
    os << "refine_resolution_deg = " << full_precision(c.refine_resolution_deg) << "\n";
    if (c.has_sweep) {
        os << "\n[sweep]\n";
        os << "parameters = ";
        for (size_t i = 0; i < c.sweep_parameters.size(); ++i)
            os << (i ? ", " : "") << c.sweep_parameters[i];
        os << "\n";
        os << "values = ";
        for (size_t r = 0; r < c.sweep_rows.size(); ++r) {
            if (r)
                os << "; ";
            for (size_t i = 0; i < c.sweep_rows[r].size(); ++i)
                os << (i ? " " : "") << c.sweep_rows[r][i];
        }
        os << "\n";
    }
    os << "\n[amp_curve]\n";
    os << "input_min_w = " << full_precision(c.amp_input_min_w) << "\n";
    os << "input_max_w = " << full_precision(c.amp_input_max_w) << "\n";
    os << "points = " << c.amp_points << "\n";
    os << "\n[output]\n";
    os << "directory = " << c.output_directory << "\n";
    os << "resonance_trace = " << (c.write_resonance_trace ? "true" : "false") << "\n";
    os << "spectrum_grid = " << (c.write_spectrum_grid ? "true" : "false") << "\n";
    os << "trial_csv = " << (c.write_trial_csv ? "true" : "false") << "\n";
    os << "aggregate_json = " << (c.write_aggregate_json ? "true" : "false") << "\n";
    return os.str();
}

/// Scenario with the config's base parameters applied.
inline Scenario make_scenario(const ExperimentConfig& c)
{
    Scenario s;
    s.mode = c.mode == "aps" ? PositioningMode::APS : PositioningMode::RBPS;
    s.distance = c.distance_m;
    s.true_direction = Direction::from_degrees(c.theta_deg, c.phi_deg);
    s.bs_side = c.bs_side;
    s.pt_side = c.pt_side;
    s.spacing = c.spacing_m;
    s.wavelength = c.wavelength_m;
    s.noise_power = c.noise_power_w;
    s.seed_power = c.seed_power_w;
    s.trials = c.trials;
    s.snapshot_count = c.snapshots;
    s.rng_master_seed = c.master_seed;
    s.divider.feedback_ratio = c.feedback_ratio;
    s.amplifier.small_signal_gain_db = c.amp_gain_db;
    s.amplifier.max_output_w = c.amp_max_output_w;
    s.amplifier.knee_sharpness = c.amp_knee;
    s.max_iterations = c.max_iterations;
    s.tolerance = c.tolerance;
    s.pattern = c.pattern_exponent >= 0.0
                    ? AntennaPattern::with_exponent(c.pattern_max_gain_dbi,
                                                    c.pattern_exponent)
                    : AntennaPattern::directivity_normalized(c.pattern_max_gain_dbi);
    s.search.theta_max_deg = c.theta_max_deg;
    s.search.coarse_step_deg = c.coarse_step_deg;
    s.search.refine_resolution_deg = c.refine_resolution_deg;
    return s;
}

/// Apply one swept key to a scenario.
inline void apply_scenario_key(Scenario& s, const std::string& key,
                               const std::string& value)
{
    const int no_line = 0;
    using detail::parse_double;
    using detail::parse_int;
    using detail::parse_u64;
    if (key == "mode") {
        if (value != "rbps" && value != "aps")
            throw ConfigError(no_line, "sweep mode value must be rbps|aps");
        s.mode = value == "aps" ? PositioningMode::APS : PositioningMode::RBPS;
    } else if (key == "distance_m")
        s.distance = parse_double(value, no_line);
    else if (key == "theta_deg")
        s.true_direction.theta = deg2rad(parse_double(value, no_line));
    else if (key == "phi_deg")
        s.true_direction.phi = deg2rad(parse_double(value, no_line));
    else if (key == "bs_side")
        s.bs_side = parse_int(value, no_line);
    else if (key == "pt_side")
        s.pt_side = parse_int(value, no_line);
    else if (key == "spacing_m")
        s.spacing = parse_double(value, no_line);
    else if (key == "wavelength_m")
        s.wavelength = parse_double(value, no_line);
    else if (key == "noise_power_w")
        s.noise_power = parse_double(value, no_line);
    else if (key == "seed_power_w")
        s.seed_power = parse_double(value, no_line);
    else if (key == "trials")
        s.trials = parse_int(value, no_line);
    else if (key == "snapshots")
        s.snapshot_count = parse_int(value, no_line);
    else if (key == "master_seed")
        s.rng_master_seed = parse_u64(value, no_line);
    else if (key == "feedback_ratio")
        s.divider.feedback_ratio = parse_double(value, no_line);
    else if (key == "amp_gain_db")
        s.amplifier.small_signal_gain_db = parse_double(value, no_line);
    else if (key == "amp_max_output_w")
        s.amplifier.max_output_w = parse_double(value, no_line);
    else if (key == "max_iterations")
        s.max_iterations = parse_int(value, no_line);
    else if (key == "tolerance")
        s.tolerance = parse_double(value, no_line);
    else
        throw ConfigError(no_line, "unknown sweep parameter '" + key + "'");
}

/// Expand the config into the ordered scenario list it describes (one
/// entry for a single run, one per sweep row otherwise).
inline std::vector<Scenario> expand_scenarios(const ExperimentConfig& c)
{
    std::vector<Scenario> out;
    if (!c.has_sweep) {
        out.push_back(make_scenario(c));
        return out;
    }
    for (const auto& row : c.sweep_rows) {
        Scenario s = make_scenario(c);
        for (size_t i = 0; i < c.sweep_parameters.size(); ++i)
            apply_scenario_key(s, c.sweep_parameters[i], row[i]);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace rbeam
