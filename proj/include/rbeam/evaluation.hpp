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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rbeam/music.hpp"
#include "rbeam/parallel.hpp"
#include "rbeam/resonance.hpp"

namespace rbeam {

/// Signal generation path: resonant loop steady state (RBPS) or a single
/// active broadcast from the target (APS).
enum class PositioningMode { RBPS, APS };

/// One positioning experiment: geometry, hardware models, noise level and
/// Monte Carlo controls. The base station sits at the origin with +z
/// boresight; the target array is centered at distance * u(theta, phi)
/// with -z boresight (parallel to the base station, not re-aimed), so a
/// nonzero elevation is a genuine misalignment.
struct Scenario {
    PositioningMode mode = PositioningMode::RBPS;
    double distance = 2.0; // meters
    Direction true_direction = Direction::from_degrees(0.0, 0.0);
    int bs_side = 40;
    int pt_side = 40;
    double spacing = 0.0025;
    double wavelength = 0.01;
    AntennaPattern pattern = AntennaPattern::directivity_normalized();
    AmplifierModel amplifier;
    PowerDivider divider;
    double noise_power = 2e-5; // per-element, watts
    double seed_power = 1e-3;  // watts
    int trials = 100;
    int snapshot_count = 128;
    std::uint64_t rng_master_seed = 1;
    int max_iterations = 200;
    double tolerance = 1e-6;
    GridSpec search;
    int workers = 0; // trial-level parallelism, 0 = auto

    PlanarArray bs_array() const
    {
        return build_upa(bs_side, spacing, Vec3::Zero(), Vec3::UnitZ());
    }

    PlanarArray pt_array() const
    {
        return build_upa(pt_side, spacing, distance * true_direction.unit(),
                         -Vec3::UnitZ());
    }
};

struct TrialError {
    double dx = 0.0, dy = 0.0, dz = 0.0; // meters

    double norm() const { return std::sqrt(dx * dx + dy * dy + dz * dz); }
};

struct TrialRecord {
    DoaEstimate estimate;
    TrialError error;
};

struct RmseReport {
    double rmse = 0.0; // meters
    std::vector<TrialError> per_trial_errors;
    std::vector<TrialRecord> trials;
    double mean_theta_err = 0.0; // mean absolute elevation error, radians
    double mean_phi_err = 0.0;   // mean absolute wrapped azimuth error, radians
    int low_confidence_count = 0;
    Scenario config_echo;
};

/// Active-baseline signal: the target radiates seed_power split uniformly
/// over its elements with equal phases, one forward pass to the base
/// station, no conjugation and no loop.
inline FieldState run_aps_baseline(const Scenario& scenario)
{
    const PlanarArray bs = scenario.bs_array();
    const PlanarArray pt = scenario.pt_array();
    FieldState drive;
    drive.wavelength = scenario.wavelength;
    drive.amplitudes.setConstant(pt.size(),
                                 std::sqrt(scenario.seed_power / pt.size()));
    return propagate(drive, pt, bs, scenario.pattern, scenario.pattern);
}

/// Steady-state base-station received field for the scenario's mode.
/// For RBPS this runs the resonance loop and returns the echo field at the
/// base station; the optional out-parameter receives the full loop result.
inline FieldState scenario_signal_field(const Scenario& scenario,
                                        ResonanceResult* resonance_out = nullptr)
{
    if (scenario.mode == PositioningMode::APS)
        return run_aps_baseline(scenario);
    ResonanceOptions opt;
    opt.seed_power_w = scenario.seed_power;
    opt.max_iters = scenario.max_iterations;
    opt.tol = scenario.tolerance;
    ResonanceResult res =
        run_resonance(scenario.bs_array(), scenario.pt_array(), scenario.amplifier,
                      scenario.divider, scenario.pattern, opt, scenario.wavelength);
    FieldState field = res.bs_in_field;
    if (resonance_out)
        *resonance_out = std::move(res);
    return field;
}

/// Cartesian position error at radius D between the estimated and true
/// directions.
inline TrialError position_error(const Direction& estimate, const Direction& truth,
                                 double distance)
{
    const Vec3 diff = distance * (estimate.unit() - truth.unit());
    return {diff.x(), diff.y(), diff.z()};
}

namespace detail {

inline std::uint64_t trial_seed(const Scenario& scenario, int trial_index)
{
    return derive_seed(scenario.rng_master_seed, static_cast<std::uint64_t>(trial_index));
}

inline TrialRecord trial_from_field(const FieldState& field, const Scenario& scenario,
                                    int trial_index)
{
    const SnapshotBatch batch =
        synthesize_snapshots(field, scenario.noise_power, scenario.snapshot_count,
                             trial_seed(scenario, trial_index));
    TrialRecord rec;
    rec.estimate = estimate_doa(batch, scenario.bs_array(), scenario.wavelength,
                                scenario.search);
    rec.error = position_error({rec.estimate.theta_hat, rec.estimate.phi_hat},
                               scenario.true_direction, scenario.distance);
    return rec;
}

inline double wrapped_angle_abs(double delta)
{
    double d = std::remainder(delta, 2.0 * std::numbers::pi);
    return std::abs(d);
}

} // namespace detail

/// One Monte Carlo trial: generate the mode's signal field, synthesize a
/// noisy snapshot batch with the trial-derived seed, estimate the
/// direction and convert to a coordinate error triple.
inline std::pair<DoaEstimate, TrialError> run_trial(const Scenario& scenario,
                                                    int trial_index)
{
    const FieldState field = scenario_signal_field(scenario);
    TrialRecord rec = detail::trial_from_field(field, scenario, trial_index);
    return {rec.estimate, rec.error};
}

/// Full scenario: n independent trials over one deterministic signal field
/// (the physics loop is noise-free; only the snapshot noise varies per
/// trial), aggregated into the root-mean-square 3-D position error.
inline RmseReport run_scenario(const Scenario& scenario)
{
    if (scenario.trials < 1)
        throw std::invalid_argument("run_scenario: trials must be >= 1");
    const FieldState field = scenario_signal_field(scenario);

    RmseReport report;
    report.config_echo = scenario;
    report.trials.resize(static_cast<size_t>(scenario.trials));
    // Search parallelism would nest inside trial parallelism; keep the
    // inner loops serial and spread the trials instead.
    Scenario trial_cfg = scenario;
    trial_cfg.search.workers = 1;
    parallel_for(0, scenario.trials, scenario.workers, [&](int i) {
        report.trials[static_cast<size_t>(i)] =
            detail::trial_from_field(field, trial_cfg, i);
    });

    double sq_sum = 0.0;
    double theta_sum = 0.0, phi_sum = 0.0;
    report.per_trial_errors.reserve(report.trials.size());
    for (const TrialRecord& rec : report.trials) {
        report.per_trial_errors.push_back(rec.error);
        sq_sum += rec.error.dx * rec.error.dx + rec.error.dy * rec.error.dy +
                  rec.error.dz * rec.error.dz;
        theta_sum += std::abs(rec.estimate.theta_hat - scenario.true_direction.theta);
        phi_sum += detail::wrapped_angle_abs(rec.estimate.phi_hat -
                                             scenario.true_direction.phi);
        if (rec.estimate.low_confidence)
            report.low_confidence_count++;
    }
    report.rmse = std::sqrt(sq_sum / scenario.trials);
    report.mean_theta_err = theta_sum / scenario.trials;
    report.mean_phi_err = phi_sum / scenario.trials;
    return report;
}

/// Run a list of scenarios, preserving input order. Failures are captured
/// per scenario, not fail-fast.
struct SweepEntry {
    bool ok = false;
    std::string error;
    RmseReport report;
};

inline std::vector<SweepEntry> sweep(const std::vector<Scenario>& scenarios,
                                     int workers = 0)
{
    if (scenarios.empty())
        throw std::invalid_argument("sweep: empty scenario list");
    std::vector<SweepEntry> out(scenarios.size());
    parallel_for(0, static_cast<int>(scenarios.size()), workers, [&](int i) {
        try {
            Scenario s = scenarios[static_cast<size_t>(i)];
            s.workers = 1; // scenario-level parallelism only
            out[static_cast<size_t>(i)].report = run_scenario(s);
            out[static_cast<size_t>(i)].ok = true;
        } catch (const std::exception& e) {
            out[static_cast<size_t>(i)].error = e.what();
        }
    });
    return out;
}

} // namespace rbeam
