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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rbeam/propagation.hpp"

namespace rbeam {

/// Saturating per-element power amplifier.
///
/// Default curve: p_out = P_max (1 - exp(-g p_in / P_max)) with g the
/// small-signal linear gain. knee_sharpness generalizes the knee,
/// p_out = P_max (1 - exp(-(g p / P_max)^s))^(1/s); s = 1 is the default
/// curve and s -> inf approaches the hard min(g p, P_max). Any value keeps
/// the gain at or below g and the output at or below P_max. A custom
/// tabulated curve can be plugged in via `custom_curve`.
struct AmplifierModel {
    double small_signal_gain_db = 24.0;
    double max_output_w = 1.0;
    double knee_sharpness = 1.0;
    std::function<double(double)> custom_curve; // optional replacement strategy

    double gain_linear() const
    {
        return std::pow(10.0, small_signal_gain_db / 10.0);
    }

    double output_power(double input_w) const
    {
        if (input_w <= 0.0)
            return 0.0;
        if (custom_curve)
            return custom_curve(input_w);
        const double x = gain_linear() * input_w / max_output_w;
        if (knee_sharpness == 1.0)
            return max_output_w * -std::expm1(-x);
        const double s = knee_sharpness;
        return max_output_w * std::pow(-std::expm1(-std::pow(x, s)), 1.0 / s);
    }
};

/// Power divider of the passive target: a fixed fraction gamma of the
/// received power feeds back into the loop, the rest is harvested.
struct PowerDivider {
    double feedback_ratio = 0.004;
};

struct IterationTrace {
    int iteration = 0;
    double efficiency = 0.0;         // PT input power / BS output power
    double reverse_efficiency = 0.0; // BS input power / PT output power
    double pt_in_power_w = 0.0;
    double pt_out_power_w = 0.0;
    double bs_out_power_w = 0.0;
    double bs_in_power_w = 0.0;
    bool sustain_condition = false; // G_t * gamma >= 1/(eta_t * eta_pt_t)
};

using IterationSink = std::function<void(const IterationTrace&)>;

struct ResonanceOptions {
    double seed_power_w = 1e-3; // total power of the initial BS broadcast
    int max_iters = 200;
    double tol = 1e-6;             // relative-change stop, 0 disables early stop
    double dark_floor_w = 1e-30;   // loop power below this counts as dark
    IterationSink sink;            // optional per-iteration trace consumer
    std::optional<Eigen::VectorXd> seed_phases; // per-element, default zero
};

/// Outcome of a BS <-> PT power cycle run. Fields are from the last
/// completed iteration; histories carry one entry per iteration.
struct ResonanceResult {
    FieldState bs_out_field;
    FieldState pt_in_field;
    FieldState pt_out_field;
    FieldState bs_in_field;
    std::vector<double> efficiency_history;
    std::vector<double> reverse_efficiency_history;
    std::vector<double> pt_out_power_history;
    std::vector<double> bs_out_power_history;
    int iterations_run = 0;
    bool converged = false;
    bool dark = false; // loop decayed to the numerical dark state
    double convergence_metric = 0.0;
    int sustain_first_iteration = -1; // first iteration meeting the loop-gain condition
};

/// Amplitude-only amplification: per-element output power f(input power),
/// phases untouched.
inline FieldState amplify(const FieldState& field, const AmplifierModel& amp)
{
    FieldState out;
    out.wavelength = field.wavelength;
    out.amplitudes.resize(field.amplitudes.size());
    for (Eigen::Index i = 0; i < field.amplitudes.size(); ++i) {
        const std::complex<double> a = field.amplitudes[i];
        const double p_in = std::norm(a);
        if (p_in == 0.0) {
            out.amplitudes[i] = 0.0;
            continue;
        }
        const double scale = std::sqrt(amp.output_power(p_in) / p_in);
        out.amplitudes[i] = a * scale;
    }
    return out;
}

/// Retro-directive phase conjugation: per-element phase maps to minus
/// itself plus the conjugate-circuit delay; amplitudes untouched.
inline FieldState conjugate_phase(const FieldState& field, double circuit_delay_rad = 0.0)
{
    FieldState out;
    out.wavelength = field.wavelength;
    if (circuit_delay_rad == 0.0) {
        out.amplitudes = field.amplitudes.conjugate();
        return out;
    }
    const std::complex<double> rot = std::polar(1.0, circuit_delay_rad);
    out.amplitudes = field.amplitudes.conjugate() * rot;
    return out;
}

/// Split the received power: the reflected field carries sqrt(gamma) of
/// each amplitude, the harvested remainder is returned as a scalar. The
/// bookkeeping identity harvested + reflected = input holds exactly.
inline std::pair<FieldState, double> split_power(const FieldState& field,
                                                 const PowerDivider& divider)
{
    const double gamma = divider.feedback_ratio;
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw std::invalid_argument("split_power: feedback ratio must be in (0, 1)");
    FieldState reflected;
    reflected.wavelength = field.wavelength;
    reflected.amplitudes = field.amplitudes * std::sqrt(gamma);
    const double harvested = field.total_power() - reflected.total_power();
    return {std::move(reflected), harvested};
}

/// Run the resonant power cycle to steady state.
///
/// One iteration is: BS transmits, PT receives, PT splits off the harvest
/// share and conjugates the reflected remainder, BS receives the echo,
/// conjugates and re-amplifies. The loop starts from a uniform broadcast
/// of seed_power_w with zero phases and stops at max_iters, on the
/// relative-change criterion (both efficiency and PT output power stable
/// over three consecutive iterations), or when the loop power falls below
/// the dark floor. A non-convergent run reports converged = false rather
/// than throwing.
inline ResonanceResult run_resonance(const PlanarArray& bs, const PlanarArray& pt,
                                     const AmplifierModel& amp, const PowerDivider& divider,
                                     const AntennaPattern& pattern,
                                     const ResonanceOptions& options = {},
                                     double wavelength = 0.01)
{
    if (options.max_iters < 1)
        throw std::invalid_argument("run_resonance: max_iters must be >= 1");
    if (!(options.seed_power_w > 0.0))
        throw std::invalid_argument("run_resonance: seed power must be > 0");

    double min_dist = 0.0;
    const Eigen::MatrixXcd fwd =
        transfer_matrix(bs, pt, pattern, pattern, wavelength, &min_dist);
    check_far_field(min_dist, wavelength);

    const int m = bs.size();
    FieldState bs_out;
    bs_out.wavelength = wavelength;
    const double amp0 = std::sqrt(options.seed_power_w / m);
    bs_out.amplitudes.setConstant(m, amp0);
    if (options.seed_phases) {
        if (options.seed_phases->size() != m)
            throw std::invalid_argument("run_resonance: seed phase vector size mismatch");
        for (int i = 0; i < m; ++i)
            bs_out.amplitudes[i] = std::polar(amp0, (*options.seed_phases)[i]);
    }

    ResonanceResult res;
    res.bs_out_field = bs_out;
    const double gamma = divider.feedback_ratio;
    int stable_streak = 0;

    for (int t = 0; t < options.max_iters; ++t) {
        FieldState pt_in;
        pt_in.wavelength = wavelength;
        pt_in.amplitudes = fwd * bs_out.amplitudes;

        const double bs_out_power = bs_out.total_power();
        const double pt_in_power = pt_in.total_power();
        const double eta = pt_in_power / bs_out_power;

        auto [pt_reflected, harvested] = split_power(pt_in, divider);
        (void)harvested;
        FieldState pt_out = conjugate_phase(pt_reflected);

        FieldState bs_in;
        bs_in.wavelength = wavelength;
        bs_in.amplitudes = fwd.transpose() * pt_out.amplitudes;

        const double pt_out_power = pt_out.total_power();
        const double bs_in_power = bs_in.total_power();
        const double eta_pt = pt_out_power > 0.0 ? bs_in_power / pt_out_power : 0.0;

        FieldState bs_next = amplify(conjugate_phase(bs_in), amp);
        const double bs_next_power = bs_next.total_power();
        const double total_gain = bs_in_power > 0.0 ? bs_next_power / bs_in_power : 0.0;
        const double zeta = (eta > 0.0 && eta_pt > 0.0)
                                ? 1.0 / (eta * eta_pt)
                                : std::numeric_limits<double>::infinity();
        const bool sustain = total_gain * gamma >= zeta;
        if (sustain && res.sustain_first_iteration < 0)
            res.sustain_first_iteration = t;

        res.efficiency_history.push_back(eta);
        res.reverse_efficiency_history.push_back(eta_pt);
        res.pt_out_power_history.push_back(pt_out_power);
        res.bs_out_power_history.push_back(bs_out_power);
        res.iterations_run = t + 1;

        if (options.sink) {
            IterationTrace tr;
            tr.iteration = t;
            tr.efficiency = eta;
            tr.reverse_efficiency = eta_pt;
            tr.pt_in_power_w = pt_in_power;
            tr.pt_out_power_w = pt_out_power;
            tr.bs_out_power_w = bs_out_power;
            tr.bs_in_power_w = bs_in_power;
            tr.sustain_condition = sustain;
            options.sink(tr);
        }

        res.pt_in_field = std::move(pt_in);
        res.pt_out_field = std::move(pt_out);
        res.bs_in_field = std::move(bs_in);
        res.bs_out_field = bs_out; // field that produced this iteration

        // Dark state: the loop has decayed below numerical relevance and
        // can only keep shrinking. Freeze instead of iterating into
        // denormals.
        if (bs_next_power < options.dark_floor_w) {
            res.dark = true;
            res.converged = true;
            res.convergence_metric = 0.0;
            return res;
        }

        // Stability is always tracked so the converged flag is meaningful
        // even for fixed-iteration runs; tol = 0 only disables the early
        // stop, not the bookkeeping.
        const double stability_tol = options.tol > 0.0 ? options.tol : 1e-6;
        const size_t h = res.efficiency_history.size();
        if (h >= 2) {
            const double e0 = res.efficiency_history[h - 2];
            const double e1 = res.efficiency_history[h - 1];
            const double p0 = res.pt_out_power_history[h - 2];
            const double p1 = res.pt_out_power_history[h - 1];
            const double de = e0 != 0.0 ? std::abs(e1 - e0) / std::abs(e0) : 0.0;
            const double dp = p0 != 0.0 ? std::abs(p1 - p0) / std::abs(p0) : 0.0;
            const double metric = std::max(de, dp);
            res.convergence_metric = metric;
            stable_streak = metric < stability_tol ? stable_streak + 1 : 0;
            res.converged = stable_streak >= 3;
            if (res.converged && options.tol > 0.0)
                return res;
        }

        bs_out = std::move(bs_next);
    }
    return res;
}

/// Steady-state transmission efficiency: PT input power over BS output
/// power at the final iteration.
inline double transmission_efficiency(const ResonanceResult& result)
{
    if (result.efficiency_history.empty())
        throw std::domain_error("transmission_efficiency: no iterations recorded");
    const double bs_power = result.bs_out_power_history.back();
    if (!(bs_power > 0.0))
        throw std::domain_error("transmission_efficiency: undefined for zero BS output");
    return result.efficiency_history.back();
}

} // namespace rbeam
