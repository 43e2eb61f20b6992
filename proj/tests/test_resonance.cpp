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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "rbeam/resonance.hpp"

using namespace rbeam;
using Catch::Approx;

TEST_CASE("amplifier: zero in, zero out")
{
    AmplifierModel amp;
    CHECK(amp.output_power(0.0) == 0.0);
}

TEST_CASE("amplifier: gain cap and output cap over a log sweep")
{
    AmplifierModel amp; // 24 dB, 1 W
    const double g = std::pow(10.0, 2.4);
    CHECK(amp.gain_linear() == Approx(251.188643).epsilon(1e-6));
    for (double p = 1e-9; p <= 10.0; p *= 2.0) {
        const double out = amp.output_power(p);
        CHECK(out / p <= 251.2);
        CHECK(out <= 1.0);
        if (g * p < 30.0) // below this the shortfall is representable
            CHECK(out < 1.0);
    }
    // gain approaches the small-signal value as input goes to zero
    CHECK(amp.output_power(1e-12) / 1e-12 == Approx(g).epsilon(1e-6));
}

TEST_CASE("amplifier: saturation at large input")
{
    AmplifierModel amp;
    CHECK(amp.output_power(10.0) == Approx(1.0).epsilon(0.01));
    // closed form: 1 - exp(-g * 10)
    CHECK(amp.output_power(10.0) == Approx(-std::expm1(-251.18864315095801 * 10.0)));
}

TEST_CASE("amplifier: monotone non-decreasing")
{
    AmplifierModel amp;
    amp.knee_sharpness = 1.0;
    AmplifierModel sharp;
    sharp.knee_sharpness = 4.0;
    double prev = 0.0, prev_sharp = 0.0;
    for (double p = 1e-8; p <= 20.0; p *= 1.3) {
        const double a = amp.output_power(p);
        const double b = sharp.output_power(p);
        CHECK(a >= prev);
        CHECK(b >= prev_sharp);
        CHECK(b / p <= 251.2 * (1 + 1e-12));
        CHECK(b <= 1.0);
        prev = a;
        prev_sharp = b;
    }
}

TEST_CASE("amplifier: custom curve strategy")
{
    AmplifierModel amp;
    amp.custom_curve = [](double p) { return std::min(100.0 * p, 0.5); };
    CHECK(amp.output_power(1e-3) == Approx(0.1));
    CHECK(amp.output_power(1.0) == Approx(0.5));
}

TEST_CASE("conjugation negates phases and is an involution")
{
    FieldState f;
    f.wavelength = 0.01;
    f.amplitudes.resize(3);
    f.amplitudes[0] = std::polar(1.0, 0.0);
    f.amplitudes[1] = std::polar(0.5, std::numbers::pi / 3.0);
    f.amplitudes[2] = std::polar(2.0, -1.9);

    const FieldState c = conjugate_phase(f);
    CHECK(std::arg(c.amplitudes[0]) == Approx(0.0).margin(1e-15));
    CHECK(std::arg(c.amplitudes[1]) == Approx(-std::numbers::pi / 3.0).epsilon(1e-12));
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(c.amplitudes[i]) == Approx(std::abs(f.amplitudes[i])));

    const FieldState cc = conjugate_phase(c);
    for (int i = 0; i < 3; ++i)
        CHECK(std::abs(cc.amplitudes[i] - f.amplitudes[i]) < 1e-15);
}

TEST_CASE("conjugation applies the circuit delay")
{
    FieldState f;
    f.amplitudes.resize(1);
    f.amplitudes[0] = std::polar(1.0, 0.4);
    const FieldState c = conjugate_phase(f, 0.25);
    CHECK(std::arg(c.amplitudes[0]) == Approx(-0.4 + 0.25).epsilon(1e-12));
}

TEST_CASE("power divider bookkeeping is exact")
{
    PowerDivider divider; // gamma = 0.004
    FieldState f;
    f.wavelength = 0.01;
    f.amplitudes.resize(4);
    f.amplitudes << std::complex<double>(0.5, 0.1), std::complex<double>(-0.3, 0.6),
        std::complex<double>(0.0, -0.55), std::complex<double>(0.2, 0.2);
    const double before = f.total_power();

    auto [reflected, harvested] = split_power(f, divider);
    // identity holds exactly by construction
    CHECK(harvested + reflected.total_power() == before);
    CHECK(reflected.total_power() == Approx(0.004 * before).epsilon(1e-12));
    CHECK(harvested == Approx(0.996 * before).epsilon(1e-12));
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(reflected.amplitudes[i]) ==
              Approx(std::sqrt(0.004) * std::abs(f.amplitudes[i])).epsilon(1e-12));
        CHECK(std::arg(reflected.amplitudes[i]) == Approx(std::arg(f.amplitudes[i])));
    }
    CHECK(std::sqrt(0.004) == Approx(0.0632456).epsilon(1e-5));

    FieldState zero;
    zero.amplitudes = Eigen::VectorXcd::Zero(2);
    auto [r0, h0] = split_power(zero, divider);
    CHECK(r0.total_power() == 0.0);
    CHECK(h0 == 0.0);
}

TEST_CASE("power divider rejects out-of-range ratios")
{
    FieldState f;
    f.amplitudes = Eigen::VectorXcd::Ones(1);
    CHECK_THROWS_AS(split_power(f, PowerDivider{0.0}), std::invalid_argument);
    CHECK_THROWS_AS(split_power(f, PowerDivider{1.0}), std::invalid_argument);
    CHECK_THROWS_AS(split_power(f, PowerDivider{-0.1}), std::invalid_argument);
}

TEST_CASE("single-element loop: first-pass efficiency is the Friis ratio")
{
    const double lambda = 0.01;
    const PlanarArray bs = build_upa(1, lambda / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray pt = build_upa(1, lambda / 4, Vec3(0, 0, 2.0), -Vec3::UnitZ());
    const AntennaPattern pat = AntennaPattern::directivity_normalized();

    ResonanceOptions opt;
    opt.max_iters = 50;
    const ResonanceResult res = run_resonance(bs, pt, AmplifierModel{}, PowerDivider{},
                                              pat, opt, lambda);
    const double g = pat.gain(0.0);
    const double friis = g * g * std::pow(lambda / (4.0 * std::numbers::pi * 2.0), 2.0);
    REQUIRE(!res.efficiency_history.empty());
    CHECK(res.efficiency_history.front() == Approx(friis).epsilon(1e-12));
    // every recorded pass has the same geometry, so the same efficiency
    for (double eta : res.efficiency_history)
        CHECK(eta == Approx(friis).epsilon(1e-9));
    // the loop gain is far below one: the cycle dies out
    CHECK(res.dark);
    CHECK(res.converged);
    CHECK(transmission_efficiency(res) == Approx(friis).epsilon(1e-9));
}

TEST_CASE("iteration trace sink sees every iteration")
{
    const double lambda = 0.01;
    const PlanarArray bs = build_upa(2, lambda / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray pt = build_upa(2, lambda / 4, Vec3(0, 0, 1.0), -Vec3::UnitZ());
    std::vector<IterationTrace> seen;
    ResonanceOptions opt;
    opt.max_iters = 40;
    opt.sink = [&seen](const IterationTrace& t) { seen.push_back(t); };
    const ResonanceResult res = run_resonance(bs, pt, AmplifierModel{}, PowerDivider{},
                                              AntennaPattern::directivity_normalized(),
                                              opt, lambda);
    REQUIRE(static_cast<int>(seen.size()) == res.iterations_run);
    for (size_t i = 0; i < seen.size(); ++i) {
        CHECK(seen[i].iteration == static_cast<int>(i));
        CHECK(seen[i].efficiency == res.efficiency_history[i]);
        CHECK(seen[i].pt_out_power_w == res.pt_out_power_history[i]);
        CHECK(seen[i].bs_out_power_w == res.bs_out_power_history[i]);
    }
}

TEST_CASE("run_resonance argument validation")
{
    const PlanarArray bs = build_upa(1, 0.0025, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray pt = build_upa(1, 0.0025, Vec3(0, 0, 1.0), -Vec3::UnitZ());
    const AntennaPattern pat = AntennaPattern::directivity_normalized();
    ResonanceOptions opt;
    opt.max_iters = 0;
    CHECK_THROWS_AS(run_resonance(bs, pt, {}, {}, pat, opt), std::invalid_argument);
    opt.max_iters = 10;
    opt.seed_power_w = 0.0;
    CHECK_THROWS_AS(run_resonance(bs, pt, {}, {}, pat, opt), std::invalid_argument);
}

TEST_CASE("transmission_efficiency error paths")
{
    ResonanceResult empty;
    CHECK_THROWS_AS(transmission_efficiency(empty), std::domain_error);
    ResonanceResult zeroed;
    zeroed.efficiency_history = {0.5};
    zeroed.bs_out_power_history = {0.0};
    CHECK_THROWS_AS(transmission_efficiency(zeroed), std::domain_error);
}

TEST_CASE("seed phase option is honored")
{
    const double lambda = 0.01;
    const PlanarArray bs = build_upa(2, lambda / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray pt = build_upa(2, lambda / 4, Vec3(0, 0, 1.0), -Vec3::UnitZ());
    ResonanceOptions opt;
    opt.max_iters = 1;
    Eigen::VectorXd phases(4);
    phases << 0.1, -0.4, 2.0, 1.0;
    opt.seed_phases = phases;
    const ResonanceResult res = run_resonance(bs, pt, AmplifierModel{}, PowerDivider{},
                                              AntennaPattern::directivity_normalized(),
                                              opt, lambda);
    for (int i = 0; i < 4; ++i)
        CHECK(std::arg(res.bs_out_field.amplitudes[i]) == Approx(phases[i]).epsilon(1e-12));

    opt.seed_phases = Eigen::VectorXd::Zero(3); // wrong size
    CHECK_THROWS_AS(run_resonance(bs, pt, {}, {}, AntennaPattern::directivity_normalized(),
                                  opt, lambda),
                    std::invalid_argument);
}
