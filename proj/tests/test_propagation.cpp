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
#include <random>

#include "rbeam/propagation.hpp"

using namespace rbeam;
using Catch::Approx;

namespace {

AntennaPattern isotropic()
{
    // unit gain over the front hemisphere
    return AntennaPattern::with_exponent(0.0, 0.0);
}

// Brute-force coherent Friis sum, written directly from the per-pair field
// formula as an oracle independent of the matrix path.
Eigen::VectorXcd brute_force_rx(const FieldState& tx_field, const PlanarArray& tx,
                                const PlanarArray& rx, const AntennaPattern& tx_pat,
                                const AntennaPattern& rx_pat)
{
    const double lambda = tx_field.wavelength;
    const double k = 2.0 * std::numbers::pi / lambda;
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(rx.size());
    for (int n = 0; n < rx.size(); ++n) {
        std::complex<double> acc = 0.0;
        for (int m = 0; m < tx.size(); ++m) {
            const Vec3 d = rx.element_positions[static_cast<size_t>(n)] -
                           tx.element_positions[static_cast<size_t>(m)];
            const double dist = d.norm();
            const Vec3 u = d / dist;
            const double gt = tx_pat.gain(std::acos(std::clamp(u.dot(tx.boresight), -1.0, 1.0)));
            const double gr =
                rx_pat.gain(std::acos(std::clamp(-u.dot(rx.boresight), -1.0, 1.0)));
            acc += tx_field.amplitudes[m] * std::sqrt(gt * gr) * lambda /
                   (4.0 * std::numbers::pi * dist) *
                   std::polar(1.0, k * dist);
        }
        out[n] = acc;
    }
    return out;
}

FieldState uniform_field(int count, double total_power, double wavelength)
{
    FieldState f;
    f.wavelength = wavelength;
    f.amplitudes.setConstant(count, std::sqrt(total_power / count));
    return f;
}

} // namespace

TEST_CASE("power density basics")
{
    CHECK(power_density(1.0, 1.0, 1.0) == Approx(1.0 / (4.0 * std::numbers::pi)).epsilon(1e-12));
    // hand arithmetic: 1e-3 * 3.14 / (4 pi * 4)
    CHECK(power_density(1e-3, 3.14, 2.0) ==
          Approx(1e-3 * 3.14 / (16.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(power_density(1e-3, 3.14, 2.0) == Approx(6.25e-5).epsilon(2e-3));
    CHECK(power_density(0.0, 123.0, 0.5) == 0.0);
    CHECK_THROWS_AS(power_density(1.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(power_density(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("effective aperture")
{
    CHECK(effective_aperture(1.0, 0.01) ==
          Approx(1e-4 / (4.0 * std::numbers::pi)).epsilon(1e-12));
    CHECK(effective_aperture(0.0, 0.25) == 0.0);
    CHECK(effective_aperture(4.0 * std::numbers::pi, 1.0) == Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(effective_aperture(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("single-pair Friis link")
{
    const double lambda = 0.01;
    const PlanarArray tx = build_upa(1, lambda / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray rx = build_upa(1, lambda / 4, Vec3(0, 0, 2.0), -Vec3::UnitZ());
    FieldState f = uniform_field(1, 1e-3, lambda);

    const FieldState got = propagate(f, tx, rx, isotropic(), isotropic());
    const double expected = 1e-3 * std::pow(lambda / (4.0 * std::numbers::pi * 2.0), 2.0);
    CHECK(received_power_total(got) == Approx(expected).epsilon(1e-6));
    CHECK(expected == Approx(1.583e-10).epsilon(1e-3));
}

TEST_CASE("integer wavelength multiple preserves phase")
{
    const double lambda = 0.01; // D = 2 m = 200 lambda
    const PlanarArray tx = build_upa(1, lambda / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray rx = build_upa(1, lambda / 4, Vec3(0, 0, 2.0), -Vec3::UnitZ());
    FieldState f;
    f.wavelength = lambda;
    f.amplitudes.resize(1);
    f.amplitudes[0] = std::polar(0.02, 0.6);

    const FieldState got = propagate(f, tx, rx, isotropic(), isotropic());
    const double dphase = std::arg(got.amplitudes[0] / f.amplitudes[0]);
    CHECK(std::abs(dphase) < 1e-6);
}

TEST_CASE("equidistant in-phase transmitters add coherently")
{
    const double lambda = 0.01;
    const PlanarArray probe = build_upa(1, lambda / 4, Vec3(0, 0, 1.0), -Vec3::UnitZ());
    const PlanarArray tx_a = build_upa(1, lambda / 4, Vec3(0.005, 0, 0), Vec3::UnitZ());
    const PlanarArray tx_b = build_upa(1, lambda / 4, Vec3(-0.005, 0, 0), Vec3::UnitZ());
    FieldState one;
    one.wavelength = lambda;
    one.amplitudes.resize(1);
    one.amplitudes[0] = 0.01;

    // two equal, equidistant transmitters: amplitudes add, power is 4x one
    const FieldState ra = propagate(one, tx_a, probe, isotropic(), isotropic());
    const FieldState rb = propagate(one, tx_b, probe, isotropic(), isotropic());
    const double combined = std::norm(ra.amplitudes[0] + rb.amplitudes[0]);
    CHECK(combined == Approx(4.0 * std::norm(ra.amplitudes[0])).epsilon(1e-9));

    // four equidistant corners of a 2x2 grid: 16x one element
    const PlanarArray quad = build_upa(2, 0.01, Vec3::Zero(), Vec3::UnitZ());
    FieldState four;
    four.wavelength = lambda;
    four.amplitudes.setConstant(4, 0.01);
    const PlanarArray corner = build_upa(1, lambda / 4, quad.element_positions[0], Vec3::UnitZ());
    const FieldState rq = propagate(four, quad, probe, isotropic(), isotropic());
    const FieldState rc = propagate(one, corner, probe, isotropic(), isotropic());
    CHECK(received_power_total(rq) ==
          Approx(16.0 * received_power_total(rc)).epsilon(1e-9));
}

TEST_CASE("received_power_total trivial fields")
{
    FieldState z;
    z.amplitudes = Eigen::VectorXcd::Zero(5);
    CHECK(received_power_total(z) == 0.0);
    FieldState one;
    one.amplitudes = Eigen::VectorXcd::Zero(3);
    one.amplitudes[1] = 1.0;
    CHECK(received_power_total(one) == 1.0);
}

TEST_CASE("matrix path matches the brute-force coherent sum on small arrays")
{
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const AntennaPattern pat = AntennaPattern::directivity_normalized();
    for (int rep = 0; rep < 5; ++rep) {
        const int nt = 2 + rep % 3;
        const int nr = 2 + (rep + 1) % 3;
        const PlanarArray tx = build_upa(nt, 0.0025, Vec3::Zero(), Vec3::UnitZ());
        const PlanarArray rx =
            build_upa(nr, 0.0025, Vec3(0.05 * u(gen), 0.05 * u(gen), 0.8), -Vec3::UnitZ());
        FieldState f;
        f.wavelength = 0.01;
        f.amplitudes.resize(tx.size());
        for (int i = 0; i < tx.size(); ++i)
            f.amplitudes[i] = std::complex<double>(u(gen), u(gen)) * 0.01;

        const FieldState got = propagate(f, tx, rx, pat, pat);
        const Eigen::VectorXcd want = brute_force_rx(f, tx, rx, pat, pat);
        for (int n = 0; n < rx.size(); ++n) {
            CHECK(std::abs(got.amplitudes[n] - want[n]) <=
                  1e-9 * std::max(1e-30, std::abs(want[n])));
            // per-element power consistency |a|^2
            CHECK(std::norm(got.amplitudes[n]) ==
                  Approx(std::norm(want[n])).epsilon(1e-9).margin(1e-30));
        }
    }
}

TEST_CASE("full reference geometry matches the brute-force double sum")
{
    const AntennaPattern pat = AntennaPattern::directivity_normalized();
    const PlanarArray bs = build_upa(40, 0.0025, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray pt = build_upa(40, 0.0025, Vec3(0, 0, 2.0), -Vec3::UnitZ());
    const FieldState f = uniform_field(bs.size(), 1e-3, 0.01);

    const FieldState got = propagate(f, bs, pt, pat, pat);
    const Eigen::VectorXcd want = brute_force_rx(f, bs, pt, pat, pat);
    CHECK((got.amplitudes - want).norm() <= 1e-9 * want.norm());
    CHECK(received_power_total(got) == Approx(want.squaredNorm()).epsilon(1e-9));
}

TEST_CASE("transfer matrix is reciprocal")
{
    const AntennaPattern pat = AntennaPattern::directivity_normalized();
    const PlanarArray a = build_upa(3, 0.0025, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray b = build_upa(3, 0.0025, Vec3(0.01, -0.02, 0.5), -Vec3::UnitZ());
    const Eigen::MatrixXcd fwd = transfer_matrix(a, b, pat, pat, 0.01);
    const Eigen::MatrixXcd bwd = transfer_matrix(b, a, pat, pat, 0.01);
    CHECK((fwd - bwd.transpose()).cwiseAbs().maxCoeff() == 0.0);

    // uniform-drive power symmetry for a symmetric face-to-face geometry
    const FieldState drive = uniform_field(a.size(), 1.0, 0.01);
    const FieldState a_to_b = propagate(drive, a, b, pat, pat);
    const FieldState b_to_a = propagate(drive, b, a, pat, pat);
    CHECK(received_power_total(a_to_b) ==
          Approx(received_power_total(b_to_a)).epsilon(1e-12));
}

TEST_CASE("path loss never amplifies for sparse far-field geometries")
{
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> side(1, 3);
    std::uniform_real_distribution<double> dist(0.15, 3.0); // clear of 10 lambda
    const AntennaPattern pat = AntennaPattern::directivity_normalized();
    for (int rep = 0; rep < 50; ++rep) {
        const PlanarArray tx = build_upa(side(gen), 0.0025, Vec3::Zero(), Vec3::UnitZ());
        const PlanarArray rx = build_upa(
            side(gen), 0.0025, Vec3(0.3 * u(gen), 0.3 * u(gen), dist(gen)), -Vec3::UnitZ());
        const FieldState f = uniform_field(tx.size(), 1.0, 0.01);
        const FieldState got = propagate(f, tx, rx, pat, pat);
        CHECK(received_power_total(got) <= 1.0);
    }
}

TEST_CASE("inverse-square scaling")
{
    const double lambda = 0.01;
    const PlanarArray tx = build_upa(1, lambda / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray rx1 = build_upa(1, lambda / 4, Vec3(0, 0, 1.0), -Vec3::UnitZ());
    const PlanarArray rx2 = build_upa(1, lambda / 4, Vec3(0, 0, 2.0), -Vec3::UnitZ());
    const FieldState f = uniform_field(1, 1.0, lambda);
    const double p1 = received_power_total(propagate(f, tx, rx1, isotropic(), isotropic()));
    const double p2 = received_power_total(propagate(f, tx, rx2, isotropic(), isotropic()));
    CHECK(p2 == Approx(0.25 * p1).epsilon(1e-9));
}

TEST_CASE("near-field floor raises an error")
{
    const double lambda = 0.01;
    const PlanarArray tx = build_upa(1, lambda / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray rx = build_upa(1, lambda / 4, Vec3(0, 0, 0.015), -Vec3::UnitZ());
    const FieldState f = uniform_field(1, 1.0, lambda);
    CHECK_THROWS_AS(propagate(f, tx, rx, isotropic(), isotropic()), std::domain_error);
}
