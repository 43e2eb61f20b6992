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
#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rbeam/geometry.hpp"
#include "rbeam/pattern.hpp"

namespace rbeam {

/// Complex field sampled at the elements of one array. Amplitudes are in
/// root-watt units: |a_m|^2 is the element power in watts, with the
/// free-space impedance constants folded into the normalization so no
/// mu_0/epsilon_0 bookkeeping leaks into power expressions.
struct FieldState {
    Eigen::VectorXcd amplitudes;
    double wavelength = 0.01;

    double total_power() const { return amplitudes.squaredNorm(); }
};

/// Pairwise link description between a transmit and a receive array.
/// Row-major over (tx element m, rx element n).
struct LinkGeometry {
    Eigen::MatrixXd distances;       // (m, n), meters
    Eigen::MatrixXd tx_local_angles; // off-boresight at the tx element, rad
    Eigen::MatrixXd rx_local_angles; // off-boresight at the rx element, rad

    double min_distance() const { return distances.minCoeff(); }
};

/// Far-field power density W = P G / (4 pi D^2).
inline double power_density(double p_out_w, double gain_linear, double distance_m)
{
    if (p_out_w < 0.0)
        throw std::invalid_argument("power_density: negative power");
    if (!(distance_m > 0.0))
        throw std::domain_error("power_density: far-field model invalid at zero distance");
    return p_out_w * gain_linear / (4.0 * std::numbers::pi * distance_m * distance_m);
}

/// Effective receive aperture A = G lambda^2 / (4 pi).
inline double effective_aperture(double gain_linear, double wavelength_m)
{
    if (!(wavelength_m > 0.0))
        throw std::invalid_argument("effective_aperture: wavelength must be > 0");
    return gain_linear * wavelength_m * wavelength_m / (4.0 * std::numbers::pi);
}

inline LinkGeometry link_geometry(const PlanarArray& tx, const PlanarArray& rx)
{
    const int m_count = tx.size();
    const int n_count = rx.size();
    LinkGeometry g;
    g.distances.resize(m_count, n_count);
    g.tx_local_angles.resize(m_count, n_count);
    g.rx_local_angles.resize(m_count, n_count);
    for (int m = 0; m < m_count; ++m) {
        const Vec3& pm = tx.element_positions[static_cast<size_t>(m)];
        for (int n = 0; n < n_count; ++n) {
            const Vec3& pn = rx.element_positions[static_cast<size_t>(n)];
            const Vec3 d = pn - pm;
            const double dist = d.norm();
            g.distances(m, n) = dist;
            if (dist == 0.0) {
                g.tx_local_angles(m, n) = 0.0;
                g.rx_local_angles(m, n) = 0.0;
                continue;
            }
            const Vec3 u = d / dist;
            const double ct = std::clamp(u.dot(tx.boresight), -1.0, 1.0);
            const double cr = std::clamp(-u.dot(rx.boresight), -1.0, 1.0);
            g.tx_local_angles(m, n) = std::acos(ct);
            g.rx_local_angles(m, n) = std::acos(cr);
        }
    }
    return g;
}

/// Complex amplitude transfer matrix, receive-major: entry (n, m) carries
/// sqrt(G_tx G_rx) * lambda / (4 pi D) * exp(+i k D) for the m -> n link.
/// A received field is A * tx_amplitudes; per-element received power is
/// then the coherent Friis sum over all transmit elements.
inline Eigen::MatrixXcd transfer_matrix(const PlanarArray& tx, const PlanarArray& rx,
                                        const AntennaPattern& tx_pattern,
                                        const AntennaPattern& rx_pattern,
                                        double wavelength,
                                        double* min_distance_out = nullptr)
{
    if (!(wavelength > 0.0))
        throw std::invalid_argument("transfer_matrix: wavelength must be > 0");
    const int m_count = tx.size();
    const int n_count = rx.size();
    const double k = 2.0 * std::numbers::pi / wavelength;
    const double amp_scale = wavelength / (4.0 * std::numbers::pi);
    const double g_tx_peak = tx_pattern.max_gain_linear();
    const double g_rx_peak = rx_pattern.max_gain_linear();
    const double p_tx = tx_pattern.exponent;
    const double p_rx = rx_pattern.exponent;

    double min_dist = std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd a(n_count, m_count);
    for (int m = 0; m < m_count; ++m) {
        const Vec3& pm = tx.element_positions[static_cast<size_t>(m)];
        for (int n = 0; n < n_count; ++n) {
            const Vec3& pn = rx.element_positions[static_cast<size_t>(n)];
            const Vec3 d = pn - pm;
            const double dist = d.norm();
            if (!(dist > 0.0))
                throw std::domain_error("transfer_matrix: coincident elements");
            min_dist = std::min(min_dist, dist);
            const double inv = 1.0 / dist;
            const double ct = d.dot(tx.boresight) * inv;
            const double cr = -d.dot(rx.boresight) * inv;
            double gain2 = 0.0;
            if (ct > 0.0 && cr > 0.0)
                gain2 = g_tx_peak * g_rx_peak * std::pow(ct, p_tx) * std::pow(cr, p_rx);
            a(n, m) = std::polar(std::sqrt(gain2) * amp_scale * inv, k * dist);
        }
    }
    if (min_distance_out)
        *min_distance_out = min_dist;
    return a;
}

/// Geometry gate for the far-field model: propagation throws below
/// 2 lambda and warns once per call below 10 lambda.
inline void check_far_field(double min_distance, double wavelength)
{
    if (min_distance < 2.0 * wavelength)
        throw std::domain_error("propagate: geometry below the 2-lambda far-field floor");
    if (min_distance < 10.0 * wavelength)
        std::cerr << "rbeam: warning: link distance " << min_distance
                  << " m is inside the 10-lambda far-field margin\n";
}

/// Coherent field transfer from tx_array to rx_array.
///
/// Received amplitude at element n sums the transmit amplitudes weighted by
/// the per-pair Friis amplitude and propagation phase. The reduction order
/// is fixed (ascending transmit index inside the dense kernel), so results
/// are bitwise reproducible run to run.
inline FieldState propagate(const FieldState& tx_field, const PlanarArray& tx_array,
                            const PlanarArray& rx_array,
                            const AntennaPattern& tx_pattern,
                            const AntennaPattern& rx_pattern)
{
    if (tx_field.amplitudes.size() != tx_array.size())
        throw std::invalid_argument("propagate: field size does not match tx array");
    double min_dist = 0.0;
    const Eigen::MatrixXcd a = transfer_matrix(tx_array, rx_array, tx_pattern,
                                               rx_pattern, tx_field.wavelength, &min_dist);
    check_far_field(min_dist, tx_field.wavelength);

    FieldState rx;
    rx.wavelength = tx_field.wavelength;
    rx.amplitudes = a * tx_field.amplitudes;
    return rx;
}

/// Total received power, the sum of per-element |amplitude|^2.
inline double received_power_total(const FieldState& rx_field)
{
    return rx_field.total_power();
}

} // namespace rbeam
