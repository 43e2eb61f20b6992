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
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rbeam {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

using Vec3 = Eigen::Vector3d;

/// Direction of a far-field source or look angle: elevation theta measured
/// from the array normal (+z in the reference frame), azimuth phi in the
/// xy plane.
struct Direction {
    double theta = 0.0; // radians, [0, pi/2] for physical front-side sources
    double phi = 0.0;   // radians, [0, 2*pi)

    static Direction from_degrees(double theta_deg, double phi_deg)
    {
        return {deg2rad(theta_deg), deg2rad(phi_deg)};
    }

    /// Unit propagation vector (sin t cos p, sin t sin p, cos t).
    Vec3 unit() const
    {
        const double st = std::sin(theta);
        return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
    }
};

/// Square uniform planar array. Element positions are derived eagerly at
/// build time in global coordinates, row-major from the minimum-(x,y)
/// corner of the local grid, so element order is reproducible.
struct PlanarArray {
    int side_count = 1;
    double spacing = 0.0025;
    Vec3 center = Vec3::Zero();
    Vec3 boresight = Vec3::UnitZ();
    std::vector<Vec3> element_positions;

    int size() const { return side_count * side_count; }

    /// True when the element grid lies in a z = const plane with axis
    /// aligned rows (the reference orientation); enables separable phase
    /// evaluation in the spectrum search.
    bool axis_aligned() const
    {
        return std::abs(std::abs(boresight.z()) - 1.0) < 1e-12;
    }
};

namespace detail {

/// Rotation taking +z to `boresight`. Minimal-angle rotation; for the
/// degenerate -z case the grid is flipped about the x axis.
inline Eigen::Matrix3d rotation_from_z(const Vec3& boresight)
{
    const Vec3 z = Vec3::UnitZ();
    const double c = z.dot(boresight);
    if (c > 1.0 - 1e-14)
        return Eigen::Matrix3d::Identity();
    if (c < -1.0 + 1e-14) {
        Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
        m(1, 1) = -1.0;
        m(2, 2) = -1.0;
        return m;
    }
    const Vec3 axis = z.cross(boresight).normalized();
    return Eigen::AngleAxisd(std::acos(c), axis).toRotationMatrix();
}

} // namespace detail

/// Build a side_count x side_count planar array centered on `center` with
/// its normal along `boresight`.
///
/// Throws std::invalid_argument for non-positive side_count or spacing, or
/// a boresight that is not unit length.
inline PlanarArray build_upa(int side_count, double spacing, const Vec3& center,
                             const Vec3& boresight)
{
    if (side_count < 1)
        throw std::invalid_argument("build_upa: side_count must be >= 1");
    if (!(spacing > 0.0))
        throw std::invalid_argument("build_upa: spacing must be > 0");
    if (std::abs(boresight.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("build_upa: boresight must be unit length");

    PlanarArray arr;
    arr.side_count = side_count;
    arr.spacing = spacing;
    arr.center = center;
    arr.boresight = boresight;
    arr.element_positions.reserve(static_cast<size_t>(side_count) * side_count);

    const Eigen::Matrix3d rot = detail::rotation_from_z(boresight);
    const double half = 0.5 * (side_count - 1);
    for (int i = 0; i < side_count; ++i) {
        for (int j = 0; j < side_count; ++j) {
            const Vec3 local((i - half) * spacing, (j - half) * spacing, 0.0);
            arr.element_positions.push_back(rot * local + center);
        }
    }
    return arr;
}

/// Propagation delay of an element at `position` for a plane wave along
/// `dir`: (x sin t cos p + y sin t sin p + z cos t) / c.
inline double element_delay(const Vec3& position, const Direction& dir)
{
    return position.dot(dir.unit()) / kSpeedOfLight;
}

/// Transmit steering vector: entry m = exp(+i w tau_m), w = 2 pi c / lambda.
/// All entries have unit modulus.
inline Eigen::VectorXcd steering_vector(const PlanarArray& array,
                                        const Direction& dir, double wavelength)
{
    if (!(wavelength > 0.0))
        throw std::invalid_argument("steering_vector: wavelength must be > 0");
    const double omega = 2.0 * std::numbers::pi * kSpeedOfLight / wavelength;
    Eigen::VectorXcd v(array.size());
    for (int m = 0; m < array.size(); ++m) {
        const double tau = element_delay(array.element_positions[static_cast<size_t>(m)], dir);
        v[m] = std::polar(1.0, omega * tau);
    }
    return v;
}

/// Phase profile an incoming plane wave from `dir` imprints across the
/// aperture. With outgoing propagation carrying exp(+ikD), an arrival is
/// the conjugate of the transmit steering phase; spectrum searches match
/// against this manifold.
inline Eigen::VectorXcd arrival_vector(const PlanarArray& array,
                                       const Direction& dir, double wavelength)
{
    return steering_vector(array, dir, wavelength).conjugate();
}

} // namespace rbeam
