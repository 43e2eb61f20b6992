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
#include <numbers>
#include <stdexcept>

namespace rbeam {

/// cos^p element gain model, the standard patch-element surrogate: peak
/// gain on boresight, monotone decay to the horizon, no back lobe.
///
/// With exponent p = G_max/2 - 1 the pattern integrates to exactly 4*pi
/// steradian-weighted gain, i.e. the element is lossless with directivity
/// equal to its peak gain.
struct AntennaPattern {
    double max_gain_dbi = 4.97;
    double exponent = 0.0; // cos^p falloff; see directivity_normalized()

    double max_gain_linear() const
    {
        return std::pow(10.0, max_gain_dbi / 10.0);
    }

    /// Linear gain at local off-boresight angle theta_local (radians).
    double gain(double theta_local) const
    {
        if (theta_local < 0.0 || theta_local > 0.5 * std::numbers::pi)
            return 0.0;
        return gain_from_cos(std::cos(theta_local));
    }

    /// Same, from the cosine of the local angle (hot path in the pairwise
    /// transfer build). cos_theta <= 0 is behind the element plane.
    double gain_from_cos(double cos_theta) const
    {
        if (cos_theta <= 0.0)
            return 0.0;
        return max_gain_linear() * std::pow(cos_theta, exponent);
    }

    /// Pattern whose hemispherical integral equals 4*pi: p = G/2 - 1.
    static AntennaPattern directivity_normalized(double max_gain_dbi = 4.97)
    {
        AntennaPattern p;
        p.max_gain_dbi = max_gain_dbi;
        const double g = p.max_gain_linear();
        if (g < 2.0)
            throw std::invalid_argument(
                "AntennaPattern: peak gain below 3 dBi cannot be "
                "directivity-normalized with a cos^p front-side pattern");
        p.exponent = 0.5 * g - 1.0;
        return p;
    }

    /// Pattern with an explicit falloff exponent (narrower than the
    /// normalized default for p above G/2 - 1).
    static AntennaPattern with_exponent(double max_gain_dbi, double exponent)
    {
        if (exponent < 0.0)
            throw std::invalid_argument("AntennaPattern: exponent must be >= 0");
        AntennaPattern p;
        p.max_gain_dbi = max_gain_dbi;
        p.exponent = exponent;
        return p;
    }
};

} // namespace rbeam
