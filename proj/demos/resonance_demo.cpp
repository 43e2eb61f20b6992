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
// Minimal library walkthrough: run the power cycle between two facing
// arrays and print how the loop settles.

#include <cstdio>

#include "rbeam/rbeam.hpp"

int main()
{
    using namespace rbeam;

    const double wavelength = 0.01; // 30 GHz
    const PlanarArray bs = build_upa(40, wavelength / 4, Vec3::Zero(), Vec3::UnitZ());
    const PlanarArray pt =
        build_upa(40, wavelength / 4, Vec3(0, 0, 2.0), -Vec3::UnitZ());

    ResonanceOptions opt;
    opt.sink = [](const IterationTrace& t) {
        if (t.iteration % 10 == 0)
            std::printf("iter %3d  eta=%.6f  pt_out=%.6f W  bs_out=%.3f W\n",
                        t.iteration, t.efficiency, t.pt_out_power_w, t.bs_out_power_w);
    };

    const ResonanceResult res =
        run_resonance(bs, pt, AmplifierModel{}, PowerDivider{},
                      AntennaPattern::directivity_normalized(), opt, wavelength);

    std::printf("\n%s after %d iterations; steady pt_out=%.4f W, eta=%.6f\n",
                res.converged ? "converged" : "stopped", res.iterations_run,
                res.pt_out_power_history.back(),
                res.dark ? 0.0 : res.efficiency_history.back());
    return 0;
}
