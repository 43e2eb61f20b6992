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

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace rbeam {

/// Number of workers to use when the caller passes 0 (auto).
inline int resolve_workers(int workers)
{
    if (workers > 0)
        return workers;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Static-partition parallel loop over [begin, end).
///
/// Each index is processed exactly once and writes only to its own output
/// slot, so results are identical for any worker count. Exceptions from
/// workers are rethrown on the calling thread.
inline void parallel_for(int begin, int end, int workers,
                         const std::function<void(int)>& body)
{
    const int n = end - begin;
    if (n <= 0)
        return;
    const int w = std::min(resolve_workers(workers), n);
    if (w <= 1) {
        for (int i = begin; i < end; ++i)
            body(i);
        return;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(w));
    const int chunk = (n + w - 1) / w;
    for (int t = 0; t < w; ++t) {
        const int lo = begin + t * chunk;
        const int hi = std::min(end, lo + chunk);
        pool.emplace_back([&, t, lo, hi]() {
            try {
                for (int i = lo; i < hi; ++i)
                    body(i);
            } catch (...) {
                errors[static_cast<size_t>(t)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace rbeam
