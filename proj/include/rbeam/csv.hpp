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
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace rbeam {

/// Canonical float formatting for result files: 9 significant digits,
/// scientific notation below 1e-3 in magnitude. Fixed so that reruns of the
/// same experiment diff byte-identically.
inline std::string format_float(double x)
{
    if (x == 0.0)
        return "0";
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    if (std::fabs(x) < 1e-3)
        std::snprintf(buf, sizeof(buf), "%.8e", x);
    else
        std::snprintf(buf, sizeof(buf), "%.9g", x);
    return buf;
}

/// Minimal comma-delimited writer with a header row.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void header(const std::vector<std::string>& columns)
    {
        write_row(columns);
    }

    void row(const std::vector<std::string>& cells)
    {
        write_row(cells);
    }

    /// Convenience: format every cell as a float.
    void row(const std::vector<double>& values)
    {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values)
            cells.push_back(format_float(v));
        write_row(cells);
    }

private:
    void write_row(const std::vector<std::string>& cells)
    {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    std::ostream& out_;
};

} // namespace rbeam
