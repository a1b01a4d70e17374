// Copyright 2026 The idmpf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IDMPF__GRID_HPP_
#define IDMPF__GRID_HPP_

#include "idmpf/errors.hpp"

#include <cmath>
#include <string>

namespace idmpf
{

/// Closed interval [lo, hi] discretized at `resolution`.
struct GridAxis
{
  double lo = 0.0;
  double hi = 0.0;
  double resolution = 1.0;

  void validate(const char * name) const
  {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(resolution)) {
      throw ConfigError(std::string(name) + " grid has non-finite bounds");
    }
    if (!(resolution > 0.0) || !(hi >= lo)) {
      throw ConfigError(std::string(name) + " grid is empty (need hi >= lo and resolution > 0)");
    }
    const double steps = (hi - lo) / resolution;
    if (std::abs(steps - std::round(steps)) > 1e-9) {
      throw ConfigError(std::string(name) + " resolution does not divide the range width");
    }
  }

  int cells() const { return static_cast<int>(std::lround((hi - lo) / resolution)) + 1; }

  double value(int index) const
  {
    return index == cells() - 1 ? hi : lo + static_cast<double>(index) * resolution;
  }

  int index_of(double value) const
  {
    return static_cast<int>(std::lround((value - lo) / resolution));
  }

  /// Exact membership: the value must equal what value(index) would produce.
  bool contains(double v) const
  {
    const int i = index_of(v);
    return i >= 0 && i < cells() && value(i) == v;
  }
};

}  // namespace idmpf

#endif  // IDMPF__GRID_HPP_
