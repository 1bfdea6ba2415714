// Copyright 2026 The wcfa Authors
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


// Brute-force maximization of a two-parameter objective over a log-spaced
// grid, optionally re-gridded around the incumbent.

#ifndef WCFA_TESTS_ORACLES_GRID_SEARCH_HPP_
#define WCFA_TESTS_ORACLES_GRID_SEARCH_HPP_

#include <cmath>
#include <cstddef>
#include <limits>

namespace wcfa::oracle {

struct GridOptimum {
  double x = 0.0;
  double y = 0.0;
  double value = -std::numeric_limits<double>::infinity();
};

/// Searches x in [x_lo, x_hi], y in [y_lo, y_hi] on an n-by-n log grid. Each
/// zoom shrinks the log-range around the best point by a factor of 10.
template <class F>
GridOptimum log_grid_maximize(F&& f, double x_lo, double x_hi, double y_lo, double y_hi,
                              std::size_t n = 200, int zooms = 0) {
  GridOptimum best;
  double lx0 = std::log(x_lo), lx1 = std::log(x_hi);
  double ly0 = std::log(y_lo), ly1 = std::log(y_hi);
  for (int z = 0; z <= zooms; ++z) {
    for (std::size_t a = 0; a < n; ++a) {
      const double x = std::exp(lx0 + (lx1 - lx0) * static_cast<double>(a) /
                                          static_cast<double>(n - 1));
      for (std::size_t b = 0; b < n; ++b) {
        const double y = std::exp(ly0 + (ly1 - ly0) * static_cast<double>(b) /
                                            static_cast<double>(n - 1));
        const double v = f(x, y);
        if (v > best.value) best = {x, y, v};
      }
    }
    const double wx = (lx1 - lx0) / 20.0, wy = (ly1 - ly0) / 20.0;
    lx0 = std::log(best.x) - wx;
    lx1 = std::log(best.x) + wx;
    ly0 = std::log(best.y) - wy;
    ly1 = std::log(best.y) + wy;
  }
  return best;
}

}  // namespace wcfa::oracle

#endif  // WCFA_TESTS_ORACLES_GRID_SEARCH_HPP_
