// Copyright 2026 The lossq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>

#include "lossq/error.hpp"

namespace lossq {

/// Hoeffding half-width sqrt(n/2 * ln(1/eps)).
inline double hoeffding_delta(double n, double eps) {
  detail::require(n >= 0.0 && std::isfinite(n), "count must be a finite nonnegative number");
  detail::require(eps > 0.0 && eps < 1.0, "eps must lie in (0,1)");
  return std::sqrt(n / 2.0 * std::log(1.0 / eps));
}

/// An observed count with certified two-sided bounds.
struct BoundedCount {
  double observed = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double eps_used = 0.0;  ///< per side; both sides together fail w.p. <= 2 * eps_used
};

inline BoundedCount count_bounds(double n, double eps) {
  const double d = hoeffding_delta(n, eps);
  return {n, std::max(0.0, n - d), n + d, eps};
}

/// Degenerate bounds, used for deviation-free (asymptotic) analysis.
inline BoundedCount exact_count(double n) {
  detail::require(n >= 0.0 && std::isfinite(n), "count must be a finite nonnegative number");
  return {n, n, n, 0.0};
}

/// Binary entropy in bits, h(0) = h(1) = 0.
inline double binary_entropy(double p) {
  detail::require(p >= 0.0 && p <= 1.0, "binary entropy argument must lie in [0,1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace lossq
