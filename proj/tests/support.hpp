// Copyright 2026 The tdnh Authors
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

#pragma once

// Independent oracles and generators shared by the test suites.

#include <cmath>
#include <complex>
#include <random>
#include <utility>

#include "tdnh/linalg.hpp"

namespace tdnh::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 gen(0x5eed2026ULL);
  return gen;
}

inline double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

inline cplx random_complex(double scale = 1.0) { return {uniform(-scale, scale), uniform(-scale, scale)}; }

inline CMatrix random_matrix(int n, double scale = 1.0) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = random_complex(scale);
  return m;
}

/// Roots of λ² - tr λ + det = 0, from the entries directly.
inline std::pair<cplx, cplx> quadratic_roots(const CMatrix& m) {
  const cplx tr = m(0, 0) + m(1, 1);
  const cplx det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const cplx disc = std::sqrt(tr * tr - 4.0 * det);
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

/// Max entry of |a - b|.
inline double max_diff(const CMatrix& a, const CMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace tdnh::testing
