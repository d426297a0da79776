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

// Grid-parallel kernels. Each has a serial reference with identical
// semantics; the OpenMP versions must agree with it bit for bit.

#include <functional>
#include <string>
#include <vector>

#include "tdnh/grid.hpp"
#include "tdnh/linalg.hpp"
#include "tdnh/model.hpp"
#include "tdnh/report.hpp"

namespace tdnh::kernels {

/// Everything the runner needs from one instant.
struct FrameSample {
  double t = 0.0;
  Eigen::VectorXcd energies;
  double discriminant = 0.0;  // NaN when the static classifier does not apply
  VerificationReport checks;
};

using FrameEvaluator = std::function<FrameSample(double)>;

std::vector<FrameSample> sample_frames_serial(const FrameEvaluator& eval, const TimeGrid& grid);

/// Exceptions thrown by `eval` are rethrown (lowest grid index first).
std::vector<FrameSample> sample_frames_omp(const FrameEvaluator& eval, const TimeGrid& grid);

struct RegimeAxis {
  std::string name;  // alpha_r, mu_r, mu_i or tau_i
  double min = 0.0;
  double max = 1.0;
  int points = 2;

  double at(int k) const;
};

/// Static coefficients; α_i is completed from the constraint and τ_r = 0.
struct RegimeMapSpec {
  double omega = 0.0;
  double alpha_r = 1.0, mu_r = 0.0, mu_i = 0.0, tau_i = 0.0;
  RegimeAxis x{"tau_i", 0.0, 1.0, 2};
  RegimeAxis y{"mu_i", 0.0, 1.0, 2};
  model::StaticOptions options;

  /// Throws std::invalid_argument for unknown axis names or bad point counts.
  void validate() const;
  model::ParameterValues values(double x, double y) const;
};

struct RegimeCell {
  double x = 0.0, y = 0.0;
  double delta = 0.0;
  model::Regime regime = model::Regime::Symmetric;
  bool defined = true;  // false where α_r = 0
};

/// Row-major over y then x: cell (iy, ix) at iy * x.points + ix.
std::vector<RegimeCell> regime_map_serial(const RegimeMapSpec& spec);
std::vector<RegimeCell> regime_map_omp(const RegimeMapSpec& spec);

/// Thread count the OpenMP kernels would use.
int max_threads();

}  // namespace tdnh::kernels
