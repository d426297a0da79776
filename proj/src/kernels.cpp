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

#include "tdnh/kernels.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tdnh::kernels {

namespace {

RegimeCell regime_cell(const RegimeMapSpec& spec, int ix, int iy) {
  RegimeCell c;
  c.x = spec.x.at(ix);
  c.y = spec.y.at(iy);
  const auto p = spec.values(c.x, c.y);
  if (p.alpha.real() == 0.0) {
    c.defined = false;
    c.delta = std::numeric_limits<double>::quiet_NaN();
    return c;
  }
  const auto d = model::discriminant(p, spec.options);
  c.delta = d.value;
  c.regime = d.regime;
  return c;
}

bool known_axis(const std::string& n) {
  return n == "alpha_r" || n == "mu_r" || n == "mu_i" || n == "tau_i";
}

}  // namespace

std::vector<FrameSample> sample_frames_serial(const FrameEvaluator& eval, const TimeGrid& grid) {
  std::vector<FrameSample> out;
  out.reserve(grid.points());
  for (int k = 0; k < grid.points(); ++k) out.push_back(eval(grid.at(k)));
  return out;
}

std::vector<FrameSample> sample_frames_omp(const FrameEvaluator& eval, const TimeGrid& grid) {
  const int n = grid.points();
  std::vector<FrameSample> out(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int k = 0; k < n; ++k) {
    try {
      out[k] = eval(grid.at(k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double RegimeAxis::at(int k) const {
  if (points == 1) return min;
  if (k == points - 1) return max;
  return min + (max - min) * static_cast<double>(k) / static_cast<double>(points - 1);
}

void RegimeMapSpec::validate() const {
  for (const auto* a : {&x, &y}) {
    if (!known_axis(a->name))
      throw std::invalid_argument("regime axis '" + a->name +
                                  "' must be one of alpha_r, mu_r, mu_i, tau_i");
    if (a->points < 1) throw std::invalid_argument("regime axis '" + a->name + "' needs points >= 1");
  }
  if (x.name == y.name) throw std::invalid_argument("regime axes must differ");
}

model::ParameterValues RegimeMapSpec::values(double xv, double yv) const {
  double ar = alpha_r, mr = mu_r, mi = mu_i, ti = tau_i;
  auto assign = [&](const std::string& name, double v) {
    if (name == "alpha_r") ar = v;
    else if (name == "mu_r") mr = v;
    else if (name == "mu_i") mi = v;
    else if (name == "tau_i") ti = v;
  };
  assign(x.name, xv);
  assign(y.name, yv);
  model::ParameterValues p;
  p.omega = omega;
  const double ai = ar != 0.0 ? -mr * mi / ar : 0.0;
  p.alpha = {ar, ai};
  p.mu = {mr, mi};
  p.tau = {0.0, ti};
  return p;
}

std::vector<RegimeCell> regime_map_serial(const RegimeMapSpec& spec) {
  spec.validate();
  std::vector<RegimeCell> out;
  out.reserve(static_cast<std::size_t>(spec.x.points) * spec.y.points);
  for (int iy = 0; iy < spec.y.points; ++iy)
    for (int ix = 0; ix < spec.x.points; ++ix) out.push_back(regime_cell(spec, ix, iy));
  return out;
}

std::vector<RegimeCell> regime_map_omp(const RegimeMapSpec& spec) {
  spec.validate();
  const int nx = spec.x.points;
  const int total = nx * spec.y.points;
  std::vector<RegimeCell> out(total);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < total; ++i) out[i] = regime_cell(spec, i % nx, i / nx);
  return out;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace tdnh::kernels
