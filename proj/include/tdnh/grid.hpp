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

#include <stdexcept>
#include <string>

namespace tdnh {

/// Uniform grid t_k = t0 + k*dt, k = 0..steps (steps + 1 points).
class TimeGrid {
 public:
  TimeGrid(double t0, double t1, int steps) : t0_(t0), t1_(t1), steps_(steps) {
    if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
    if (steps < 2) throw std::invalid_argument("TimeGrid: steps must be at least 2");
  }

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  int steps() const { return steps_; }
  int points() const { return steps_ + 1; }
  double dt() const { return (t1_ - t0_) / steps_; }
  double at(int k) const { return k == steps_ ? t1_ : t0_ + k * dt(); }

 private:
  double t0_;
  double t1_;
  int steps_;
};

}  // namespace tdnh
