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

#include <benchmark/benchmark.h>

#include "tdnh/kernels.hpp"
#include "tdnh/operators.hpp"

namespace {

using namespace tdnh;

model::ScenarioSolution loop_scenario() {
  model::FreeFunctions41 f{expr::parse("cos(2*pi*t)"), expr::parse("sin(2*pi*t)"),
                           expr::parse("0.3*sin(2*pi*t)")};
  return model::build_scenario_41(f, {1.0, 0.3, 0.5});
}

kernels::FrameEvaluator evaluator(const model::ScenarioSolution& sc) {
  return [sc](double t) {
    kernels::FrameSample s;
    s.t = t;
    const auto frame = operators::build_frame(sc, t);
    s.energies = frame.eigensystem.values;
    s.checks.merge(operators::frame_identities(frame));
    s.checks.merge(operators::verify_ptrel(frame).report);
    return s;
  };
}

void BM_FramesSerial(benchmark::State& state) {
  const auto eval = evaluator(loop_scenario());
  const TimeGrid grid(0.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sample_frames_serial(eval, grid));
  state.SetItemsProcessed(state.iterations() * grid.points());
}

void BM_FramesOmp(benchmark::State& state) {
  const auto eval = evaluator(loop_scenario());
  const TimeGrid grid(0.0, 1.0, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::sample_frames_omp(eval, grid));
  state.SetItemsProcessed(state.iterations() * grid.points());
}

kernels::RegimeMapSpec regime_spec(int n) {
  kernels::RegimeMapSpec spec;
  spec.alpha_r = 1.0;
  spec.mu_r = 0.5;
  spec.x = {"tau_i", 0.0, 3.0, n};
  spec.y = {"mu_i", 0.0, 1.5, n};
  return spec;
}

void BM_RegimesSerial(benchmark::State& state) {
  const auto spec = regime_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::regime_map_serial(spec));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_RegimesOmp(benchmark::State& state) {
  const auto spec = regime_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::regime_map_omp(spec));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

}  // namespace

BENCHMARK(BM_FramesSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FramesOmp)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegimesSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RegimesOmp)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
