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

// Drives a loaded configuration: per-instant checks on the grid, the
// trajectory-level checks (metric ODE, phases, TDSE), CSV and reports.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tdnh/config.hpp"
#include "tdnh/kernels.hpp"
#include "tdnh/report.hpp"

namespace tdnh::runner {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

struct RunOptions {
  std::optional<std::filesystem::path> csv;     // overrides [output] csv
  std::optional<std::filesystem::path> report;  // overrides [output] report
  std::vector<std::pair<std::string, double>> tolerance_overrides;
  bool parallel = true;
};

struct RunResult {
  VerificationReport report;
  std::string title;
  std::string csv;
  std::vector<kernels::FrameSample> frames;
};

/// Computes everything; writes nothing. Throws on configuration or runtime
/// errors (model, linear algebra, expression domain).
RunResult execute(const config::ScenarioConfig& cfg, bool parallel = true);

/// Keeps the configured checks, in configured order, each exactly once.
/// Checks that never ran are reported as skipped.
VerificationReport select_checks(const VerificationReport& full,
                                 const std::vector<std::string>& names, const Tolerances& tol,
                                 const std::string& kind);

std::string regimes_csv(const kernels::RegimeMapSpec& spec,
                        const std::vector<kernels::RegimeCell>& cells);

/// Command entry points. Return the process exit code.
int run_command(const std::filesystem::path& config, const RunOptions& opts, std::ostream& out,
                std::ostream& err);
int verify_command(const std::filesystem::path& config, const RunOptions& opts, std::ostream& out,
                   std::ostream& err);
int regimes_command(const std::filesystem::path& config, const RunOptions& opts, std::ostream& out,
                    std::ostream& err);

}  // namespace tdnh::runner
