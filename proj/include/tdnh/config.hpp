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

// Scenario configuration files: a sectioned key = value format.
//
//   [scenario]   kind = static | dyson41 | dyson42, name = ...
//   [functions]  alpha_r = "cos(2*pi*t)" ...   (expressions must be quoted)
//   [constants]  omega, c1, c2
//   [grid]       t0, t1, steps (default 0, 1, 1000)
//   [signatures] values = +1 -1
//   [tolerances] <check> = <value>
//   [output]     csv, report    (relative to the config file's directory)
//   [checks]     run = name, name, ...
//   [evolution]  enabled = true|false, level = 0
//   [regimes]    x = <axis> <min> <max> <points>, y = ..., plus base values
//
// '#' and ';' start comments outside quotes.

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdnh/expr.hpp"
#include "tdnh/grid.hpp"
#include "tdnh/kernels.hpp"
#include "tdnh/report.hpp"

namespace tdnh::config {

/// Carries "file:line: message" in what().
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& file, int line, const std::string& message);
  const std::string& file() const { return file_; }
  int line() const { return line_; }  // 0 when not tied to a line

 private:
  std::string file_;
  int line_;
};

enum class Kind { Static, Dyson41, Dyson42 };

std::string to_string(Kind k);

struct ScenarioConfig {
  std::filesystem::path source;
  std::string name;
  Kind kind = Kind::Static;
  std::map<std::string, expr::Expr> functions;
  double omega = 0.0;
  double c1 = 1.0;
  double c2 = 0.0;
  TimeGrid grid{0.0, 1.0, 100};
  std::optional<std::vector<int>> signatures;
  Tolerances tolerances;
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> report;
  std::vector<std::string> checks;  // empty: every check that applies
  bool evolve = true;
  int initial_level = 0;
  std::optional<kernels::RegimeMapSpec> regimes;
};

/// Required function keys per kind.
std::vector<std::string> required_functions(Kind k);

ScenarioConfig load_config(const std::filesystem::path& path);

/// Parses configuration text; `label` names the source in errors and
/// relative output paths resolve against `base_dir`.
ScenarioConfig parse_config(const std::string& text, const std::string& label,
                            const std::filesystem::path& base_dir = {});

}  // namespace tdnh::config
