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

#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdnh/runner.hpp"

namespace {

bool parse_tolerance(const std::string& arg, std::pair<std::string, double>& out) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  out.first = arg.substr(0, eq);
  const char* b = arg.data() + eq + 1;
  const char* e = arg.data() + arg.size();
  auto [p, ec] = std::from_chars(b, e, out.second);
  return ec == std::errc() && p == e && b != e;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-dependent non-Hermitian two-level systems: checks, phases and regime maps"};
  app.require_subcommand(1);

  std::string config;
  std::string csv, report;
  std::vector<std::string> tols;
  bool serial = false;

  auto* run = app.add_subcommand("run", "Run all checks and write CSV time series and reports");
  auto* verify = app.add_subcommand("verify", "Run the checks only (no CSV)");
  auto* regimes = app.add_subcommand("regimes", "Static discriminant map over a parameter grid");
  for (auto* sub : {run, verify, regimes}) {
    sub->add_option("config", config, "Scenario configuration file")->required();
    sub->add_flag("--serial", serial, "Use the serial kernels");
  }
  run->add_option("--csv", csv, "CSV output path");
  regimes->add_option("--csv", csv, "CSV output path (default: stdout)");
  for (auto* sub : {run, verify}) {
    sub->add_option("--report", report, "Report output path (a .json mirror is written alongside)");
    sub->add_option("--tol", tols, "Tolerance override NAME=VALUE")->take_all();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return tdnh::runner::kExitError;
  }

  tdnh::runner::RunOptions opts;
  opts.parallel = !serial;
  if (!csv.empty()) opts.csv = csv;
  if (!report.empty()) opts.report = report;
  for (const auto& t : tols) {
    std::pair<std::string, double> kv;
    if (!parse_tolerance(t, kv)) {
      std::cerr << "error: --tol expects NAME=VALUE, got '" << t << "'\n";
      return tdnh::runner::kExitError;
    }
    opts.tolerance_overrides.push_back(kv);
  }

  if (run->parsed()) return tdnh::runner::run_command(config, opts, std::cout, std::cerr);
  if (verify->parsed()) return tdnh::runner::verify_command(config, opts, std::cout, std::cerr);
  return tdnh::runner::regimes_command(config, opts, std::cout, std::cerr);
}
