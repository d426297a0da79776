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

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tdnh {

/// Named residual compared against its tolerance. `skipped` marks checks
/// that were requested but do not apply (e.g. a loop phase on an open path);
/// they never fail the report.
struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool skipped = false;
  std::string detail;
};

class VerificationReport {
 public:
  /// Records a residual; a second call with the same name keeps the maximum.
  void record(const std::string& name, double residual, double tolerance,
              const std::string& detail = {});
  void skip(const std::string& name, double tolerance, const std::string& reason);

  /// Folds another report in, keeping the worst residual per check.
  void merge(const VerificationReport& other);

  const std::vector<Check>& checks() const { return checks_; }
  const Check* find(const std::string& name) const;
  bool passed() const;

  void add_note(std::string note) { notes_.push_back(std::move(note)); }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<Check> checks_;
  std::vector<std::string> notes_;
};

/// Per-check tolerances with built-in defaults; overridable by name.
class Tolerances {
 public:
  Tolerances();
  double get(const std::string& name) const;
  void set(const std::string& name, double value);
  bool known(const std::string& name) const;
  const std::map<std::string, double>& all() const { return values_; }

 private:
  std::map<std::string, double> values_;
};

/// One record per line: `name residual tolerance verdict [detail]`.
std::string report_to_text(const VerificationReport& report, const std::string& title = {});
std::string report_to_json(const VerificationReport& report, const std::string& title = {});

/// 17 significant digits.
std::string format_double(double v);

}  // namespace tdnh
