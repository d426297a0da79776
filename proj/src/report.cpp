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

#include "tdnh/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tdnh {

namespace {

const std::map<std::string, double>& default_tolerances() {
  static const std::map<std::string, double> defaults{
      {"berry_closed_form", 1e-6},
      {"berry_hermitian_equivalence", 1e-7},
      {"biorthonormality", 1e-10},
      {"c_hat_evolution", 1e-6},
      {"c_hat_involution", 1e-9},
      {"const1", 1e-10},
      {"ctilde_commutes", 1e-9},
      {"ctilde_involution", 1e-9},
      {"dyson_residual", 1e-7},
      {"energy_closed_form", 1e-9},
      {"geometric_phase_reality", 1e-7},
      {"h_hermiticity", 1e-9},
      {"metric_ode", 1e-7},
      {"metric_ode_oracle", 1e-6},
      {"ptilde_hermitian", 1e-9},
      {"ptilde_rho_ctilde", 1e-9},
      {"ptrel_alpha_real", 1e-9},
      {"ptrel_eigenmap", 1e-9},
      {"ptrel_intertwine", 1e-9},
      {"quasi_hermiticity", 1e-7},
      {"reality", 1e-10},
      {"rho_norm_drift", 1e-8},
      {"rho_orthonormality", 1e-9},
      {"static_energy_crosscheck", 1e-10},
      {"static_parity_intertwine", 1e-10},
  };
  return defaults;
}

std::string verdict(const Check& c) {
  if (c.skipped) return "SKIP";
  return c.pass ? "PASS" : "FAIL";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void VerificationReport::record(const std::string& name, double residual, double tolerance,
                                const std::string& detail) {
  for (auto& c : checks_) {
    if (c.name != name) continue;
    if (c.skipped || std::isnan(residual) || residual > c.residual) {
      c.residual = residual;
      if (!detail.empty()) c.detail = detail;
    }
    c.skipped = false;
    c.tolerance = tolerance;
    c.pass = c.residual <= c.tolerance;
    return;
  }
  Check c;
  c.name = name;
  c.residual = residual;
  c.tolerance = tolerance;
  c.pass = residual <= tolerance;  // NaN fails
  c.detail = detail;
  checks_.push_back(std::move(c));
}

void VerificationReport::skip(const std::string& name, double tolerance,
                              const std::string& reason) {
  for (const auto& c : checks_)
    if (c.name == name) return;
  Check c;
  c.name = name;
  c.residual = 0.0;
  c.tolerance = tolerance;
  c.pass = true;
  c.skipped = true;
  c.detail = reason;
  checks_.push_back(std::move(c));
}

void VerificationReport::merge(const VerificationReport& other) {
  for (const auto& c : other.checks_) {
    if (c.skipped)
      skip(c.name, c.tolerance, c.detail);
    else
      record(c.name, c.residual, c.tolerance, c.detail);
  }
  for (const auto& n : other.notes_)
    if (std::find(notes_.begin(), notes_.end(), n) == notes_.end()) notes_.push_back(n);
}

const Check* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks_)
    if (c.name == name) return &c;
  return nullptr;
}

bool VerificationReport::passed() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
}

Tolerances::Tolerances() : values_(default_tolerances()) {}

double Tolerances::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw std::out_of_range("unknown check '" + name + "'");
  return it->second;
}

void Tolerances::set(const std::string& name, double value) {
  if (!known(name)) throw std::out_of_range("unknown check '" + name + "'");
  if (!(value >= 0.0)) throw std::invalid_argument("tolerance for '" + name + "' must be >= 0");
  values_[name] = value;
}

bool Tolerances::known(const std::string& name) const { return values_.count(name) != 0; }

std::string report_to_text(const VerificationReport& report, const std::string& title) {
  std::ostringstream out;
  if (!title.empty()) out << "# " << title << "\n";
  out << "# name residual tolerance verdict\n";
  for (const auto& c : report.checks()) {
    out << c.name << ' ' << format_double(c.residual) << ' ' << format_double(c.tolerance) << ' '
        << verdict(c);
    if (!c.detail.empty()) out << "  # " << c.detail;
    out << '\n';
  }
  for (const auto& n : report.notes()) out << "note: " << n << '\n';
  out << "overall " << (report.passed() ? "PASS" : "FAIL") << '\n';
  return out.str();
}

std::string report_to_json(const VerificationReport& report, const std::string& title) {
  nlohmann::ordered_json j;
  if (!title.empty()) j["title"] = title;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : report.checks()) {
    nlohmann::ordered_json r;
    r["name"] = c.name;
    // JSON has no NaN/inf; non-finite residuals go out as strings.
    if (std::isfinite(c.residual))
      r["residual"] = c.residual;
    else
      r["residual"] = format_double(c.residual);
    r["tolerance"] = c.tolerance;
    r["verdict"] = verdict(c);
    if (!c.detail.empty()) r["detail"] = c.detail;
    j["checks"].push_back(std::move(r));
  }
  j["notes"] = report.notes();
  j["overall"] = report.passed() ? "PASS" : "FAIL";
  return j.dump(2) + "\n";
}

}  // namespace tdnh
