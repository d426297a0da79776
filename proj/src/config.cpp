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

#include "tdnh/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tdnh::config {

namespace {

struct Entry {
  std::string value;
  int line = 0;
  bool quoted = false;
};

using Section = std::map<std::string, Entry>;

const std::set<std::string> kSections{"scenario", "functions", "constants", "grid",
                                      "signatures", "tolerances", "output", "checks",
                                      "evolution", "regimes"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

class Parser {
 public:
  Parser(std::string label) : label_(std::move(label)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(label_, line, msg);
  }

  void read(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      const std::string s = trim(strip_comment(raw, line));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') fail(line, "unterminated section header");
        section = trim(std::string_view(s).substr(1, s.size() - 2));
        if (!kSections.count(section)) fail(line, "unknown section [" + section + "]");
        if (sections_.count(section)) fail(line, "duplicate section [" + section + "]");
        sections_[section];
        continue;
      }
      if (section.empty()) fail(line, "key outside of any section");
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail(line, "expected 'key = value'");
      const std::string key = trim(std::string_view(s).substr(0, eq));
      std::string value = trim(std::string_view(s).substr(eq + 1));
      if (key.empty()) fail(line, "empty key");
      Entry e;
      e.line = line;
      if (!value.empty() && value.front() == '"') {
        if (value.size() < 2 || value.back() != '"') fail(line, "unterminated string for '" + key + "'");
        e.quoted = true;
        value = value.substr(1, value.size() - 2);
      }
      e.value = std::move(value);
      auto& sec = sections_[section];
      if (sec.count(key)) fail(line, "duplicate key '" + section + "." + key + "'");
      sec.emplace(key, std::move(e));
    }
  }

  const Section* section(const std::string& name) const {
    auto it = sections_.find(name);
    return it == sections_.end() ? nullptr : &it->second;
  }

  const Entry* find(const std::string& sec, const std::string& key) const {
    const Section* s = section(sec);
    if (!s) return nullptr;
    auto it = s->find(key);
    return it == s->end() ? nullptr : &it->second;
  }

  const Entry& require(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    if (!e) fail(0, "missing required field '" + sec + "." + key + "'");
    return *e;
  }

  void allow_only(const std::string& sec, const std::set<std::string>& keys) const {
    const Section* s = section(sec);
    if (!s) return;
    for (const auto& [k, e] : *s)
      if (!keys.count(k)) fail(e.line, "unknown key '" + sec + "." + k + "'");
  }

  double number(const std::string& sec, const std::string& key, const Entry& e) const {
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    if (b != end && *b == '+') ++b;
    auto [p, ec] = std::from_chars(b, end, v);
    if (e.quoted || ec != std::errc() || p != end || !std::isfinite(v))
      fail(e.line, "'" + sec + "." + key + "' must be a finite number, got '" + e.value + "'");
    return v;
  }

  double number_or(const std::string& sec, const std::string& key, double fallback) const {
    const Entry* e = find(sec, key);
    return e ? number(sec, key, *e) : fallback;
  }

  long integer(const std::string& sec, const std::string& key, const Entry& e) const {
    long v = 0;
    auto [p, ec] = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
    if (e.quoted || ec != std::errc() || p != e.value.data() + e.value.size())
      fail(e.line, "'" + sec + "." + key + "' must be an integer, got '" + e.value + "'");
    return v;
  }

  const std::string& label() const { return label_; }

 private:
  std::string strip_comment(const std::string& raw, int line) const {
    bool in_quote = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') in_quote = !in_quote;
      if (!in_quote && (raw[i] == '#' || raw[i] == ';')) return raw.substr(0, i);
    }
    if (in_quote) fail(line, "unterminated string");
    return raw;
  }

  std::string label_;
  std::map<std::string, Section> sections_;
};

std::set<std::string> allowed_functions(Kind k) {
  switch (k) {
    case Kind::Static: return {"alpha_r", "alpha_i", "mu_r", "mu_i", "tau_r", "tau_i"};
    case Kind::Dyson41: return {"alpha_r", "mu_r", "tau_i"};
    case Kind::Dyson42: return {"alpha_r", "mu_i", "tau_i"};
  }
  return {};
}

// Evaluates f on the grid and reports the first point where `bad` holds.
template <class Pred>
std::optional<double> first_bad(const expr::Expr& f, const TimeGrid& grid, Pred bad) {
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.at(k);
    if (bad(f.eval(t))) return t;
  }
  return std::nullopt;
}

void precheck(const Parser& p, ScenarioConfig& cfg) {
  auto line_of = [&](const std::string& key) {
    const Entry* e = p.find("functions", key);
    return e ? e->line : 0;
  };
  auto nonzero_on_grid = [&](const std::string& key, const std::string& why) {
    const auto& f = cfg.functions.at(key);
    std::optional<double> t;
    try {
      t = first_bad(f, cfg.grid, [](double v) { return v == 0.0; });
    } catch (const expr::DomainError& e) {
      p.fail(line_of(key), "functions." + key + ": " + e.what());
    }
    if (t) {
      std::ostringstream msg;
      msg << "functions." << key << " vanishes at t = " << *t << "; " << why;
      p.fail(line_of(key), msg.str());
    }
  };

  for (const auto& [key, f] : cfg.functions) {
    try {
      for (int k = 0; k < cfg.grid.points(); ++k) f.eval_dual(cfg.grid.at(k));
    } catch (const expr::DomainError& e) {
      p.fail(line_of(key), "functions." + key + ": " + e.what());
    }
  }

  switch (cfg.kind) {
    case Kind::Static:
      nonzero_on_grid("alpha_r", "the discriminant divides by alpha_r");
      break;
    case Kind::Dyson41:
      if (cfg.c1 * cfg.c1 == cfg.c2 * cfg.c2)
        p.fail(p.require("constants", "c1").line,
               "constraint precheck: c1^2 = c2^2 makes the Dyson map singular");
      nonzero_on_grid("alpha_r", "the completed alpha_i divides by alpha_r");
      break;
    case Kind::Dyson42:
      if (cfg.c1 == 0.0)
        p.fail(p.require("constants", "c1").line, "constraint precheck: c1 = 0 makes the Dyson map singular");
      {
        const auto& mu_i = cfg.functions.at("mu_i");
        if (mu_i.is_constant() && mu_i.eval(0.0) == 0.0)
          p.fail(line_of("mu_i"), "constraint precheck: mu_i = 0 divides by zero in A(t)");
      }
      nonzero_on_grid("mu_i", "A(t) divides by mu_i");
      nonzero_on_grid("alpha_r", "the Dyson map divides by alpha_r");
      break;
  }
}

kernels::RegimeAxis parse_axis(const Parser& p, const Entry& e, const std::string& key) {
  const auto parts = split_list(e.value);
  if (parts.size() != 4)
    p.fail(e.line, "'regimes." + key + "' must be '<axis> <min> <max> <points>'");
  kernels::RegimeAxis a;
  a.name = parts[0];
  Entry tmp = e;
  tmp.quoted = false;
  tmp.value = parts[1];
  a.min = p.number("regimes", key, tmp);
  tmp.value = parts[2];
  a.max = p.number("regimes", key, tmp);
  tmp.value = parts[3];
  a.points = static_cast<int>(p.integer("regimes", key, tmp));
  if (a.points < 1) p.fail(e.line, "'regimes." + key + "' needs at least one point");
  return a;
}

}  // namespace

ConfigError::ConfigError(const std::string& file, int line, const std::string& message)
    : std::runtime_error(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
                         message),
      file_(file),
      line_(line) {}

std::string to_string(Kind k) {
  switch (k) {
    case Kind::Static: return "static";
    case Kind::Dyson41: return "dyson41";
    case Kind::Dyson42: return "dyson42";
  }
  return "?";
}

std::vector<std::string> required_functions(Kind k) {
  switch (k) {
    case Kind::Static: return {"alpha_r", "mu_r", "mu_i", "tau_i"};
    case Kind::Dyson41: return {"alpha_r", "mu_r", "tau_i"};
    case Kind::Dyson42: return {"alpha_r", "mu_i", "tau_i"};
  }
  return {};
}

ScenarioConfig parse_config(const std::string& text, const std::string& label,
                            const std::filesystem::path& base_dir) {
  Parser p(label);
  p.read(text);
  ScenarioConfig cfg;
  cfg.source = label;

  p.allow_only("scenario", {"kind", "name"});
  const Entry& kind = p.require("scenario", "kind");
  if (kind.value == "static")
    cfg.kind = Kind::Static;
  else if (kind.value == "dyson41")
    cfg.kind = Kind::Dyson41;
  else if (kind.value == "dyson42")
    cfg.kind = Kind::Dyson42;
  else
    p.fail(kind.line, "scenario.kind must be static, dyson41 or dyson42, got '" + kind.value + "'");
  if (const Entry* n = p.find("scenario", "name")) cfg.name = n->value;
  if (cfg.name.empty()) cfg.name = std::filesystem::path(label).stem().string();

  p.allow_only("functions", allowed_functions(cfg.kind));
  for (const auto& key : required_functions(cfg.kind)) p.require("functions", key);
  if (const Section* fs = p.section("functions")) {
    for (const auto& [key, e] : *fs) {
      if (!e.quoted) p.fail(e.line, "functions." + key + " must be a quoted expression");
      try {
        cfg.functions.emplace(key, expr::parse(e.value));
      } catch (const expr::ParseError& err) {
        std::ostringstream msg;
        msg << "functions." << key << ": malformed expression at offset " << err.offset() << ": "
            << err.what();
        p.fail(e.line, msg.str());
      }
    }
  }

  p.allow_only("constants", {"omega", "c1", "c2"});
  cfg.omega = p.number_or("constants", "omega", 0.0);
  if (cfg.kind != Kind::Static) {
    const Entry& c1 = p.require("constants", "c1");
    cfg.c1 = p.number("constants", "c1", c1);
  }
  if (cfg.kind == Kind::Dyson41) {
    const Entry& c2 = p.require("constants", "c2");
    cfg.c2 = p.number("constants", "c2", c2);
  }

  p.allow_only("grid", {"t0", "t1", "steps"});
  {
    // Defaults: [0, 1] in 1000 steps.
    const double t0 = p.number_or("grid", "t0", 0.0);
    const double t1 = p.number_or("grid", "t1", 1.0);
    const Entry* se = p.find("grid", "steps");
    const long steps = se ? p.integer("grid", "steps", *se) : 1000;
    if (!(t1 > t0)) {
      const Entry* e = p.find("grid", "t1");
      p.fail(e ? e->line : p.find("grid", "t0")->line, "grid.t1 must exceed grid.t0");
    }
    if (steps < 2 || steps > 100000000) p.fail(se->line, "grid.steps must be in [2, 1e8]");
    cfg.grid = TimeGrid(t0, t1, static_cast<int>(steps));
  }

  p.allow_only("signatures", {"values"});
  if (const Entry* e = p.find("signatures", "values")) {
    std::vector<int> sig;
    for (const auto& tok : split_list(e->value)) {
      if (tok == "+1" || tok == "1" || tok == "+")
        sig.push_back(1);
      else if (tok == "-1" || tok == "-")
        sig.push_back(-1);
      else
        p.fail(e->line, "signatures.values entries must be +1 or -1, got '" + tok + "'");
    }
    if (sig.size() != 2) p.fail(e->line, "signatures.values needs exactly two entries");
    cfg.signatures = sig;
  }

  if (const Section* ts = p.section("tolerances")) {
    for (const auto& [key, e] : *ts) {
      if (!cfg.tolerances.known(key)) p.fail(e.line, "unknown check '" + key + "' in [tolerances]");
      const double v = p.number("tolerances", key, e);
      if (v < 0.0) p.fail(e.line, "tolerance for '" + key + "' must be >= 0");
      cfg.tolerances.set(key, v);
    }
  }

  p.allow_only("output", {"csv", "report"});
  auto resolve = [&](const std::string& s) {
    std::filesystem::path path(s);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  if (const Entry* e = p.find("output", "csv")) cfg.csv = resolve(e->value);
  if (const Entry* e = p.find("output", "report")) cfg.report = resolve(e->value);

  p.allow_only("checks", {"run"});
  if (const Entry* e = p.find("checks", "run")) {
    std::set<std::string> seen;
    for (const auto& name : split_list(e->value)) {
      if (!cfg.tolerances.known(name)) p.fail(e->line, "unknown check '" + name + "' in checks.run");
      if (!seen.insert(name).second) p.fail(e->line, "check '" + name + "' listed twice");
      cfg.checks.push_back(name);
    }
    if (cfg.checks.empty()) p.fail(e->line, "checks.run is empty");
  }

  p.allow_only("evolution", {"enabled", "level"});
  if (const Entry* e = p.find("evolution", "enabled")) {
    if (e->value == "true")
      cfg.evolve = true;
    else if (e->value == "false")
      cfg.evolve = false;
    else
      p.fail(e->line, "evolution.enabled must be true or false");
  }
  if (const Entry* e = p.find("evolution", "level")) {
    const long lvl = p.integer("evolution", "level", *e);
    if (lvl < 0 || lvl > 1) p.fail(e->line, "evolution.level must be 0 or 1");
    cfg.initial_level = static_cast<int>(lvl);
  }

  p.allow_only("regimes", {"x", "y", "alpha_r", "mu_r", "mu_i", "tau_i"});
  if (p.section("regimes")) {
    kernels::RegimeMapSpec spec;
    spec.omega = cfg.omega;
    spec.alpha_r = p.number_or("regimes", "alpha_r", 1.0);
    spec.mu_r = p.number_or("regimes", "mu_r", 0.0);
    spec.mu_i = p.number_or("regimes", "mu_i", 0.0);
    spec.tau_i = p.number_or("regimes", "tau_i", 0.0);
    const Entry& xe = p.require("regimes", "x");
    const Entry& ye = p.require("regimes", "y");
    spec.x = parse_axis(p, xe, "x");
    spec.y = parse_axis(p, ye, "y");
    try {
      spec.validate();
    } catch (const std::invalid_argument& err) {
      p.fail(xe.line, err.what());
    }
    cfg.regimes = spec;
  }

  precheck(p, cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_config(buf.str(), path.string(), path.parent_path());
  cfg.source = path;
  return cfg;
}

}  // namespace tdnh::config
