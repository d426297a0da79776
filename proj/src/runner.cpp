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

#include "tdnh/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "tdnh/evolution.hpp"
#include "tdnh/operators.hpp"

namespace tdnh::runner {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxValidationPoints = 256;

double scaled(double residual, double scale) { return residual / std::max(1.0, scale); }

// Static checks ---------------------------------------------------------------

model::ParameterPath static_path(const config::ScenarioConfig& cfg) {
  model::ParameterPath path;
  path.omega = cfg.omega;
  auto get = [&](const char* key) {
    auto it = cfg.functions.find(key);
    return it == cfg.functions.end() ? std::optional<expr::Expr>{} : it->second;
  };
  path.alpha_r = *get("alpha_r");
  path.mu_r = *get("mu_r");
  path.mu_i = *get("mu_i");
  path.tau_i = *get("tau_i");
  path.tau_r = get("tau_r").value_or(expr::Expr());
  if (auto ai = get("alpha_i")) {
    path.alpha_i = *ai;
  } else {
    // α_i = -μ_r μ_i / α_r
    using expr::NodeKind;
    auto num = expr::make_binary(NodeKind::Mul, path.mu_r.root_ptr(), path.mu_i.root_ptr());
    auto q = expr::make_binary(NodeKind::Div, num, path.alpha_r.root_ptr());
    path.alpha_i = expr::Expr(expr::make_unary(NodeKind::Neg, q));
  }
  path.static_pt = true;
  return path;
}

kernels::FrameSample static_frame(const model::ParameterPath& path, const Tolerances& tol,
                                  double t) {
  kernels::FrameSample s;
  s.t = t;
  const auto p = path.at(t);
  const CMatrix h = model::hamiltonian(p);
  const double c1 = model::const1_residual(p);
  s.checks.record("const1", c1, tol.get("const1"));
  s.energies = Eigen::VectorXcd::Constant(2, cplx(kNaN, kNaN));
  s.discriminant = kNaN;
  if (c1 > tol.get("const1")) {
    s.checks.skip("static_energy_crosscheck", tol.get("static_energy_crosscheck"),
                  "constraint violated");
    s.checks.skip("static_parity_intertwine", tol.get("static_parity_intertwine"),
                  "constraint violated");
    return s;
  }
  model::StaticOptions opts;
  opts.constraint_tolerance = tol.get("const1");
  const auto d = model::discriminant(p, opts);
  s.discriminant = d.value;
  const auto [ep, em] = model::static_energies(p, opts);
  s.energies(0) = ep;
  s.energies(1) = em;
  // Vieta: E+ + E- = tr H, E+ E- = det H.
  const cplx tr = h.trace(), det = h.determinant();
  const double crosscheck = std::max(std::abs(ep + em - tr), std::abs(ep * em - det)) /
                            std::max({1.0, std::abs(tr), std::abs(det)});
  s.checks.record("static_energy_crosscheck", crosscheck, tol.get("static_energy_crosscheck"));
  const CMatrix par = model::static_parity(p, opts);
  s.checks.record("static_parity_intertwine",
                  scaled(linalg::norm_inf(par * h - h.adjoint() * par), linalg::norm_inf(h)),
                  tol.get("static_parity_intertwine"));
  return s;
}

// Dyson scenarios -------------------------------------------------------------

model::ScenarioSolution build_scenario(const config::ScenarioConfig& cfg) {
  model::ScenarioConstants consts{cfg.c1, cfg.c2, cfg.omega};
  model::ValidationOptions vopts;
  vopts.grid = TimeGrid(cfg.grid.t0(), cfg.grid.t1(), std::min(cfg.grid.steps(), kMaxValidationPoints));
  vopts.dyson_tolerance = std::max(vopts.dyson_tolerance, cfg.tolerances.get("dyson_residual"));
  if (cfg.kind == config::Kind::Dyson41) {
    model::FreeFunctions41 f{cfg.functions.at("alpha_r"), cfg.functions.at("mu_r"),
                             cfg.functions.at("tau_i")};
    return model::build_scenario_41(f, consts, vopts);
  }
  model::FreeFunctions42 f{cfg.functions.at("alpha_r"), cfg.functions.at("mu_i"),
                           cfg.functions.at("tau_i")};
  return model::build_scenario_42(f, consts, vopts);
}

Eigen::VectorXcd closed_form_energies(const model::ScenarioSolution& sc, double t) {
  const auto& k = sc.constants();
  Eigen::VectorXcd e(2);
  double half_gap = 0.0;
  if (sc.kind() == model::ScenarioKind::Dyson41) {
    const double d = sc.delta(t);
    const double ar = sc.alpha_r(t), mr = sc.mu_r(t);
    const double den =
        4.0 * k.c1 * k.c2 * std::sinh(d) + 2.0 * (k.c1 * k.c1 + k.c2 * k.c2) * std::cosh(d);
    half_gap = std::abs(k.c1 * k.c1 - k.c2 * k.c2) * std::hypot(ar, mr) / den;
  } else {
    const double a = sc.a_function(t), ar = sc.alpha_r(t);
    half_gap = 0.5 * std::sqrt(4.0 * a * a + ar * ar);
  }
  e(0) = -0.5 * k.omega + half_gap;
  e(1) = -0.5 * k.omega - half_gap;
  return e;
}

kernels::FrameSample dyson_frame(const model::ScenarioSolution& sc,
                                 const std::optional<std::vector<int>>& signatures,
                                 const MatrixFn& hfn, const MatrixFn& rhofn, const Tolerances& tol,
                                 double t) {
  kernels::FrameSample s;
  s.t = t;
  operators::FrameOptions fo;
  fo.signatures = signatures;
  const auto frame = operators::build_frame(sc, t, fo);
  s.energies = frame.eigensystem.values;
  auto& rep = s.checks;

  const auto p = sc.parameters(t);
  if (sc.kind() == model::ScenarioKind::Dyson41) {
    rep.record("const1", model::const1_residual(p), tol.get("const1"));
    s.discriminant = model::discriminant(p, {1e-12, std::max(1e-10, tol.get("const1"))}).value;
  } else {
    rep.skip("const1", tol.get("const1"), "tau_r = mu_i is nonzero by construction");
    s.discriminant = kNaN;
  }

  const CMatrix hh = sc.h(t);
  const double hnorm = linalg::norm_inf(hh);
  rep.record("dyson_residual", scaled(sc.dyson_residual(t), hnorm), tol.get("dyson_residual"));
  rep.record("h_hermiticity", scaled(linalg::hermiticity_residual(hh), hnorm),
             tol.get("h_hermiticity"));

  rep.merge(operators::verify_ptrel(frame, tol).report);
  rep.merge(operators::frame_identities(frame, tol));
  rep.record("metric_ode", operators::metric_ode_residual(hfn, rhofn, t), tol.get("metric_ode"));

  const Eigen::VectorXcd cf = closed_form_energies(sc, t);
  double ediff = 0.0;
  for (int n = 0; n < 2; ++n) ediff = std::max(ediff, std::abs(cf(n) - s.energies(n)));
  rep.record("energy_closed_form", scaled(ediff, cf.cwiseAbs().maxCoeff()),
             tol.get("energy_closed_form"));
  return s;
}

// Ĉ = P ρ̂ needs a time-independent parity.
void c_hat_checks(const model::ScenarioSolution& sc, const TimeGrid& grid, const Tolerances& tol,
                  VerificationReport& rep) {
  const double t_inv = tol.get("c_hat_involution"), t_evo = tol.get("c_hat_evolution");
  if (sc.kind() != model::ScenarioKind::Dyson41) {
    rep.skip("c_hat_involution", t_inv, "static parity requires tau_r = 0");
    rep.skip("c_hat_evolution", t_evo, "static parity requires tau_r = 0");
    return;
  }
  const CMatrix p0 = model::static_parity(sc.parameters(grid.t0()));
  for (int k = 1; k < grid.points(); ++k) {
    if (linalg::max_abs(model::static_parity(sc.parameters(grid.at(k))) - p0) > 1e-12) {
      rep.skip("c_hat_involution", t_inv, "parity varies along the path");
      rep.skip("c_hat_evolution", t_evo, "parity varies along the path");
      return;
    }
  }
  auto chat = [&](double t) { return operators::c_hat(p0, operators::unit_determinant(sc.rho(t))); };
  const CMatrix id = CMatrix::Identity(2, 2);
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.at(k);
    const CMatrix c = chat(t);
    const double cn = linalg::norm_inf(c);
    rep.record("c_hat_involution", scaled(linalg::norm_inf(c * c - id), cn * cn), t_inv);
    const CMatrix h = sc.hamiltonian(t);
    const CMatrix cdot = linalg::operator_time_derivative(chat, t);
    const CMatrix lhs = cplx(0.0, 1.0) * cdot - linalg::commutator(h, c);
    rep.record("c_hat_evolution", scaled(linalg::norm_inf(lhs), linalg::norm_inf(h) * cn), t_evo);
  }
}

struct PhaseColumns {
  std::vector<std::vector<double>> gamma;  // [level][point]
  std::vector<std::vector<double>> alpha;
};

void trajectory_checks(const config::ScenarioConfig& cfg, const model::ScenarioSolution& sc,
                       VerificationReport& rep, PhaseColumns& cols) {
  const auto& tol = cfg.tolerances;
  const TimeGrid& grid = cfg.grid;
  const MatrixFn hfn = sc.hamiltonian_fn();
  const MatrixFn rhofn = sc.rho_fn();
  const MatrixFn etafn = sc.eta_fn();
  const MatrixFn etadotfn = sc.eta_dot_fn();

  // Metric ODE integrated from ρ(t0) against the closed form.
  {
    const auto traj = operators::metric_ode_solve(hfn, rhofn(grid.t0()), grid);
    double worst = 0.0;
    for (int k = 0; k < grid.points(); ++k) {
      const CMatrix exact = rhofn(traj.times[k]);
      worst = std::max(worst, scaled(linalg::norm_inf(traj.rho[k] - exact), linalg::norm_inf(exact)));
    }
    rep.record("metric_ode_oracle", worst, tol.get("metric_ode_oracle"),
               traj.positivity_lost ? "integrated metric lost positivity" : "");
  }

  c_hat_checks(sc, grid, tol, rep);

  if (!cfg.evolve) {
    for (const char* n : {"geometric_phase_reality", "berry_hermitian_equivalence",
                          "berry_closed_form", "rho_norm_drift"})
      rep.skip(n, tol.get(n), "evolution disabled");
    return;
  }

  const MatrixFn energy = [hfn, etafn, etadotfn](double t) {
    return operators::energy_operator(hfn(t), etafn(t), etadotfn(t));
  };
  evolution::EigenTrajectory traj;
  try {
    traj = evolution::eigen_trajectory(energy, rhofn, grid);
    const auto g = evolution::geometric_phases(traj, etafn, etadotfn);
    rep.record("geometric_phase_reality", g.max_imag_rate, tol.get("geometric_phase_reality"));
    rep.record("berry_hermitian_equivalence", g.max_hermitian_mismatch,
               tol.get("berry_hermitian_equivalence"));
    cols.gamma = g.gamma;
    cols.alpha = evolution::dynamical_phase(traj);
  } catch (const evolution::EvolutionError& e) {
    rep.record("geometric_phase_reality", kInf, tol.get("geometric_phase_reality"), e.what());
    rep.record("berry_hermitian_equivalence", kInf, tol.get("berry_hermitian_equivalence"),
               e.what());
    cols = {};
  }

  // Loop phase against the closed form.
  auto coefficients = [&sc](double t) {
    const auto p = sc.parameters(t);
    return std::vector<double>{p.alpha.real(), p.alpha.imag(), p.mu.real(),
                               p.mu.imag(),    p.tau.real(),   p.tau.imag()};
  };
  const double closure_tol = 1e-10;
  {
    const auto a = coefficients(grid.t0()), b = coefficients(grid.t1());
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a[i] - b[i]));
    if (gap > closure_tol) {
      rep.skip("berry_closed_form", tol.get("berry_closed_form"), "parameter path is open");
    } else if (!cols.gamma.empty()) {
      try {
        const auto loop = evolution::berry_phase_loop(traj, etafn, etadotfn, coefficients, closure_tol);
        const double cf = sc.kind() == model::ScenarioKind::Dyson41
                              ? evolution::closed_form_berry_41(sc, grid)
                              : evolution::closed_form_berry_42(sc, grid);
        double worst = 0.0;
        for (double g : loop.gamma) worst = std::max(worst, std::abs(evolution::wrap_angle(g - cf)));
        std::ostringstream detail;
        detail << "closed form " << format_double(evolution::wrap_angle(cf));
        rep.record("berry_closed_form", worst, tol.get("berry_closed_form"), detail.str());
      } catch (const evolution::EvolutionError& e) {
        rep.record("berry_closed_form", kInf, tol.get("berry_closed_form"), e.what());
      }
    } else {
      rep.record("berry_closed_form", kInf, tol.get("berry_closed_form"),
                 "eigen trajectory unavailable");
    }
  }

  // TDSE from the configured instantaneous eigenstate.
  try {
    const CVector psi0 = traj.points() > 0
                             ? CVector(traj.right.front().col(cfg.initial_level))
                             : CVector(CVector::Unit(2, cfg.initial_level));
    const auto st = evolution::tdse_integrate(hfn, psi0, grid, rhofn);
    rep.record("rho_norm_drift", st.max_relative_drift, tol.get("rho_norm_drift"));
  } catch (const evolution::EvolutionError& e) {
    rep.record("rho_norm_drift", kInf, tol.get("rho_norm_drift"), e.what());
  }
}

std::string regime_note(const std::vector<kernels::FrameSample>& frames) {
  int counts[3] = {0, 0, 0};
  int classified = 0;
  const double band = model::StaticOptions{}.exceptional_band;
  for (const auto& f : frames) {
    if (std::isnan(f.discriminant)) continue;
    ++classified;
    if (std::abs(f.discriminant) <= band)
      ++counts[1];
    else if (f.discriminant > 0.0)
      ++counts[0];
    else
      ++counts[2];
  }
  if (classified == 0) return {};
  std::ostringstream out;
  out << "static classifier on the path: symmetric " << counts[0] << ", exceptional " << counts[1]
      << ", broken " << counts[2] << " of " << classified << " points";
  return out.str();
}

std::string build_csv(const std::vector<kernels::FrameSample>& frames, const PhaseColumns& cols,
                      const std::vector<std::string>& check_columns) {
  std::ostringstream out;
  out << "t,re_E_plus,im_E_plus,re_E_minus,im_E_minus,delta,gamma_plus,gamma_minus,alpha_plus,"
         "alpha_minus";
  for (const auto& c : check_columns) out << ',' << c;
  out << '\n';
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const auto& f = frames[k];
    auto phase = [&](const std::vector<std::vector<double>>& v, int n) {
      return v.size() > static_cast<std::size_t>(n) ? v[n][k] : kNaN;
    };
    out << format_double(f.t) << ',' << format_double(f.energies(0).real()) << ','
        << format_double(f.energies(0).imag()) << ',' << format_double(f.energies(1).real())
        << ',' << format_double(f.energies(1).imag()) << ',' << format_double(f.discriminant)
        << ',' << format_double(phase(cols.gamma, 0)) << ',' << format_double(phase(cols.gamma, 1))
        << ',' << format_double(phase(cols.alpha, 0)) << ',' << format_double(phase(cols.alpha, 1));
    for (const auto& c : check_columns) {
      const Check* chk = f.checks.find(c);
      out << ',' << format_double(chk && !chk->skipped ? chk->residual : kNaN);
    }
    out << '\n';
  }
  return out.str();
}

bool write_file(const std::filesystem::path& path, const std::string& content, std::ostream& err) {
  std::ofstream f(path, std::ios::binary);
  if (f) f << content;
  if (!f) {
    err << "error: cannot write " << path.string() << '\n';
    return false;
  }
  return true;
}

std::filesystem::path json_path(const std::filesystem::path& report) {
  auto p = report;
  p += ".json";
  return p;
}

int load(const std::filesystem::path& path, const RunOptions& opts, config::ScenarioConfig& cfg,
         std::ostream& err) {
  try {
    cfg = config::load_config(path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  for (const auto& [name, value] : opts.tolerance_overrides) {
    try {
      cfg.tolerances.set(name, value);
    } catch (const std::exception& e) {
      err << "error: --tol " << name << ": " << e.what() << '\n';
      return kExitError;
    }
  }
  return kExitPass;
}

int scenario_command(const std::filesystem::path& path, const RunOptions& opts, std::ostream& out,
                     std::ostream& err, bool write_csv) {
  config::ScenarioConfig cfg;
  if (int rc = load(path, opts, cfg, err)) return rc;
  RunResult res;
  try {
    res = execute(cfg, opts.parallel);
  } catch (const std::exception& e) {
    err << "error: " << path.string() << ": " << e.what() << '\n';
    return kExitError;
  }
  if (write_csv) {
    const auto csv = opts.csv ? opts.csv : cfg.csv;
    if (csv && !write_file(*csv, res.csv, err)) return kExitError;
  }
  const auto report = opts.report ? opts.report : cfg.report;
  const std::string text = report_to_text(res.report, res.title);
  if (report) {
    if (!write_file(*report, text, err)) return kExitError;
    if (!write_file(json_path(*report), report_to_json(res.report, res.title), err))
      return kExitError;
  }
  out << text;
  return res.report.passed() ? kExitPass : kExitFail;
}

}  // namespace

RunResult execute(const config::ScenarioConfig& cfg, bool parallel) {
  RunResult res;
  res.title = cfg.name + " (" + config::to_string(cfg.kind) + ")";
  const auto& tol = cfg.tolerances;
  const auto sample = parallel ? kernels::sample_frames_omp : kernels::sample_frames_serial;
  VerificationReport full;
  PhaseColumns cols;

  if (cfg.kind == config::Kind::Static) {
    const auto path = static_path(cfg);
    res.frames = sample([&](double t) { return static_frame(path, tol, t); }, cfg.grid);
  } else {
    const auto sc = build_scenario(cfg);
    if (sc.eta_convention() != model::EtaConvention::NotApplicable)
      full.add_note("Dyson map sign convention: " + model::to_string(sc.eta_convention()));
    const MatrixFn hfn = sc.hamiltonian_fn();
    const MatrixFn rhofn = sc.rho_fn();
    res.frames = sample(
        [&](double t) { return dyson_frame(sc, cfg.signatures, hfn, rhofn, tol, t); }, cfg.grid);
    for (const auto& f : res.frames) full.merge(f.checks);
    if (sc.kind() == model::ScenarioKind::Dyson41) {
      // The alternative closed form with an extra sqrt(2) on the splitting is
      // not an eigenvalue; report how far off it would be.
      double worst = 0.0;
      for (const auto& f : res.frames) {
        const double half_gap = 0.5 * std::abs(f.energies(0) - f.energies(1));
        worst = std::max(worst, (std::sqrt(2.0) - 1.0) * half_gap);
      }
      full.add_note("energy closed form with a sqrt(2) prefactor on the splitting would deviate "
                    "from the eigenvalues by up to " + format_double(worst) + "; not used");
    }
    trajectory_checks(cfg, sc, full, cols);
  }
  if (cfg.kind == config::Kind::Static)
    for (const auto& f : res.frames) full.merge(f.checks);

  if (auto note = regime_note(res.frames); !note.empty()) full.add_note(note);

  std::vector<std::string> columns;
  for (const auto& c : full.checks()) {
    const bool per_frame = !res.frames.empty() && res.frames.front().checks.find(c.name);
    const bool wanted =
        cfg.checks.empty() || std::find(cfg.checks.begin(), cfg.checks.end(), c.name) != cfg.checks.end();
    if (per_frame && wanted) columns.push_back(c.name);
  }
  res.csv = build_csv(res.frames, cols, columns);
  res.report = cfg.checks.empty() ? full : select_checks(full, cfg.checks, tol, config::to_string(cfg.kind));
  return res;
}

VerificationReport select_checks(const VerificationReport& full,
                                 const std::vector<std::string>& names, const Tolerances& tol,
                                 const std::string& kind) {
  VerificationReport out;
  for (const auto& name : names) {
    const Check* c = full.find(name);
    if (!c)
      out.skip(name, tol.get(name), "not applicable to " + kind);
    else if (c->skipped)
      out.skip(name, c->tolerance, c->detail);
    else
      out.record(name, c->residual, c->tolerance, c->detail);
  }
  for (const auto& n : full.notes()) out.add_note(n);
  return out;
}

std::string regimes_csv(const kernels::RegimeMapSpec& spec,
                        const std::vector<kernels::RegimeCell>& cells) {
  std::ostringstream out;
  out << spec.x.name << ',' << spec.y.name << ",delta,regime\n";
  for (const auto& c : cells) {
    out << format_double(c.x) << ',' << format_double(c.y) << ',' << format_double(c.delta) << ','
        << (c.defined ? model::to_string(c.regime) : std::string("undefined")) << '\n';
  }
  return out.str();
}

int run_command(const std::filesystem::path& config, const RunOptions& opts, std::ostream& out,
                std::ostream& err) {
  return scenario_command(config, opts, out, err, true);
}

int verify_command(const std::filesystem::path& config, const RunOptions& opts, std::ostream& out,
                   std::ostream& err) {
  return scenario_command(config, opts, out, err, false);
}

int regimes_command(const std::filesystem::path& path, const RunOptions& opts, std::ostream& out,
                    std::ostream& err) {
  config::ScenarioConfig cfg;
  if (int rc = load(path, opts, cfg, err)) return rc;
  if (!cfg.regimes) {
    err << "error: " << path.string() << ": missing [regimes] section\n";
    return kExitError;
  }
  std::string csv;
  try {
    const auto cells = opts.parallel ? kernels::regime_map_omp(*cfg.regimes)
                                     : kernels::regime_map_serial(*cfg.regimes);
    csv = regimes_csv(*cfg.regimes, cells);
  } catch (const std::exception& e) {
    err << "error: " << path.string() << ": " << e.what() << '\n';
    return kExitError;
  }
  const auto target = opts.csv ? opts.csv : cfg.csv;
  if (target) {
    if (!write_file(*target, csv, err)) return kExitError;
  } else {
    out << csv;
  }
  return kExitPass;
}

}  // namespace tdnh::runner
