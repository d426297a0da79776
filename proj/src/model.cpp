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

#include "tdnh/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace tdnh::model {

namespace {

constexpr cplx kI{0.0, 1.0};

double require_nonzero(double v, const char* what, double t) {
  if (v == 0.0 || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << what << " vanishes at t = " << t;
    throw ModelError(msg.str());
  }
  return v;
}

void require_const1(const ParameterValues& p, const StaticOptions& opts) {
  const double r = const1_residual(p);
  if (r > opts.constraint_tolerance) {
    std::ostringstream msg;
    msg << "static PT constraints violated (residual " << r << ")";
    throw ConstraintViolation(r, msg.str());
  }
  if (p.alpha.real() == 0.0) throw ModelError("alpha_r = 0: discriminant undefined");
}

double simpson_step(const expr::Expr& f, double a, double fa, double b, double fb, double fm,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f.eval(lm);
  const double frm = f.eval(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (!std::isfinite(delta)) throw QuadratureError("quadrature: non-finite integrand");
  if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) throw QuadratureError("quadrature: recursion limit reached before tolerance");
  return simpson_step(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

ParameterValues ParameterPath::at(double t) const {
  ParameterValues p;
  p.omega = omega;
  p.alpha = {alpha_r.eval(t), alpha_i.eval(t)};
  p.mu = {mu_r.eval(t), mu_i.eval(t)};
  p.tau = {tau_r.eval(t), tau_i.eval(t)};
  return p;
}

double const1_residual(const ParameterValues& p) {
  return std::max(std::abs(p.alpha.real() * p.alpha.imag() + p.mu.real() * p.mu.imag()),
                  std::abs(p.tau.real()));
}

CMatrix hamiltonian(const ParameterValues& p) {
  CMatrix h(2, 2);
  h(0, 0) = p.omega + p.tau;
  h(0, 1) = p.alpha - kI * p.mu;
  h(1, 0) = p.alpha + kI * p.mu;
  h(1, 1) = p.omega - p.tau;
  return -0.5 * h;
}

CMatrix hamiltonian(const ParameterPath& path, double t) { return hamiltonian(path.at(t)); }

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Symmetric: return "symmetric";
    case Regime::Exceptional: return "exceptional";
    case Regime::Broken: return "broken";
  }
  return "unknown";
}

Discriminant discriminant(const ParameterValues& p, const StaticOptions& opts) {
  require_const1(p, opts);
  const double ar = p.alpha.real(), mr = p.mu.real(), mi = p.mu.imag(), ti = p.tau.imag();
  Discriminant d;
  d.value = (ar * ar + mr * mr) * (ar * ar - mi * mi) - ar * ar * ti * ti;
  if (std::abs(d.value) <= opts.exceptional_band)
    d.regime = Regime::Exceptional;
  else
    d.regime = d.value > 0.0 ? Regime::Symmetric : Regime::Broken;
  return d;
}

Discriminant discriminant(const ParameterPath& path, double t, const StaticOptions& opts) {
  return discriminant(path.at(t), opts);
}

std::pair<cplx, cplx> static_energies(const ParameterValues& p, const StaticOptions& opts) {
  const Discriminant d = discriminant(p, opts);
  const cplx root = std::sqrt(cplx(d.value, 0.0)) / p.alpha.real();
  return {0.5 * (-p.omega + root), 0.5 * (-p.omega - root)};
}

std::pair<cplx, cplx> static_energies(const ParameterPath& path, double t,
                                      const StaticOptions& opts) {
  return static_energies(path.at(t), opts);
}

CMatrix static_parity(const ParameterValues& p, const StaticOptions& opts) {
  const double r = const1_residual(p);
  if (r > opts.constraint_tolerance) {
    std::ostringstream msg;
    msg << "static PT constraints violated (residual " << r << ")";
    throw ConstraintViolation(r, msg.str());
  }
  const double ar = p.alpha.real(), mr = p.mu.real();
  const double s = std::hypot(ar, mr);
  if (s == 0.0) throw ModelError("parity undefined for alpha_r = mu_r = 0");
  CMatrix P(2, 2);
  P << 0.0, cplx(ar, -mr) / s, cplx(ar, mr) / s, 0.0;
  return P;
}

CMatrix static_parity(const ParameterPath& path, double t, const StaticOptions& opts) {
  return static_parity(path.at(t), opts);
}

std::string to_string(EtaConvention c) {
  switch (c) {
    case EtaConvention::MatrixDisplay: return "matrix-display";
    case EtaConvention::Components: return "components";
    case EtaConvention::NotApplicable: return "n/a";
  }
  return "unknown";
}

double adaptive_simpson(const expr::Expr& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  if (f.is_constant()) return f.eval(a) * (b - a);
  const double fa = f.eval(a), fb = f.eval(b), fm = f.eval(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, fa, b, fb, fm, whole, tol, 48);
}

// ---------------------------------------------------------------------------
// ScenarioSolution

double ScenarioSolution::delta(double t) const {
  if (kind_ != ScenarioKind::Dyson41) throw ModelError("delta(t) is defined for dyson41 only");
  return adaptive_simpson(tau_i_, 0.0, t, quad_tol_);
}

double ScenarioSolution::a_function(double t) const {
  if (kind_ != ScenarioKind::Dyson42) throw ModelError("A(t) is defined for dyson42 only");
  const auto ar = alpha_r_.eval_dual(t);
  const auto mi = mu_i_.eval_dual(t);
  const double ti = tau_i_.eval(t);
  require_nonzero(mi.value, "mu_i", t);
  return ti * ar.value * ar.value / (mi.value * mi.value) - ar.derivative / mi.value +
         ar.value * mi.derivative / (mi.value * mi.value);
}

double ScenarioSolution::alpha_r(double t) const { return alpha_r_.eval(t); }

double ScenarioSolution::tau_i(double t) const { return tau_i_.eval(t); }

double ScenarioSolution::mu_r(double t) const {
  if (kind_ == ScenarioKind::Dyson41) return mu_r_.eval(t);
  return -tau_i_.eval(t) - 2.0 * a_function(t);
}

double ScenarioSolution::mu_i(double t) const {
  if (kind_ == ScenarioKind::Dyson42) return mu_i_.eval(t);
  const double d = delta(t);
  const double e0 = consts_.c1 * std::sinh(0.5 * d) + consts_.c2 * std::cosh(0.5 * d);
  const double ez = consts_.c1 * std::cosh(0.5 * d) + consts_.c2 * std::sinh(0.5 * d);
  return -2.0 * alpha_r_.eval(t) * e0 * ez / (e0 * e0 + ez * ez);
}

ParameterValues ScenarioSolution::parameters(double t) const {
  ParameterValues p;
  p.omega = consts_.omega;
  const double ar = require_nonzero(alpha_r_.eval(t), "alpha_r", t);
  const double ti = tau_i_.eval(t);
  if (kind_ == ScenarioKind::Dyson41) {
    const double mr = mu_r_.eval(t);
    const double mi = mu_i(t);
    p.alpha = {ar, -mr * mi / ar};
    p.mu = {mr, mi};
    p.tau = {0.0, ti};
  } else {
    const double mi = require_nonzero(mu_i_.eval(t), "mu_i", t);
    const double a = a_function(t);
    p.alpha = {ar, 2.0 * mi / ar * a};
    p.mu = {-ti - 2.0 * a, mi};
    p.tau = {mi, ti};
  }
  return p;
}

CMatrix ScenarioSolution::hamiltonian(double t) const { return model::hamiltonian(parameters(t)); }

CMatrix ScenarioSolution::eta(double t) const {
  const double c1 = consts_.c1, c2 = consts_.c2;
  if (kind_ == ScenarioKind::Dyson41) {
    const double d = delta(t);
    const double lower = convention_ == EtaConvention::Components ? c2 - c1 : c1 - c2;
    CMatrix e = CMatrix::Zero(2, 2);
    e(0, 0) = (c1 + c2) * std::exp(0.5 * d);
    e(1, 1) = lower * std::exp(-0.5 * d);
    return e;
  }
  const double ar = require_nonzero(alpha_r_.eval(t), "alpha_r", t);
  const double k = c1 * mu_i_.eval(t) / ar;
  CMatrix e(2, 2);
  e << -2.0 * c1 + k, k, -k, -2.0 * c1 - k;
  return e;
}

CMatrix ScenarioSolution::eta_dot(double t) const {
  const double c1 = consts_.c1;
  if (kind_ == ScenarioKind::Dyson41) {
    CMatrix e = eta(t);
    const double half_rate = 0.5 * tau_i_.eval(t);
    e(0, 0) *= half_rate;
    e(1, 1) *= -half_rate;
    return e;
  }
  const auto ar = alpha_r_.eval_dual(t);
  const auto mi = mu_i_.eval_dual(t);
  require_nonzero(ar.value, "alpha_r", t);
  const double kdot =
      c1 * (mi.derivative * ar.value - mi.value * ar.derivative) / (ar.value * ar.value);
  CMatrix e(2, 2);
  e << kdot, kdot, -kdot, -kdot;
  return e;
}

CMatrix ScenarioSolution::rho(double t) const {
  const CMatrix e = eta(t);
  return e.adjoint() * e;
}

CMatrix ScenarioSolution::h(double t) const {
  const double w = consts_.omega;
  const double ar = alpha_r_.eval(t);
  CMatrix out(2, 2);
  if (kind_ == ScenarioKind::Dyson41) {
    const double c1 = consts_.c1, c2 = consts_.c2;
    const double d = delta(t);
    const double mr = mu_r_.eval(t);
    const double den =
        4.0 * c1 * c2 * std::sinh(d) + 2.0 * (c1 * c1 + c2 * c2) * std::cosh(d);
    const double g = (c1 * c1 - c2 * c2) / den;
    out << -0.5 * w, g * cplx(ar, -mr), g * cplx(ar, mr), -0.5 * w;
    return out;
  }
  const double a = a_function(t);
  out << -0.5 * w, cplx(-0.5 * ar, -a), cplx(-0.5 * ar, a), -0.5 * w;
  return out;
}

double ScenarioSolution::dyson_residual(double t) const {
  const CMatrix e = eta(t);
  const CMatrix inv = linalg::checked_inverse(e);
  const CMatrix edot = linalg::operator_time_derivative([this](double s) { return eta(s); }, t);
  const CMatrix lhs = e * hamiltonian(t) * inv + kI * edot * inv;
  return linalg::norm_inf(lhs - h(t));
}

MatrixFn ScenarioSolution::hamiltonian_fn() const {
  return [self = *this](double t) { return self.hamiltonian(t); };
}
MatrixFn ScenarioSolution::eta_fn() const {
  return [self = *this](double t) { return self.eta(t); };
}
MatrixFn ScenarioSolution::eta_dot_fn() const {
  return [self = *this](double t) { return self.eta_dot(t); };
}
MatrixFn ScenarioSolution::rho_fn() const {
  return [self = *this](double t) { return self.rho(t); };
}
MatrixFn ScenarioSolution::h_fn() const {
  return [self = *this](double t) { return self.h(t); };
}

void ScenarioSolution::validate(const ValidationOptions& opts) {
  validation_residual_ = 0.0;
  for (int k = 0; k < opts.grid.points(); ++k) {
    const double t = opts.grid.at(k);
    const CMatrix hh = h(t);
    const double herm = linalg::hermiticity_residual(hh);
    if (herm > opts.hermiticity_tolerance) {
      std::ostringstream msg;
      msg << "h(t) not Hermitian at t = " << t << " (residual " << herm << ")";
      throw ModelError(msg.str());
    }
    if (kind_ == ScenarioKind::Dyson41) {
      const double r = const1_residual(parameters(t));
      if (r > opts.constraint_tolerance) {
        std::ostringstream msg;
        msg << "constraint residual " << r << " at t = " << t;
        throw ConstraintViolation(r, msg.str());
      }
    }
    const double rel = dyson_residual(t) / std::max(1.0, linalg::norm_inf(hh));
    validation_residual_ = std::max(validation_residual_, rel);
    if (!(rel <= opts.dyson_tolerance)) {
      std::ostringstream msg;
      msg << "Dyson equation residual " << rel << " exceeds " << opts.dyson_tolerance
          << " at t = " << t;
      throw ConstraintViolation(rel, msg.str());
    }
  }
}

ScenarioSolution build_scenario_41(const FreeFunctions41& free, const ScenarioConstants& consts,
                                   const ValidationOptions& opts) {
  const double c1 = consts.c1, c2 = consts.c2;
  if (std::abs(c1 * c1 - c2 * c2) <= 1e-12 * std::max({1.0, c1 * c1, c2 * c2}))
    throw ModelError("dyson41 requires c1^2 != c2^2 (det rho would vanish)");

  ScenarioSolution s;
  s.kind_ = ScenarioKind::Dyson41;
  s.consts_ = consts;
  s.alpha_r_ = free.alpha_r;
  s.mu_r_ = free.mu_r;
  s.tau_i_ = free.tau_i;
  s.quad_tol_ = opts.quadrature_tolerance;

  for (int k = 0; k < opts.grid.points(); ++k)
    require_nonzero(free.alpha_r.eval(opts.grid.at(k)), "alpha_r", opts.grid.at(k));

  // Try the matrix display first; keep the components form if only it
  // satisfies the Dyson equation with h as printed.
  std::string first_failure;
  for (EtaConvention c : {EtaConvention::MatrixDisplay, EtaConvention::Components}) {
    s.convention_ = c;
    try {
      s.validate(opts);
      return s;
    } catch (const ConstraintViolation& e) {
      if (first_failure.empty()) first_failure = e.what();
    }
  }
  throw ConstraintViolation(s.validation_residual_,
                            "dyson41: no Dyson map convention satisfies the Dyson equation (" +
                                first_failure + ")");
}

ScenarioSolution build_scenario_42(const FreeFunctions42& free, const ScenarioConstants& consts,
                                   const ValidationOptions& opts) {
  if (consts.c1 == 0.0) throw ModelError("dyson42 requires c1 != 0");
  ScenarioSolution s;
  s.kind_ = ScenarioKind::Dyson42;
  s.consts_ = consts;
  s.consts_.c2 = 0.0;
  s.alpha_r_ = free.alpha_r;
  s.mu_i_ = free.mu_i;
  s.tau_i_ = free.tau_i;
  s.quad_tol_ = opts.quadrature_tolerance;
  s.convention_ = EtaConvention::NotApplicable;
  for (int k = 0; k < opts.grid.points(); ++k) {
    const double t = opts.grid.at(k);
    require_nonzero(free.alpha_r.eval(t), "alpha_r", t);
    require_nonzero(free.mu_i.eval(t), "mu_i", t);
  }
  s.validate(opts);
  return s;
}

}  // namespace tdnh::model
