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

// The 2x2 spin Hamiltonian H = -1/2 [ω I + α σx + μ σy + τ σz] with complex
// time-dependent α, μ, τ, its static PT analysis, and the two closed-form
// Dyson-map scenarios (diagonal Hermitian map, and the non-Hermitian
// I/σz/iσy map).

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "tdnh/expr.hpp"
#include "tdnh/grid.hpp"
#include "tdnh/linalg.hpp"

namespace tdnh::model {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (const1) violated: α_r α_i ≠ -μ_r μ_i or τ_r ≠ 0.
class ConstraintViolation : public ModelError {
 public:
  ConstraintViolation(double residual, const std::string& message)
      : ModelError(message), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Coefficients at a single instant (ħ = 1).
struct ParameterValues {
  double omega = 0.0;
  cplx alpha;
  cplx mu;
  cplx tau;
};

struct ParameterPath {
  double omega = 0.0;
  expr::Expr alpha_r, alpha_i, mu_r, mu_i, tau_r, tau_i;
  bool static_pt = false;  // promises (const1) at every t

  ParameterValues at(double t) const;
};

/// max(|α_r α_i + μ_r μ_i|, |τ_r|)
double const1_residual(const ParameterValues& p);

CMatrix hamiltonian(const ParameterValues& p);
CMatrix hamiltonian(const ParameterPath& path, double t);

enum class Regime { Symmetric, Exceptional, Broken };

std::string to_string(Regime r);

struct Discriminant {
  double value = 0.0;
  Regime regime = Regime::Symmetric;
};

struct StaticOptions {
  double exceptional_band = 1e-12;  // |Δ| at or below this is an exceptional point
  double constraint_tolerance = 1e-10;
};

/// Δ = (α_r²+μ_r²)(α_r²-μ_i²) - α_r² τ_i². Requires (const1) and α_r ≠ 0.
Discriminant discriminant(const ParameterValues& p, const StaticOptions& opts = {});
Discriminant discriminant(const ParameterPath& path, double t, const StaticOptions& opts = {});

/// E± = (-ω ± sqrt(Δ)/α_r)/2, complex square root for Δ < 0.
std::pair<cplx, cplx> static_energies(const ParameterValues& p, const StaticOptions& opts = {});
std::pair<cplx, cplx> static_energies(const ParameterPath& path, double t,
                                      const StaticOptions& opts = {});

/// Anti-diagonal involution with P H = H^† P under (const1).
CMatrix static_parity(const ParameterValues& p, const StaticOptions& opts = {});
CMatrix static_parity(const ParameterPath& path, double t, const StaticOptions& opts = {});

struct ScenarioConstants {
  double c1 = 1.0;
  double c2 = 0.0;
  double omega = 0.0;
};

struct FreeFunctions41 {
  expr::Expr alpha_r, mu_r, tau_i;
};

struct FreeFunctions42 {
  expr::Expr alpha_r, mu_i, tau_i;
};

enum class ScenarioKind { Dyson41, Dyson42 };

/// Sign of the lower diagonal entry of the diagonal Dyson map. The matrix
/// display reads (c1 - c2) e^{-δ/2}; building η from η0 = c1 sinh + c2 cosh
/// and ηz = c1 cosh + c2 sinh gives (c2 - c1) e^{-δ/2}. Substitution into the
/// Dyson equation decides which one is consistent with h.
enum class EtaConvention { MatrixDisplay, Components, NotApplicable };

std::string to_string(EtaConvention c);

struct ValidationOptions {
  TimeGrid grid{0.0, 1.0, 64};
  double dyson_tolerance = 1e-7;      // relative to max(1, ‖h‖)
  double hermiticity_tolerance = 1e-9;
  double constraint_tolerance = 1e-8;
  double quadrature_tolerance = 1e-10;
};

class ScenarioSolution {
 public:
  ScenarioKind kind() const { return kind_; }
  const ScenarioConstants& constants() const { return consts_; }
  EtaConvention eta_convention() const { return convention_; }

  /// Completed coefficient set with all dependent components filled in.
  ParameterValues parameters(double t) const;

  CMatrix hamiltonian(double t) const;
  CMatrix eta(double t) const;
  CMatrix eta_dot(double t) const;  // analytic
  CMatrix rho(double t) const;      // η^† η
  CMatrix h(double t) const;        // Hermitian counterpart

  /// δ(t) = ∫_0^t τ_i (Dyson41 only).
  double delta(double t) const;
  /// A(t) (Dyson42 only).
  double a_function(double t) const;

  double alpha_r(double t) const;
  double mu_r(double t) const;
  double mu_i(double t) const;
  double tau_i(double t) const;

  /// ‖η H η^{-1} + i η̇ η^{-1} - h‖∞ with finite-difference η̇.
  double dyson_residual(double t) const;

  /// Largest relative Dyson residual seen while validating the build.
  double validation_residual() const { return validation_residual_; }

  MatrixFn hamiltonian_fn() const;
  MatrixFn eta_fn() const;
  MatrixFn eta_dot_fn() const;
  MatrixFn rho_fn() const;
  MatrixFn h_fn() const;

 private:
  friend ScenarioSolution build_scenario_41(const FreeFunctions41&, const ScenarioConstants&,
                                            const ValidationOptions&);
  friend ScenarioSolution build_scenario_42(const FreeFunctions42&, const ScenarioConstants&,
                                            const ValidationOptions&);

  void validate(const ValidationOptions& opts);

  ScenarioKind kind_ = ScenarioKind::Dyson41;
  ScenarioConstants consts_;
  EtaConvention convention_ = EtaConvention::NotApplicable;
  expr::Expr alpha_r_, mu_r_, mu_i_, tau_i_;  // free functions; unused slot stays 0
  double quad_tol_ = 1e-10;
  double validation_residual_ = 0.0;
};

/// Diagonal Hermitian Dyson map η = diag((c1+c2)e^{δ/2}, ±(c1-c2)e^{-δ/2}).
ScenarioSolution build_scenario_41(const FreeFunctions41& free, const ScenarioConstants& consts,
                                   const ValidationOptions& opts = {});

/// η = -2c1 I + (c1 μ_i/α_r)(σz + iσy) with μ_r, α_i, τ_r fixed by A(t).
ScenarioSolution build_scenario_42(const FreeFunctions42& free, const ScenarioConstants& consts,
                                   const ValidationOptions& opts = {});

/// ∫_a^b f by adaptive Simpson with absolute tolerance `tol`.
double adaptive_simpson(const expr::Expr& f, double a, double b, double tol = 1e-10);

class QuadratureError : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace tdnh::model
