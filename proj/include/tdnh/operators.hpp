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

// Energy operator, metric, C/P operators and the identity checks that tie
// them together, including the three conditions under which the
// instantaneous energies are guaranteed real.

#include <optional>
#include <vector>

#include "tdnh/grid.hpp"
#include "tdnh/linalg.hpp"
#include "tdnh/model.hpp"
#include "tdnh/report.hpp"

namespace tdnh::operators {

class OperatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// H̃ = H + i η^{-1} η̇ (ħ = 1). Throws linalg::SingularMatrix for singular η.
CMatrix energy_operator(const CMatrix& hamiltonian, const CMatrix& eta, const CMatrix& eta_dot);

struct MetricTrajectory {
  std::vector<double> times;
  std::vector<CMatrix> rho;
  bool positivity_lost = false;
  std::optional<int> first_loss_index;
};

/// Integrates i ρ̇ = H^† ρ - ρ H with fixed-step RK4, re-symmetrising
/// ρ -> (ρ + ρ^†)/2 after every step. Loss of positivity is flagged.
MetricTrajectory metric_ode_solve(const MatrixFn& hamiltonian, const CMatrix& rho0,
                                  const TimeGrid& grid);

/// ρ / sqrt(det ρ), so that det = 1.
CMatrix unit_determinant(const CMatrix& rho);

/// Ĉ = P ρ̂ for ρ̂ with det ρ̂ = 1. Throws OperatorError when det ρ̂ deviates
/// from 1 by more than `det_tolerance`.
CMatrix c_hat(const CMatrix& parity, const CMatrix& rho_hat, double det_tolerance = 1e-9);

/// Signature vector: +1 / -1 per level, in eigensystem order.
using Signatures = std::vector<int>;

/// (+1, -1, -1, ...) for a descending-ordered eigensystem.
Signatures default_signatures(int n);

/// C̃ = Σ s_n |ψ_n><φ_n|.
CMatrix c_tilde(const linalg::Eigensystem& es, const Signatures& signatures);

struct PTilde {
  CMatrix matrix;
  double hermiticity_residual = 0.0;
  std::vector<double> eigenvalues;  // ascending
  bool positive_definite = false;
};

/// P̃ = ρ C̃; throws OperatorError if P̃ is not Hermitian within `tolerance`
/// (relative to ‖P̃‖, floored at 1).
PTilde p_tilde(const CMatrix& rho, const CMatrix& c_tilde, double tolerance = 1e-9);

/// Operator stack at one instant.
struct OperatorFrame {
  double t = 0.0;
  CMatrix hamiltonian;
  CMatrix energy;   // H̃
  CMatrix eta;
  CMatrix eta_dot;
  CMatrix rho;
  linalg::Eigensystem eigensystem;  // of H̃, descending Re, ρ-normalised
  Signatures signatures;
  CMatrix c_tilde;
  PTilde p_tilde;
  std::optional<CMatrix> c_hat;
};

struct FrameOptions {
  std::optional<Signatures> signatures;  // default_signatures when empty
  double condition_bound = linalg::kDefaultConditionBound;
};

/// Rescales every pair so that <ψ_n|ρ|ψ_n> = 1 (then φ_n = ρ ψ_n).
void rho_normalize(linalg::Eigensystem& es, const CMatrix& rho);

OperatorFrame build_frame(const model::ScenarioSolution& scenario, double t,
                          const FrameOptions& opts = {});

/// ‖H̃^† ρ - ρ H̃‖∞, relative to max(1, ‖H̃‖‖ρ‖).
double quasi_hermiticity_residual(const CMatrix& energy, const CMatrix& rho);

/// ‖i ρ̇ - H^† ρ + ρ H‖∞ with finite-difference ρ̇, relative to max(1, ‖H‖‖ρ‖).
double metric_ode_residual(const MatrixFn& hamiltonian, const MatrixFn& rho, double t);

struct PtrelResult {
  VerificationReport report;
  std::vector<cplx> alphas;     // least-squares α_n per level
  bool guarantee_active = false;  // conditions i-iii all pass
};

/// Conditions i) P̃K = K^†P̃, ii) P̃|ψ_n> = α_n|φ_n> with real α_n, iii) P̃ = P̃^†,
/// for an operator K with eigensystem `es`; plus the consequence max|Im E_n|.
/// Residuals: i) relative to max(1, ‖P̃‖‖K‖); ii) ‖P̃ψ - αφ‖/‖P̃ψ‖ and
/// |Im α|/|α|; iii) relative to max(1, ‖P̃‖).
PtrelResult verify_ptrel(const CMatrix& p_tilde, const CMatrix& op, const linalg::Eigensystem& es,
                         const Tolerances& tol = {});

PtrelResult verify_ptrel(const OperatorFrame& frame, const Tolerances& tol = {});

/// Same battery run against the Hamiltonian instead of the energy operator.
/// Throws linalg::DefectiveMatrix if H is at an exceptional point.
PtrelResult verify_ptrel_on_hamiltonian(const OperatorFrame& frame, const Tolerances& tol = {});

/// Algebraic identities of one frame: C̃² = I, [C̃, H̃] = 0, P̃ = P̃^†,
/// ρ^{-1}P̃ = C̃, <ψ_n|ρ|ψ_m> = δ_nm, biorthonormality, quasi-Hermiticity.
VerificationReport frame_identities(const OperatorFrame& frame, const Tolerances& tol = {});

}  // namespace tdnh::operators
