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

// Time evolution and phases: RK4 for the TDSE, gauge-aligned instantaneous
// eigenstates of the energy operator, dynamical and geometric phases, and
// the adiabatic expansion coefficients.

#include <functional>
#include <stdexcept>
#include <vector>

#include "tdnh/grid.hpp"
#include "tdnh/linalg.hpp"
#include "tdnh/model.hpp"

namespace tdnh::evolution {

class EvolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ρ-norm drift above this aborts tdse_integrate.
inline constexpr double kDriftGuard = 1e-3;

/// Consecutive-point overlaps below this count as a gauge discontinuity.
inline constexpr double kMinOverlap = 0.9;

struct StateTrajectory {
  std::vector<double> times;
  std::vector<CVector> states;
  std::vector<double> rho_norm;  // <ψ|ρ|ψ> per point, empty without a metric
  double max_relative_drift = 0.0;
};

/// <ψ|ρ|ψ> (real part).
double rho_norm(const CVector& psi, const CMatrix& rho);

/// RK4 for i ∂t ψ = H(t) ψ. With a metric, the relative drift of <ψ|ρ|ψ> is
/// tracked and exceeding kDriftGuard raises EvolutionError.
StateTrajectory tdse_integrate(const MatrixFn& hamiltonian, const CVector& psi0,
                               const TimeGrid& grid, const MatrixFn& rho = nullptr);

/// Instantaneous eigenstates along the grid. Level 0 is the highest Re Ẽ at
/// t0; later points are matched by maximal |<φ_n(t_k)|ψ_m(t_k+1)>| and phase
/// aligned so that overlap is real and positive. ψ_n is ρ-normalised.
struct EigenTrajectory {
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> energies;
  std::vector<CMatrix> right;
  std::vector<CMatrix> left;
  double min_overlap = 1.0;

  int levels() const { return energies.empty() ? 0 : static_cast<int>(energies.front().size()); }
  int points() const { return static_cast<int>(times.size()); }
};

EigenTrajectory eigen_trajectory(const MatrixFn& energy_operator, const MatrixFn& rho,
                                 const TimeGrid& grid, double tie_tolerance = 1e-6);

/// α_n(t) = -∫_{t0}^t Ẽ_n (trapezoid). Result is [level][point]. Throws when
/// an energy has |Im| above `imag_tolerance`.
std::vector<std::vector<double>> dynamical_phase(const EigenTrajectory& traj,
                                                 double imag_tolerance = 1e-8);

/// γ̇ = i <ψ| ρ (∂t + η^{-1} η̇) |ψ>.
cplx berry_rate(const CVector& psi, const CMatrix& rho, const CMatrix& eta, const CMatrix& eta_dot,
                const CVector& dpsi);

/// i <χ|∂t χ> for the Hermitian-side state.
cplx hermitian_berry_rate(const CVector& chi, const CVector& dchi);

/// ∂t ψ_n at point k by fourth-order central differences on the aligned
/// trajectory, with fourth-order skewed stencils at the two points nearest
/// each end. Grids with fewer than five points fall back to second order.
CVector state_derivative(const EigenTrajectory& traj, int level, int k);

struct GeometricPhases {
  std::vector<std::vector<cplx>> rate;      // [level][point]
  std::vector<std::vector<double>> gamma;   // cumulative Re rate, [level][point]
  double max_imag_rate = 0.0;
  double max_hermitian_mismatch = 0.0;      // |rate - i<χ|∂χ>| with χ = ηψ
};

/// Throws EvolutionError when the trajectory has a gauge discontinuity.
GeometricPhases geometric_phases(const EigenTrajectory& traj, const MatrixFn& eta,
                                 const MatrixFn& eta_dot);

/// Samples the coefficients that must repeat for a closed loop.
using CoefficientSampler = std::function<std::vector<double>(double)>;

struct LoopPhase {
  std::vector<double> gamma;        // per level, wrapped to (-π, π]
  std::vector<double> open_integral;  // ∫ rate in the aligned gauge
  std::vector<double> closure;      // arg <χ(t0)|χ(t1)>
  double max_imag_rate = 0.0;
  double max_hermitian_mismatch = 0.0;
};

/// Loop Berry phase: ∫ γ̇ over the aligned trajectory plus the closing phase
/// arg <χ(t0)|χ(t1)>, which makes the result gauge invariant mod 2π.
/// Throws EvolutionError (open path) when the sampled coefficients at t0 and
/// t1 differ by more than `closure_tolerance`.
LoopPhase berry_phase_loop(const EigenTrajectory& traj, const MatrixFn& eta,
                           const MatrixFn& eta_dot, const CoefficientSampler& coefficients,
                           double closure_tolerance = 1e-10);

double wrap_angle(double a);  // to (-π, π]

/// Continuous change of atan2(y, x) along the grid, unwrapping ±2π jumps.
double unwrapped_angle_change(const std::function<double(double)>& y,
                              const std::function<double(double)>& x, const TimeGrid& grid);

/// ½ Δ arctan(μ_r/α_r) over the grid (diagonal Dyson map scenario).
double closed_form_berry_41(const model::ScenarioSolution& scenario, const TimeGrid& grid);
/// -½ Δ arctan(2A/α_r) over the grid (non-Hermitian Dyson map scenario).
double closed_form_berry_42(const model::ScenarioSolution& scenario, const TimeGrid& grid);

struct AdiabaticDecomposition {
  std::vector<std::vector<cplx>> coefficients;  // [level][point]
  std::vector<cplx> initial;
  std::vector<double> max_deviation;            // max_t |c_n(t) - c_n(0)|
};

/// c_n(t) = <φ_n(t)|ψ(t)> e^{-i(γ_n + α_n)}.
AdiabaticDecomposition adiabatic_decompose(const StateTrajectory& psi, const EigenTrajectory& traj,
                                           const std::vector<std::vector<double>>& dynamical,
                                           const std::vector<std::vector<double>>& geometric);

}  // namespace tdnh::evolution
