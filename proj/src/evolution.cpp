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

#include "tdnh/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tdnh/operators.hpp"

namespace tdnh::evolution {

namespace {

constexpr cplx kI{0.0, 1.0};

cplx unit_phase(cplx z) {
  const double a = std::abs(z);
  return a > 0.0 ? z / a : cplx{1.0, 0.0};
}

// d/dt of uniformly sampled f at index k: fourth order where five points
// exist (skewed stencils near the ends), second order otherwise.
template <class F>
CVector grid_derivative(F f, int npts, double dt, int k) {
  if (npts < 5) {
    if (k == 0) return (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * dt);
    if (k == npts - 1) return (3.0 * f(k) - 4.0 * f(k - 1) + f(k - 2)) / (2.0 * dt);
    return (f(k + 1) - f(k - 1)) / (2.0 * dt);
  }
  const double h12 = 12.0 * dt;
  const int n = npts - 1;
  if (k == 0) return (-25.0 * f(0) + 48.0 * f(1) - 36.0 * f(2) + 16.0 * f(3) - 3.0 * f(4)) / h12;
  if (k == 1) return (-3.0 * f(0) - 10.0 * f(1) + 18.0 * f(2) - 6.0 * f(3) + f(4)) / h12;
  if (k == n - 1) return (3.0 * f(n) + 10.0 * f(n - 1) - 18.0 * f(n - 2) + 6.0 * f(n - 3) - f(n - 4)) / h12;
  if (k == n) return (25.0 * f(n) - 48.0 * f(n - 1) + 36.0 * f(n - 2) - 16.0 * f(n - 3) + 3.0 * f(n - 4)) / h12;
  return (f(k - 2) - 8.0 * f(k - 1) + 8.0 * f(k + 1) - f(k + 2)) / h12;
}

}  // namespace

double rho_norm(const CVector& psi, const CMatrix& rho) { return psi.dot(rho * psi).real(); }

StateTrajectory tdse_integrate(const MatrixFn& hamiltonian, const CVector& psi0,
                               const TimeGrid& grid, const MatrixFn& rho) {
  if (psi0.norm() == 0.0) throw EvolutionError("tdse_integrate: initial state is zero");
  StateTrajectory out;
  out.times.reserve(grid.points());
  out.states.reserve(grid.points());
  CVector psi = psi0;
  const double dt = grid.dt();
  double n0 = 0.0;
  auto track = [&](int k) {
    if (!rho) return;
    const double n = rho_norm(psi, rho(grid.at(k)));
    if (k == 0) n0 = n;
    out.rho_norm.push_back(n);
    const double drift = std::abs(n - n0) / std::max(std::abs(n0), 1e-300);
    out.max_relative_drift = std::max(out.max_relative_drift, drift);
    if (!(drift <= kDriftGuard)) {
      std::ostringstream msg;
      msg << "tdse_integrate: rho-norm drift " << drift << " at t = " << grid.at(k)
          << " exceeds " << kDriftGuard << "; use a finer grid";
      throw EvolutionError(msg.str());
    }
  };
  out.times.push_back(grid.t0());
  out.states.push_back(psi);
  track(0);
  for (int k = 0; k < grid.steps(); ++k) {
    const double t = grid.at(k);
    const CMatrix h0 = hamiltonian(t);
    const CMatrix hm = hamiltonian(t + 0.5 * dt);
    const CMatrix h1 = hamiltonian(t + dt);
    const CVector k1 = -kI * (h0 * psi);
    const CVector k2 = -kI * (hm * (psi + 0.5 * dt * k1));
    const CVector k3 = -kI * (hm * (psi + 0.5 * dt * k2));
    const CVector k4 = -kI * (h1 * (psi + dt * k3));
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.times.push_back(grid.at(k + 1));
    out.states.push_back(psi);
    track(k + 1);
  }
  return out;
}

EigenTrajectory eigen_trajectory(const MatrixFn& energy_operator, const MatrixFn& rho,
                                 const TimeGrid& grid, double tie_tolerance) {
  EigenTrajectory traj;
  const int npts = grid.points();
  traj.times.reserve(npts);
  traj.energies.reserve(npts);
  traj.right.reserve(npts);
  traj.left.reserve(npts);

  for (int k = 0; k < npts; ++k) {
    const double t = grid.at(k);
    const CMatrix r = rho(t);
    auto es = linalg::eig_biorthogonal(
        energy_operator(t), k == 0 ? linalg::Ordering::Descending : linalg::Ordering::Unsorted);
    operators::rho_normalize(es, r);
    const int n = es.size();
    if (k == 0) {
      traj.times.push_back(t);
      traj.energies.push_back(es.values);
      traj.right.push_back(es.right);
      traj.left.push_back(es.left);
      continue;
    }
    const CMatrix& prev_left = traj.left.back();
    const CMatrix overlaps = prev_left.adjoint() * es.right;  // (n, m) = <φ_n(prev)|ψ_m(new)>
    std::vector<int> assign(n, -1);
    std::vector<bool> used(n, false);
    for (int lvl = 0; lvl < n; ++lvl) {
      int best = -1;
      double best_val = -1.0, second = -1.0;
      for (int m = 0; m < n; ++m) {
        const double v = std::abs(overlaps(lvl, m));
        if (v > best_val) {
          second = best_val;
          best_val = v;
          best = m;
        } else if (v > second) {
          second = v;
        }
      }
      if (n > 1 && best_val - second <= tie_tolerance) {
        std::ostringstream msg;
        msg << "eigen_trajectory: level-crossing ambiguity at t = " << t;
        throw EvolutionError(msg.str());
      }
      if (used[best]) {
        std::ostringstream msg;
        msg << "eigen_trajectory: two levels map onto one eigenvector at t = " << t;
        throw EvolutionError(msg.str());
      }
      used[best] = true;
      assign[lvl] = best;
      traj.min_overlap = std::min(traj.min_overlap, best_val);
    }
    Eigen::VectorXcd values(n);
    CMatrix right(n, n), left(n, n);
    for (int lvl = 0; lvl < n; ++lvl) {
      const int m = assign[lvl];
      const cplx phase = std::conj(unit_phase(overlaps(lvl, m)));
      values(lvl) = es.values(m);
      right.col(lvl) = es.right.col(m) * phase;
      left.col(lvl) = es.left.col(m) * phase;
    }
    traj.times.push_back(t);
    traj.energies.push_back(values);
    traj.right.push_back(std::move(right));
    traj.left.push_back(std::move(left));
  }
  return traj;
}

std::vector<std::vector<double>> dynamical_phase(const EigenTrajectory& traj,
                                                 double imag_tolerance) {
  const int levels = traj.levels();
  const int npts = traj.points();
  std::vector<std::vector<double>> alpha(levels, std::vector<double>(npts, 0.0));
  for (int k = 0; k < npts; ++k) {
    for (int n = 0; n < levels; ++n) {
      const cplx e = traj.energies[k](n);
      if (std::abs(e.imag()) > imag_tolerance) {
        std::ostringstream msg;
        msg << "dynamical_phase: complex energy " << e << " at t = " << traj.times[k];
        throw EvolutionError(msg.str());
      }
      if (k > 0) {
        const double dt = traj.times[k] - traj.times[k - 1];
        alpha[n][k] = alpha[n][k - 1] -
                      0.5 * dt * (traj.energies[k - 1](n).real() + e.real());
      }
    }
  }
  return alpha;
}

cplx berry_rate(const CVector& psi, const CMatrix& rho, const CMatrix& eta, const CMatrix& eta_dot,
                const CVector& dpsi) {
  const CVector gen = dpsi + linalg::checked_inverse(eta) * (eta_dot * psi);
  return kI * psi.dot(rho * gen);
}

cplx hermitian_berry_rate(const CVector& chi, const CVector& dchi) {
  return kI * chi.dot(dchi) / chi.squaredNorm();
}

CVector state_derivative(const EigenTrajectory& traj, int level, int k) {
  if (traj.points() < 3) throw EvolutionError("state_derivative: need at least three grid points");
  return grid_derivative([&](int j) -> CVector { return traj.right[j].col(level); }, traj.points(),
                         traj.times[1] - traj.times[0], k);
}

GeometricPhases geometric_phases(const EigenTrajectory& traj, const MatrixFn& eta,
                                 const MatrixFn& eta_dot) {
  if (traj.min_overlap < kMinOverlap) {
    std::ostringstream msg;
    msg << "geometric_phases: gauge discontinuity (min overlap " << traj.min_overlap
        << " < " << kMinOverlap << "); refine the grid";
    throw EvolutionError(msg.str());
  }
  const int levels = traj.levels();
  const int npts = traj.points();
  GeometricPhases out;
  out.rate.assign(levels, std::vector<cplx>(npts));
  out.gamma.assign(levels, std::vector<double>(npts, 0.0));

  std::vector<CMatrix> etas(npts), eta_dots(npts);
  for (int k = 0; k < npts; ++k) {
    etas[k] = eta(traj.times[k]);
    eta_dots[k] = eta_dot(traj.times[k]);
  }
  const double dt = traj.times[1] - traj.times[0];
  for (int n = 0; n < levels; ++n) {
    auto chi = [&](int j) -> CVector { return etas[j] * traj.right[j].col(n); };
    for (int k = 0; k < npts; ++k) {
      const CVector psi = traj.right[k].col(n);
      const CMatrix rho = etas[k].adjoint() * etas[k];
      const cplx r = berry_rate(psi, rho, etas[k], eta_dots[k], state_derivative(traj, n, k));
      out.rate[n][k] = r;
      out.max_imag_rate = std::max(out.max_imag_rate, std::abs(r.imag()));

      const CVector dchi = grid_derivative(chi, npts, dt, k);
      const cplx rh = hermitian_berry_rate(chi(k), dchi);
      out.max_hermitian_mismatch = std::max(out.max_hermitian_mismatch, std::abs(r - rh));

      if (k > 0)
        out.gamma[n][k] = out.gamma[n][k - 1] + 0.5 * dt * (out.rate[n][k - 1].real() + r.real());
    }
  }
  return out;
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::remainder(a, two_pi);  // [-π, π]
  if (w <= -std::numbers::pi) w += two_pi;
  return w;
}

LoopPhase berry_phase_loop(const EigenTrajectory& traj, const MatrixFn& eta,
                           const MatrixFn& eta_dot, const CoefficientSampler& coefficients,
                           double closure_tolerance) {
  const double t0 = traj.times.front(), t1 = traj.times.back();
  if (coefficients) {
    const auto a = coefficients(t0);
    const auto b = coefficients(t1);
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
      worst = std::max(worst, std::abs(a[i] - b[i]));
    if (a.size() != b.size() || worst > closure_tolerance) {
      std::ostringstream msg;
      msg << "berry_phase_loop: parameter path is open (endpoint mismatch " << worst << ")";
      throw EvolutionError(msg.str());
    }
  }
  const GeometricPhases g = geometric_phases(traj, eta, eta_dot);
  LoopPhase out;
  out.max_imag_rate = g.max_imag_rate;
  out.max_hermitian_mismatch = g.max_hermitian_mismatch;
  const CMatrix eta0 = eta(t0), eta1 = eta(t1);
  for (int n = 0; n < traj.levels(); ++n) {
    const CVector chi0 = eta0 * traj.right.front().col(n);
    const CVector chi1 = eta1 * traj.right.back().col(n);
    const cplx ov = chi0.dot(chi1) / (chi0.norm() * chi1.norm());
    if (std::abs(ov) < 1.0 - 1e-6) {
      std::ostringstream msg;
      msg << "berry_phase_loop: eigenstate of level " << n
          << " does not return to its initial ray (|overlap| = " << std::abs(ov) << ")";
      throw EvolutionError(msg.str());
    }
    const double integral = g.gamma[n].back();
    const double closure = std::arg(ov);
    out.open_integral.push_back(integral);
    out.closure.push_back(closure);
    out.gamma.push_back(wrap_angle(integral + closure));
  }
  return out;
}

double unwrapped_angle_change(const std::function<double(double)>& y,
                              const std::function<double(double)>& x, const TimeGrid& grid) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double total = 0.0;
  double prev = 0.0;
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.at(k);
    const double xv = x(t), yv = y(t);
    if (xv == 0.0 && yv == 0.0) {
      std::ostringstream msg;
      msg << "closed-form Berry phase: angle undefined at t = " << t;
      throw EvolutionError(msg.str());
    }
    const double a = std::atan2(yv, xv);
    if (k > 0) {
      double step = a - prev;
      step -= two_pi * std::round(step / two_pi);
      total += step;
    }
    prev = a;
  }
  return total;
}

double closed_form_berry_41(const model::ScenarioSolution& scenario, const TimeGrid& grid) {
  return 0.5 * unwrapped_angle_change([&](double t) { return scenario.mu_r(t); },
                                      [&](double t) { return scenario.alpha_r(t); }, grid);
}

double closed_form_berry_42(const model::ScenarioSolution& scenario, const TimeGrid& grid) {
  return -0.5 * unwrapped_angle_change([&](double t) { return 2.0 * scenario.a_function(t); },
                                       [&](double t) { return scenario.alpha_r(t); }, grid);
}

AdiabaticDecomposition adiabatic_decompose(const StateTrajectory& psi, const EigenTrajectory& traj,
                                           const std::vector<std::vector<double>>& dynamical,
                                           const std::vector<std::vector<double>>& geometric) {
  if (psi.states.size() != traj.times.size())
    throw EvolutionError("adiabatic_decompose: trajectories are on different grids");
  const int levels = traj.levels();
  const int npts = traj.points();
  AdiabaticDecomposition out;
  out.coefficients.assign(levels, std::vector<cplx>(npts));
  out.max_deviation.assign(levels, 0.0);
  for (int n = 0; n < levels; ++n) {
    for (int k = 0; k < npts; ++k) {
      const cplx proj = traj.left[k].col(n).dot(psi.states[k]);
      const double phase = geometric[n][k] + dynamical[n][k];
      out.coefficients[n][k] = proj * std::exp(-kI * phase);
    }
    out.initial.push_back(out.coefficients[n][0]);
    for (int k = 0; k < npts; ++k)
      out.max_deviation[n] =
          std::max(out.max_deviation[n], std::abs(out.coefficients[n][k] - out.initial[n]));
  }
  return out;
}

}  // namespace tdnh::evolution
