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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <string>

#include "support.hpp"
#include "tdnh/evolution.hpp"
#include "tdnh/operators.hpp"

namespace {

using namespace tdnh;
using namespace tdnh::evolution;
using tdnh::testing::max_diff;
using tdnh::testing::uniform;

constexpr cplx I{0.0, 1.0};

model::ScenarioSolution scenario41(double c1, double c2, double omega, const std::string& ar,
                                   const std::string& mr, const std::string& ti,
                                   const TimeGrid& check = {0.0, 1.0, 64}) {
  model::ValidationOptions opts;
  opts.grid = check;
  return model::build_scenario_41({expr::parse(ar), expr::parse(mr), expr::parse(ti)}, {c1, c2, omega}, opts);
}

model::ScenarioSolution scenario42(double c1, double omega, const std::string& ar, const std::string& mi,
                                   const std::string& ti) {
  return model::build_scenario_42({expr::parse(ar), expr::parse(mi), expr::parse(ti)}, {c1, 0.0, omega});
}

MatrixFn energy_fn(const model::ScenarioSolution& sc) {
  return [&sc](double t) { return operators::energy_operator(sc.hamiltonian(t), sc.eta(t), sc.eta_dot(t)); };
}

CoefficientSampler sampler(const model::ScenarioSolution& sc) {
  return [&sc](double t) {
    const auto p = sc.parameters(t);
    return std::vector<double>{p.alpha.real(), p.alpha.imag(), p.mu.real(), p.mu.imag(), p.tau.real(), p.tau.imag()};
  };
}

TEST(Tdse, ZeroHamiltonianKeepsState) {
  const CVector psi0 = tdnh::testing::random_matrix(2, 1).col(0);
  const auto st = tdse_integrate([](double) { return CMatrix(CMatrix::Zero(2, 2)); }, psi0, TimeGrid(0, 3, 30));
  for (const auto& s : st.states) EXPECT_LE(max_diff(s, psi0), 0.0);
}

TEST(Tdse, DiagonalPhases) {
  const double a = 0.8, b = -1.3;
  CMatrix h = CMatrix::Zero(2, 2);
  h(0, 0) = a;
  h(1, 1) = b;
  CVector psi0(2);
  psi0 << 0.6, 0.8;
  const auto st = tdse_integrate([h](double) { return h; }, psi0, TimeGrid(0, 2, 1000));
  CVector exact(2);
  exact << 0.6 * std::exp(-I * a * 2.0), 0.8 * std::exp(-I * b * 2.0);
  EXPECT_LE(max_diff(st.states.back(), exact), 1e-10);
}

TEST(Tdse, RabiOscillation) {
  const auto st = tdse_integrate([](double) { return linalg::sigma_x(); }, CVector::Unit(2, 0),
                                 TimeGrid(0, 1.5, 1500));
  CVector exact(2);
  exact << std::cos(1.5), -I * std::sin(1.5);
  EXPECT_LE(max_diff(st.states.back(), exact), 1e-10);
}

TEST(Tdse, MetricNormConserved) {
  const auto s41 = scenario41(2.0, 0.5, 0.7, "1+0.3*sin(t)", "0.4*cos(t)", "1.5");
  const auto s42 = scenario42(0.8, 0.3, "1+0.3*sin(t)", "0.5+0.2*cos(2*t)", "0.7+sin(t)/3");
  for (const auto* sc : {&s41, &s42}) {
    const auto st = tdse_integrate(sc->hamiltonian_fn(), CVector::Unit(2, 1), TimeGrid(0, 1, 1000), sc->rho_fn());
    EXPECT_LE(st.max_relative_drift, 1e-8);
    ASSERT_EQ(st.rho_norm.size(), st.states.size());
  }
}

TEST(Tdse, DriftGuardOnCoarseGrid) {
  const auto sc = scenario41(2.0, 0.5, 0.0, "1", "0", "8", {0.0, 1.0, 256});
  EXPECT_THROW(tdse_integrate(sc.hamiltonian_fn(), CVector::Unit(2, 0), TimeGrid(0, 1, 4), sc.rho_fn()),
               EvolutionError);
}

TEST(EigenTrajectory, ConstantHermitian) {
  const CMatrix h = linalg::sigma_x() + 0.5 * linalg::sigma_z();
  const MatrixFn hf = [h](double) { return h; };
  const MatrixFn id = [](double) { return linalg::identity(); };
  const auto traj = eigen_trajectory(hf, id, TimeGrid(0, 1, 50));
  EXPECT_NEAR(traj.energies.front()(0).real(), std::sqrt(1.25), 1e-14);
  EXPECT_NEAR(traj.energies.front()(1).real(), -std::sqrt(1.25), 1e-14);
  for (int k = 0; k < traj.points(); ++k) {
    EXPECT_LE(max_diff(traj.right[k], traj.right.front()), 1e-14);
    EXPECT_LE(max_diff(traj.energies[k], traj.energies.front()), 1e-14);
  }
  EXPECT_NEAR(traj.min_overlap, 1.0, 1e-12);
}

TEST(EigenTrajectory, NonHermitianMapEnergies) {
  const double omega = 0.3;
  const auto sc = scenario42(0.8, omega, "1+0.3*sin(t)", "0.5+0.2*cos(2*t)", "0.7+sin(t)/3");
  const TimeGrid grid(0, 2, 200);
  const auto traj = eigen_trajectory(energy_fn(sc), sc.rho_fn(), grid);
  for (int k = 0; k < traj.points(); ++k) {
    const double t = grid.at(k), A = sc.a_function(t), a = sc.alpha_r(t);
    const double q = std::sqrt(4 * A * A + a * a);
    EXPECT_NEAR(std::abs(traj.energies[k](0) - (-omega / 2 + q / 2)), 0.0, 1e-10);
    EXPECT_NEAR(std::abs(traj.energies[k](1) - (-omega / 2 - q / 2)), 0.0, 1e-10);
    // ρ-normalised and biorthogonal: φ = ρψ.
    for (int n = 0; n < 2; ++n) {
      const CVector psi = traj.right[k].col(n);
      EXPECT_NEAR(rho_norm(psi, sc.rho(t)), 1.0, 1e-10);
      EXPECT_LE(max_diff(traj.left[k].col(n), sc.rho(t) * psi), 1e-9);
    }
  }
}

TEST(DynamicalPhase, ConstantNonHermitianMap) {
  const auto sc = scenario42(1.0, 0.0, "1", "1", "1");
  const auto traj = eigen_trajectory(energy_fn(sc), sc.rho_fn(), TimeGrid(0, 1, 100));
  const auto alpha = dynamical_phase(traj);
  EXPECT_NEAR(alpha[0].back(), -std::sqrt(5.0) / 2, 1e-12);
  EXPECT_NEAR(alpha[1].back(), std::sqrt(5.0) / 2, 1e-12);
  EXPECT_EQ(alpha[0].front(), 0.0);
}

TEST(DynamicalPhase, ComplexEnergyRejected) {
  CMatrix h(2, 2);
  h << I, 0, 0, -I;
  const MatrixFn hf = [h](double) { return h; };
  const MatrixFn id = [](double) { return linalg::identity(); };
  const auto traj = eigen_trajectory(hf, id, TimeGrid(0, 1, 10));
  EXPECT_THROW(dynamical_phase(traj), EvolutionError);
}

TEST(StateDerivative, ExactOnQuartics) {
  // Fourth-order stencils differentiate polynomials up to degree four exactly.
  const TimeGrid grid(0.0, 1.0, 10);
  EigenTrajectory traj;
  auto f = [](double t) { return CVector(CVector::Constant(2, cplx(1 + 2 * t - t * t * t + 0.5 * std::pow(t, 4), t * t))); };
  auto df = [](double t) { return CVector(CVector::Constant(2, cplx(2 - 3 * t * t + 2 * std::pow(t, 3), 2 * t))); };
  for (int k = 0; k < grid.points(); ++k) {
    traj.times.push_back(grid.at(k));
    CMatrix m(2, 1);
    m.col(0) = f(grid.at(k));
    traj.right.push_back(m);
  }
  for (int k = 0; k < grid.points(); ++k)
    EXPECT_LE(max_diff(state_derivative(traj, 0, k), df(grid.at(k))), 1e-11) << k;
  // Three points: second order, exact on quadratics.
  EigenTrajectory small;
  for (double t : {0.0, 0.5, 1.0}) {
    small.times.push_back(t);
    small.right.push_back(CMatrix::Constant(1, 1, cplx(t * t)));
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(state_derivative(small, 0, k)(0) - 2.0 * small.times[k]), 0.0, 1e-14);
}

TEST(BerryRate, StaticHermitianIsZero) {
  const CVector psi = CVector::Unit(2, 0);
  EXPECT_EQ(berry_rate(psi, linalg::identity(), linalg::identity(), CMatrix::Zero(2, 2), CVector::Zero(2)),
            cplx(0.0));
}

TEST(BerryRate, MatchesHermitianSide) {
  for (int n = 0; n < 50; ++n) {
    const CMatrix eta = tdnh::testing::random_matrix(2) + 3.0 * linalg::identity();
    const CMatrix eta_dot = tdnh::testing::random_matrix(2);
    CVector psi = tdnh::testing::random_matrix(2, 1).col(0);
    psi /= (eta * psi).norm();
    const CVector dpsi = tdnh::testing::random_matrix(2, 1).col(0);
    const cplx lhs = berry_rate(psi, eta.adjoint() * eta, eta, eta_dot, dpsi);
    const CVector chi = eta * psi;
    const CVector dchi = eta_dot * psi + eta * dpsi;
    EXPECT_NEAR(std::abs(lhs - hermitian_berry_rate(chi, dchi)), 0.0, 1e-12);
  }
}

// Rate of the state ψ = η^{-1} χ, with χ given in closed form, against the
// closed-form integrand.
template <class Chi>
void expect_integrand(const model::ScenarioSolution& sc, Chi chi, const std::function<double(double)>& oracle) {
  auto psi = [&](double t) { return CVector(linalg::checked_inverse(sc.eta(t)) * chi(t)); };
  for (double t : {0.1, 0.45, 0.8}) {
    const double h = 1e-5;
    const CVector dpsi = (psi(t + h) - psi(t - h)) / (2 * h);
    const cplx rate = berry_rate(psi(t), sc.rho(t), sc.eta(t), sc.eta_dot(t), dpsi);
    EXPECT_NEAR(rate.real(), oracle(t), 1e-8) << t;
    EXPECT_NEAR(rate.imag(), 0.0, 1e-8) << t;
  }
}

TEST(BerryRate, DiagonalMapIntegrand) {
  const auto sc = scenario41(2.0, 0.5, 0.7, "1+0.3*sin(3*t)", "0.4*cos(2*t)", "1.5");
  const auto ar = expr::parse("1+0.3*sin(3*t)"), mr = expr::parse("0.4*cos(2*t)");
  auto oracle = [&](double t) {
    const auto a = ar.eval_dual(t), m = mr.eval_dual(t);
    return 0.5 * (a.value * m.derivative - m.value * a.derivative) / (a.value * a.value + m.value * m.value);
  };
  for (double sign : {1.0, -1.0}) {
    auto chi = [&, sign](double t) {
      const cplx z(sc.alpha_r(t), sc.mu_r(t));
      CVector v(2);
      v << sign * std::abs(z) / z, 1.0;
      return CVector(v / std::sqrt(2.0));
    };
    expect_integrand(sc, chi, oracle);
  }
}

TEST(BerryRate, NonHermitianMapIntegrand) {
  const auto sc = scenario42(0.8, 0.3, "1+0.3*sin(t)", "0.5+0.2*cos(2*t)", "0.7+sin(t)/3");
  auto oracle = [&](double t) {
    const double h = 1e-5;
    const double a = sc.alpha_r(t), A = sc.a_function(t);
    const double da = (sc.alpha_r(t + h) - sc.alpha_r(t - h)) / (2 * h);
    const double dA = (sc.a_function(t + h) - sc.a_function(t - h)) / (2 * h);
    return -0.5 * (2 * a * dA - 2 * A * da) / (4 * A * A + a * a);
  };
  for (double sign : {1.0, -1.0}) {
    auto chi = [&, sign](double t) {
      const double A = sc.a_function(t), a = sc.alpha_r(t);
      const double q = std::sqrt(4 * A * A + a * a);
      CVector v(2);
      v << -sign * I * q / (2 * A + I * a), 1.0;
      return CVector(v / std::sqrt(2.0));
    };
    expect_integrand(sc, chi, oracle);
  }
}

LoopPhase loop_of(const model::ScenarioSolution& sc, const TimeGrid& grid) {
  const auto traj = eigen_trajectory(energy_fn(sc), sc.rho_fn(), grid);
  return berry_phase_loop(traj, sc.eta_fn(), sc.eta_dot_fn(), sampler(sc));
}

TEST(BerryLoop, UnitCircleGivesPi) {
  const TimeGrid grid(0, 1, 2000);
  for (double c2 : {0.0, 0.3}) {
    const auto sc = scenario41(1.0, c2, 0.4, "cos(2*pi*t)", "sin(2*pi*t)", "0", grid);
    const auto loop = loop_of(sc, grid);
    for (double g : loop.gamma) EXPECT_LE(std::abs(wrap_angle(g - M_PI)), 1e-6) << g;
    EXPECT_NEAR(std::abs(wrap_angle(closed_form_berry_41(sc, grid))), M_PI, 1e-12);
    EXPECT_LE(loop.max_imag_rate, 1e-8);
  }
}

TEST(BerryLoop, NoWindingGivesZero) {
  const TimeGrid grid(0, 1, 2000);
  const auto sc = scenario41(1.5, 0.2, 0.4, "2+cos(2*pi*t)", "sin(2*pi*t)", "0", grid);
  const auto loop = loop_of(sc, grid);
  for (double g : loop.gamma) EXPECT_LE(std::abs(g), 1e-8);
  EXPECT_NEAR(closed_form_berry_41(sc, grid), 0.0, 1e-12);
}

TEST(BerryLoop, NonHermitianMapMatchesClosedForm) {
  const TimeGrid grid(0, 1, 8000);
  const auto sc = scenario42(0.8, 0.3, "1+0.5*cos(2*pi*t)", "1+0.3*sin(2*pi*t)", "2*cos(2*pi*t)");
  const auto loop = loop_of(sc, grid);
  const double cf = closed_form_berry_42(sc, grid);
  for (double g : loop.gamma) EXPECT_LE(std::abs(wrap_angle(g - cf)), 1e-6);
  // The open integral alone is not trivially zero along this loop.
  EXPECT_GT(std::abs(loop.open_integral[0]) + std::abs(loop.closure[0]), 0.0);
}

TEST(BerryLoop, OpenPathThrows) {
  const TimeGrid grid(0, 1, 200);
  const auto sc = scenario41(1.0, 0.0, 0.4, "1+t", "sin(2*pi*t)", "0", grid);
  const auto traj = eigen_trajectory(energy_fn(sc), sc.rho_fn(), grid);
  EXPECT_THROW(berry_phase_loop(traj, sc.eta_fn(), sc.eta_dot_fn(), sampler(sc)), EvolutionError);
}

TEST(BerryLoop, GaugeInvariant) {
  const TimeGrid grid(0, 1, 16000);
  const auto sc = scenario41(1.0, 0.3, 0.4, "cos(2*pi*t)", "sin(2*pi*t)", "0", grid);
  auto traj = eigen_trajectory(energy_fn(sc), sc.rho_fn(), grid);
  const auto base = berry_phase_loop(traj, sc.eta_fn(), sc.eta_dot_fn(), sampler(sc));
  // θ(1) - θ(0) is a whole number of turns.
  // The gauge must be resolved by the grid: the trapezoid of its central
  // difference carries an error of order dt^2 times its third derivative.
  const double a = uniform(0.2, 0.5), c = 1.0;
  const int turns = static_cast<int>(std::round(uniform(-1, 1)));
  for (int k = 0; k < grid.points(); ++k) {
    const double t = grid.at(k);
    for (int n = 0; n < 2; ++n) {
      const cplx s = std::exp(-I * (a * std::sin(2 * M_PI * c * t) + 2 * M_PI * turns * t + 0.3 * n));
      traj.right[k].col(n) /= s;
      traj.left[k].col(n) *= std::conj(s);
    }
  }
  const auto gauged = berry_phase_loop(traj, sc.eta_fn(), sc.eta_dot_fn(), sampler(sc));
  for (int n = 0; n < 2; ++n) {
    EXPECT_LE(std::abs(wrap_angle(gauged.gamma[n] - base.gamma[n])), 1e-6);
    EXPECT_GT(std::abs(gauged.open_integral[n] - base.open_integral[n]) + std::abs(turns), 0.0);
  }
}

TEST(WrapAngle, Range) {
  EXPECT_NEAR(wrap_angle(3 * M_PI), M_PI, 1e-12);
  EXPECT_NEAR(wrap_angle(-M_PI), M_PI, 1e-12);
  EXPECT_NEAR(wrap_angle(0.5 - 4 * M_PI), 0.5, 1e-12);
}

struct SweepResult {
  double deviation;
  double gap;
};

// Starts in the upper instantaneous eigenstate and sweeps the diagonal-map
// scenario over [0, T]; returns max |c_0(t) - c_0(0)|.
SweepResult adiabatic_sweep(double T) {
  char ar[64], mr[64], ti[64];
  std::snprintf(ar, sizeof ar, "cos(pi*t/(1.5*%.17g))", T);
  std::snprintf(mr, sizeof mr, "sin(pi*t/(1.5*%.17g))", T);
  std::snprintf(ti, sizeof ti, "0.6*cos(pi*t/%.17g)/%.17g", T, T);
  const int steps = std::max(400, static_cast<int>(40 * T));
  const TimeGrid grid(0, T, steps);
  const auto sc = scenario41(1.0, 0.2, 0.3, ar, mr, ti, {0, T, 256});
  const auto traj = eigen_trajectory(energy_fn(sc), sc.rho_fn(), grid);
  double gap = INFINITY;
  for (const auto& e : traj.energies) gap = std::min(gap, std::abs(e(0) - e(1)));
  const auto st = tdse_integrate(sc.hamiltonian_fn(), traj.right.front().col(0), grid, sc.rho_fn());
  const auto geo = geometric_phases(traj, sc.eta_fn(), sc.eta_dot_fn());
  const auto dec = adiabatic_decompose(st, traj, dynamical_phase(traj), geo.gamma);
  EXPECT_NEAR(std::abs(dec.initial[0]), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(dec.initial[1]), 0.0, 1e-12);
  return {dec.max_deviation[0], gap};
}

TEST(Adiabatic, DeviationShrinksWithSweepTime) {
  const double gap = adiabatic_sweep(1.0).gap;
  ASSERT_GT(gap, 0.5);
  std::vector<double> dev;
  for (double m : {25.0, 50.0, 100.0, 200.0}) dev.push_back(adiabatic_sweep(m / gap).deviation);
  for (std::size_t i = 1; i < dev.size(); ++i) EXPECT_LT(dev[i], 0.7 * dev[i - 1]) << i;
  EXPECT_LT(dev.back(), 0.01);
  const double fast = adiabatic_sweep(1.0 / gap).deviation;
  EXPECT_GT(fast, 0.3);
}

}  // namespace
