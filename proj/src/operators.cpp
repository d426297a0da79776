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

#include "tdnh/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tdnh::operators {

namespace {

constexpr cplx kI{0.0, 1.0};

using linalg::norm_inf;

CMatrix metric_rhs(const CMatrix& h, const CMatrix& rho) {
  return -kI * (h.adjoint() * rho - rho * h);
}

double scaled(double residual, double scale) { return residual / std::max(1.0, scale); }

}  // namespace

CMatrix energy_operator(const CMatrix& hamiltonian, const CMatrix& eta, const CMatrix& eta_dot) {
  return hamiltonian + kI * linalg::checked_inverse(eta) * eta_dot;
}

MetricTrajectory metric_ode_solve(const MatrixFn& hamiltonian, const CMatrix& rho0,
                                  const TimeGrid& grid) {
  if (linalg::hermiticity_residual(rho0) > 1e-12 * std::max(1.0, linalg::max_abs(rho0)))
    throw OperatorError("metric_ode_solve: initial metric is not Hermitian");
  if (!linalg::positivity_check(rho0).is_positive)
    throw OperatorError("metric_ode_solve: initial metric is not positive definite");

  MetricTrajectory out;
  out.times.reserve(grid.points());
  out.rho.reserve(grid.points());
  CMatrix rho = rho0;
  out.times.push_back(grid.t0());
  out.rho.push_back(rho);
  const double dt = grid.dt();
  for (int k = 0; k < grid.steps(); ++k) {
    const double t = grid.at(k);
    const CMatrix h0 = hamiltonian(t);
    const CMatrix hm = hamiltonian(t + 0.5 * dt);
    const CMatrix h1 = hamiltonian(t + dt);
    const CMatrix k1 = metric_rhs(h0, rho);
    const CMatrix k2 = metric_rhs(hm, rho + 0.5 * dt * k1);
    const CMatrix k3 = metric_rhs(hm, rho + 0.5 * dt * k2);
    const CMatrix k4 = metric_rhs(h1, rho + dt * k3);
    rho += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    if (!out.positivity_lost && !linalg::positivity_check(rho).is_positive) {
      out.positivity_lost = true;
      out.first_loss_index = k + 1;
    }
    out.times.push_back(grid.at(k + 1));
    out.rho.push_back(rho);
  }
  return out;
}

CMatrix unit_determinant(const CMatrix& rho) {
  const double det = rho.determinant().real();
  if (!(det > 0.0)) throw OperatorError("unit_determinant: metric determinant is not positive");
  return rho / std::pow(det, 1.0 / static_cast<double>(rho.rows()));
}

CMatrix c_hat(const CMatrix& parity, const CMatrix& rho_hat, double det_tolerance) {
  const cplx det = rho_hat.determinant();
  if (std::abs(det - 1.0) > det_tolerance) {
    std::ostringstream msg;
    msg << "c_hat: metric must be normalised to det = 1 (det = " << det << ")";
    throw OperatorError(msg.str());
  }
  return parity * rho_hat;
}

Signatures default_signatures(int n) {
  Signatures s(static_cast<std::size_t>(n), -1);
  if (n > 0) s[0] = 1;
  return s;
}

CMatrix c_tilde(const linalg::Eigensystem& es, const Signatures& signatures) {
  if (static_cast<int>(signatures.size()) != es.size())
    throw OperatorError("c_tilde: one signature per level required");
  CMatrix c = CMatrix::Zero(es.size(), es.size());
  for (int n = 0; n < es.size(); ++n) {
    if (signatures[n] != 1 && signatures[n] != -1)
      throw OperatorError("c_tilde: signatures must be +1 or -1");
    c += static_cast<double>(signatures[n]) * es.right.col(n) * es.left.col(n).adjoint();
  }
  return c;
}

PTilde p_tilde(const CMatrix& rho, const CMatrix& c_tilde, double tolerance) {
  PTilde out;
  out.matrix = rho * c_tilde;
  out.hermiticity_residual =
      scaled(linalg::hermiticity_residual(out.matrix), norm_inf(out.matrix));
  if (out.hermiticity_residual > tolerance) {
    std::ostringstream msg;
    msg << "p_tilde: rho * C~ is not Hermitian (residual " << out.hermiticity_residual
        << "); rho and C~ come from inconsistent frames";
    throw OperatorError(msg.str());
  }
  const auto pos = linalg::positivity_check(out.matrix);
  out.eigenvalues = pos.eigenvalues;
  out.positive_definite = pos.is_positive;
  return out;
}

void rho_normalize(linalg::Eigensystem& es, const CMatrix& rho) {
  for (int n = 0; n < es.size(); ++n) {
    const CVector psi = es.right.col(n);
    const double norm2 = std::abs(psi.dot(rho * psi));
    es.rescale(n, std::sqrt(norm2));
  }
}

OperatorFrame build_frame(const model::ScenarioSolution& scenario, double t,
                          const FrameOptions& opts) {
  OperatorFrame f;
  f.t = t;
  f.hamiltonian = scenario.hamiltonian(t);
  f.eta = scenario.eta(t);
  f.eta_dot = scenario.eta_dot(t);
  f.rho = f.eta.adjoint() * f.eta;
  f.energy = energy_operator(f.hamiltonian, f.eta, f.eta_dot);
  f.eigensystem =
      linalg::eig_biorthogonal(f.energy, linalg::Ordering::Descending, opts.condition_bound);
  rho_normalize(f.eigensystem, f.rho);
  f.signatures = opts.signatures ? *opts.signatures : default_signatures(f.eigensystem.size());
  f.c_tilde = c_tilde(f.eigensystem, f.signatures);
  // Hermiticity of P̃ is reported by frame_identities rather than enforced here.
  f.p_tilde = p_tilde(f.rho, f.c_tilde, std::numeric_limits<double>::infinity());
  return f;
}

double quasi_hermiticity_residual(const CMatrix& energy, const CMatrix& rho) {
  return scaled(norm_inf(energy.adjoint() * rho - rho * energy), norm_inf(energy) * norm_inf(rho));
}

double metric_ode_residual(const MatrixFn& hamiltonian, const MatrixFn& rho, double t) {
  const CMatrix h = hamiltonian(t);
  const CMatrix r = rho(t);
  const CMatrix rdot = linalg::operator_time_derivative(rho, t);
  return scaled(norm_inf(kI * rdot - h.adjoint() * r + r * h), norm_inf(h) * norm_inf(r));
}

PtrelResult verify_ptrel(const CMatrix& p_tilde, const CMatrix& op, const linalg::Eigensystem& es,
                         const Tolerances& tol) {
  PtrelResult out;
  auto& rep = out.report;
  const double pnorm = norm_inf(p_tilde);

  rep.record("ptrel_intertwine",
             scaled(norm_inf(p_tilde * op - op.adjoint() * p_tilde), pnorm * norm_inf(op)),
             tol.get("ptrel_intertwine"));

  double eigenmap = 0.0, alpha_imag = 0.0;
  for (int n = 0; n < es.size(); ++n) {
    const CVector ppsi = p_tilde * es.right.col(n);
    const CVector phi = es.left.col(n);
    const double phi2 = phi.squaredNorm();
    const cplx alpha = phi2 > 0.0 ? phi.dot(ppsi) / phi2 : cplx{};
    out.alphas.push_back(alpha);
    const double ref = ppsi.norm();
    eigenmap = std::max(eigenmap, ref > 0.0 ? (ppsi - alpha * phi).norm() / ref : 1.0);
    alpha_imag =
        std::max(alpha_imag, std::abs(alpha) > 0.0 ? std::abs(alpha.imag()) / std::abs(alpha) : 1.0);
  }
  rep.record("ptrel_eigenmap", eigenmap, tol.get("ptrel_eigenmap"));
  rep.record("ptrel_alpha_real", alpha_imag, tol.get("ptrel_alpha_real"));
  rep.record("ptilde_hermitian", scaled(linalg::hermiticity_residual(p_tilde), pnorm),
             tol.get("ptilde_hermitian"));

  out.guarantee_active = rep.passed();

  double max_imag = 0.0;
  for (int n = 0; n < es.size(); ++n) max_imag = std::max(max_imag, std::abs(es.values(n).imag()));
  rep.record("reality", max_imag, tol.get("reality"));
  return out;
}

PtrelResult verify_ptrel(const OperatorFrame& frame, const Tolerances& tol) {
  return verify_ptrel(frame.p_tilde.matrix, frame.energy, frame.eigensystem, tol);
}

PtrelResult verify_ptrel_on_hamiltonian(const OperatorFrame& frame, const Tolerances& tol) {
  const auto es = linalg::eig_biorthogonal(frame.hamiltonian, linalg::Ordering::Descending);
  return verify_ptrel(frame.p_tilde.matrix, frame.hamiltonian, es, tol);
}

VerificationReport frame_identities(const OperatorFrame& frame, const Tolerances& tol) {
  VerificationReport rep;
  const CMatrix& c = frame.c_tilde;
  const int n = static_cast<int>(c.rows());
  const CMatrix id = CMatrix::Identity(n, n);
  const double cnorm = norm_inf(c);

  rep.record("ctilde_involution", scaled(norm_inf(c * c - id), cnorm * cnorm),
             tol.get("ctilde_involution"));
  rep.record("ctilde_commutes",
             scaled(norm_inf(linalg::commutator(c, frame.energy)), cnorm * norm_inf(frame.energy)),
             tol.get("ctilde_commutes"));
  rep.record("ptilde_hermitian", frame.p_tilde.hermiticity_residual, tol.get("ptilde_hermitian"));
  rep.record("ptilde_rho_ctilde",
             scaled(norm_inf(linalg::checked_inverse(frame.rho) * frame.p_tilde.matrix - c), cnorm),
             tol.get("ptilde_rho_ctilde"));

  const CMatrix& psi = frame.eigensystem.right;
  rep.record("rho_orthonormality", linalg::max_abs(psi.adjoint() * frame.rho * psi - id),
             tol.get("rho_orthonormality"));
  rep.record("biorthonormality", frame.eigensystem.biorthonormality_residual(),
             tol.get("biorthonormality"));
  rep.record("quasi_hermiticity", quasi_hermiticity_residual(frame.energy, frame.rho),
             tol.get("quasi_hermiticity"));
  return rep;
}

}  // namespace tdnh::operators
