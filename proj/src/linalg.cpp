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

#include "tdnh/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace tdnh::linalg {

namespace {

using Eigen::Index;

void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw DimensionMismatch(std::string(what) + ": matrix must be square and non-empty");
}

// Closed form for 2x2: λ = (a+d)/2 ± sqrt(((a-d)/2)^2 + bc). The eigenvector
// for λ is either (b, λ-a) or (λ-d, c); take whichever has the larger norm.
void eig2(const CMatrix& m, Eigen::VectorXcd& values, CMatrix& right) {
  const cplx a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  values.resize(2);
  right.resize(2, 2);
  if (b == cplx{} && c == cplx{}) {
    values << a, d;
    right.setIdentity();
    return;
  }
  const cplx mean = 0.5 * (a + d);
  const cplx half_diff = 0.5 * (a - d);
  const cplx root = std::sqrt(half_diff * half_diff + b * c);
  values << mean + root, mean - root;
  for (int n = 0; n < 2; ++n) {
    const cplx lambda = values(n);
    Eigen::Vector2cd u(b, lambda - a);
    Eigen::Vector2cd v(lambda - d, c);
    Eigen::Vector2cd w = u.norm() >= v.norm() ? u : v;
    const double nrm = w.norm();
    if (nrm > 0.0) w /= nrm;
    right.col(n) = w;
  }
}

double condition_number(const CMatrix& r) {
  Eigen::JacobiSVD<CMatrix> svd(r);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

std::vector<int> ordering_permutation(const Eigen::VectorXcd& values, Ordering ordering) {
  std::vector<int> idx(values.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto asc = [&](int i, int j) {
    if (values(i).real() != values(j).real()) return values(i).real() < values(j).real();
    return values(i).imag() < values(j).imag();
  };
  if (ordering == Ordering::Ascending) std::stable_sort(idx.begin(), idx.end(), asc);
  if (ordering == Ordering::Descending)
    std::stable_sort(idx.begin(), idx.end(), [&](int i, int j) { return asc(j, i); });
  return idx;
}

}  // namespace

CMatrix identity(int n) { return CMatrix::Identity(n, n); }

CMatrix sigma_x() {
  CMatrix s(2, 2);
  s << 0.0, 1.0, 1.0, 0.0;
  return s;
}

CMatrix sigma_y() {
  CMatrix s(2, 2);
  s << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return s;
}

CMatrix sigma_z() {
  CMatrix s(2, 2);
  s << 1.0, 0.0, 0.0, -1.0;
  return s;
}

double Eigensystem::biorthonormality_residual() const {
  const CMatrix g = left.adjoint() * right;
  return max_abs(g - CMatrix::Identity(g.rows(), g.cols()));
}

double Eigensystem::completeness_residual() const {
  const CMatrix sum = right * left.adjoint();
  return max_abs(sum - CMatrix::Identity(sum.rows(), sum.cols()));
}

double Eigensystem::reconstruction_residual(const CMatrix& m) const {
  return max_abs(right * values.asDiagonal() * left.adjoint() - m);
}

void Eigensystem::rescale(int n, cplx s) {
  right.col(n) /= s;
  left.col(n) *= std::conj(s);
}

Eigensystem eig_biorthogonal(const CMatrix& m, Ordering ordering, double condition_bound) {
  require_square(m, "eig_biorthogonal");
  if (!m.allFinite()) throw std::invalid_argument("eig_biorthogonal: non-finite entries");

  Eigensystem es;
  es.ordering = ordering;
  Eigen::VectorXcd values;
  CMatrix right;
  if (m.rows() == 1) {
    values = m.col(0);
    right = CMatrix::Identity(1, 1);
  } else if (m.rows() == 2) {
    eig2(m, values, right);
  } else {
    Eigen::ComplexEigenSolver<CMatrix> solver(m, true);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("eig_biorthogonal: eigensolver did not converge");
    values = solver.eigenvalues();
    right = solver.eigenvectors();
    for (Index j = 0; j < right.cols(); ++j) right.col(j).normalize();
  }

  es.condition = condition_number(right);
  if (!(es.condition <= condition_bound)) {
    std::ostringstream msg;
    msg << "eigenvector matrix is numerically singular (condition " << es.condition
        << " > " << condition_bound << "); matrix is defective or near an exceptional point";
    throw DefectiveMatrix(es.condition, msg.str());
  }

  const auto perm = ordering_permutation(values, ordering);
  const Index n = m.rows();
  es.values.resize(n);
  es.right.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    es.values(k) = values(perm[k]);
    es.right.col(k) = right.col(perm[k]);
  }
  es.left = es.right.inverse().adjoint();
  return es;
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw DimensionMismatch("commutator: operands must be square with equal dimension");
  return a * b - b * a;
}

double max_abs(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

double norm_inf(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double hermiticity_residual(const CMatrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(a - a.adjoint());
}

PositivityResult positivity_check(const CMatrix& a) {
  PositivityResult out;
  if (a.rows() != a.cols() || a.rows() == 0) return out;
  const CMatrix herm = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  out.is_positive = !out.eigenvalues.empty() && out.eigenvalues.front() > 0.0;
  return out;
}

double default_step(double t) { return 1e-5 * std::max(1.0, std::abs(t)); }

CMatrix operator_time_derivative(const MatrixFn& f, double t, double h) {
  if (h <= 0.0) h = default_step(t);
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

CMatrix checked_inverse(const CMatrix& m, double tiny) {
  require_square(m, "inverse");
  const double scale = std::max(max_abs(m), std::numeric_limits<double>::min());
  const cplx det = m.determinant();
  if (std::abs(det) <= tiny * std::pow(scale, static_cast<double>(m.rows())))
    throw SingularMatrix("matrix is singular (|det| = " + std::to_string(std::abs(det)) + ")");
  return m.inverse();
}

}  // namespace tdnh::linalg
