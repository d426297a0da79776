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

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace tdnh {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// A matrix-valued function of time (H(t), η(t), ρ(t), ...).
using MatrixFn = std::function<CMatrix(double)>;

namespace linalg {

/// Condition number of the right-eigenvector matrix above which a matrix is
/// treated as defective (proximity to an exceptional point).
inline constexpr double kDefaultConditionBound = 1e8;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DefectiveMatrix : public std::runtime_error {
 public:
  DefectiveMatrix(double condition, const std::string& message)
      : std::runtime_error(message), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class SingularMatrix : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

CMatrix identity(int n = 2);
CMatrix sigma_x();
CMatrix sigma_y();
CMatrix sigma_z();

enum class Ordering {
  Ascending,   // by (real, imag)
  Descending,  // by real part, largest first; ties by imag descending
  Unsorted,
};

/// Right eigenvectors are the columns of `right`; left eigenvectors are the
/// columns of `left`, with <left_n | right_m> = δ_nm, i.e. left = (right^{-1})^†.
struct Eigensystem {
  Eigen::VectorXcd values;
  CMatrix right;
  CMatrix left;
  Ordering ordering = Ordering::Ascending;
  double condition = 1.0;

  int size() const { return static_cast<int>(values.size()); }
  CVector right_vector(int n) const { return right.col(n); }
  CVector left_vector(int n) const { return left.col(n); }

  /// max |<φ_n|ψ_m> - δ_nm|
  double biorthonormality_residual() const;
  /// ‖Σ |ψ_n><φ_n| - I‖_max
  double completeness_residual() const;
  /// ‖Σ λ_n |ψ_n><φ_n| - M‖_max
  double reconstruction_residual(const CMatrix& m) const;

  /// Rescales pair n as ψ -> ψ/s, φ -> conj(s) φ, which keeps <φ|ψ> fixed.
  void rescale(int n, cplx s);
};

/// Biorthogonal eigendecomposition. 2x2 matrices use the closed-form
/// quadratic; larger ones go through Eigen's complex Schur-based solver.
/// Right vectors are unit 2-norm; left vectors come from the inverse of the
/// right-vector matrix. Throws DefectiveMatrix when the right-vector matrix
/// has condition number above `condition_bound`.
Eigensystem eig_biorthogonal(const CMatrix& m, Ordering ordering = Ordering::Ascending,
                             double condition_bound = kDefaultConditionBound);

CMatrix commutator(const CMatrix& a, const CMatrix& b);

/// Largest-magnitude entry.
double max_abs(const CMatrix& m);

/// Induced ∞-norm (largest absolute row sum).
double norm_inf(const CMatrix& m);

/// max |A - A^†| entry.
double hermiticity_residual(const CMatrix& a);

struct PositivityResult {
  bool is_positive = false;
  std::vector<double> eigenvalues;  // ascending, of the Hermitian part
};

PositivityResult positivity_check(const CMatrix& a);

/// Default central-difference step: 1e-5 * max(1, |t|).
double default_step(double t);

/// (F(t+h) - F(t-h)) / 2h; h <= 0 selects default_step(t).
CMatrix operator_time_derivative(const MatrixFn& f, double t, double h = 0.0);

/// Throws SingularMatrix when |det| is below `tiny` relative to the entry scale.
CMatrix checked_inverse(const CMatrix& m, double tiny = 1e-14);

}  // namespace linalg
}  // namespace tdnh
