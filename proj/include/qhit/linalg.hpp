// Copyright 2026 The qhit Authors
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

// Dense complex linear algebra used by the rest of the library. Matrices are
// Eigen::MatrixXcd; the helpers here fix the vectorization convention and wrap
// the factorizations with the error contract the hitting-time solvers rely on.

#include <complex>
#include <cstddef>
#include <functional>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "qhit/errors.hpp"

namespace qhit {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

struct LinalgTolerances {
  double solve_residual = 1e-10;
  double singular_condition = 1e12;
  std::size_t dense_eigen_limit = 4096;
  std::size_t power_max_iterations = 10000;
  double power_tolerance = 1e-10;
  // LuSolver switches to a sparse factorization when at least this large and
  // no denser than sparse_density (fraction of nonzero entries).
  std::size_t sparse_min_size = 256;
  double sparse_density = 0.05;
};

Matrix kron(const Matrix& a, const Matrix& b);

/// Column-stacking vectorization: vec(A X B) = (B^T (x) A) vec(X).
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, std::size_t d);

bool all_finite(const Matrix& m);
void require_finite(const Matrix& m, const char* what);
void require_square(const Matrix& m, const char* what);

double max_abs(const Matrix& m);

/// LU with partial pivoting. Throws SingularSystem when the 1-norm condition
/// estimate exceeds tol.singular_condition, and Error when the residual bound
/// ||a x - b|| <= tol.solve_residual (||a|| ||x|| + ||b||) fails.
Vector solve(const Matrix& a, const Vector& b, const LinalgTolerances& tol = {});

/// Factored square system, reused across right-hand sides. Large sparse
/// matrices are factored with a fill-reducing sparse LU, others with dense
/// partial-pivoting LU.
class LuSolver {
 public:
  explicit LuSolver(const Matrix& a, const LinalgTolerances& tol = {});

  std::size_t size() const { return static_cast<std::size_t>(n_); }
  bool is_sparse() const { return sparse_lu_ != nullptr; }
  /// 1-norm condition number estimate (Hager-Higham for the sparse path).
  double condition_estimate() const { return condition_; }
  bool singular() const { return condition_ > tol_.singular_condition; }

  /// Throws SingularSystem if the matrix was singular to working precision.
  Vector solve(const Vector& b) const;
  Matrix solve(const Matrix& b) const;
  /// Raw back-substitution: no singularity or residual checks.
  Vector solve_unchecked(const Vector& b) const;
  /// Relative residual ||a x - b|| / (||a|| ||x|| + ||b||) in the 1-norm.
  double residual(const Vector& x, const Vector& b) const;

 private:
  using SparseMatrix = Eigen::SparseMatrix<Complex>;
  using SparseLu = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

  Vector solve_adjoint_unchecked(const Vector& b) const;
  double inverse_norm_estimate() const;
  Vector multiply(const Vector& x) const;

  Eigen::Index n_ = 0;
  Matrix a_;
  SparseMatrix sparse_a_;
  Eigen::PartialPivLU<Matrix> lu_;
  std::shared_ptr<SparseLu> sparse_lu_;
  double condition_ = 0.0;
  double norm_ = 0.0;
  LinalgTolerances tol_;
};

double spectral_radius(const Matrix& a, const LinalgTolerances& tol = {});

/// Power-iteration estimate of the spectral radius of a linear operator given
/// only by its action. Magnitude estimates are ||A^k x||^(1/k)-style ratios
/// averaged over a window so complex dominant pairs do not stall the test.
double spectral_radius_matrix_free(const std::function<Vector(const Vector&)>& apply,
                                   std::size_t n, const LinalgTolerances& tol = {});

}  // namespace qhit
