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

#include "qhit/linalg.hpp"

#include <cmath>
#include <deque>
#include <string>

#include <Eigen/Eigenvalues>

namespace qhit {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Vector vec(const Matrix& m) {
  // Eigen stores column-major, so the reshaped view is already column-stacked.
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, std::size_t d) {
  const auto n = static_cast<Eigen::Index>(d);
  if (v.size() != n * n) {
    throw DimensionError("unvec: vector of length " + std::to_string(v.size()) +
                         " is not " + std::to_string(d) + "^2");
  }
  return Eigen::Map<const Matrix>(v.data(), n, n);
}

bool all_finite(const Matrix& m) {
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const Complex z = m.data()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

void require_finite(const Matrix& m, const char* what) {
  if (!all_finite(m)) throw ValidationError(std::string(what) + ": non-finite entry");
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": expected square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

LuSolver::LuSolver(const Matrix& a, const LinalgTolerances& tol) : n_(a.rows()), tol_(tol) {
  require_square(a, "solve");
  if (n_ == 0) {
    condition_ = 1.0;
    return;
  }
  norm_ = a.cwiseAbs().colwise().sum().maxCoeff();
  const auto nonzeros = (a.array() != Complex(0.0)).count();
  const bool sparse = static_cast<std::size_t>(n_) >= tol.sparse_min_size &&
                      static_cast<double>(nonzeros) <= tol.sparse_density * static_cast<double>(a.size());
  if (sparse) {
    sparse_a_ = a.sparseView(Complex(0.0), 0.0);
    sparse_a_.makeCompressed();
    sparse_lu_ = std::make_shared<SparseLu>();
    sparse_lu_->compute(sparse_a_);
    if (sparse_lu_->info() != Eigen::Success) {
      condition_ = INFINITY;
      return;
    }
    const double inv = inverse_norm_estimate();
    condition_ = std::isfinite(inv) ? norm_ * inv : INFINITY;
    return;
  }
  a_ = a;
  lu_.compute(a_);
  const double rcond = lu_.rcond();
  condition_ = rcond > 0.0 && std::isfinite(rcond) ? 1.0 / rcond : INFINITY;
}

Vector LuSolver::multiply(const Vector& x) const {
  if (sparse_lu_) return sparse_a_ * x;
  return a_ * x;
}

Vector LuSolver::solve_unchecked(const Vector& b) const {
  if (sparse_lu_) return sparse_lu_->solve(b);
  return lu_.solve(b);
}

Vector LuSolver::solve_adjoint_unchecked(const Vector& b) const {
  return sparse_lu_->adjoint().solve(b);
}

// Hager-Higham estimate of ||A^{-1}||_1 for complex matrices.
double LuSolver::inverse_norm_estimate() const {
  constexpr int kMaxSweeps = 5;
  Vector x = Vector::Constant(n_, Complex(1.0 / static_cast<double>(n_), 0.0));
  double estimate = 0.0;
  Eigen::Index last = -1;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const Vector y = solve_unchecked(x);
    if (!y.allFinite()) return INFINITY;
    const double norm = y.lpNorm<1>();
    if (sweep > 0 && norm <= estimate) break;
    estimate = norm;
    Vector sign(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double m = std::abs(y[i]);
      sign[i] = m > 0.0 ? y[i] / m : Complex(1.0);
    }
    const Vector z = solve_adjoint_unchecked(sign);
    Eigen::Index j = 0;
    const double zmax = z.cwiseAbs().maxCoeff(&j);
    if (j == last || zmax <= std::real(z.dot(x))) break;
    last = j;
    x.setZero();
    x[j] = 1.0;
  }
  // Higham's alternating-sign safeguard vector.
  Vector alt(n_);
  for (Eigen::Index i = 0; i < n_; ++i) {
    const double sgn = i % 2 == 0 ? 1.0 : -1.0;
    alt[i] = sgn * (1.0 + static_cast<double>(i) / static_cast<double>(std::max<Eigen::Index>(n_ - 1, 1)));
  }
  const Vector y = solve_unchecked(alt);
  const double alt_estimate = 2.0 * y.lpNorm<1>() / (3.0 * static_cast<double>(n_));
  return std::max(estimate, alt_estimate);
}

double LuSolver::residual(const Vector& x, const Vector& b) const {
  const double denom = norm_ * x.lpNorm<1>() + b.lpNorm<1>();
  if (denom == 0.0) return 0.0;
  return (multiply(x) - b).lpNorm<1>() / denom;
}

Vector LuSolver::solve(const Vector& b) const {
  if (b.size() != n_) throw DimensionError("solve: rhs length mismatch");
  if (singular()) {
    throw SingularSystem("solve: matrix singular to working precision (condition estimate " +
                             std::to_string(condition_) + ")",
                         condition_);
  }
  Vector x = solve_unchecked(b);
  const double res = residual(x, b);
  if (!(res <= tol_.solve_residual)) {
    throw SingularSystem("solve: residual " + std::to_string(res) + " above tolerance",
                         condition_);
  }
  return x;
}

Matrix LuSolver::solve(const Matrix& b) const {
  if (b.rows() != n_) throw DimensionError("solve: rhs row count mismatch");
  if (singular()) {
    throw SingularSystem("solve: matrix singular to working precision", condition_);
  }
  if (sparse_lu_) return sparse_lu_->solve(b);
  return lu_.solve(b);
}

Vector solve(const Matrix& a, const Vector& b, const LinalgTolerances& tol) {
  return LuSolver(a, tol).solve(b);
}

double spectral_radius(const Matrix& a, const LinalgTolerances& tol) {
  require_square(a, "spectral_radius");
  const auto n = static_cast<std::size_t>(a.rows());
  if (n == 0) return 0.0;
  if (n <= tol.dense_eigen_limit) {
    Eigen::ComplexEigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw NonConvergent("spectral_radius: QR iteration failed", 0);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  return spectral_radius_matrix_free([&a](const Vector& x) -> Vector { return a * x; }, n, tol);
}

double spectral_radius_matrix_free(const std::function<Vector(const Vector&)>& apply,
                                   std::size_t n, const LinalgTolerances& tol) {
  constexpr std::size_t kWindow = 16;
  // Deterministic start with no special alignment to structured operators.
  Vector x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    x[static_cast<Eigen::Index>(i)] = Complex(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
  }
  x.normalize();
  std::deque<double> log_growth;  // log of the cumulative norm growth, newest last
  double total = 0.0;
  double previous = -1.0;
  for (std::size_t it = 1; it <= tol.power_max_iterations; ++it) {
    Vector y = apply(x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    total += std::log(norm);
    log_growth.push_back(total);
    x = y / norm;
    if (log_growth.size() > kWindow + 1) log_growth.pop_front();
    if (log_growth.size() == kWindow + 1) {
      const double estimate = std::exp((log_growth.back() - log_growth.front()) / kWindow);
      if (previous >= 0.0 && std::abs(estimate - previous) < tol.power_tolerance) return estimate;
      previous = estimate;
    }
  }
  throw NonConvergent("spectral_radius: power iteration did not converge", tol.power_max_iterations);
}

}  // namespace qhit
