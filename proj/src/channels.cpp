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

#include "qhit/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <Eigen/Eigenvalues>

namespace qhit {
namespace {

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

double min_hermitian_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_state_shape(const Matrix& m, double tol, const char* what) {
  require_square(m, what);
  require_finite(m, what);
  if (m.rows() == 0) throw DimensionError(std::string(what) + ": empty matrix");
  if (max_abs(m - m.adjoint()) > tol) throw ValidationError(std::string(what) + ": not Hermitian");
}

// Sum_K conj(K) (x) K, skipping zero entries so rank-one classical Kraus
// operators cost O(1) each.
Matrix superoperator_from_kraus(std::size_t d, const std::vector<Matrix>& kraus) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix s = Matrix::Zero(n * n, n * n);
  struct Entry {
    Eigen::Index row, col;
    Complex value;
  };
  std::vector<Entry> nz;
  for (const Matrix& k : kraus) {
    nz.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (k(i, j) != Complex(0.0)) nz.push_back({i, j, k(i, j)});
      }
    }
    for (const Entry& a : nz) {
      const Complex ca = std::conj(a.value);
      for (const Entry& b : nz) {
        s(a.row * n + b.row, a.col * n + b.col) += ca * b.value;
      }
    }
  }
  return s;
}

Matrix choi_from_superoperator(std::size_t d, const Matrix& s) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix j(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index jj = 0; jj < n; ++jj) {
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
          j(i * n + a, jj * n + b) = s(b * n + a, jj * n + i);
        }
      }
    }
  }
  return j;
}

std::vector<Matrix> kraus_from_choi(std::size_t d, const Matrix& choi) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(choi));
  const auto& values = es.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -1e-8 * scale) {
    throw ValidationError("map is not completely positive (Choi eigenvalue " +
                          std::to_string(values.minCoeff()) + ")");
  }
  std::vector<Matrix> kraus;
  for (Eigen::Index k = values.size() - 1; k >= 0; --k) {
    if (values[k] <= 1e-13 * scale) break;
    kraus.push_back(std::sqrt(values[k]) * unvec(es.eigenvectors().col(k), d));
  }
  return kraus;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix DensityMatrix::from_matrix(Matrix m, double tol) {
  check_state_shape(m, tol, "density matrix");
  m = hermitian_part(m);
  if (std::abs(m.trace().real() - 1.0) > tol) {
    throw ValidationError("density matrix: trace " + std::to_string(m.trace().real()) + " != 1");
  }
  if (min_hermitian_eigenvalue(m) < -tol) throw ValidationError("density matrix: not PSD");
  return DensityMatrix(std::move(m), false);
}

DensityMatrix DensityMatrix::subnormalized(Matrix m, double tol) {
  check_state_shape(m, tol, "density matrix");
  m = hermitian_part(m);
  const double tr = m.trace().real();
  if (tr < -tol || tr > 1.0 + tol) throw ValidationError("sub-normalized state: trace outside [0, 1]");
  if (min_hermitian_eigenvalue(m) < -tol) throw ValidationError("sub-normalized state: not PSD");
  return DensityMatrix(std::move(m), true);
}

DensityMatrix DensityMatrix::pure(const Vector& psi, double tol) {
  if (psi.size() == 0) throw DimensionError("pure state: empty vector");
  if (std::abs(psi.norm() - 1.0) > tol) throw ValidationError("pure state: vector not normalized");
  return DensityMatrix(psi * psi.adjoint(), false);
}

DensityMatrix DensityMatrix::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw ValidationError("basis state index out of range");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix m = Matrix::Zero(n, n);
  m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
  return DensityMatrix(std::move(m), false);
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
  if (dim == 0) throw DimensionError("maximally mixed state: dim 0");
  const auto n = static_cast<Eigen::Index>(dim);
  return DensityMatrix(Matrix::Identity(n, n) / static_cast<double>(dim), false);
}

// ---------------------------------------------------------------------------
// TargetSubspace

TargetSubspace::TargetSubspace(Matrix pi_z, std::size_t rank)
    : pi_z_(std::move(pi_z)), rank_(rank) {
  pi_minus_z_ = Matrix::Identity(pi_z_.rows(), pi_z_.cols()) - pi_z_;
}

TargetSubspace TargetSubspace::from_projector(Matrix pi_z, double tol) {
  require_square(pi_z, "target projector");
  require_finite(pi_z, "target projector");
  if (max_abs(pi_z - pi_z.adjoint()) > tol) throw ValidationError("target projector: not Hermitian");
  if (max_abs(pi_z * pi_z - pi_z) > tol) throw ValidationError("target projector: not idempotent");
  const double tr = pi_z.trace().real();
  const auto rank = static_cast<std::size_t>(std::llround(tr));
  if (rank == 0) throw ValidationError("target projector: empty target subspace");
  return TargetSubspace(std::move(pi_z), rank);
}

TargetSubspace TargetSubspace::from_basis_indices(std::size_t dim,
                                                  std::span<const std::size_t> indices) {
  if (indices.empty()) throw ValidationError("target: no basis indices");
  std::set<std::size_t> seen;
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix pi = Matrix::Zero(n, n);
  for (std::size_t idx : indices) {
    if (idx >= dim) throw ValidationError("target: basis index " + std::to_string(idx) + " out of range");
    if (!seen.insert(idx).second) throw ValidationError("target: duplicate basis index");
    pi(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)) = 1.0;
  }
  return TargetSubspace(std::move(pi), indices.size());
}

TargetSubspace TargetSubspace::from_basis_index(std::size_t dim, std::size_t index) {
  const std::size_t idx[] = {index};
  return from_basis_indices(dim, idx);
}

TargetSubspace TargetSubspace::from_vectors(std::span<const Vector> vectors, std::size_t dim) {
  if (vectors.empty()) throw ValidationError("target: no spanning vectors");
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix cols(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != n) throw DimensionError("target: vector length mismatch");
    cols.col(static_cast<Eigen::Index>(k)) = vectors[k];
  }
  require_finite(cols, "target vectors");
  Eigen::ColPivHouseholderQR<Matrix> qr(cols);
  qr.setThreshold(1e-12);
  const Eigen::Index r = qr.rank();
  if (r == 0) throw ValidationError("target: vectors span the zero subspace");
  Matrix q = qr.householderQ() * Matrix::Identity(n, r);
  return TargetSubspace(q * q.adjoint(), static_cast<std::size_t>(r));
}

double TargetSubspace::hit_probability(const Matrix& rho) const {
  return (pi_z_ * rho).trace().real();
}

// ---------------------------------------------------------------------------
// StepDistribution

StepDistribution StepDistribution::geometric(double p) {
  if (!(p > 0.0)) throw ValidationError("geometric step distribution with p = 0: resolvent undefined");
  if (!(p <= 1.0)) throw ValidationError("geometric step distribution: p must lie in (0, 1]");
  StepDistribution s;
  s.kind_ = Kind::geometric;
  s.p_ = p;
  return s;
}

StepDistribution StepDistribution::explicit_weights(std::map<std::size_t, double> weights,
                                                    bool allow_zero) {
  if (weights.empty()) throw ValidationError("explicit step distribution: empty support");
  double total = 0.0;
  for (const auto& [t, w] : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("explicit step distribution: negative weight");
    if (t == 0 && !allow_zero && w > 0.0) {
      throw ValidationError("explicit step distribution: mass at t = 0 requires allow_zero");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("explicit step distribution: weights sum to " + std::to_string(total));
  }
  StepDistribution s;
  s.kind_ = Kind::explicit_weights;
  s.weights_ = std::move(weights);
  s.allow_zero_ = allow_zero;
  double c = 0.0;
  for (const auto& [t, w] : s.weights_) {
    if (w == 0.0) continue;
    c += w;
    s.cumulative_.emplace_back(t, c);
  }
  return s;
}

double StepDistribution::mean() const {
  if (kind_ == Kind::geometric) return 1.0 / p_;
  double m = 0.0;
  for (const auto& [t, w] : weights_) m += static_cast<double>(t) * w;
  return m;
}

double StepDistribution::probability(std::size_t t) const {
  if (kind_ == Kind::geometric) {
    if (t == 0) return 0.0;
    return p_ * std::pow(1.0 - p_, static_cast<double>(t - 1));
  }
  auto it = weights_.find(t);
  return it == weights_.end() ? 0.0 : it->second;
}

std::size_t StepDistribution::sample(double u) const {
  if (kind_ == Kind::geometric) {
    if (p_ >= 1.0) return 1;
    const double t = std::floor(std::log1p(-u) / std::log1p(-p_));
    return 1 + static_cast<std::size_t>(std::max(0.0, t));
  }
  for (const auto& [t, c] : cumulative_) {
    if (u < c) return t;
  }
  return cumulative_.back().first;
}

// ---------------------------------------------------------------------------
// LinearMap

LinearMap LinearMap::from_kraus(std::size_t dim, std::vector<Matrix> kraus) {
  if (dim == 0) throw DimensionError("linear map: dim 0");
  if (kraus.empty()) throw ValidationError("linear map: empty Kraus list");
  const auto n = static_cast<Eigen::Index>(dim);
  for (const Matrix& k : kraus) {
    if (k.rows() != n || k.cols() != n) throw DimensionError("linear map: Kraus operator has wrong shape");
    require_finite(k, "Kraus operator");
  }
  LinearMap m(dim);
  m.cache_->kraus = std::move(kraus);
  std::call_once(m.cache_->kraus_once, [] {});
  m.cache_->kraus_ready = true;
  return m;
}

LinearMap LinearMap::from_superoperator(std::size_t dim, Matrix superop) {
  const auto n = static_cast<Eigen::Index>(dim * dim);
  if (dim == 0) throw DimensionError("linear map: dim 0");
  if (superop.rows() != n || superop.cols() != n) {
    throw DimensionError("linear map: superoperator must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  require_finite(superop, "superoperator");
  LinearMap m(dim);
  m.cache_->superop = std::move(superop);
  std::call_once(m.cache_->superop_once, [] {});
  m.cache_->superop_ready = true;
  return m;
}

bool LinearMap::has_kraus() const { return cache_->kraus_ready.load(); }

bool LinearMap::superoperator_materialized() const { return cache_->superop_ready.load(); }

const std::vector<Matrix>& LinearMap::kraus() const {
  std::call_once(cache_->kraus_once, [this] {
    cache_->kraus = kraus_from_choi(dim_, choi_from_superoperator(dim_, cache_->superop));
    cache_->kraus_ready = true;
  });
  return cache_->kraus;
}

const Matrix& LinearMap::superoperator() const {
  std::call_once(cache_->superop_once, [this] {
    cache_->superop = superoperator_from_kraus(dim_, cache_->kraus);
    cache_->superop_ready = true;
  });
  return cache_->superop;
}

Matrix LinearMap::apply(const Matrix& x) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  if (x.rows() != n || x.cols() != n) throw DimensionError("apply: operand has wrong shape");
  if (has_kraus()) {
    Matrix out = Matrix::Zero(n, n);
    for (const Matrix& k : cache_->kraus) out.noalias() += k * x * k.adjoint();
    return out;
  }
  return unvec(superoperator() * vec(x), dim_);
}

double LinearMap::trace_defect() const {
  const auto n = static_cast<Eigen::Index>(dim_);
  if (has_kraus()) {
    Matrix sum = Matrix::Zero(n, n);
    for (const Matrix& k : cache_->kraus) sum.noalias() += k.adjoint() * k;
    return max_abs(sum - Matrix::Identity(n, n));
  }
  const Matrix& s = superoperator();
  // vec(I)^T S must equal vec(I)^T.
  Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(n * n);
  for (Eigen::Index a = 0; a < n; ++a) row += s.row(a * n + a);
  for (Eigen::Index a = 0; a < n; ++a) row[a * n + a] -= 1.0;
  return row.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Channel

Channel Channel::from_kraus(std::vector<Matrix> kraus, double tol) {
  if (kraus.empty()) throw ValidationError("channel: empty Kraus list");
  require_square(kraus.front(), "Kraus operator");
  const auto dim = static_cast<std::size_t>(kraus.front().rows());
  LinearMap m = LinearMap::from_kraus(dim, std::move(kraus));
  const double defect = m.trace_defect();
  if (defect > tol) {
    throw ValidationError("channel: not trace preserving (|Sum K^dag K - I| = " + std::to_string(defect) + ")");
  }
  return Channel(std::move(m));
}

Channel Channel::from_superoperator(Matrix superop, double tol) {
  require_square(superop, "superoperator");
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(superop.rows()))));
  if (static_cast<Eigen::Index>(d * d) != superop.rows()) {
    throw DimensionError("superoperator size is not a perfect square");
  }
  LinearMap m = LinearMap::from_superoperator(d, std::move(superop));
  const double defect = m.trace_defect();
  if (defect > tol) {
    throw ValidationError("channel: superoperator not trace preserving (defect " + std::to_string(defect) + ")");
  }
  return Channel(std::move(m));
}

Channel Channel::identity(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return Channel(LinearMap::from_kraus(dim, {Matrix::Identity(n, n)}));
}

DensityMatrix Channel::apply(const DensityMatrix& rho) const {
  return DensityMatrix(hermitian_part(map_.apply(rho.matrix())), rho.is_subnormalized());
}

Channel unitary_channel(const Matrix& u, double tol) {
  require_square(u, "unitary");
  require_finite(u, "unitary");
  const double defect = max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()));
  if (defect > tol) throw ValidationError("unitary_channel: matrix is not unitary (defect " + std::to_string(defect) + ")");
  return Channel::from_kraus({u}, tol);
}

Channel classical_channel(const RealMatrix& p, double tol) {
  if (p.rows() != p.cols() || p.rows() == 0) throw DimensionError("classical_channel: P must be square");
  const Eigen::Index n = p.rows();
  for (Eigen::Index x = 0; x < n; ++x) {
    double row = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (!(p(x, y) >= 0.0) || !std::isfinite(p(x, y))) {
        throw ValidationError("classical_channel: negative or non-finite entry");
      }
      row += p(x, y);
    }
    if (std::abs(row - 1.0) > tol) {
      throw ValidationError("classical_channel: row " + std::to_string(x) + " sums to " + std::to_string(row));
    }
  }
  std::vector<Matrix> kraus;
  for (Eigen::Index x = 0; x < n; ++x) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (p(x, y) == 0.0) continue;
      Matrix k = Matrix::Zero(n, n);
      k(y, x) = std::sqrt(p(x, y));
      kraus.push_back(std::move(k));
    }
  }
  // Rows sum to 1 within tol, so the Kraus sum is I within the same bound.
  return Channel::from_kraus(std::move(kraus), std::max(tol, Channel::kTraceTolerance));
}

LinearMap compose(const LinearMap& outer, const LinearMap& inner) {
  require_same_dim(outer.dim(), inner.dim(), "compose");
  constexpr std::size_t kMaxKraus = 4096;
  if (outer.has_kraus() && inner.has_kraus() &&
      outer.kraus().size() * inner.kraus().size() <= kMaxKraus) {
    std::vector<Matrix> kraus;
    kraus.reserve(outer.kraus().size() * inner.kraus().size());
    for (const Matrix& a : outer.kraus()) {
      for (const Matrix& b : inner.kraus()) kraus.push_back(a * b);
    }
    return LinearMap::from_kraus(outer.dim(), std::move(kraus));
  }
  return LinearMap::from_superoperator(outer.dim(), outer.superoperator() * inner.superoperator());
}

Channel compose(const Channel& outer, const Channel& inner) {
  LinearMap m = compose(outer.map(), inner.map());
  if (m.has_kraus()) return Channel::from_kraus(m.kraus());
  return Channel::from_superoperator(m.superoperator());
}

Channel mix(std::span<const Channel> channels, std::span<const double> weights) {
  if (channels.empty()) throw ValidationError("mix: no channels");
  if (channels.size() != weights.size()) throw DimensionError("mix: weights/channels length mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ValidationError("mix: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("mix: weights do not sum to 1");
  const std::size_t d = channels.front().dim();
  bool all_kraus = true;
  for (const Channel& c : channels) {
    require_same_dim(d, c.dim(), "mix");
    all_kraus = all_kraus && c.has_kraus();
  }
  if (all_kraus) {
    std::vector<Matrix> kraus;
    for (std::size_t i = 0; i < channels.size(); ++i) {
      if (weights[i] == 0.0) continue;
      for (const Matrix& k : channels[i].kraus()) kraus.push_back(std::sqrt(weights[i]) * k);
    }
    return Channel::from_kraus(std::move(kraus));
  }
  Matrix s = weights[0] * channels[0].superoperator();
  for (std::size_t i = 1; i < channels.size(); ++i) s += weights[i] * channels[i].superoperator();
  return Channel::from_superoperator(std::move(s));
}

LinearMap projection_map(const TargetSubspace& t, ProjectionSide which) {
  return LinearMap::from_kraus(t.dim(), {which == ProjectionSide::keep_z ? t.pi_z() : t.pi_minus_z()});
}

LinearMap restricted_map(const Channel& e, const TargetSubspace& t) {
  require_same_dim(e.dim(), t.dim(), "restricted_map");
  const Matrix& pm = t.pi_minus_z();
  if (e.has_kraus()) {
    std::vector<Matrix> kraus;
    kraus.reserve(e.kraus().size());
    for (const Matrix& k : e.kraus()) kraus.push_back(pm * k * pm);
    return LinearMap::from_kraus(e.dim(), std::move(kraus));
  }
  const Matrix sp = kron(pm.conjugate(), pm);
  return LinearMap::from_superoperator(e.dim(), sp * e.superoperator() * sp);
}

Channel sigma_channel(const Channel& e, const StepDistribution& sigma) {
  const Matrix& s = e.superoperator();
  const Eigen::Index n = s.rows();
  Matrix out;
  if (sigma.kind() == StepDistribution::Kind::geometric) {
    const double p = sigma.p();
    if (p == 1.0) return e;
    const Matrix a = Matrix::Identity(n, n) - (1.0 - p) * s;
    out = p * LuSolver(a).solve(s);
  } else {
    out = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n);
    std::size_t current = 0;
    for (const auto& [t, w] : sigma.weights()) {
      for (; current < t; ++current) power = s * power;
      out += w * power;
    }
  }
  return Channel::from_superoperator(std::move(out), 1e-8);
}

Matrix choi_matrix(const LinearMap& m) {
  if (!m.superoperator_materialized() && m.has_kraus()) {
    const auto n = static_cast<Eigen::Index>(m.dim());
    Matrix j = Matrix::Zero(n * n, n * n);
    for (const Matrix& k : m.kraus()) {
      const Vector v = vec(k);
      j.noalias() += v * v.adjoint();
    }
    return j;
  }
  return choi_from_superoperator(m.dim(), m.superoperator());
}

double choi_min_eigenvalue(const LinearMap& m) {
  return min_hermitian_eigenvalue(hermitian_part(choi_matrix(m)));
}

DensityMatrix project_out(const DensityMatrix& rho, const TargetSubspace& t) {
  require_same_dim(rho.dim(), t.dim(), "project_out");
  const Matrix& pm = t.pi_minus_z();
  return DensityMatrix(hermitian_part(pm * rho.matrix() * pm), true);
}

}  // namespace qhit
