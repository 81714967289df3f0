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

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "qhit/linalg.hpp"

namespace qhit {

class TargetSubspace;

// States.

/// Hermitian, PSD, unit-trace matrix. The only sub-normalized instances are
/// produced by projections and carry is_subnormalized() == true.
class DensityMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  static DensityMatrix from_matrix(Matrix m, double tol = kTolerance);
  static DensityMatrix pure(const Vector& psi, double tol = kTolerance);
  static DensityMatrix basis(std::size_t dim, std::size_t index);
  static DensityMatrix maximally_mixed(std::size_t dim);
  /// Hermitian PSD with trace in [0, 1]; what a projection leaves behind.
  static DensityMatrix subnormalized(Matrix m, double tol = kTolerance);

  std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
  const Matrix& matrix() const { return mat_; }
  bool is_subnormalized() const { return subnormalized_; }
  double trace() const { return mat_.trace().real(); }

 private:
  friend class Channel;
  friend DensityMatrix project_out(const DensityMatrix&, const TargetSubspace&);
  DensityMatrix(Matrix m, bool sub) : mat_(std::move(m)), subnormalized_(sub) {}
  Matrix mat_;
  bool subnormalized_ = false;
};

/// Projector onto the target subspace together with its complement.
class TargetSubspace {
 public:
  static TargetSubspace from_projector(Matrix pi_z, double tol = 1e-10);
  static TargetSubspace from_basis_indices(std::size_t dim, std::span<const std::size_t> indices);
  static TargetSubspace from_basis_index(std::size_t dim, std::size_t index);
  /// Span of arbitrary (not necessarily orthonormal) vectors.
  static TargetSubspace from_vectors(std::span<const Vector> vectors, std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(pi_z_.rows()); }
  std::size_t rank() const { return rank_; }
  const Matrix& pi_z() const { return pi_z_; }
  const Matrix& pi_minus_z() const { return pi_minus_z_; }

  /// Born probability of the target outcome.
  double hit_probability(const Matrix& rho) const;

 private:
  TargetSubspace(Matrix pi_z, std::size_t rank);
  Matrix pi_z_;
  Matrix pi_minus_z_;
  std::size_t rank_;
};

/// Distribution of the number of chain steps between two measurements.
class StepDistribution {
 public:
  enum class Kind { geometric, explicit_weights };

  static StepDistribution geometric(double p);
  /// Finite support. t = 0 only with allow_zero (re-measures without evolving).
  static StepDistribution explicit_weights(std::map<std::size_t, double> weights,
                                           bool allow_zero = false);

  Kind kind() const { return kind_; }
  double p() const { return p_; }
  const std::map<std::size_t, double>& weights() const { return weights_; }
  bool allows_zero() const { return allow_zero_; }
  double mean() const;
  double probability(std::size_t t) const;
  /// Inverse-CDF draw from a uniform u in [0, 1).
  std::size_t sample(double u) const;

 private:
  StepDistribution() = default;
  Kind kind_ = Kind::geometric;
  double p_ = 1.0;
  std::map<std::size_t, double> weights_;
  std::vector<std::pair<std::size_t, double>> cumulative_;
  bool allow_zero_ = false;
};

// Maps.

/// Linear map on d x d matrices held as Kraus operators, a d^2 x d^2
/// superoperator, or both. Either representation is produced on demand from
/// the other and cached; copies share the cache, so a map is immutable and
/// safe to share between threads.
class LinearMap {
 public:
  static LinearMap from_kraus(std::size_t dim, std::vector<Matrix> kraus);
  static LinearMap from_superoperator(std::size_t dim, Matrix superop);

  std::size_t dim() const { return dim_; }
  /// True when Kraus operators were supplied or already derived.
  bool has_kraus() const;
  /// Derives Kraus operators from the Choi matrix if only the superoperator
  /// is known. Only valid for completely positive maps.
  const std::vector<Matrix>& kraus() const;
  const Matrix& superoperator() const;
  bool superoperator_materialized() const;

  Matrix apply(const Matrix& x) const;
  /// max |Sum K^dag K - I| (or the superoperator equivalent).
  double trace_defect() const;

 private:
  struct Cache {
    std::once_flag superop_once;
    Matrix superop;
    std::atomic<bool> superop_ready{false};
    std::once_flag kraus_once;
    std::vector<Matrix> kraus;
    std::atomic<bool> kraus_ready{false};
  };
  explicit LinearMap(std::size_t dim) : dim_(dim), cache_(std::make_shared<Cache>()) {}
  std::size_t dim_ = 0;
  std::shared_ptr<Cache> cache_;
};

/// Completely positive trace-preserving map: a LinearMap that passed the TP
/// check at construction.
class Channel {
 public:
  static constexpr double kTraceTolerance = 1e-9;

  static Channel from_kraus(std::vector<Matrix> kraus, double tol = kTraceTolerance);
  static Channel from_superoperator(Matrix superop, double tol = kTraceTolerance);
  static Channel identity(std::size_t dim);

  std::size_t dim() const { return map_.dim(); }
  const LinearMap& map() const { return map_; }
  bool has_kraus() const { return map_.has_kraus(); }
  const std::vector<Matrix>& kraus() const { return map_.kraus(); }
  const Matrix& superoperator() const { return map_.superoperator(); }
  Matrix apply(const Matrix& rho) const { return map_.apply(rho); }
  DensityMatrix apply(const DensityMatrix& rho) const;

 private:
  explicit Channel(LinearMap m) : map_(std::move(m)) {}
  LinearMap map_;
};

Channel unitary_channel(const Matrix& u, double tol = 1e-9);
/// Embedding of a row-stochastic matrix: Kraus sqrt(P[x][y]) |y><x|.
Channel classical_channel(const RealMatrix& p, double tol = 1e-12);
Channel compose(const Channel& outer, const Channel& inner);
LinearMap compose(const LinearMap& outer, const LinearMap& inner);
Channel mix(std::span<const Channel> channels, std::span<const double> weights);

enum class ProjectionSide { keep_z, remove_z };
LinearMap projection_map(const TargetSubspace& t, ProjectionSide which);
/// P_{-z} o E o P_{-z}.
LinearMap restricted_map(const Channel& e, const TargetSubspace& t);
/// E^sigma = E_{T~sigma}[E^T]; geometric via (I - (1-p)E)^{-1} p E.
Channel sigma_channel(const Channel& e, const StepDistribution& sigma);

/// Choi matrix J = Sum_ij |i><j| (x) E(|i><j|); PSD iff the map is CP.
Matrix choi_matrix(const LinearMap& m);
double choi_min_eigenvalue(const LinearMap& m);

/// P_{-z} rho P_{-z}, flagged sub-normalized.
DensityMatrix project_out(const DensityMatrix& rho, const TargetSubspace& t);

}  // namespace qhit
