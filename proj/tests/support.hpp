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

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qhit/channels.hpp"
#include "qhit/linalg.hpp"

namespace qhit::testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(0x5eed);
  return engine;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng()), g(rng()));
  }
  return m;
}

inline Matrix random_unitary(Eigen::Index d) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(d, d));
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline RealMatrix random_stochastic(Eigen::Index d, double sparsity = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealMatrix p(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p(i, j) = u(rng()) < sparsity ? 0.0 : u(rng());
    if (p.row(i).sum() == 0.0) p(i, (i + 1) % d) = 1.0;
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

// Kraus operators from a random isometry V: C^d -> C^(k d).
inline Channel random_channel(Eigen::Index d, Eigen::Index k) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(k * d, d));
  const Matrix v = qr.householderQ() * Matrix::Identity(k * d, d);
  std::vector<Matrix> kraus;
  for (Eigen::Index i = 0; i < k; ++i) kraus.push_back(v.block(i * d, 0, d, d));
  return Channel::from_kraus(std::move(kraus));
}

inline DensityMatrix random_state(Eigen::Index d) {
  const Matrix a = random_matrix(d, d);
  Matrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::from_matrix(rho);
}

inline Matrix superop_power_sum(const Matrix& s, double p, std::size_t terms) {
  // Sum_{t=1}^{terms} p (1-p)^{t-1} S^t
  Matrix power = s;
  Matrix total = p * s;
  double weight = p;
  for (std::size_t t = 2; t <= terms; ++t) {
    power = power * s;
    weight *= 1.0 - p;
    total += weight * power;
  }
  return total;
}

// Expected hitting time by summing k * P(first hit after k steps) of the
// measure/evolve protocol, run on density matrices until the surviving mass
// drops below cutoff.
inline double protocol_sum_oracle(const Channel& e, const Matrix& pi_minus, const Matrix& rho0,
                                  double cutoff = 1e-13, std::size_t max_steps = 2'000'000) {
  Matrix rho = pi_minus * rho0 * pi_minus;
  double survive = rho.trace().real();
  double h = 0.0;
  for (std::size_t k = 1; k <= max_steps && survive > cutoff; ++k) {
    const Matrix evolved = e.apply(rho);
    rho = pi_minus * evolved * pi_minus;
    const double next = rho.trace().real();
    h += static_cast<double>(k) * (survive - next);
    survive = next;
  }
  return h;
}

inline double proof_closed_form(double n, double p) {
  return (1.0 / p) * (n * n * p * p - 16.0 * n * p + 16.0 * n + 16.0 * p - 16.0) / (8.0 * n - 4.0 * n * p);
}

inline double plotted_closed_form(double n, double p) {
  return (1.0 / p) * ((n * p) * (n * p) + 16.0 * n - 20.0 * n * p + 16.0 * p) / (8.0 * n - 4.0 * n * p);
}

}  // namespace qhit::testing
