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

#include "qhit/walks.hpp"

#include <cmath>
#include <string>

namespace qhit {

Chain grover_restricted(std::size_t n_items) {
  if (n_items < 2) throw ValidationError("grover_restricted: need at least 2 items");
  const double gamma = std::asin(1.0 / std::sqrt(static_cast<double>(n_items)));
  const double c = std::cos(2.0 * gamma);
  const double s = std::sin(2.0 * gamma);
  Matrix g(2, 2);
  g << c, -s, s, c;
  Vector plus(2);
  plus << std::sin(gamma), std::cos(gamma);
  return Chain{"grover-restricted N=" + std::to_string(n_items), unitary_channel(g),
               TargetSubspace::from_basis_index(2, 0), DensityMatrix::pure(plus)};
}

Chain grover_full(std::size_t n_qubits, std::size_t marked) {
  if (n_qubits < 1) throw ValidationError("grover_full: need at least 1 qubit");
  if (n_qubits > kGroverFullMaxQubits) {
    throw ValidationError("grover_full: " + std::to_string(n_qubits) +
                          " qubits exceeds the dense superoperator budget of " +
                          std::to_string(kGroverFullMaxQubits));
  }
  const std::size_t n = std::size_t{1} << n_qubits;
  if (marked >= n) throw ValidationError("grover_full: marked item out of range");
  const auto dim = static_cast<Eigen::Index>(n);
  const auto m = static_cast<Eigen::Index>(marked);
  const Vector plus = Vector::Constant(dim, 1.0 / std::sqrt(static_cast<double>(n)));
  const Matrix id = Matrix::Identity(dim, dim);
  Matrix oracle = id;
  oracle(m, m) = -1.0;
  const Matrix diffusion = 2.0 * plus * plus.adjoint() - id;
  return Chain{"grover-full n=" + std::to_string(n_qubits) + " marked=" + std::to_string(marked),
               unitary_channel(diffusion * oracle), TargetSubspace::from_basis_index(n, marked),
               DensityMatrix::pure(plus)};
}

Matrix coined_cycle_unitary(std::size_t length) {
  if (length < 3) throw ValidationError("coined_cycle: length must be at least 3");
  const auto l = static_cast<Eigen::Index>(length);
  Matrix shift = Matrix::Zero(2 * l, 2 * l);
  for (Eigen::Index x = 0; x < l; ++x) {
    shift((x + 1) % l, x) = 1.0;              // up: x -> x + 1
    shift(l + (x + l - 1) % l, l + x) = 1.0;  // down: x -> x - 1
  }
  Matrix hadamard(2, 2);
  hadamard << 1.0, 1.0, 1.0, -1.0;
  hadamard /= std::sqrt(2.0);
  return shift * kron(hadamard, Matrix::Identity(l, l));
}

Chain coined_cycle(std::size_t length) {
  const Matrix u = coined_cycle_unitary(length);
  const std::size_t opposite = length / 2;
  const std::size_t target[] = {opposite, length + opposite};
  return Chain{"cycle L=" + std::to_string(length), unitary_channel(u, 1e-10),
               TargetSubspace::from_basis_indices(2 * length, target),
               DensityMatrix::basis(2 * length, 0)};
}

Chain classical_embed(const RealMatrix& p, std::size_t start, std::size_t target) {
  const auto n = static_cast<std::size_t>(p.rows());
  if (start >= n || target >= n) throw ValidationError("classical_embed: state index out of range");
  return Chain{"classical n=" + std::to_string(n) + " start=" + std::to_string(start) +
                   " target=" + std::to_string(target),
               classical_channel(p), TargetSubspace::from_basis_index(n, target),
               DensityMatrix::basis(n, start)};
}

RealMatrix symmetric_cycle_walk(std::size_t length) {
  if (length < 3) throw ValidationError("symmetric_cycle_walk: length must be at least 3");
  const auto l = static_cast<Eigen::Index>(length);
  RealMatrix p = RealMatrix::Zero(l, l);
  for (Eigen::Index x = 0; x < l; ++x) {
    p(x, (x + 1) % l) += 0.5;
    p(x, (x + l - 1) % l) += 0.5;
  }
  return p;
}

}  // namespace qhit
