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

#include <cstddef>
#include <string>

#include "qhit/channels.hpp"

namespace qhit {

/// A chain ready for the hitting-time routines.
struct Chain {
  std::string id;
  Channel channel;
  TargetSubspace target;
  DensityMatrix initial;
};

/// Grover iteration restricted to span{|x0>, |x0_perp>} (basis in that order).
/// Rotation by 2 gamma, gamma = arcsin(1/sqrt(N)); starts in |+> = (sin gamma, cos gamma).
Chain grover_restricted(std::size_t n_items);

/// Full Grover iteration G = (2|+><+| - I)(I - 2|x0><x0|) on 2^n_qubits states.
Chain grover_full(std::size_t n_qubits, std::size_t marked);

inline constexpr std::size_t kGroverFullMaxQubits = 6;

/// Hadamard-coined walk on a cycle of `length` sites. Basis index is
/// coin * length + site with coin 0 = up, 1 = down. Starts in |up, 0>, target
/// is site floor(length / 2) with either coin value.
Chain coined_cycle(std::size_t length);

/// The coined walk unitary U = S (H (x) I).
Matrix coined_cycle_unitary(std::size_t length);

Chain classical_embed(const RealMatrix& p, std::size_t start, std::size_t target);

/// Symmetric nearest-neighbour walk on a cycle (test and demo helper).
RealMatrix symmetric_cycle_walk(std::size_t length);

}  // namespace qhit
