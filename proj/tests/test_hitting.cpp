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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>

#include "qhit/hitting.hpp"
#include "qhit/walks.hpp"
#include "support.hpp"

using namespace qhit;
namespace t = qhit::testing;

namespace {

// Sum_k k P(T = k) for the classical chain, stopping when the surviving mass
// falls below cutoff.
double classical_enumeration(const RealMatrix& p, const RealVector& q, std::size_t z,
                             double cutoff = 1e-13) {
  const auto zi = static_cast<Eigen::Index>(z);
  RealVector alive = q.transpose();
  alive[zi] = 0.0;
  double survive = alive.sum();
  double h = 0.0;
  for (std::size_t k = 1; survive > cutoff && k < 10'000'000; ++k) {
    alive = (alive.transpose() * p).transpose();
    alive[zi] = 0.0;
    const double next = alive.sum();
    h += static_cast<double>(k) * (survive - next);
    survive = next;
  }
  return h;
}

std::vector<Chain> builtin_chains() {
  std::vector<Chain> chains;
  for (std::size_t n : {2u, 4u, 32u, 64u, 256u}) chains.push_back(grover_restricted(n));
  for (std::size_t q : {2u, 3u, 4u}) chains.push_back(grover_full(q, 1));
  for (std::size_t l : {3u, 4u, 6u, 8u, 10u, 11u, 15u}) chains.push_back(coined_cycle(l));
  chains.push_back(classical_embed(symmetric_cycle_walk(6), 0, 3));
  return chains;
}

}  // namespace

TEST_CASE("hitting_time examples") {
  const TargetSubspace z = TargetSubspace::from_basis_index(2, 1);
  CHECK(hitting_time(Channel::identity(2), z, DensityMatrix::basis(2, 1)).value == 0.0);

  const RealMatrix half = RealMatrix::Constant(2, 2, 0.5);
  const HittingResult r = hitting_time(classical_channel(half), z, DensityMatrix::basis(2, 0));
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));
  RealVector q(2);
  q << 1.0, 0.0;
  CHECK(classical_hitting_time(half, q, 1) == doctest::Approx(2.0).epsilon(1e-12));

  try {
    hitting_time(Channel::identity(2), z, DensityMatrix::basis(2, 0));
    FAIL("expected PreconditionViolated");
  } catch (const PreconditionViolated& e) {
    CHECK(std::string(e.what()).find("precondition violated: spectral radius 1") != std::string::npos);
    CHECK(e.spectral_radius() == doctest::Approx(1.0));
  }
}

TEST_CASE("generalized hitting time examples") {
  const Chain g = grover_restricted(32);
  const HittingResult one = generalized_hitting_time(g.channel, StepDistribution::geometric(1.0), g.target, g.initial);
  CHECK(one.value == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(std::abs(one.value - hitting_time(g.channel, g.target, g.initial).value) <= 1e-10);

  for (double p : {0.1, 0.5, 1.0}) {
    const DensityMatrix at_target = DensityMatrix::basis(2, 0);
    CHECK(generalized_hitting_time(g.channel, StepDistribution::geometric(p), g.target, at_target).value == 0.0);
  }
  const StepDistribution w = StepDistribution::explicit_weights({{1, 0.5}, {2, 0.5}});
  CHECK(generalized_hitting_time(g.channel, w, g.target, DensityMatrix::basis(2, 0)).value == 0.0);
}

TEST_CASE("classical_hitting_time examples") {
  const RealMatrix p = t::random_stochastic(4);
  RealVector ez = RealVector::Zero(4);
  ez[2] = 1.0;
  CHECK(classical_hitting_time(p, ez, 2) == 0.0);

  RealMatrix swap(2, 2);
  swap << 0, 1, 1, 0;
  RealVector e0(2);
  e0 << 1.0, 0.0;
  CHECK(classical_hitting_time(swap, e0, 1) == doctest::Approx(1.0).epsilon(1e-14));

  for (int trial = 0; trial < 20; ++trial) {
    const RealMatrix m = t::random_stochastic(5, 0.4);
    RealVector q = RealVector::Random(5).cwiseAbs();
    q /= q.sum();
    const std::size_t z = static_cast<std::size_t>(trial % 5);
    double exact = 0.0;
    try {
      exact = classical_hitting_time(m, q, z);
    } catch (const PreconditionViolated&) {
      continue;
    }
    CHECK(exact == doctest::Approx(classical_enumeration(m, q, z)).epsilon(1e-8));
  }

  const RealMatrix id = RealMatrix::Identity(3, 3);
  RealVector start = RealVector::Zero(3);
  start[0] = 1.0;
  CHECK_THROWS_AS(classical_hitting_time(id, start, 1), PreconditionViolated);
}

TEST_CASE("Neumann solver examples") {
  const Chain g = grover_restricted(32);
  CHECK(hitting_time_neumann(g.channel, g.target, DensityMatrix::basis(2, 0), 1e-10, 100).value == 0.0);
  const HittingResult n = hitting_time_neumann(g.channel, g.target, g.initial, 1e-10, 1'000'000);
  CHECK(std::abs(n.value - 8.0) <= 1e-8);
  CHECK(n.method == SolverMethod::neumann_series);
  const TargetSubspace z = TargetSubspace::from_basis_index(2, 1);
  CHECK_THROWS_AS(hitting_time_neumann(Channel::identity(2), z, DensityMatrix::basis(2, 0), 1e-10, 5000),
                  NonConvergent);
}

TEST_CASE("classical embedding equivalence") {
  std::uniform_int_distribution<int> dim(2, 6);
  int compared = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index d = dim(t::rng());
    const RealMatrix p = t::random_stochastic(d, 0.3);
    const auto start = static_cast<std::size_t>(trial % d);
    const auto target = static_cast<std::size_t>((trial + 1) % d);
    RealVector q = RealVector::Zero(d);
    q[static_cast<Eigen::Index>(start)] = 1.0;
    double classical = 0.0;
    try {
      classical = classical_hitting_time(p, q, target);
    } catch (const PreconditionViolated&) {
      const Chain c = classical_embed(p, start, target);
      CHECK_THROWS_AS(hitting_time(c.channel, c.target, c.initial), PreconditionViolated);
      continue;
    }
    const Chain c = classical_embed(p, start, target);
    CHECK(std::abs(hitting_time(c.channel, c.target, c.initial).value - classical) <= 1e-8 * (1.0 + classical));
    ++compared;
  }
  CHECK(compared > 20);
}

TEST_CASE("hitting time is linear in the initial state") {
  for (int trial = 0; trial < 10; ++trial) {
    const Channel e = t::random_channel(4, 2);
    const TargetSubspace z = TargetSubspace::from_basis_index(4, 0);
    const DensityMatrix a = t::random_state(4), b = t::random_state(4);
    const double alpha = 0.3;
    const DensityMatrix mixed = DensityMatrix::from_matrix(alpha * a.matrix() + (1.0 - alpha) * b.matrix());
    const double ha = hitting_time(e, z, a).value, hb = hitting_time(e, z, b).value;
    CHECK(std::abs(hitting_time(e, z, mixed).value - (alpha * ha + (1.0 - alpha) * hb)) <= 1e-9);
  }
}

TEST_CASE("rank-2 targets agree with the protocol-sum oracle") {
  for (int trial = 0; trial < 10; ++trial) {
    const Channel e = t::random_channel(4, 1 + trial % 3);
    const std::vector<Vector> vs{t::random_matrix(4, 1), t::random_matrix(4, 1)};
    const TargetSubspace z = TargetSubspace::from_vectors(vs, 4);
    const DensityMatrix rho = t::random_state(4);
    const double oracle = t::protocol_sum_oracle(e, z.pi_minus_z(), rho.matrix(), 1e-15);
    CHECK(std::abs(hitting_time(e, z, rho).value - oracle) <= 1e-7);
    const double p = 0.4;
    const Channel averaged = sigma_channel(e, StepDistribution::geometric(p));
    const double rounds = t::protocol_sum_oracle(averaged, z.pi_minus_z(), rho.matrix(), 1e-15);
    const HittingResult g = generalized_hitting_time(e, StepDistribution::geometric(p), z, rho);
    CHECK(std::abs(g.measurement_rounds - rounds) <= 1e-7);
    CHECK(std::abs(g.value - rounds / p) <= 1e-7 / p);
  }
}

TEST_CASE("enlarging the target never increases the hitting time") {
  for (int trial = 0; trial < 10; ++trial) {
    const Channel e = t::random_channel(5, 2);
    const DensityMatrix rho = t::random_state(5);
    const std::array<std::size_t, 1> one{0};
    const std::array<std::size_t, 2> two{0, 3};
    const std::array<std::size_t, 3> three{0, 3, 4};
    const double h1 = hitting_time(e, TargetSubspace::from_basis_indices(5, one), rho).value;
    const double h2 = hitting_time(e, TargetSubspace::from_basis_indices(5, two), rho).value;
    const double h3 = hitting_time(e, TargetSubspace::from_basis_indices(5, three), rho).value;
    CHECK(h2 <= h1 + 1e-10);
    CHECK(h3 <= h2 + 1e-10);
  }
}

TEST_CASE("dense and Neumann solvers agree on built-in chains") {
  const double tol = 1e-10;
  for (const Chain& c : builtin_chains()) {
    for (double p : {1.0, 0.5, 0.25}) {
      CAPTURE(c.id);
      CAPTURE(p);
      const StepDistribution sigma = StepDistribution::geometric(p);
      const HittingResult dense = generalized_hitting_time(c.channel, sigma, c.target, c.initial);
      if (!dense.precondition_margin || *dense.precondition_margin <= 0.01) continue;
      const HittingResult series =
          generalized_hitting_time_neumann(c.channel, sigma, c.target, c.initial, tol, 10'000'000);
      CHECK(std::abs(dense.value - series.value) <= 10.0 * tol);
    }
  }
}

TEST_CASE("measured-step route equals the two-stage resolvent route") {
  std::vector<Chain> chains = builtin_chains();
  for (int trial = 0; trial < 5; ++trial) {
    chains.push_back(Chain{"random", t::random_channel(3, 2), TargetSubspace::from_basis_index(3, 1),
                           t::random_state(3)});
  }
  for (const Chain& c : chains) {
    if (c.channel.dim() > 16) continue;
    for (double p : {0.05, 0.3, 0.7}) {
      CAPTURE(c.id);
      CAPTURE(p);
      const StepDistribution sigma = StepDistribution::geometric(p);
      const HittingResult fast = generalized_hitting_time(c.channel, sigma, c.target, c.initial);
      const HittingResult slow = generalized_hitting_time_two_stage(c.channel, sigma, c.target, c.initial);
      CHECK(std::abs(fast.value - slow.value) <= 1e-8 * (1.0 + slow.value));
      CHECK(std::abs(fast.measurement_rounds - slow.measurement_rounds) <= 1e-8 * (1.0 + slow.measurement_rounds));
    }
  }
}

TEST_CASE("precondition margin equals one minus the spectral radius") {
  for (int trial = 0; trial < 10; ++trial) {
    const Channel e = t::random_channel(3, 2);
    const TargetSubspace z = TargetSubspace::from_basis_index(3, 0);
    const HittingResult r = hitting_time(e, z, t::random_state(3));
    const double radius = spectral_radius(restricted_map(e, z).superoperator());
    REQUIRE(r.precondition_margin.has_value());
    CHECK(*r.precondition_margin == doctest::Approx(1.0 - radius).epsilon(1e-7));
    CHECK(r.value >= 0.0);
  }
  const Chain c = coined_cycle(10);
  const HittingResult r = hitting_time(c.channel, c.target, c.initial);
  const double radius = spectral_radius(restricted_map(c.channel, c.target).superoperator());
  CHECK(*r.precondition_margin == doctest::Approx(1.0 - radius).epsilon(1e-7));
}

TEST_CASE("explicit step distributions") {
  const Chain g = grover_restricted(16);
  const StepDistribution one = StepDistribution::explicit_weights({{1, 1.0}});
  CHECK(generalized_hitting_time(g.channel, one, g.target, g.initial).value == doctest::Approx(4.0).epsilon(1e-12));

  const StepDistribution w = StepDistribution::explicit_weights({{1, 0.3}, {2, 0.3}, {5, 0.4}});
  const HittingResult r = generalized_hitting_time(g.channel, w, g.target, g.initial);
  const Channel averaged = sigma_channel(g.channel, w);
  const double rounds = t::protocol_sum_oracle(averaged, g.target.pi_minus_z(), g.initial.matrix(), 1e-15);
  CHECK(r.value == doctest::Approx(w.mean() * rounds).epsilon(1e-9));
  const HittingResult n = generalized_hitting_time_neumann(g.channel, w, g.target, g.initial, 1e-11, 1'000'000);
  CHECK(std::abs(n.value - r.value) <= 1e-9 * (1.0 + r.value));
}

TEST_CASE("dimension mismatch") {
  const Chain g = grover_restricted(8);
  CHECK_THROWS_AS(hitting_time(g.channel, TargetSubspace::from_basis_index(3, 0), g.initial), DimensionError);
}

TEST_CASE("closed classes the start never reaches do not affect the result") {
  // 0 -> {1, 2} uniformly, 1 -> 2, 2 absorbing target, 3 <-> 4 closed.
  RealMatrix p = RealMatrix::Zero(5, 5);
  p(0, 1) = p(0, 2) = 0.5;
  p(1, 2) = 1.0;
  p(2, 2) = 1.0;
  p(3, 4) = p(4, 3) = 1.0;
  RealVector q = RealVector::Zero(5);
  q[0] = 1.0;
  CHECK(classical_hitting_time(p, q, 2) == doctest::Approx(1.5).epsilon(1e-14));
  const Chain c = classical_embed(p, 0, 2);
  const HittingResult r = hitting_time(c.channel, c.target, c.initial);
  CHECK(r.value == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(*r.precondition_margin > 0.5);
  CHECK_THROWS_AS(hitting_time(c.channel, c.target, DensityMatrix::basis(5, 3)), PreconditionViolated);
  RealVector q3 = RealVector::Zero(5);
  q3[3] = 1.0;
  CHECK_THROWS_AS(classical_hitting_time(p, q3, 2), PreconditionViolated);
}
