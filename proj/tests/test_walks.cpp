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

#include <cmath>
#include <limits>
#include <numbers>

#include "qhit/hitting.hpp"
#include "qhit/walks.hpp"
#include "support.hpp"

using namespace qhit;
namespace t = qhit::testing;

namespace {

double hit(const Chain& c, double p) {
  return generalized_hitting_time(c.channel, StepDistribution::geometric(p), c.target, c.initial).value;
}

// Minimum over p = 0.01, ..., 1.00 of the measurement-round count.
double min_rounds(const Chain& c) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 100; ++k) {
    const StepDistribution sigma = StepDistribution::geometric(k / 100.0);
    best = std::min(best, generalized_hitting_time(c.channel, sigma, c.target, c.initial).measurement_rounds);
  }
  return best;
}

}  // namespace

TEST_CASE("restricted Grover chain construction") {
  const Chain g = grover_restricted(4);
  const Matrix& u = g.channel.kraus().front();
  CHECK(u(0, 0).real() == doctest::Approx(std::cos(std::numbers::pi / 3)));
  CHECK(u(1, 0).real() == doctest::Approx(std::sin(std::numbers::pi / 3)));
  CHECK(u(0, 1).real() == doctest::Approx(-std::sin(std::numbers::pi / 3)));
  for (std::size_t n : {2u, 4u, 7u, 32u, 256u}) {
    const Chain c = grover_restricted(n);
    CHECK(c.target.hit_probability(c.initial.matrix()) == doctest::Approx(1.0 / static_cast<double>(n)));
  }
  CHECK_THROWS_AS(grover_restricted(1), ValidationError);
}

TEST_CASE("Grover hitting time at p = 1 is N/4") {
  for (std::size_t n : {4u, 32u, 256u}) {
    CHECK(std::abs(hit(grover_restricted(n), 1.0) - n / 4.0) <= 1e-9 * n);
  }
}

TEST_CASE("full Grover chain matches the restricted chain") {
  for (std::size_t q : {2u, 3u, 4u}) {
    const std::size_t n = std::size_t{1} << q;
    const Chain full = grover_full(q, n - 1);
    const Chain restricted = grover_restricted(n);
    CHECK(full.target.hit_probability(full.initial.matrix()) == doctest::Approx(1.0 / static_cast<double>(n)));
    for (double p : {0.25, 1.0}) {
      CAPTURE(n);
      CAPTURE(p);
      CHECK(std::abs(hit(full, p) - hit(restricted, p)) <= 1e-8);
    }
  }
  CHECK_THROWS_AS(grover_full(kGroverFullMaxQubits + 1, 0), ValidationError);
  CHECK_THROWS_AS(grover_full(2, 4), ValidationError);
}

TEST_CASE("one Grover iteration on four items finds the marked item") {
  const Chain g = grover_full(2, 2);
  const Matrix after = g.channel.apply(g.initial.matrix());
  CHECK(g.target.hit_probability(after) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Grover closed form from the optimality proof matches the engine") {
  for (double n : {16.0, 32.0, 64.0}) {
    const Chain g = grover_restricted(static_cast<std::size_t>(n));
    for (int k = 1; k <= 20; ++k) {
      const double p = 0.05 * k;
      const double engine = hit(g, p);
      const Channel averaged = sigma_channel(g.channel, StepDistribution::geometric(p));
      const double oracle =
          t::protocol_sum_oracle(averaged, g.target.pi_minus_z(), g.initial.matrix(), 1e-16) / p;
      CHECK(std::abs(engine - oracle) <= 1e-7 * (1.0 + oracle));
      CHECK(std::abs(engine - t::proof_closed_form(n, p)) <= 1e-9 * engine);
    }
    CHECK(std::abs(t::plotted_closed_form(n, 1.0) - n / 4.0) > 0.5);
  }
}

TEST_CASE("coined cycle construction") {
  for (std::size_t l : {3u, 4u, 10u, 21u}) {
    const Matrix u = coined_cycle_unitary(l);
    const auto n = static_cast<Eigen::Index>(2 * l);
    CHECK(max_abs(u.adjoint() * u - Matrix::Identity(n, n)) <= 1e-12);
    const Chain c = coined_cycle(l);
    CHECK(c.target.rank() == 2);
    CHECK(c.target.pi_z()(static_cast<Eigen::Index>(l / 2), static_cast<Eigen::Index>(l / 2)) == Complex(1.0));
    CHECK(c.initial.matrix()(0, 0) == Complex(1.0));
  }
  // U|up,x> = (|up,x+1> + |down,x-1>)/sqrt2, U|down,x> = (|up,x+1> - |down,x-1>)/sqrt2.
  const Matrix u = coined_cycle_unitary(5);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(u(1, 0).real() == doctest::Approx(r));
  CHECK(u(5 + 4, 0).real() == doctest::Approx(r));
  CHECK(u(1, 5).real() == doctest::Approx(r));
  CHECK(u(5 + 4, 5).real() == doctest::Approx(-r));
  CHECK_THROWS_AS(coined_cycle(2), ValidationError);
}

TEST_CASE("coined cycle hitting times at p = 1") {
  CHECK(std::abs(hit(coined_cycle(10), 1.0) - 25.0) <= 1e-6);
  CHECK(std::abs(hit(coined_cycle(21), 1.0) - 110.0) <= 1e-4);
}

TEST_CASE("classical embeddings") {
  const RealMatrix id = RealMatrix::Identity(3, 3);
  const Chain same = classical_embed(id, 1, 1);
  CHECK(hitting_time(same.channel, same.target, same.initial).value == 0.0);
  const Chain apart = classical_embed(id, 0, 1);
  CHECK_THROWS_AS(hitting_time(apart.channel, apart.target, apart.initial), PreconditionViolated);

  const RealMatrix cycle = symmetric_cycle_walk(6);
  const Chain c = classical_embed(cycle, 0, 3);
  RealVector q = RealVector::Zero(6);
  q[0] = 1.0;
  CHECK(classical_hitting_time(cycle, q, 3) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(hitting_time(c.channel, c.target, c.initial).value == doctest::Approx(9.0).epsilon(1e-12));
  CHECK_THROWS_AS(classical_embed(cycle, 0, 6), ValidationError);
}

TEST_CASE("even cycles: parity of the half length decides the optimal scaling") {
  for (std::size_t half = 2; half <= 10; ++half) {
    CAPTURE(half);
    const double best = min_rounds(coined_cycle(2 * half));
    const double n = static_cast<double>(half);
    if (half % 2 == 0) {
      CHECK(best <= 3.0 * n);
    } else {
      CHECK(best >= 0.5 * n * n);
    }
  }
}

TEST_CASE("odd cycles reach linear hitting time at the optimal p") {
  for (std::size_t half = 2; half <= 14; ++half) {
    CAPTURE(half);
    CHECK(min_rounds(coined_cycle(2 * half + 1)) <= 2.0 * static_cast<double>(half) + 2.0);
  }
}
