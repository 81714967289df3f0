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

#include "qhit/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qhit/parallel.hpp"

namespace qhit {
namespace {

constexpr double kUnderflow = 1e-300;
constexpr double kTraceDrift = 1e-8;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::seed_seq stream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t state = seed ^ index;
  std::uint32_t words[8];
  for (int k = 0; k < 4; ++k) {
    const std::uint64_t w = splitmix64(state);
    words[2 * k] = static_cast<std::uint32_t>(w);
    words[2 * k + 1] = static_cast<std::uint32_t>(w >> 32);
  }
  return std::seed_seq(std::begin(words), std::end(words));
}

struct BranchResult {
  bool hit;
  Matrix post;
};

BranchResult measure(const Matrix& rho, const TargetSubspace& t, double u) {
  const double p_hit = std::clamp(t.hit_probability(rho), 0.0, 1.0);
  const bool hit = u < p_hit;
  const Matrix& proj = hit ? t.pi_z() : t.pi_minus_z();
  Matrix post = proj * rho * proj;
  const double tr = post.trace().real();
  if (!(tr > kUnderflow)) {
    throw Error("trajectory aborted: " + std::string(hit ? "hit" : "miss") +
                " branch has trace " + std::to_string(tr));
  }
  post /= tr;
  return {hit, 0.5 * (post + post.adjoint())};
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq = stream_seed(seed, index);
  engine_.seed(seq);
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

MeasurementOutcome measure_step(const DensityMatrix& rho, const TargetSubspace& t, double u) {
  if (rho.dim() != t.dim()) throw DimensionError("measure_step: state and target dimensions differ");
  if (std::abs(rho.trace() - 1.0) > 1e-8) throw ValidationError("measure_step: state not normalized");
  BranchResult b = measure(rho.matrix(), t, u);
  return MeasurementOutcome{b.hit, DensityMatrix::from_matrix(std::move(b.post), 1e-8)};
}

TrajectoryOutcome run_trajectory(const Channel& e, const TargetSubspace& t,
                                 const DensityMatrix& rho0, const ProtocolConfig& cfg,
                                 RandomStream& rng) {
  if (e.dim() != t.dim() || e.dim() != rho0.dim()) {
    throw DimensionError("run_trajectory: channel, target and state dimensions differ");
  }
  if (cfg.max_steps < 1) throw ValidationError("run_trajectory: max_steps must be at least 1");
  if (rho0.is_subnormalized()) throw ValidationError("run_trajectory: initial state must be normalized");
  TrajectoryOutcome out;
  Matrix rho = rho0.matrix();
  while (true) {
    ++out.measurements;
    BranchResult m = measure(rho, t, rng.uniform());
    if (m.hit) return out;
    rho = std::move(m.post);
    const std::size_t steps = cfg.sigma.sample(rng.uniform());
    for (std::size_t k = 0; k < steps; ++k) {
      if (out.steps == cfg.max_steps) {
        out.censored = true;
        return out;
      }
      rho = e.apply(rho);
      ++out.steps;
    }
    if (std::abs(rho.trace().real() - 1.0) > kTraceDrift) {
      throw Error("trajectory aborted: state trace drifted to " + std::to_string(rho.trace().real()));
    }
  }
}

std::vector<TrajectoryOutcome> run_trajectories(const Channel& e, const TargetSubspace& t,
                                                const DensityMatrix& rho0,
                                                const ProtocolConfig& cfg, std::size_t n,
                                                std::size_t threads) {
  std::vector<TrajectoryOutcome> outcomes(n);
  parallel_for(n, threads == 0 ? default_thread_count() : threads, [&](std::size_t i) {
    RandomStream rng(cfg.seed, i);
    outcomes[i] = run_trajectory(e, t, rho0, cfg, rng);
  });
  return outcomes;
}

HittingEstimate summarize(const std::vector<TrajectoryOutcome>& outcomes) {
  HittingEstimate est;
  est.n = outcomes.size();
  double sum = 0.0;
  for (const TrajectoryOutcome& o : outcomes) {
    if (o.censored) {
      ++est.censored_count;
      continue;
    }
    sum += static_cast<double>(o.steps);
  }
  const std::size_t used = est.n - est.censored_count;
  if (used == 0) {
    throw StatisticalFailure("all " + std::to_string(est.n) + " trajectories were censored");
  }
  est.mean = sum / static_cast<double>(used);
  double ss = 0.0;
  for (const TrajectoryOutcome& o : outcomes) {
    if (o.censored) continue;
    const double dev = static_cast<double>(o.steps) - est.mean;
    ss += dev * dev;
  }
  est.standard_error = used > 1 ? std::sqrt(ss / static_cast<double>(used - 1)) /
                                      std::sqrt(static_cast<double>(used))
                                : INFINITY;
  return est;
}

HittingEstimate estimate_hitting(const Channel& e, const TargetSubspace& t,
                                 const DensityMatrix& rho0, const ProtocolConfig& cfg,
                                 std::size_t n, std::size_t threads) {
  if (n < 2) throw ValidationError("estimate_hitting: need at least 2 trajectories");
  return summarize(run_trajectories(e, t, rho0, cfg, n, threads));
}

}  // namespace qhit
