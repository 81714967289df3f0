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
#include <cstdint>
#include <random>
#include <vector>

#include "qhit/channels.hpp"

namespace qhit {

/// Every trajectory was censored, so there is nothing to average.
class StatisticalFailure : public Error {
 public:
  using Error::Error;
};

struct ProtocolConfig {
  StepDistribution sigma = StepDistribution::geometric(1.0);
  std::size_t max_steps = 1'000'000;  ///< Budget of E applications per trajectory.
  std::uint64_t seed = 0;
};

struct TrajectoryOutcome {
  std::size_t steps = 0;         ///< E applications before the successful measurement.
  std::size_t measurements = 0;  ///< Failed measurements + 1 (or all attempts if censored).
  bool censored = false;

  bool operator==(const TrajectoryOutcome&) const = default;
};

struct HittingEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t n = 0;  ///< Trajectories run, censored ones included.
  std::size_t censored_count = 0;
};

/// Uniform doubles in [0, 1) from a Mersenne Twister whose seed sequence is
/// derived from (seed, index) by SplitMix64 mixing, so stream i depends only
/// on seed ^ i.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index);
  double uniform();

 private:
  std::mt19937_64 engine_;
};

struct MeasurementOutcome {
  bool hit = false;
  DensityMatrix post;
};

/// Two-outcome target measurement. Hit iff u < tr(Pi_z rho); the post state is
/// the renormalized projection on the observed branch.
MeasurementOutcome measure_step(const DensityMatrix& rho, const TargetSubspace& t, double u);

/// Measure at step 0; while missed, draw T ~ sigma, apply E T times, measure
/// again. Stops on a hit or when the next step would exceed cfg.max_steps.
TrajectoryOutcome run_trajectory(const Channel& e, const TargetSubspace& t,
                                 const DensityMatrix& rho0, const ProtocolConfig& cfg,
                                 RandomStream& rng);

/// Trajectory i uses RandomStream(cfg.seed, i); the result does not depend on
/// the thread count.
std::vector<TrajectoryOutcome> run_trajectories(const Channel& e, const TargetSubspace& t,
                                                const DensityMatrix& rho0,
                                                const ProtocolConfig& cfg, std::size_t n,
                                                std::size_t threads);

/// Aggregates outcomes; censored trajectories are counted but excluded from
/// the mean and standard error.
HittingEstimate summarize(const std::vector<TrajectoryOutcome>& outcomes);

HittingEstimate estimate_hitting(const Channel& e, const TargetSubspace& t,
                                 const DensityMatrix& rho0, const ProtocolConfig& cfg,
                                 std::size_t n, std::size_t threads = 0);

}  // namespace qhit
