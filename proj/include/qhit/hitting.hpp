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
#include <optional>
#include <string>

#include "qhit/channels.hpp"

namespace qhit {

enum class SolverMethod { dense_resolvent, neumann_series };

std::string to_string(SolverMethod m);

struct SolverStats {
  std::size_t iterations = 0;  ///< Neumann terms or margin inverse-iteration steps.
  double residual = 0.0;       ///< Relative residual of the dense solve.
  double condition_estimate = 0.0;
  bool margin_converged = true;
  /// Dimension of the subspace reachable from the initial state when the
  /// full-space system was singular and the solve was restricted to it; 0 otherwise.
  std::size_t krylov_dimension = 0;
};

/// Expected hitting time. `value` counts applications of the chain step E;
/// `measurement_rounds` counts failed target measurements (the hitting time of
/// the sigma-averaged chain), so value = E[T] * measurement_rounds.
struct HittingResult {
  double value = 0.0;
  double measurement_rounds = 0.0;
  SolverMethod method = SolverMethod::dense_resolvent;
  /// 1 - spectral radius of the operator whose resolvent was applied, taken on
  /// the invariant subspace generated by rho_{-z} (the whole space for generic
  /// chains). Absent when the start state has no weight outside the target.
  std::optional<double> precondition_margin;
  SolverStats stats;
};

struct HittingOptions {
  /// The precondition requires spectral radius < 1 - margin_threshold.
  double margin_threshold = 1e-9;
  LinalgTolerances linalg{};
  std::size_t margin_max_iterations = 20000;
  double margin_tolerance = 1e-13;
};

/// Measure at t = 0, then alternate one E step and one target measurement.
/// Evaluates tr[(I - E_{-z})^{-1}(rho_{-z})] with a dense LU solve.
HittingResult hitting_time(const Channel& e, const TargetSubspace& t, const DensityMatrix& rho0,
                           const HittingOptions& opts = {});

/// Same protocol with T ~ sigma steps between measurements. Geometric sigma is
/// solved through the measured-step map C_p = ((1-p) I + p P_{-z}) o E, whose
/// resolvent trace equals E[T] tr[(I - E^sigma_{-z})^{-1}(rho_{-z})]; explicit
/// sigma goes through generalized_hitting_time_two_stage.
HittingResult generalized_hitting_time(const Channel& e, const StepDistribution& sigma,
                                       const TargetSubspace& t, const DensityMatrix& rho0,
                                       const HittingOptions& opts = {});

/// Materializes E^sigma (sigma_channel) and applies the p = 1 formula to it.
HittingResult generalized_hitting_time_two_stage(const Channel& e, const StepDistribution& sigma,
                                                 const TargetSubspace& t, const DensityMatrix& rho0,
                                                 const HittingOptions& opts = {});

/// q_{-z} (1 - P_{-z})^{-1} 1 for a row-stochastic P, restricted to the states
/// reachable from q without visiting z. Throws PreconditionViolated when some
/// reachable state cannot reach z.
double classical_hitting_time(const RealMatrix& p, const RealVector& q, std::size_t z);

/// Partial sums of tr(E_{-z}^k(rho_{-z})) with the map applied through its
/// Kraus operators; never forms a superoperator. Stops once the estimated
/// remaining tail stays below tol for 10 consecutive terms.
HittingResult hitting_time_neumann(const Channel& e, const TargetSubspace& t,
                                   const DensityMatrix& rho0, double tol, std::size_t max_terms);

HittingResult generalized_hitting_time_neumann(const Channel& e, const StepDistribution& sigma,
                                               const TargetSubspace& t, const DensityMatrix& rho0,
                                               double tol, std::size_t max_terms);

}  // namespace qhit
