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

#include <stdexcept>
#include <string>

namespace qhit {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes do not match or a matrix is not square where it has to be.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An input violates a documented invariant (non-unitary, non-stochastic, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

/// The restricted map has spectral radius too close to 1: the hitting time is
/// infinite (or numerically indistinguishable from it).
class PreconditionViolated : public Error {
 public:
  PreconditionViolated(const std::string& what, double spectral_radius)
      : Error(what), spectral_radius_(spectral_radius) {}
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

/// An iterative method ran out of its budget.
class NonConvergent : public Error {
 public:
  NonConvergent(const std::string& what, std::size_t iterations)
      : Error(what), iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

}  // namespace qhit
