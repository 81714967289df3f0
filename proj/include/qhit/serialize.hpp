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

// JSON file formats.
//
// Complex numbers are [re, im] pairs; matrices are arrays of rows.
//
//   channel:  {"dim": d, "kraus": [M_1, ..., M_k]}
//   state:    {"dim": d, "rho": M}
//   target:   {"dim": d, "projector": M}  or  {"dim": d, "basis_indices": [i, ...]}
//   classical chain: {"P": [[p00, p01, ...], ...]}  (a bare array of rows is accepted)
//   step distribution: {"geometric": p}  or
//                      {"weights": {"1": w1, "3": w3}, "allow_zero": false}

#include <filesystem>
#include <string>

#include "json.hpp"
#include "qhit/channels.hpp"

namespace qhit {

/// Malformed input; the message names the file, line or field at fault.
class InputError : public Error {
 public:
  using Error::Error;
};

using Json = nlohmann::json;

Json complex_matrix_to_json(const Matrix& m);
Matrix complex_matrix_from_json(const Json& j, const std::string& field);

Json channel_to_json(const Channel& c);
Channel channel_from_json(const Json& j);

Json state_to_json(const DensityMatrix& rho);
DensityMatrix state_from_json(const Json& j);

Json target_to_json(const TargetSubspace& t);
TargetSubspace target_from_json(const Json& j);

RealMatrix stochastic_from_json(const Json& j);
Json stochastic_to_json(const RealMatrix& p);

StepDistribution step_distribution_from_json(const Json& j);
Json step_distribution_to_json(const StepDistribution& s);

/// Parses a file; parse errors are reported with line and column.
Json load_json_file(const std::filesystem::path& path);

}  // namespace qhit
