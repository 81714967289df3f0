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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qhit::cli {

/// Stable exit codes.
enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kPreconditionViolated = 2,
  kStatisticalFailure = 3,
};

/// Entry point shared by the qhit binary and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SweepRow {
  double p = 0.0;
  double analytic = 0.0;  ///< +inf when the precondition fails.
  std::optional<double> mc_mean;
  std::optional<double> mc_stderr;
  std::string status = "ok";  ///< ok | precondition_violated | non_convergent

  bool operator==(const SweepRow&) const = default;
};

struct SweepTable {
  std::vector<SweepRow> rows;  ///< p ascending
  double argmin_p = 0.0;
  double min_value = 0.0;
  bool has_mc = false;
  std::vector<std::string> comments;  ///< provenance lines, without the leading "# "

  bool operator==(const SweepTable&) const = default;
};

/// 12 significant digits; "inf" / "nan" for non-finite values.
std::string format_number(double v);

/// Columns p,analytic[,mc_mean,mc_stderr],status; the summary is a final row
/// "argmin_p,min_value,...,argmin". Lines starting with '#' carry provenance.
std::string format_sweep_csv(const SweepTable& table);
SweepTable parse_sweep_csv(const std::string& text);

/// Table with every number rounded to what format_sweep_csv prints.
SweepTable rounded(const SweepTable& table);

/// "a:b:step" (inclusive, computed as a + k*step rounded to 1e-12) or a comma list.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace qhit::cli
