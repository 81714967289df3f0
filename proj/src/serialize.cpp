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

#include "qhit/serialize.hpp"

#include <fstream>
#include <optional>
#include <sstream>

namespace qhit {
namespace {

[[noreturn]] void fail(const std::string& field, const std::string& msg) {
  throw InputError("field '" + field + "': " + msg);
}

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

std::size_t read_dim(const Json& j) {
  const Json& d = require(j, "dim", "");
  if (!d.is_number_unsigned() || d.get<std::size_t>() == 0) fail("dim", "expected a positive integer");
  return d.get<std::size_t>();
}

Complex complex_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    fail(field, "expected a complex number [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class Wrap>
void wrap_errors(const std::string& what, Wrap&& fn) {
  try {
    fn();
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(what + ": " + e.what());
  }
}

}  // namespace

Json complex_matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix complex_matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail(field + "[0]", "expected a non-empty row");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rf = field + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) fail(rf, "row length differs from row 0");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          complex_from_json(j[r][c], rf + "[" + std::to_string(c) + "]");
    }
  }
  if (!all_finite(m)) fail(field, "non-finite entry");
  return m;
}

Json channel_to_json(const Channel& c) {
  Json kraus = Json::array();
  for (const Matrix& k : c.kraus()) kraus.push_back(complex_matrix_to_json(k));
  return Json{{"dim", c.dim()}, {"kraus", std::move(kraus)}};
}

Channel channel_from_json(const Json& j) {
  const std::size_t d = read_dim(j);
  const Json& list = require(j, "kraus", "");
  if (!list.is_array() || list.empty()) fail("kraus", "expected a non-empty array of matrices");
  std::vector<Matrix> kraus;
  for (std::size_t k = 0; k < list.size(); ++k) {
    const std::string field = "kraus[" + std::to_string(k) + "]";
    Matrix m = complex_matrix_from_json(list[k], field);
    if (m.rows() != static_cast<Eigen::Index>(d) || m.cols() != static_cast<Eigen::Index>(d)) {
      fail(field, "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
    }
    kraus.push_back(std::move(m));
  }
  std::optional<Channel> out;
  wrap_errors("kraus", [&] { out.emplace(Channel::from_kraus(std::move(kraus))); });
  return *out;
}

Json state_to_json(const DensityMatrix& rho) {
  return Json{{"dim", rho.dim()}, {"rho", complex_matrix_to_json(rho.matrix())}};
}

DensityMatrix state_from_json(const Json& j) {
  const std::size_t d = read_dim(j);
  Matrix m = complex_matrix_from_json(require(j, "rho", ""), "rho");
  if (m.rows() != static_cast<Eigen::Index>(d) || m.cols() != static_cast<Eigen::Index>(d)) {
    fail("rho", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
  }
  std::optional<DensityMatrix> out;
  wrap_errors("rho", [&] { out.emplace(DensityMatrix::from_matrix(std::move(m))); });
  return *out;
}

Json target_to_json(const TargetSubspace& t) {
  return Json{{"dim", t.dim()}, {"projector", complex_matrix_to_json(t.pi_z())}};
}

TargetSubspace target_from_json(const Json& j) {
  const std::size_t d = read_dim(j);
  std::optional<TargetSubspace> out;
  if (j.contains("basis_indices")) {
    const Json& idx = j["basis_indices"];
    if (!idx.is_array()) fail("basis_indices", "expected an array of integers");
    std::vector<std::size_t> indices;
    for (const Json& v : idx) {
      if (!v.is_number_unsigned()) fail("basis_indices", "expected non-negative integers");
      indices.push_back(v.get<std::size_t>());
    }
    wrap_errors("basis_indices", [&] { out.emplace(TargetSubspace::from_basis_indices(d, indices)); });
    return *out;
  }
  Matrix m = complex_matrix_from_json(require(j, "projector", ""), "projector");
  if (m.rows() != static_cast<Eigen::Index>(d)) fail("projector", "dimension does not match dim");
  wrap_errors("projector", [&] { out.emplace(TargetSubspace::from_projector(std::move(m))); });
  return *out;
}

RealMatrix stochastic_from_json(const Json& j) {
  const Json& rows = j.is_object() ? require(j, "P", "") : j;
  if (!rows.is_array() || rows.empty()) fail("P", "expected a non-empty array of rows");
  const std::size_t n = rows.size();
  RealMatrix p(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    const std::string rf = "P[" + std::to_string(r) + "]";
    if (!rows[r].is_array() || rows[r].size() != n) fail(rf, "expected " + std::to_string(n) + " entries");
    for (std::size_t c = 0; c < n; ++c) {
      if (!rows[r][c].is_number()) fail(rf + "[" + std::to_string(c) + "]", "expected a number");
      p(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c].get<double>();
    }
  }
  return p;
}

Json stochastic_to_json(const RealMatrix& p) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < p.cols(); ++c) row.push_back(p(r, c));
    rows.push_back(std::move(row));
  }
  return Json{{"P", std::move(rows)}};
}

StepDistribution step_distribution_from_json(const Json& j) {
  if (!j.is_object()) fail("sigma", "expected an object");
  std::optional<StepDistribution> out;
  if (j.contains("geometric")) {
    if (!j["geometric"].is_number()) fail("geometric", "expected a probability");
    wrap_errors("geometric", [&] { out.emplace(StepDistribution::geometric(j["geometric"].get<double>())); });
    return *out;
  }
  const Json& w = require(j, "weights", "");
  if (!w.is_object() || w.empty()) fail("weights", "expected an object mapping step counts to weights");
  std::map<std::size_t, double> weights;
  for (const auto& [key, value] : w.items()) {
    std::size_t t = 0;
    try {
      std::size_t used = 0;
      t = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      fail("weights." + key, "key is not a non-negative integer");
    }
    if (!value.is_number()) fail("weights." + key, "expected a number");
    weights[t] = value.get<double>();
  }
  const bool allow_zero = j.value("allow_zero", false);
  wrap_errors("weights", [&] { out.emplace(StepDistribution::explicit_weights(weights, allow_zero)); });
  return *out;
}

Json step_distribution_to_json(const StepDistribution& s) {
  if (s.kind() == StepDistribution::Kind::geometric) return Json{{"geometric", s.p()}};
  Json w = Json::object();
  for (const auto& [t, p] : s.weights()) w[std::to_string(t)] = p;
  return Json{{"weights", std::move(w)}, {"allow_zero", s.allows_zero()}};
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()) && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": JSON parse error");
  }
}

}  // namespace qhit
