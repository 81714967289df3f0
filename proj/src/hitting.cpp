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

#include "qhit/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <string>

namespace qhit {
namespace {

constexpr double kNoMass = 1e-14;

std::string format_radius(double r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", r);
  return buf;
}

[[noreturn]] void throw_precondition(double radius) {
  throw PreconditionViolated("precondition violated: spectral radius " + format_radius(radius), radius);
}

double vec_trace(const Vector& v, Eigen::Index d) {
  Complex t = 0.0;
  for (Eigen::Index a = 0; a < d; ++a) t += v[a * d + a];
  return t.real();
}

// Complement projection that skips the two dense products when the target is
// spanned by basis vectors.
class ComplementProjector {
 public:
  explicit ComplementProjector(const TargetSubspace& t) : pm_(t.pi_minus_z()) {
    const Matrix& pz = t.pi_z();
    Matrix diag = pz.diagonal().asDiagonal();
    diagonal_ = max_abs(pz - diag) == 0.0;
    if (diagonal_) {
      keep_.resize(static_cast<std::size_t>(pz.rows()));
      for (Eigen::Index i = 0; i < pz.rows(); ++i) {
        const Complex v = pz(i, i);
        if (v != Complex(0.0) && v != Complex(1.0)) diagonal_ = false;
        keep_[static_cast<std::size_t>(i)] = v == Complex(0.0);
      }
    }
  }

  bool diagonal() const { return diagonal_; }
  /// Entry i is true when basis vector i lies outside the target (diagonal case only).
  const std::vector<bool>& kept() const { return keep_; }

  Matrix operator()(const Matrix& x) const {
    if (!diagonal_) return pm_ * x * pm_;
    Matrix out = x;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      if (keep_[static_cast<std::size_t>(i)]) continue;
      out.row(i).setZero();
      out.col(i).setZero();
    }
    return out;
  }

 private:
  Matrix pm_;
  bool diagonal_ = false;
  std::vector<bool> keep_;
};

struct ResolventOutcome {
  double trace = 0.0;
  double margin = 0.0;
  SolverStats stats;
};

// Restricts R to the Krylov space spanned by R^k(X) and solves there. Used when
// I - R is singular on the full space but X never reaches the singular part,
// e.g. a unitary acting as -1 on states the initial state has no overlap with.
ResolventOutcome reachable_resolvent_trace(const Matrix& r, const Vector& rhs, Eigen::Index d,
                                           const HittingOptions& opts) {
  constexpr Eigen::Index kMaxKrylov = 512;
  const Eigen::Index n = r.rows();
  const Eigen::Index limit = std::min(n, kMaxKrylov);
  const double beta = rhs.norm();
  const double scale = std::max(1.0, r.cwiseAbs().rowwise().sum().maxCoeff());
  Matrix q(n, limit + 1);
  Matrix h = Matrix::Zero(limit + 1, limit);
  q.col(0) = rhs / beta;
  Eigen::Index k = 0;
  bool closed = false;
  while (k < limit) {
    Vector w = r * q.col(k);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector c = q.leftCols(k + 1).adjoint() * w;
      w -= q.leftCols(k + 1) * c;
      h.col(k).head(k + 1) += c;
    }
    const double norm = w.norm();
    ++k;
    if (norm <= 1e-12 * scale) {
      closed = true;
      break;
    }
    if (k == limit) break;
    h(k, k - 1) = norm;
    q.col(k) = w / norm;
  }
  if (!closed) throw_precondition(1.0);

  const Matrix hk = h.topLeftCorner(k, k);
  const double radius = spectral_radius(hk, opts.linalg);
  ResolventOutcome out;
  out.margin = 1.0 - radius;
  out.stats.krylov_dimension = static_cast<std::size_t>(k);
  if (out.margin <= opts.margin_threshold) throw_precondition(radius);
  const LuSolver lu(Matrix::Identity(k, k) - hk, opts.linalg);
  out.stats.condition_estimate = lu.condition_estimate();
  if (lu.singular()) throw_precondition(radius);
  Vector e1 = Vector::Zero(k);
  e1[0] = beta;
  const Vector x = q.leftCols(k) * lu.solve(e1);
  const double norm_a = (Matrix::Identity(n, n) - r).cwiseAbs().colwise().sum().maxCoeff();
  const Vector resid = x - r * x - rhs;
  out.stats.residual = resid.lpNorm<1>() / (norm_a * x.lpNorm<1>() + rhs.lpNorm<1>());
  if (!(out.stats.residual <= opts.linalg.solve_residual)) {
    throw SingularSystem("reduced solve: residual " + std::to_string(out.stats.residual) + " above tolerance",
                         out.stats.condition_estimate);
  }
  out.trace = vec_trace(x, d);
  return out;
}

// tr[(I - R)^{-1}(X)] for a trace-non-increasing CP map R given as a dense
// superoperator. The spectral radius r of such a map is an eigenvalue with a
// PSD eigenvector, hence the eigenvalue of R closest to 1, so inverse
// iteration on the factored I - R from a PSD start converges to 1 / (1 - r).
ResolventOutcome resolvent_trace(Matrix r, const Vector& rhs, const Matrix& start,
                                 std::size_t d, const HittingOptions& opts) {
  const auto dd = static_cast<Eigen::Index>(d);
  // r becomes I - R in place; superoperators of large chains run to hundreds of MB.
  r = -r;
  r.diagonal().array() += 1.0;
  const LuSolver lu(r, opts.linalg);
  ResolventOutcome out;
  out.stats.condition_estimate = lu.condition_estimate();
  if (lu.singular()) {
    r.diagonal().array() -= 1.0;
    r = -r;
    return reachable_resolvent_trace(r, rhs, dd, opts);
  }

  Vector v = vec(start);
  double tr = vec_trace(v, dd);
  if (!(tr > 0.0)) {
    v = vec(Matrix::Identity(dd, dd));
    tr = static_cast<double>(d);
  }
  v /= tr;
  double mu = 0.0;
  bool converged = false;
  std::size_t it = 0;
  while (it < opts.margin_max_iterations) {
    ++it;
    Vector y = lu.solve_unchecked(v);
    const double next = vec_trace(y, dd);
    if (!(next > 0.0) || !std::isfinite(next)) throw_precondition(1.0);
    v = y / next;
    if (std::abs(next - mu) <= opts.margin_tolerance * next) {
      mu = next;
      converged = true;
      break;
    }
    mu = next;
  }
  out.stats.iterations = it;
  out.stats.margin_converged = converged;
  out.margin = 1.0 / mu;
  if (out.margin <= opts.margin_threshold) throw_precondition(1.0 - out.margin);

  const Vector x = lu.solve(rhs);
  out.stats.residual = lu.residual(x, rhs);
  out.trace = vec_trace(x, dd);
  return out;
}

HittingResult zero_mass_result(SolverMethod method) {
  HittingResult res;
  res.method = method;
  return res;
}

// Superoperator of X -> (1 - p) E(X) + p P_{-z} E(X) P_{-z}.
Matrix measured_step_superoperator(const Channel& e, const TargetSubspace& t, double p) {
  const Matrix& s = e.superoperator();
  const auto d = e.dim();
  const ComplementProjector project(t);
  if (project.diagonal()) {
    const auto& keep = project.kept();
    Vector scale(s.rows());
    for (std::size_t b = 0; b < d; ++b) {
      for (std::size_t a = 0; a < d; ++a) {
        scale[static_cast<Eigen::Index>(b * d + a)] = keep[a] && keep[b] ? 1.0 : 1.0 - p;
      }
    }
    return scale.asDiagonal() * s;
  }
  Matrix out(s.rows(), s.cols());
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    const Matrix x = unvec(s.col(c), d);
    out.col(c) = (1.0 - p) * s.col(c) + p * vec(project(x));
  }
  return out;
}

void require_dims(const Channel& e, const TargetSubspace& t, const DensityMatrix& rho0) {
  if (e.dim() != t.dim() || e.dim() != rho0.dim()) {
    throw DimensionError("hitting time: channel, target and state dimensions differ");
  }
}

struct NeumannOutcome {
  double sum = 0.0;
  std::size_t terms = 0;
  double ratio = 0.0;
};

// Sum_k tr(A^k(X0)). The decay ratio q is measured over a window of kWindow
// terms so oscillation from complex eigenvalues averages out; the loop stops
// once term * q / (1 - q) stays below tol for kConsecutive terms. Sums are
// Neumaier-compensated.
NeumannOutcome neumann_trace(const std::function<Matrix(const Matrix&)>& apply, Matrix x,
                             double tol, std::size_t max_terms) {
  constexpr std::size_t kWindow = 10;
  constexpr std::size_t kConsecutive = 10;
  NeumannOutcome out;
  double term = x.trace().real();
  out.sum = term;
  out.terms = 1;
  if (max_abs(x) == 0.0) return out;
  std::deque<double> history{term};
  std::size_t small = 0;
  double compensation = 0.0;
  while (true) {
    if (out.terms >= max_terms) {
      throw NonConvergent("Neumann series did not converge within " + std::to_string(max_terms) +
                              " terms (spectral radius likely >= 1)",
                          out.terms);
    }
    x = apply(x);
    term = x.trace().real();
    const double next = out.sum + term;
    compensation += std::abs(out.sum) >= std::abs(term) ? (out.sum - next) + term : (term - next) + out.sum;
    out.sum = next;
    ++out.terms;
    history.push_back(term);
    if (history.size() > kWindow + 1) history.pop_front();
    double tail = INFINITY;
    if (term <= 0.0) {
      tail = 0.0;
      out.ratio = 0.0;
    } else if (history.size() == kWindow + 1 && history.front() > 0.0) {
      const double q = std::pow(term / history.front(), 1.0 / kWindow);
      out.ratio = q;
      if (q < 1.0) tail = term * q / (1.0 - q);
    }
    small = tail <= tol ? small + 1 : 0;
    if (small >= kConsecutive) {
      out.sum += compensation;
      return out;
    }
  }
}

HittingResult neumann_result(const NeumannOutcome& n, double rounds_per_value) {
  HittingResult res;
  res.method = SolverMethod::neumann_series;
  res.value = n.sum;
  res.measurement_rounds = n.sum * rounds_per_value;
  res.precondition_margin = 1.0 - n.ratio;
  res.stats.iterations = n.terms;
  return res;
}

}  // namespace

std::string to_string(SolverMethod m) {
  return m == SolverMethod::dense_resolvent ? "dense_resolvent" : "neumann_series";
}

HittingResult hitting_time(const Channel& e, const TargetSubspace& t, const DensityMatrix& rho0,
                           const HittingOptions& opts) {
  require_dims(e, t, rho0);
  const DensityMatrix start = project_out(rho0, t);
  if (start.trace() <= kNoMass) return zero_mass_result(SolverMethod::dense_resolvent);
  const LinearMap r = restricted_map(e, t);
  const ResolventOutcome o = resolvent_trace(r.superoperator(), vec(start.matrix()),
                                             start.matrix(), e.dim(), opts);
  HittingResult res;
  res.value = o.trace;
  res.measurement_rounds = o.trace;
  res.precondition_margin = o.margin;
  res.stats = o.stats;
  return res;
}

HittingResult generalized_hitting_time(const Channel& e, const StepDistribution& sigma,
                                       const TargetSubspace& t, const DensityMatrix& rho0,
                                       const HittingOptions& opts) {
  if (sigma.kind() != StepDistribution::Kind::geometric) {
    return generalized_hitting_time_two_stage(e, sigma, t, rho0, opts);
  }
  if (sigma.p() == 1.0) return hitting_time(e, t, rho0, opts);
  require_dims(e, t, rho0);
  const DensityMatrix start = project_out(rho0, t);
  if (start.trace() <= kNoMass) return zero_mass_result(SolverMethod::dense_resolvent);
  const ResolventOutcome o = resolvent_trace(measured_step_superoperator(e, t, sigma.p()),
                                             vec(start.matrix()), start.matrix(), e.dim(), opts);
  HittingResult res;
  res.value = o.trace;
  res.measurement_rounds = o.trace * sigma.p();
  res.precondition_margin = o.margin;
  res.stats = o.stats;
  return res;
}

HittingResult generalized_hitting_time_two_stage(const Channel& e, const StepDistribution& sigma,
                                                 const TargetSubspace& t, const DensityMatrix& rho0,
                                                 const HittingOptions& opts) {
  require_dims(e, t, rho0);
  const DensityMatrix start = project_out(rho0, t);
  if (start.trace() <= kNoMass) return zero_mass_result(SolverMethod::dense_resolvent);
  const Channel averaged = sigma_channel(e, sigma);
  HittingResult res = hitting_time(averaged, t, rho0, opts);
  res.value = sigma.mean() * res.measurement_rounds;
  return res;
}

double classical_hitting_time(const RealMatrix& p, const RealVector& q, std::size_t z) {
  const Eigen::Index n = p.rows();
  if (p.cols() != n || n == 0) throw DimensionError("classical_hitting_time: P must be square");
  if (q.size() != n) throw DimensionError("classical_hitting_time: q length mismatch");
  if (z >= static_cast<std::size_t>(n)) throw ValidationError("classical_hitting_time: target out of range");
  for (Eigen::Index x = 0; x < n; ++x) {
    if ((p.row(x).array() < 0.0).any() || std::abs(p.row(x).sum() - 1.0) > 1e-12) {
      throw ValidationError("classical_hitting_time: P is not row-stochastic");
    }
  }
  if ((q.array() < 0.0).any() || std::abs(q.sum() - 1.0) > 1e-12) {
    throw ValidationError("classical_hitting_time: q is not a distribution");
  }
  const auto zi = static_cast<Eigen::Index>(z);
  RealMatrix restricted = p;
  restricted.row(zi).setZero();
  restricted.col(zi).setZero();
  RealVector q_rest = q;
  q_rest[zi] = 0.0;
  if (q_rest.sum() <= kNoMass) return 0.0;

  // States reachable from the support of q without passing through z.
  std::vector<Eigen::Index> reach;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (Eigen::Index x = 0; x < n; ++x) {
    if (q_rest[x] > 0.0) {
      seen[static_cast<std::size_t>(x)] = true;
      reach.push_back(x);
    }
  }
  for (std::size_t head = 0; head < reach.size(); ++head) {
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y != zi && restricted(reach[head], y) > 0.0 && !seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = true;
        reach.push_back(y);
      }
    }
  }
  const auto m = static_cast<Eigen::Index>(reach.size());
  RealMatrix a(m, m);
  RealVector qr(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    qr[i] = q_rest[reach[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < m; ++j) {
      a(i, j) = (i == j ? 1.0 : 0.0) - restricted(reach[static_cast<std::size_t>(i)], reach[static_cast<std::size_t>(j)]);
    }
  }
  const Eigen::PartialPivLU<RealMatrix> lu(a);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  const double rcond = min_pivot > 0.0 ? lu.rcond() : 0.0;
  const RealVector h = lu.solve(RealVector::Ones(m));
  if (!(rcond > 1e-12) || !h.allFinite() || (h.array() < 0.0).any()) {
    throw PreconditionViolated("precondition violated: spectral radius 1 (target unreachable)", 1.0);
  }
  return qr.dot(h);
}

HittingResult hitting_time_neumann(const Channel& e, const TargetSubspace& t,
                                   const DensityMatrix& rho0, double tol, std::size_t max_terms) {
  require_dims(e, t, rho0);
  const ComplementProjector project(t);
  const auto apply = [&](const Matrix& x) { return project(e.apply(x)); };
  return neumann_result(neumann_trace(apply, project(rho0.matrix()), tol, max_terms), 1.0);
}

HittingResult generalized_hitting_time_neumann(const Channel& e, const StepDistribution& sigma,
                                               const TargetSubspace& t, const DensityMatrix& rho0,
                                               double tol, std::size_t max_terms) {
  require_dims(e, t, rho0);
  const ComplementProjector project(t);
  const Matrix start = project(rho0.matrix());
  if (sigma.kind() == StepDistribution::Kind::geometric) {
    const double p = sigma.p();
    // One E step, then a measurement with probability p.
    const auto apply = [&](const Matrix& x) {
      const Matrix y = e.apply(x);
      return Matrix((1.0 - p) * y + p * project(y));
    };
    return neumann_result(neumann_trace(apply, start, tol, max_terms), p);
  }
  // One application of E^sigma_{-z} = P_{-z} o Sum_t w_t E^t o P_{-z}.
  const auto apply = [&](const Matrix& x) {
    Matrix acc = Matrix::Zero(x.rows(), x.cols());
    Matrix power = x;
    std::size_t current = 0;
    for (const auto& [steps, w] : sigma.weights()) {
      for (; current < steps; ++current) power = e.apply(power);
      acc += w * power;
    }
    return project(acc);
  };
  NeumannOutcome n = neumann_trace(apply, start, tol, max_terms);
  HittingResult res = neumann_result(n, 1.0);
  res.measurement_rounds = n.sum;
  res.value = sigma.mean() * n.sum;
  return res;
}

}  // namespace qhit
