// Copyright 2026 The mimt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mimt/errors.hpp"
#include "mimt/measures.hpp"
#include "mimt/prob_vector.hpp"

namespace mimt {

/// Row-stochastic conditional distribution matrix: rows indexed by input
/// symbol, columns by output symbol, entry (i, j) = p(y_j | x_i).
class TransferChannel {
 public:
  TransferChannel(std::vector<std::vector<double>> rows,
                  double tol = ProbVector::kDefaultTol) {
    if (rows.empty()) throw ShapeError("channel needs at least one row");
    cols_ = rows.front().size();
    rows_ = rows.size();
    if (cols_ == 0) throw ShapeError("channel needs at least one column");
    m_.reserve(rows_ * cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      if (rows[i].size() != cols_) {
        throw ShapeError("channel row " + std::to_string(i) +
                         " has inconsistent length");
      }
      // Validates the row as a distribution (throws ValidationError).
      ProbVector row(rows[i], tol);
      m_.insert(m_.end(), rows[i].begin(), rows[i].end());
    }
  }

  std::size_t inputs() const { return rows_; }
  std::size_t outputs() const { return cols_; }
  double at(std::size_t i, std::size_t j) const { return m_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {m_.data() + i * cols_, cols_};
  }

  /// 2x2 channel [[1-beta, beta], [beta, 1-beta]], beta in [0, 1].
  static TransferChannel BinarySymmetric(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw ParameterError("crossover probability must lie in [0, 1]");
    }
    return TransferChannel({{1.0 - beta, beta}, {beta, 1.0 - beta}});
  }

  /// KxK channel with 1-beta on the diagonal and beta/(K-1) elsewhere.
  static TransferChannel StronglySymmetric(std::size_t k, double beta) {
    if (k < 2) throw ParameterError("strongly symmetric channel needs K >= 2");
    if (!(beta >= 0.0 && beta <= 1.0)) {
      throw ParameterError("crossover probability must lie in [0, 1]");
    }
    const double off = beta / static_cast<double>(k - 1);
    std::vector<std::vector<double>> rows(k, std::vector<double>(k, off));
    for (std::size_t i = 0; i < k; ++i) rows[i][i] = 1.0 - beta;
    return TransferChannel(std::move(rows));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> m_;
};

/// Disturbance model: a finite set of disturbance values, their
/// probabilities, and the transfer channel in effect under each value.
struct DisturbanceModel {
  DisturbanceModel(std::vector<double> outcomes_in, ProbVector weights_in,
                   std::vector<TransferChannel> channels_in)
      : outcomes(std::move(outcomes_in)),
        weights(std::move(weights_in)),
        channels(std::move(channels_in)) {
    if (outcomes.size() != weights.size() ||
        outcomes.size() != channels.size()) {
      throw ShapeError("disturbance outcomes, weights, channels must align");
    }
    for (const TransferChannel& ch : channels) {
      if (ch.outputs() != channels.front().outputs()) {
        throw ShapeError("all disturbance channels must share one output alphabet");
      }
    }
  }

  std::vector<double> outcomes;
  ProbVector weights;
  std::vector<TransferChannel> channels;
};

struct OptimizerSettings {
  double tol = 1e-9;
  int max_iterations = 20000;
  int random_starts = 2;  // in addition to the n vertices and the uniform point
  std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
};

struct CapacityResult {
  double value = 0.0;
  ProbVector argmax{1.0};
  /// Smallest Lipschitz constant making |gap| <= lambda * ||p(y) - row||_1
  /// hold at the optimum, taken over the closest channel row; 0 when the
  /// gap itself is 0.
  double lambda_min = 0.0;
  double start_spread = 0.0;  // max - min of values across multistart runs
  int best_start = 0;         // ties broken by lowest start index
  int iterations = 0;
};

/// Thrown when the simplex ascent exhausts its iteration budget; carries
/// the best iterate found so far.
class OptimizationError : public Error {
 public:
  OptimizationError(const std::string& what, CapacityResult best)
      : Error(what), best_(std::move(best)) {}
  const CapacityResult& best_iterate() const { return best_; }

 private:
  CapacityResult best_;
};

/// L(Y|X) = sum_j sum_i p(x_i) p(y_j|x_i) exp(-p(y_j|x_i)).
inline double ConditionalMim(const ProbVector& px, const TransferChannel& ch) {
  if (px.size() != ch.inputs()) {
    throw ShapeError("input distribution length " + std::to_string(px.size()) +
                     " != channel rows " + std::to_string(ch.inputs()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ch.inputs(); ++i) {
    double row_mim = 0.0;
    for (double w : ch.row(i)) row_mim += w * std::exp(-w);
    acc += px[i] * row_mim;
  }
  return acc;
}

/// Output marginal p(y_j) = sum_i p(x_i) p(y_j|x_i).
inline ProbVector OutputMarginal(const ProbVector& px,
                                 const TransferChannel& ch) {
  if (px.size() != ch.inputs()) {
    throw ShapeError("input distribution length " + std::to_string(px.size()) +
                     " != channel rows " + std::to_string(ch.inputs()));
  }
  std::vector<double> q(ch.outputs(), 0.0);
  for (std::size_t i = 0; i < ch.inputs(); ++i) {
    const auto row = ch.row(i);
    for (std::size_t j = 0; j < ch.outputs(); ++j) q[j] += px[i] * row[j];
  }
  return ProbVector::Renormalized(std::move(q));
}

/// L(Y) = Mim of the output marginal.
inline double OutputMim(const ProbVector& px, const TransferChannel& ch) {
  return Mim(OutputMarginal(px, ch));
}

/// The capacity objective before maximization: L(Y) - L(Y|X).
inline double TransferGap(const ProbVector& px, const TransferChannel& ch) {
  return OutputMim(px, ch) - ConditionalMim(px, ch);
}

namespace detail {

/// Euclidean projection onto the probability simplex.
inline void ProjectToSimplex(std::vector<double>& x) {
  std::vector<double> u = x;
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cssv += u[i];
    const double t = (cssv - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (double& xi : x) xi = std::max(xi - theta, 0.0);
  // Counteract rounding drift so the iterate stays a valid distribution.
  double total = 0.0;
  for (double xi : x) total += xi;
  if (total > 0.0) {
    for (double& xi : x) xi /= total;
  } else {
    std::fill(x.begin(), x.end(), 1.0 / static_cast<double>(x.size()));
  }
}

struct AscentOutcome {
  std::vector<double> x;
  double value = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Projected gradient ascent of TransferGap from one starting point.
inline AscentOutcome AscendFrom(std::vector<double> x,
                                const TransferChannel& ch,
                                const OptimizerSettings& opt) {
  const std::size_t n = ch.inputs();
  const std::size_t m = ch.outputs();

  // Per-row Mim values: the conditional term is linear in p(x).
  std::vector<double> row_mim(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (double w : ch.row(i)) row_mim[i] += w * std::exp(-w);
  }

  std::vector<double> q(m), grad(n), trial(n);
  auto eval = [&](const std::vector<double>& p) {
    std::fill(q.begin(), q.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = ch.row(i);
      for (std::size_t j = 0; j < m; ++j) q[j] += p[i] * row[j];
    }
    double value = 0.0;
    for (std::size_t j = 0; j < m; ++j) value += q[j] * std::exp(-q[j]);
    for (std::size_t i = 0; i < n; ++i) value -= p[i] * row_mim[i];
    return value;
  };

  AscentOutcome out;
  double fx = eval(x);
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    // Gradient of Mim(q(p)) - <p, row_mim>; q holds the marginal of x here.
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = ch.row(i);
      double g = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        g += row[j] * (1.0 - q[j]) * std::exp(-q[j]);
      }
      grad[i] = g - row_mim[i];
    }

    double step = 1.0;
    double fn = fx;
    double moved = 0.0;
    while (step > 1e-18) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * grad[i];
      ProjectToSimplex(trial);
      fn = eval(trial);
      moved = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        moved = std::max(moved, std::abs(trial[i] - x[i]));
      }
      if (fn >= fx || moved == 0.0) break;
      step *= 0.5;
    }
    out.iterations = iter;
    if (fn >= fx) {
      x = trial;
      const double gain = fn - fx;
      fx = fn;
      // eval() left q holding the marginal of the accepted iterate.
      if (moved <= opt.tol && gain <= opt.tol) {
        out.converged = true;
        break;
      }
    } else {
      // No uphill step exists at the smallest step size: stationary.
      out.converged = true;
      break;
    }
  }
  out.x = std::move(x);
  out.value = fx;
  return out;
}

}  // namespace detail

/// Maximizes L(Y) - L(Y|X) over the input simplex by projected gradient
/// ascent with multistart (all vertices, the uniform point, and
/// `random_starts` random interior points). The objective is smooth, so the
/// spread across starts is reported as a convergence diagnostic.
inline CapacityResult CapacityNumeric(const TransferChannel& ch,
                                      const OptimizerSettings& opt = {}) {
  const std::size_t n = ch.inputs();
  std::vector<std::vector<double>> starts;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(n, 0.0);
    v[i] = 1.0;
    starts.push_back(std::move(v));
  }
  starts.push_back(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  std::mt19937_64 rng(opt.seed);
  std::exponential_distribution<double> expo(1.0);
  for (int r = 0; r < opt.random_starts; ++r) {
    std::vector<double> v(n);
    double total = 0.0;
    for (double& vi : v) {
      vi = expo(rng);
      total += vi;
    }
    for (double& vi : v) vi /= total;
    starts.push_back(std::move(v));
  }

  detail::AscentOutcome best;
  int best_start = -1;
  bool all_converged = true;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t si = 0; si < starts.size(); ++si) {
    detail::AscentOutcome run = detail::AscendFrom(starts[si], ch, opt);
    all_converged = all_converged && run.converged;
    lo = std::min(lo, run.value);
    hi = std::max(hi, run.value);
    if (run.value > best.value) {
      best = std::move(run);
      best_start = static_cast<int>(si);
    }
  }

  CapacityResult result;
  result.value = best.value;
  result.argmax = ProbVector::Renormalized(best.x);
  result.start_spread = hi - lo;
  result.best_start = best_start;
  result.iterations = best.iterations;

  const ProbVector marginal = OutputMarginal(result.argmax, ch);
  if (std::abs(result.value) <= 10.0 * opt.tol) {
    result.lambda_min = 0.0;
  } else {
    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = ch.row(i);
      double d = 0.0;
      for (std::size_t j = 0; j < ch.outputs(); ++j) {
        d += std::abs(marginal[j] - row[j]);
      }
      min_dist = std::min(min_dist, d);
    }
    result.lambda_min = min_dist > 0.0
                            ? std::abs(result.value) / min_dist
                            : std::numeric_limits<double>::infinity();
  }

  if (!all_converged) {
    throw OptimizationError("simplex ascent did not converge within " +
                                std::to_string(opt.max_iterations) +
                                " iterations",
                            result);
  }
  return result;
}

/// Disturbance-averaged capacity: sum over disturbance values of
/// p(delta) * capacity of the channel in effect under delta.
inline double CapacityAveraged(const DisturbanceModel& dm,
                               const OptimizerSettings& opt = {}) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dm.channels.size(); ++i) {
    try {
      acc += dm.weights[i] * CapacityNumeric(dm.channels[i], opt).value;
    } catch (const OptimizationError& e) {
      throw OptimizationError("disturbance value " +
                                  std::to_string(dm.outcomes[i]) + ": " +
                                  e.what(),
                              e.best_iterate());
    }
  }
  return acc;
}

struct ClosedFormCapacity {
  double value = 0.0;
  double lambda_min = 0.0;
};

/// Binary symmetric closed form: C(beta) = exp(-1/2) - L(beta) with
/// L(beta) = beta e^{-beta} + (1-beta) e^{-(1-beta)}, achieved by the
/// uniform input. lambda_min = C(beta)/|1-2 beta|, taken as 0 at beta=1/2
/// where the gap vanishes.
inline ClosedFormCapacity CapacityBsc(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ParameterError("binary symmetric capacity needs beta in (0, 1)");
  }
  const double l = beta * std::exp(-beta) + (1.0 - beta) * std::exp(-(1.0 - beta));
  ClosedFormCapacity out;
  out.value = std::exp(-0.5) - l;
  const double denom = std::abs(1.0 - 2.0 * beta);
  out.lambda_min = denom > 0.0 ? out.value / denom : 0.0;
  return out;
}

/// Strongly symmetric closed form:
/// C(beta) = exp(-1/K) - {(1-beta) e^{-(1-beta)} + beta e^{-beta/(K-1)}},
/// achieved by the uniform input; reduces to CapacityBsc at K = 2.
inline ClosedFormCapacity CapacityStrongSymmetric(std::size_t k, double beta) {
  if (k < 2) throw ParameterError("strongly symmetric capacity needs K >= 2");
  if (!(beta > 0.0 && beta < 1.0)) {
    throw ParameterError("strongly symmetric capacity needs beta in (0, 1)");
  }
  const double kk = static_cast<double>(k);
  const double cond = (1.0 - beta) * std::exp(-(1.0 - beta)) +
                      beta * std::exp(-beta / (kk - 1.0));
  ClosedFormCapacity out;
  out.value = std::exp(-1.0 / kk) - cond;
  const double denom = 2.0 * std::abs(1.0 - beta - 1.0 / kk);
  out.lambda_min = denom > 0.0 ? out.value / denom : 0.0;
  return out;
}

}  // namespace mimt
