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

#include <cmath>
#include <cstddef>
#include <string>

#include "mimt/errors.hpp"
#include "mimt/prob_vector.hpp"

namespace mimt {

/// Lipschitz constant for the information transfer model
/// |H(P) - H(Q)| <= lambda * ||P - Q||_1.
struct TransferConstraint {
  explicit TransferConstraint(double lambda_in) : lambda(lambda_in) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw ParameterError("Lipschitz constant must be > 0, got " +
                           std::to_string(lambda_in));
    }
  }
  double lambda;
};

/// Message importance measure L(P) = sum_i p_i * exp(-p_i).
///
/// Lies in [exp(-1), exp(-1/n)]; the uniform distribution attains the
/// maximum, a degenerate one the minimum. Zero entries contribute zero.
inline double Mim(const ProbVector& p) {
  double acc = 0.0;
  for (double pi : p) acc += pi * std::exp(-pi);
  return acc;
}

/// Weighted message importance measure with importance coefficient
/// varpi >= 0: log{ sum_i p_i * exp(varpi * (1 - p_i)) }, natural log.
///
/// Identities: varpi = 0 gives 0; varpi = 1 gives 1 + ln(Mim(P)).
inline double MimWeighted(const ProbVector& p, double varpi) {
  if (!(varpi >= 0.0) || !std::isfinite(varpi)) {
    throw ParameterError("importance coefficient must be >= 0, got " +
                         std::to_string(varpi));
  }
  double acc = 0.0;
  for (double pi : p) acc += pi * std::exp(varpi * (1.0 - pi));
  return std::log(acc);
}

/// L1 distance sum_i |p_i - q_i|, in [0, 2]. The shorter vector is
/// zero-padded.
inline double L1Distance(const ProbVector& p, const ProbVector& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = i < p.size() ? p[i] : 0.0;
    const double qi = i < q.size() ? q[i] : 0.0;
    acc += std::abs(pi - qi);
  }
  return acc;
}

/// Message importance transfer measure D_I(Q||P) = Mim(Q) - Mim(P).
///
/// Signed and antisymmetric in its arguments. Distributions over nested
/// supports are reconciled by zero-padding the shorter one, which leaves
/// Mim unchanged.
inline double Mitm(const ProbVector& q, const ProbVector& p) {
  return Mim(q) - Mim(p);
}

/// Kullback-Leibler divergence sum_i p_i * ln(p_i / q_i), natural log,
/// with the convention 0 * ln(0/q) = 0. The shorter vector is zero-padded.
///
/// Throws SupportError when p_i > 0 on a state where q_i = 0.
inline double KlDivergence(const ProbVector& p, const ProbVector& q) {
  const std::size_t n = std::max(p.size(), q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = i < p.size() ? p[i] : 0.0;
    if (pi == 0.0) continue;
    const double qi = i < q.size() ? q[i] : 0.0;
    if (qi == 0.0) {
      throw SupportError("KL undefined: p[" + std::to_string(i) +
                         "] > 0 but q[" + std::to_string(i) + "] = 0");
    }
    acc += pi * std::log(pi / qi);
  }
  return acc;
}

/// True iff |hp - hq| <= lambda * ||P - Q||_1, i.e. the measure values hp,
/// hq for P and Q are compatible with the Lipschitz transfer model.
inline bool LipschitzCheck(double hp, double hq, const ProbVector& p,
                           const ProbVector& q, const TransferConstraint& c) {
  return std::abs(hp - hq) <= c.lambda * L1Distance(p, q);
}

}  // namespace mimt
