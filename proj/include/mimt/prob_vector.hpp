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
#include <initializer_list>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "mimt/errors.hpp"

namespace mimt {

/// Finite discrete probability distribution.
///
/// Entries are validated on construction: every entry in [0, 1], the total
/// mass equal to 1 within `tol`, and at least one entry. Values are
/// immutable afterwards, so a ProbVector can be shared freely across
/// threads.
class ProbVector {
 public:
  static constexpr double kDefaultTol = 1e-9;

  explicit ProbVector(std::vector<double> probs, double tol = kDefaultTol)
      : probs_(std::move(probs)), tol_(tol) {
    Validate();
  }

  ProbVector(std::initializer_list<double> probs, double tol = kDefaultTol)
      : ProbVector(std::vector<double>(probs), tol) {}

  /// Normalizes raw nonnegative weights to a distribution. Intended for
  /// empirical inputs (simulation occupancies) that carry floating-point
  /// drift.
  static ProbVector Renormalized(std::vector<double> weights,
                                 double tol = kDefaultTol) {
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw ValidationError("cannot renormalize: total weight " +
                            std::to_string(total));
    }
    for (double& w : weights) w /= total;
    return ProbVector(std::move(weights), tol);
  }

  static ProbVector Uniform(std::size_t n) {
    if (n == 0) throw ValidationError("uniform distribution needs n >= 1");
    return ProbVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static ProbVector Degenerate(std::size_t n, std::size_t at) {
    if (n == 0 || at >= n) {
      throw ValidationError("degenerate distribution: bad index");
    }
    std::vector<double> p(n, 0.0);
    p[at] = 1.0;
    return ProbVector(std::move(p));
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& values() const { return probs_; }
  double tol() const { return tol_; }

  auto begin() const { return probs_.begin(); }
  auto end() const { return probs_.end(); }

  /// Zero-pads to length n (used when comparing distributions over nested
  /// supports, e.g. queue states for buffer sizes k and k+1).
  ProbVector PaddedTo(std::size_t n) const {
    if (n < probs_.size()) {
      throw ShapeError("cannot pad length " + std::to_string(probs_.size()) +
                       " down to " + std::to_string(n));
    }
    std::vector<double> p = probs_;
    p.resize(n, 0.0);
    return ProbVector(std::move(p), tol_);
  }

 private:
  void Validate() const {
    if (probs_.empty()) {
      throw ValidationError("distribution must have at least one entry");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      const double p = probs_[i];
      if (!std::isfinite(p) || p < 0.0 || p > 1.0 + tol_) {
        throw ValidationError("entry " + std::to_string(i) + " = " +
                              std::to_string(p) + " outside [0, 1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > tol_) {
      throw ValidationError("entries sum to " + std::to_string(total) +
                            ", not 1 within tolerance " + std::to_string(tol_));
    }
  }

  std::vector<double> probs_;
  double tol_;
};

/// Product distribution P (x) Q over the joint alphabet, row-major.
inline ProbVector OuterProduct(const ProbVector& p, const ProbVector& q) {
  std::vector<double> joint;
  joint.reserve(p.size() * q.size());
  for (double pi : p) {
    for (double qj : q) joint.push_back(pi * qj);
  }
  return ProbVector::Renormalized(std::move(joint));
}

}  // namespace mimt
