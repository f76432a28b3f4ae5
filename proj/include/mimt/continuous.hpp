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
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mimt/errors.hpp"

namespace mimt {

enum class QuadratureRule { kMidpoint, kTrapezoid, kSimpson };

/// Composite quadrature on a uniform grid over a bounded interval.
/// `panels` is the number of uniform subintervals (Simpson rounds it up to
/// an even count).
struct QuadratureSpec {
  QuadratureRule rule = QuadratureRule::kSimpson;
  std::size_t panels = 4096;
};

inline double Integrate(const std::function<double(double)>& f, double lo,
                        double hi, const QuadratureSpec& spec = {}) {
  if (!(hi > lo)) throw ParameterError("integration interval must have hi > lo");
  if (spec.panels == 0) throw ParameterError("quadrature needs panels >= 1");
  std::size_t n = spec.panels;
  double acc = 0.0;
  switch (spec.rule) {
    case QuadratureRule::kMidpoint: {
      const double h = (hi - lo) / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) {
        acc += f(lo + (static_cast<double>(i) + 0.5) * h);
      }
      acc *= h;
      break;
    }
    case QuadratureRule::kTrapezoid: {
      const double h = (hi - lo) / static_cast<double>(n);
      acc = 0.5 * (f(lo) + f(hi));
      for (std::size_t i = 1; i < n; ++i) {
        acc += f(lo + static_cast<double>(i) * h);
      }
      acc *= h;
      break;
    }
    case QuadratureRule::kSimpson: {
      if (n % 2 == 1) ++n;
      const double h = (hi - lo) / static_cast<double>(n);
      acc = f(lo) + f(hi);
      for (std::size_t i = 1; i < n; ++i) {
        acc += f(lo + static_cast<double>(i) * h) * (i % 2 == 1 ? 4.0 : 2.0);
      }
      acc *= h / 3.0;
      break;
    }
  }
  if (!std::isfinite(acc)) {
    throw NumericalError("quadrature produced a non-finite value");
  }
  return acc;
}

/// Continuous probability density on a closed interval, evaluated lazily
/// through a function handle. Construction validates nonnegativity on the
/// quadrature nodes and unit mass within `norm_tol`.
class Density {
 public:
  Density(double lo, double hi, std::function<double(double)> pdf,
          QuadratureSpec grid = {}, double norm_tol = 1e-8)
      : lo_(lo), hi_(hi), pdf_(std::move(pdf)), grid_(grid),
        norm_tol_(norm_tol) {
    if (!(hi_ > lo_)) throw ValidationError("density support must have hi > lo");
    const std::size_t n = grid_.panels;
    const double h = (hi_ - lo_) / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = lo_ + static_cast<double>(i) * h;
      const double v = pdf_(x);
      if (!std::isfinite(v)) {
        throw NumericalError("density is non-finite at x = " + std::to_string(x));
      }
      if (v < -1e-12) {
        throw ValidationError("density is negative at x = " + std::to_string(x));
      }
    }
    mass_ = Integrate(pdf_, lo_, hi_, grid_);
    if (std::abs(mass_ - 1.0) > norm_tol_) {
      throw ValidationError("density mass " + std::to_string(mass_) +
                            " differs from 1 beyond tolerance " +
                            std::to_string(norm_tol_));
    }
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double operator()(double x) const { return pdf_(x); }
  const QuadratureSpec& grid() const { return grid_; }
  double norm_tol() const { return norm_tol_; }
  double mass() const { return mass_; }

  /// Integrates an arbitrary integrand over this density's support with
  /// this density's grid.
  double IntegrateOnGrid(const std::function<double(double)>& f) const {
    return Integrate(f, lo_, hi_, grid_);
  }

  static Density UniformDensity(double lo, double hi, QuadratureSpec grid = {}) {
    const double v = 1.0 / (hi - lo);
    return Density(lo, hi, [v](double) { return v; }, grid);
  }

 private:
  double lo_, hi_;
  std::function<double(double)> pdf_;
  QuadratureSpec grid_;
  double norm_tol_;
  double mass_ = 1.0;
};

/// Continuous message importance measure L(f) = integral f e^{-f} dx.
inline double MimContinuous(const Density& f) {
  return f.IntegrateOnGrid([&f](double x) {
    const double v = f(x);
    return v * std::exp(-v);
  });
}

/// Continuous transfer measure D_I(g||f) = L(g) - L(f); both densities
/// must share the same support interval.
inline double MitmContinuous(const Density& g, const Density& f) {
  if (g.lo() != f.lo() || g.hi() != f.hi()) {
    throw ShapeError("densities must share one support interval");
  }
  return MimContinuous(g) - MimContinuous(f);
}

/// Perturbation model g0 = f0 + epsilon * f0^alpha * u, subject to the
/// zero-mean constraint integral epsilon f0^alpha u dx = 0 which preserves
/// normalization.
struct PerturbationFamily {
  Density f0;
  std::function<double(double)> u;
  double alpha = 1.0;
  double epsilon = 0.0;
};

/// A perturbation that would push the density negative somewhere; rejected
/// rather than clipped, since clipping would break the zero-mean constraint.
class InfeasiblePerturbationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

inline double PowOrThrow(double base, double expo) {
  const double v = std::pow(base, expo);
  if (!std::isfinite(v)) {
    throw NumericalError("f0^" + std::to_string(expo) +
                         " diverges where f0 = " + std::to_string(base));
  }
  return v;
}

}  // namespace detail

/// Materializes g0 = f0 + epsilon f0^alpha u as a validated Density.
/// Throws InfeasiblePerturbationError if g0 dips negative on the grid and
/// ValidationError if the zero-mean constraint fails.
inline Density MakePerturbed(const PerturbationFamily& fam) {
  const Density& f0 = fam.f0;
  const double eps = fam.epsilon;
  const double alpha = fam.alpha;
  auto term = [&fam, &f0, eps, alpha](double x) {
    return eps * detail::PowOrThrow(f0(x), alpha) * fam.u(x);
  };
  const double constraint = f0.IntegrateOnGrid(term);
  const double tol = std::max(f0.norm_tol(), 1e-12);
  if (std::abs(constraint) > tol) {
    throw ValidationError("perturbation mass " + std::to_string(constraint) +
                          " violates the zero-mean constraint");
  }
  const std::size_t n = f0.grid().panels;
  const double h = (f0.hi() - f0.lo()) / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = f0.lo() + static_cast<double>(i) * h;
    if (f0(x) + term(x) < -1e-12) {
      throw InfeasiblePerturbationError(
          "perturbed density is negative at x = " + std::to_string(x));
    }
  }
  Density f0_copy = f0;
  std::function<double(double)> u_copy = fam.u;
  auto g = [f0_copy, u_copy, eps, alpha](double x) {
    return f0_copy(x) + eps * std::pow(f0_copy(x), alpha) * u_copy(x);
  };
  return Density(f0.lo(), f0.hi(), std::move(g), f0.grid(), f0.norm_tol());
}

struct SeriesResult {
  double value = 0.0;
  /// Magnitude estimate for the first omitted series term.
  double tail_bound = 0.0;
  int terms_used = 0;
};

namespace detail {

// Series coefficients c1(i) = (-1)^i (i+1)/i! and c2(i) = (-1)^i (i+1)/(i-1)!,
// both summed from i = 1. Factorial decay puts both below 1e-12 well before
// i = 30.
constexpr int kSeriesHardCap = 64;
constexpr double kSeriesCoeffCutoff = 1e-12;

inline double SeriesCoeff1(int i) {
  double fact = 1.0;
  for (int j = 2; j <= i; ++j) fact *= j;
  return ((i % 2 == 0) ? 1.0 : -1.0) * (i + 1.0) / fact;
}

inline double SeriesCoeff2(int i) {
  double fact = 1.0;
  for (int j = 2; j <= i - 1; ++j) fact *= j;
  return ((i % 2 == 0) ? 1.0 : -1.0) * (i + 1.0) / fact;
}

/// Shared evaluator for the expansion
///   eps     * sum_{i>=1} c1(i) integral f0^{i+alpha}     * lin(x)  dx
/// + eps^2/2 * sum_{i>=1} c2(i) integral f0^{i-1+2 alpha} * quad(x) dx.
inline SeriesResult EvaluateSeries(const Density& f0, double alpha, double eps,
                                   const std::function<double(double)>& lin,
                                   const std::function<double(double)>& quad,
                                   int i_max, int order) {
  if (i_max == 0 || i_max < -1) {
    throw ParameterError("series truncation index must be >= 1 (or -1 for auto)");
  }
  if (order != 1 && order != 2) {
    throw ParameterError("series order must be 1 or 2");
  }
  const int cap = i_max > 0 ? i_max : kSeriesHardCap;

  SeriesResult out;
  double sum1 = 0.0;
  double sum2 = 0.0;
  for (int i = 1; i <= cap; ++i) {
    const double c1 = SeriesCoeff1(i);
    const double c2 = SeriesCoeff2(i);
    if (i_max < 0 && std::abs(c1) < kSeriesCoeffCutoff &&
        std::abs(c2) < kSeriesCoeffCutoff) {
      break;
    }
    const double e1 = static_cast<double>(i) + alpha;
    sum1 += c1 * f0.IntegrateOnGrid([&](double x) {
      return PowOrThrow(f0(x), e1) * lin(x);
    });
    if (order >= 2) {
      const double e2 = static_cast<double>(i) - 1.0 + 2.0 * alpha;
      sum2 += c2 * f0.IntegrateOnGrid([&](double x) {
        return PowOrThrow(f0(x), e2) * quad(x);
      });
    }
    out.terms_used = i;
  }
  out.value = eps * sum1;
  if (order >= 2) out.value += 0.5 * eps * eps * sum2;

  // First omitted term, estimated against |lin| and |quad|.
  const int next = out.terms_used + 1;
  double tail = std::abs(eps * SeriesCoeff1(next)) *
                std::abs(f0.IntegrateOnGrid([&](double x) {
                  return PowOrThrow(f0(x), next + alpha) * std::abs(lin(x));
                }));
  if (order >= 2) {
    tail += 0.5 * eps * eps * std::abs(SeriesCoeff2(next)) *
            std::abs(f0.IntegrateOnGrid([&](double x) {
              return PowOrThrow(f0(x), next - 1.0 + 2.0 * alpha) *
                     std::abs(quad(x));
            }));
  }
  out.tail_bound = tail;
  return out;
}

}  // namespace detail

/// Truncated expansion of D_I(g0||f0) in powers of epsilon, omitting the
/// o(epsilon^2) remainder. `i_max` < 0 selects dynamic truncation (stop
/// once both coefficient magnitudes fall below 1e-12); `order` = 1 keeps
/// only the linear sum.
inline SeriesResult MitmSeries(const PerturbationFamily& fam, int i_max = -1,
                               int order = 2) {
  const std::function<double(double)>& u = fam.u;
  auto u2 = [&u](double x) {
    const double v = u(x);
    return v * v;
  };
  return detail::EvaluateSeries(fam.f0, fam.alpha, fam.epsilon, u, u2, i_max,
                                order);
}

/// Paired expansion of D_I(g1||g2) for two perturbations u1, u2 of the same
/// reference density: u1 - u2 enters the linear sum, u1^2 - u2^2 the
/// quadratic one. Both implied families are checked for feasibility first.
inline SeriesResult MitmSeriesPair(const Density& f0,
                                   const std::function<double(double)>& u1,
                                   const std::function<double(double)>& u2,
                                   double alpha, double epsilon,
                                   int i_max = -1, int order = 2) {
  (void)MakePerturbed(PerturbationFamily{f0, u1, alpha, epsilon});
  (void)MakePerturbed(PerturbationFamily{f0, u2, alpha, epsilon});
  auto lin = [&u1, &u2](double x) { return u1(x) - u2(x); };
  auto quad = [&u1, &u2](double x) {
    const double a = u1(x);
    const double b = u2(x);
    return a * a - b * b;
  };
  return detail::EvaluateSeries(f0, alpha, epsilon, lin, quad, i_max, order);
}

struct ConvergenceOrder {
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool noise_limited = false;
  std::vector<double> residuals;
};

/// Fits log |MitmContinuous(g0, f0) - MitmSeries| against log epsilon over
/// an epsilon grid and reports the slope. Residuals at or below the
/// numerical noise floor yield the noise-limited flag instead of a slope.
inline ConvergenceOrder SeriesConvergenceOrder(const PerturbationFamily& base,
                                               const std::vector<double>& eps_grid,
                                               int i_max = -1, int order = 2) {
  if (eps_grid.size() < 2) {
    throw ParameterError("order estimation needs at least two epsilon values");
  }
  constexpr double kNoiseFloor = 1e-13;
  ConvergenceOrder out;
  std::vector<double> log_eps, log_res;
  for (double eps : eps_grid) {
    PerturbationFamily fam{base.f0, base.u, base.alpha, eps};
    const Density g0 = MakePerturbed(fam);
    const double direct = MitmContinuous(g0, base.f0);
    const double series = MitmSeries(fam, i_max, order).value;
    const double r = std::abs(direct - series);
    out.residuals.push_back(r);
    if (r <= kNoiseFloor) {
      out.noise_limited = true;
    } else {
      log_eps.push_back(std::log(eps));
      log_res.push_back(std::log(r));
    }
  }
  if (out.noise_limited) return out;

  const std::size_t n = log_eps.size();
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += log_eps[i];
    sy += log_res[i];
    sxx += log_eps[i] * log_eps[i];
    sxy += log_eps[i] * log_res[i];
  }
  const double denom = static_cast<double>(n) * sxx - sx * sx;
  out.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
  return out;
}

}  // namespace mimt
