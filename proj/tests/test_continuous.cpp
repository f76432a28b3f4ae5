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

#include "mimt/continuous.hpp"

#include <cmath>
#include <functional>
#include <vector>

#include "gtest/gtest.h"

namespace mimt {
namespace {

constexpr double kPi = 3.14159265358979323846;

double SinePerturbation(double x) { return std::sin(2.0 * kPi * x); }

// cos(2 pi x) + cos(4 pi x): zero mean, but with a nonvanishing integral of
// u^3, so the o(eps^2) remainder is genuinely cubic.
double CosMixPerturbation(double x) {
  return std::cos(2.0 * kPi * x) + std::cos(4.0 * kPi * x);
}

Density TruncatedStandardNormal(QuadratureSpec grid = {}) {
  const double z = std::erf(5.0 / std::sqrt(2.0));
  return Density(-5.0, 5.0,
                 [z](double x) {
                   return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi) / z;
                 },
                 grid);
}

Density TriangularDensity(QuadratureSpec grid = {}) {
  return Density(0.0, 1.0, [](double x) { return 2.0 - 2.0 * x; }, grid);
}

TEST(Integrate, PolynomialsAndRuleAgreement) {
  auto cubic = [](double x) { return x * x * x; };
  // Simpson integrates cubics exactly.
  EXPECT_NEAR(Integrate(cubic, 0.0, 1.0, {QuadratureRule::kSimpson, 8}), 0.25,
              1e-15);
  EXPECT_NEAR(Integrate(cubic, 0.0, 1.0, {QuadratureRule::kTrapezoid, 4096}),
              0.25, 1e-7);
  EXPECT_NEAR(Integrate(cubic, 0.0, 1.0, {QuadratureRule::kMidpoint, 4096}),
              0.25, 1e-7);
  EXPECT_THROW(Integrate(cubic, 1.0, 0.0), ParameterError);
  EXPECT_THROW(Integrate(cubic, 0.0, 1.0, {QuadratureRule::kSimpson, 0}),
               ParameterError);
}

TEST(Density, Validation) {
  EXPECT_NO_THROW(Density::UniformDensity(0.0, 1.0));
  // Mass 2, not a density.
  EXPECT_THROW(Density(0.0, 2.0, [](double) { return 1.0; }), ValidationError);
  EXPECT_THROW(Density(0.0, 1.0, [](double x) { return 2.0 * x - 0.5; }),
               ValidationError);
  EXPECT_THROW(Density(0.0, 1.0, [](double x) { return 1.0 / x; }),
               NumericalError);
  EXPECT_THROW(Density(1.0, 0.0, [](double) { return 1.0; }), ValidationError);
}

TEST(MimContinuous, ConstantDensities) {
  EXPECT_NEAR(MimContinuous(Density::UniformDensity(0.0, 1.0)), std::exp(-1.0),
              1e-12);
  EXPECT_NEAR(MimContinuous(Density::UniformDensity(0.0, 2.0)), std::exp(-0.5),
              1e-12);
}

TEST(MimContinuous, TruncatedNormalAgainstHighResolutionOracle) {
  // Oracle: two distinct rules at >= 1e5 nodes must agree with each other
  // before either is trusted.
  const Density fine_simpson =
      TruncatedStandardNormal({QuadratureRule::kSimpson, 1 << 17});
  const Density fine_trapezoid =
      TruncatedStandardNormal({QuadratureRule::kTrapezoid, 1 << 17});
  const double oracle_a = MimContinuous(fine_simpson);
  const double oracle_b = MimContinuous(fine_trapezoid);
  ASSERT_NEAR(oracle_a, oracle_b, 1e-9);

  const double v = MimContinuous(TruncatedStandardNormal());
  EXPECT_NEAR(v, oracle_a, 1e-6);
  EXPECT_NEAR(v, 0.7589975229482788, 1e-6);
}

TEST(MitmContinuous, TriangularAgainstClosedForm) {
  const Density uniform = Density::UniformDensity(0.0, 1.0);
  const Density triangular = TriangularDensity();
  // integral (2-2x) e^{-(2-2x)} dx = (1 - 3 e^{-2}) / 2 by substitution.
  const double tri_mim_closed = (1.0 - 3.0 * std::exp(-2.0)) / 2.0;
  EXPECT_NEAR(MimContinuous(triangular), tri_mim_closed, 1e-9);
  const double d = MitmContinuous(uniform, triangular);
  EXPECT_NEAR(d, std::exp(-1.0) - tri_mim_closed, 1e-9);

  // Distinct quadrature rules agree on the same value.
  const Density tri_mid = TriangularDensity({QuadratureRule::kMidpoint, 4096});
  const Density uni_mid =
      Density::UniformDensity(0.0, 1.0, {QuadratureRule::kMidpoint, 4096});
  EXPECT_NEAR(MitmContinuous(uni_mid, tri_mid), d, 1e-6);

  EXPECT_DOUBLE_EQ(MitmContinuous(uniform, uniform), 0.0);
  EXPECT_DOUBLE_EQ(MitmContinuous(uniform, triangular),
                   -MitmContinuous(triangular, uniform));
  EXPECT_THROW(MitmContinuous(uniform, Density::UniformDensity(0.0, 2.0)),
               ShapeError);
}

TEST(MakePerturbed, FeasibilityAndNormalization) {
  const Density f0 = Density::UniformDensity(0.0, 1.0);

  PerturbationFamily zero{f0, [](double) { return 0.0; }, 1.0, 0.1};
  const Density same = MakePerturbed(zero);
  EXPECT_NEAR(MitmContinuous(same, f0), 0.0, 1e-14);

  PerturbationFamily sine{f0, SinePerturbation, 1.0, 0.1};
  const Density g0 = MakePerturbed(sine);
  EXPECT_NEAR(g0.mass(), 1.0, 1e-8);
  EXPECT_NEAR(g0(0.25), 1.1, 1e-12);

  // eps = 2 pushes 1 + 2 sin(2 pi x) negative.
  PerturbationFamily toolarge{f0, SinePerturbation, 1.0, 2.0};
  EXPECT_THROW(MakePerturbed(toolarge), InfeasiblePerturbationError);

  // Constant offset breaks the zero-mean constraint.
  PerturbationFamily biased{f0, [](double) { return 1.0; }, 1.0, 0.1};
  EXPECT_THROW(MakePerturbed(biased), ValidationError);
}

TEST(MitmSeries, UniformSineClosedForm) {
  const Density f0 = Density::UniformDensity(0.0, 1.0);
  // f0 == 1 makes every linear term vanish (zero-mean u) and the quadratic
  // coefficient sum collapse to -e^{-1}; with integral u^2 = 1/2 the series
  // equals -eps^2 e^{-1} / 4.
  for (double eps : {0.1, 0.05}) {
    PerturbationFamily fam{f0, SinePerturbation, 1.0, eps};
    const SeriesResult s = MitmSeries(fam);
    EXPECT_NEAR(s.value, -eps * eps * std::exp(-1.0) / 4.0, 1e-12);
    EXPECT_GE(s.terms_used, 15);
    EXPECT_LE(s.terms_used, 30);
  }
  // eps^2 scaling between the two values.
  PerturbationFamily big{f0, SinePerturbation, 1.0, 0.1};
  PerturbationFamily small{f0, SinePerturbation, 1.0, 0.05};
  EXPECT_NEAR(MitmSeries(big).value / MitmSeries(small).value, 4.0, 1e-9);

  PerturbationFamily zero{f0, [](double) { return 0.0; }, 1.0, 0.1};
  EXPECT_DOUBLE_EQ(MitmSeries(zero).value, 0.0);
}

TEST(MitmSeries, RemainderAgainstDirectQuadrature) {
  const Density f0 = Density::UniformDensity(0.0, 1.0);
  PerturbationFamily fam{f0, SinePerturbation, 1.0, 0.1};
  const double direct = MitmContinuous(MakePerturbed(fam), f0);
  const double series = MitmSeries(fam).value;
  // The omitted remainder for this family is (3/64) e^{-1} eps^4 to leading
  // order, about 1.72e-6 at eps = 0.1.
  const double residual = std::abs(direct - series);
  EXPECT_GT(residual, 1.5e-6);
  EXPECT_LT(residual, 2.0e-6);
  // Prop-style perturbation bound: |D_I| <= integral |eps f0^alpha u|.
  const double bound = f0.IntegrateOnGrid(
      [&](double x) { return std::abs(0.1 * SinePerturbation(x)); });
  EXPECT_LE(std::abs(direct), bound);
}

TEST(MitmSeries, TruncationAndErrors) {
  const Density f0 = Density::UniformDensity(0.0, 1.0);
  PerturbationFamily fam{f0, SinePerturbation, 1.0, 0.1};
  EXPECT_THROW(MitmSeries(fam, 0), ParameterError);
  EXPECT_THROW(MitmSeries(fam, -1, 3), ParameterError);
  const SeriesResult one = MitmSeries(fam, 1);
  EXPECT_EQ(one.terms_used, 1);
  EXPECT_GT(one.tail_bound, 0.0);

  // First-order truncation of this family vanishes up to quadrature noise.
  EXPECT_NEAR(MitmSeries(fam, -1, 1).value, 0.0, 1e-15);

  // f0 has a zero at x = 1; alpha = -1 sends f0^{i-1+2 alpha} to infinity.
  PerturbationFamily divergent{TriangularDensity(), SinePerturbation, -1.0,
                               0.01};
  EXPECT_THROW(MitmSeries(divergent), NumericalError);
}

TEST(MitmSeriesPair, ReductionAndAntisymmetry) {
  const Density f0 = Density::UniformDensity(0.0, 1.0);
  auto zero = [](double) { return 0.0; };

  const SeriesResult same =
      MitmSeriesPair(f0, SinePerturbation, SinePerturbation, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(same.value, 0.0);

  PerturbationFamily fam{f0, SinePerturbation, 1.0, 0.1};
  const SeriesResult reduced =
      MitmSeriesPair(f0, SinePerturbation, zero, 1.0, 0.1);
  EXPECT_NEAR(reduced.value, MitmSeries(fam).value, 1e-15);

  const SeriesResult fwd =
      MitmSeriesPair(f0, SinePerturbation, CosMixPerturbation, 1.0, 0.1);
  const SeriesResult rev =
      MitmSeriesPair(f0, CosMixPerturbation, SinePerturbation, 1.0, 0.1);
  EXPECT_DOUBLE_EQ(fwd.value, -rev.value);

  // The pair value matches the direct difference of the two perturbed
  // densities up to the o(eps^2) remainder; the cosine-mix family has
  // integral u^3 != 0, so that remainder is genuinely cubic and a small
  // eps keeps it visible but tight.
  const SeriesResult tight =
      MitmSeriesPair(f0, SinePerturbation, CosMixPerturbation, 1.0, 0.02);
  const Density g1 = MakePerturbed({f0, SinePerturbation, 1.0, 0.02});
  const Density g2 = MakePerturbed({f0, CosMixPerturbation, 1.0, 0.02});
  EXPECT_NEAR(tight.value, MitmContinuous(g1, g2), 1.5e-6);
}

TEST(SeriesConvergenceOrder, SlopesPerFamily) {
  const Density f0 = Density::UniformDensity(0.0, 1.0);
  const std::vector<double> grid{0.2, 0.1, 0.05, 0.025};

  // integral u^3 = 0 for the sine family, so the remainder is quartic.
  PerturbationFamily sine{f0, SinePerturbation, 1.0, 0.0};
  const ConvergenceOrder sine_fit = SeriesConvergenceOrder(sine, grid);
  EXPECT_FALSE(sine_fit.noise_limited);
  EXPECT_GE(sine_fit.slope, 3.5);
  EXPECT_LE(sine_fit.slope, 4.5);

  // integral u^3 = 3/4 for the cosine mix: cubic remainder.
  PerturbationFamily cosmix{f0, CosMixPerturbation, 1.0, 0.0};
  const ConvergenceOrder cos_fit = SeriesConvergenceOrder(cosmix, grid);
  EXPECT_FALSE(cos_fit.noise_limited);
  EXPECT_GE(cos_fit.slope, 2.5);
  EXPECT_LE(cos_fit.slope, 3.5);

  // Dropping the quadratic sum leaves an eps^2 residual.
  const ConvergenceOrder first_only =
      SeriesConvergenceOrder(sine, grid, -1, 1);
  EXPECT_NEAR(first_only.slope, 2.0, 0.3);

  // u == 0: residuals sit at zero, below the noise floor.
  PerturbationFamily zero{f0, [](double) { return 0.0; }, 1.0, 0.0};
  const ConvergenceOrder flat = SeriesConvergenceOrder(zero, grid);
  EXPECT_TRUE(flat.noise_limited);

  EXPECT_THROW(SeriesConvergenceOrder(sine, {0.1}), ParameterError);
}

TEST(SeriesConvergenceOrder, EpsilonHalvingBound) {
  const Density f0 = Density::UniformDensity(0.0, 1.0);
  // o(eps^2) remainder: halving eps must shrink the residual by at least 4.
  for (auto u : {&SinePerturbation, &CosMixPerturbation}) {
    PerturbationFamily fam{f0, u, 1.0, 0.0};
    const ConvergenceOrder fit =
        SeriesConvergenceOrder(fam, {0.2, 0.1, 0.05, 0.025});
    for (std::size_t i = 1; i < fit.residuals.size(); ++i) {
      EXPECT_LE(fit.residuals[i], fit.residuals[i - 1] / 4.0 * 1.05);
    }
  }
}

}  // namespace
}  // namespace mimt
