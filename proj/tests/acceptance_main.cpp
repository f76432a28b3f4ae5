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

// Acceptance suite: one check per release criterion, each with a wall-clock
// budget, printed as a single pass/fail line. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mimt/capacity.hpp"
#include "mimt/continuous.hpp"
#include "mimt/io.hpp"
#include "mimt/measures.hpp"
#include "mimt/queue.hpp"
#include "mimt/simulate.hpp"

namespace {

using mimt::ProbVector;

struct CheckContext {
  std::ostringstream detail;
  bool ok = true;

  void Require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " FAILED{" << what << "}";
    }
  }
};

ProbVector RandomDist(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (double& x : p) {
    x = expo(rng);
    total += x;
  }
  for (double& x : p) x /= total;
  return ProbVector(std::move(p));
}

// Criterion 1: numeric simplex maximization matches the closed forms within
// 1e-6 across beta in {0.05..0.95} and K in {2..6}; C(0.5) = 0 exactly.
void Criterion1(CheckContext& ctx) {
  double worst = 0.0;
  for (int i = 1; i <= 19; ++i) {
    const double beta = 0.05 * i;
    const double gap =
        std::abs(CapacityNumeric(mimt::TransferChannel::BinarySymmetric(beta))
                     .value -
                 mimt::CapacityBsc(beta).value);
    worst = std::max(worst, gap);
    for (std::size_t k = 2; k <= 6; ++k) {
      const double gap_k =
          std::abs(CapacityNumeric(
                       mimt::TransferChannel::StronglySymmetric(k, beta))
                       .value -
                   mimt::CapacityStrongSymmetric(k, beta).value);
      worst = std::max(worst, gap_k);
    }
  }
  ctx.Require(worst <= 1e-6, "numeric-vs-closed gap " + std::to_string(worst));
  ctx.Require(mimt::CapacityBsc(0.5).value == 0.0, "C(0.5) not exactly 0");
  ctx.detail << "max |numeric - closed| = " << worst;
}

// Criterion 2: |Mitm(Q,P)| <= ||P - Q||_1 on 1e5 random pairs.
void Criterion2(CheckContext& ctx) {
  std::mt19937_64 rng(0xC2);
  std::uniform_int_distribution<std::size_t> len(1, 16);
  int violations = 0;
  for (int it = 0; it < 100000; ++it) {
    const std::size_t n = len(rng);
    const ProbVector p = RandomDist(rng, n);
    const ProbVector q = RandomDist(rng, n);
    if (std::abs(Mitm(q, p)) > L1Distance(p, q)) ++violations;
  }
  ctx.Require(violations == 0,
              std::to_string(violations) + " Lipschitz violations");
  ctx.detail << "1e5 pairs, violations = " << violations;
}

// Criterion 3: exp(-1) <= Mim(P) <= exp(-1/n) on 1e4 random P and
// subadditivity over 1e3 random product pairs with n, m <= 8.
void Criterion3(CheckContext& ctx) {
  std::mt19937_64 rng(0xC3);
  std::uniform_int_distribution<std::size_t> len(1, 12);
  int range_violations = 0;
  for (int it = 0; it < 10000; ++it) {
    const ProbVector p = RandomDist(rng, len(rng));
    const double v = Mim(p);
    if (v < std::exp(-1.0) - 1e-12 ||
        v > std::exp(-1.0 / static_cast<double>(p.size())) + 1e-12) {
      ++range_violations;
    }
  }
  std::uniform_int_distribution<std::size_t> len8(1, 8);
  int sub_violations = 0;
  for (int it = 0; it < 1000; ++it) {
    const ProbVector p = RandomDist(rng, len8(rng));
    const ProbVector q = RandomDist(rng, len8(rng));
    if (Mim(OuterProduct(p, q)) > Mim(p) + Mim(q) + 1e-12) ++sub_violations;
  }
  ctx.Require(range_violations == 0,
              std::to_string(range_violations) + " range violations");
  ctx.Require(sub_violations == 0,
              std::to_string(sub_violations) + " subadditivity violations");
  ctx.detail << "range violations = " << range_violations
             << ", subadditivity violations = " << sub_violations;
}

// Criterion 4: product-form steady state equals the birth-death solve to
// 1e-12 over s <= 5, k <= 30, rho in {0.1,...,0.9,0.95}; the s = 1 infinite
// case is Poisson(a) analytically.
void Criterion4(CheckContext& ctx) {
  double worst = 0.0;
  std::vector<double> rhos{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  for (int s = 1; s <= 5; ++s) {
    for (long k = 0; k <= 30; ++k) {
      for (double rho : rhos) {
        const mimt::QueueSpec spec = mimt::QueueSpec::FromRho(s, k, rho);
        const ProbVector direct = SteadyState(spec).dist;
        const auto [birth, death] = QueueBirthDeathRates(spec);
        const ProbVector oracle =
            mimt::BirthDeathOracle(birth, death, direct.size());
        for (std::size_t j = 0; j < direct.size(); ++j) {
          worst = std::max(worst, std::abs(direct[j] - oracle[j]));
        }
      }
    }
  }
  ctx.Require(worst <= 1e-12, "oracle gap " + std::to_string(worst));

  double poisson_gap = 0.0;
  for (double a : {0.3, 0.9}) {
    const mimt::QueueStateDist inf = SteadyStateInfinite(
        mimt::QueueSpec::FromRho(1, std::nullopt, a));
    double pmf = std::exp(-a);
    for (std::size_t j = 0; j < inf.dist.size(); ++j) {
      if (j > 0) pmf *= a / static_cast<double>(j);
      poisson_gap = std::max(poisson_gap, std::abs(inf.dist[j] - pmf));
    }
  }
  ctx.Require(poisson_gap <= 1e-12,
              "Poisson gap " + std::to_string(poisson_gap));
  ctx.detail << "max oracle gap = " << worst
             << ", max Poisson gap = " << poisson_gap;
}

// Criterion 5: the uniform/sine series at eps = 0.1 equals -eps^2 e^{-1}/4
// within 1e-6, and the series-vs-quadrature residual scales with estimated
// order >= 2.5 under eps-halving. The raw residual against direct quadrature of the defining integral
// is reported alongside: it is the o(eps^2) remainder itself, about
// (3/64) e^{-1} eps^4 ~ 1.7e-6 for this family.
void Criterion5(CheckContext& ctx) {
  const mimt::Density f0 = mimt::Density::UniformDensity(0.0, 1.0);
  auto u = [](double x) { return std::sin(2.0 * M_PI * x); };
  mimt::PerturbationFamily fam{f0, u, 1.0, 0.1};

  const double series = MitmSeries(fam).value;
  const double closed = -0.1 * 0.1 * std::exp(-1.0) / 4.0;
  ctx.Require(std::abs(series - closed) <= 1e-6,
              "series vs -eps^2 e^{-1}/4 gap " +
                  std::to_string(std::abs(series - closed)));

  const double direct = MitmContinuous(MakePerturbed(fam), f0);
  const double residual = std::abs(series - direct);

  const mimt::ConvergenceOrder fit =
      SeriesConvergenceOrder(fam, {0.2, 0.1, 0.05, 0.025});
  ctx.Require(!fit.noise_limited, "order fit noise-limited");
  ctx.Require(fit.slope >= 2.5,
              "estimated order " + std::to_string(fit.slope) + " < 2.5");
  ctx.detail << "series = " << series << ", |series - quadrature| = "
             << residual << " (o(eps^2) remainder), order = " << fit.slope;
}

// Criterion 6: at s = 1, rho = 0.9 the analytic |D_I| and D curves decrease
// monotonically in k (beyond k = 1) with the MITM curve below the KL curve
// from a reported k0 on, for both the adjacent and the infinite comparison;
// simulated exponential-arrival divergences track the analytic values
// within 3 replication standard errors at 1e6 events.
void Criterion6(CheckContext& ctx) {
  const mimt::QueueSpec spec = mimt::QueueSpec::FromRho(1, 0, 0.9);

  long k0_adjacent = -1;
  double prev_di = 0.0, prev_kl = 0.0;
  for (long k = 1; k <= 12; ++k) {
    const double di = std::abs(MitmAdjacent(spec, k).exact);
    const double dkl = KlAdjacent(spec, k).exact;
    if (k > 1) {
      ctx.Require(di <= prev_di, "adjacent |D_I| not decreasing at k=" +
                                     std::to_string(k));
      ctx.Require(dkl <= prev_kl,
                  "adjacent D not decreasing at k=" + std::to_string(k));
    }
    if (k0_adjacent < 0 && di < dkl) k0_adjacent = k;
    if (k0_adjacent >= 0) {
      ctx.Require(di < dkl, "MITM not below KL at k=" + std::to_string(k));
    }
    prev_di = di;
    prev_kl = dkl;
  }
  ctx.Require(k0_adjacent >= 0, "no adjacent crossover found");

  long k0_infinite = -1;
  prev_di = prev_kl = 0.0;
  for (long k = 1; k <= 12; ++k) {
    const double di = std::abs(MitmVsInfinite(spec, k).exact);
    const double dkl = KlVsInfinite(spec, k).exact;
    if (k > 1) {
      ctx.Require(di <= prev_di, "infinite |D_I| not decreasing at k=" +
                                     std::to_string(k));
      ctx.Require(dkl <= prev_kl,
                  "infinite D not decreasing at k=" + std::to_string(k));
    }
    if (k0_infinite < 0 && di < dkl) k0_infinite = k;
    prev_di = di;
    prev_kl = dkl;
  }
  ctx.Require(k0_infinite >= 0, "no infinite-case crossover found");

  // Simulation tracking on the adjacent comparison.
  int tracked = 0;
  double worst_z = 0.0;
  for (long k = 1; k <= 4; ++k) {
    mimt::SimConfig cfg_a;
    cfg_a.spec = spec.WithBuffer(k);
    cfg_a.arrivals = {mimt::ArrivalKind::kExponential,
                      1.0 / spec.arrival_rate};
    cfg_a.horizon_events = 1000000;
    cfg_a.replications = 12;
    cfg_a.seed = mimt::HashCombine(20260809, static_cast<std::uint64_t>(k));
    mimt::SimConfig cfg_b = cfg_a;
    cfg_b.spec = spec.WithBuffer(k + 1);
    cfg_b.seed = mimt::HashCombine(cfg_a.seed, 0xb);

    const mimt::SimResult res_a = Simulate(cfg_a, 2);
    const mimt::SimResult res_b = Simulate(cfg_b, 2);
    const mimt::EmpiricalDivergences emp =
        EmpiricalDivergencesOf(res_a, res_b);
    const double z_i =
        std::abs(emp.d_i_sim - MitmAdjacent(spec, k).exact) / emp.d_i_se;
    const double z_kl =
        std::abs(emp.d_kl_sim - KlAdjacent(spec, k).exact) / emp.d_kl_se;
    worst_z = std::max({worst_z, z_i, z_kl});
    ctx.Require(z_i <= 3.0, "d_i z-score " + std::to_string(z_i) + " at k=" +
                                std::to_string(k));
    ctx.Require(z_kl <= 3.0, "d_kl z-score " + std::to_string(z_kl) +
                                 " at k=" + std::to_string(k));
    ++tracked;
  }
  ctx.detail << "k0_adjacent = " << k0_adjacent
             << ", k0_infinite = " << k0_infinite << ", sim cells = "
             << tracked << ", worst |z| = " << worst_z;
}

// Criterion 7: exponential-arrival occupancy at s=1, k=1, rho=0.9 is within
// total variation 0.01 of (0.433839, 0.390455, 0.175706) at 1e6 events, and
// the result is deterministic per seed.
void Criterion7(CheckContext& ctx) {
  mimt::SimConfig cfg;
  cfg.spec = mimt::QueueSpec::FromRho(1, 1, 0.9);
  cfg.arrivals = {mimt::ArrivalKind::kExponential, 1.0 / cfg.spec.arrival_rate};
  cfg.horizon_events = 1000000;
  cfg.seed = 777;

  const mimt::SimResult res = Simulate(cfg, 2);
  const ProbVector target{0.433839, 0.390455, 0.175706};
  const double tv = 0.5 * L1Distance(res.occupancy, target);
  ctx.Require(tv < 0.01, "TV " + std::to_string(tv));

  const mimt::SimResult again = Simulate(cfg, 2);
  bool identical = res.attempts == again.attempts &&
                   res.admissions == again.admissions &&
                   res.balks == again.balks;
  for (std::size_t j = 0; j < res.occupancy.size(); ++j) {
    identical = identical && res.occupancy[j] == again.occupancy[j];
  }
  ctx.Require(identical, "rerun not bit-identical");
  ctx.detail << "TV = " << tv << ", deterministic = " << identical;
}

// Criterion 8: buffer sizing is self-certifying for eps in {1e-2,1e-3,1e-4}
// under both measures; the printed bounds are evaluated with validity flags
// and the typo-ledger CSV is produced, containing the documented KL-adjacent printed-form
// discrepancy at s=1, k=1, rho=0.9.
void Criterion8(CheckContext& ctx) {
  const mimt::QueueSpec spec = mimt::QueueSpec::FromRho(1, 0, 0.9);
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    for (mimt::QueueMeasure m :
         {mimt::QueueMeasure::kMitm, mimt::QueueMeasure::kKl}) {
      const long k_star = MinBufferSearch(spec, eps, m);
      auto divergence = [&](long k) {
        return m == mimt::QueueMeasure::kMitm
                   ? std::abs(MitmVsInfinite(spec, k).exact)
                   : KlVsInfinite(spec, k).exact;
      };
      ctx.Require(divergence(k_star) <= eps,
                  "tolerance violated at k* for eps=" + std::to_string(eps));
      if (k_star > 0) {
        ctx.Require(divergence(k_star - 1) > eps,
                    "k*-1 already satisfies eps=" + std::to_string(eps));
      }
    }
    const mimt::BufferBound bm = MinBufferBoundMitm(spec, eps);
    const mimt::BufferBound bk = MinBufferBoundKl(spec, eps);
    ctx.Require(bm.applicable && bm.valid,
                "MITM bound invalid at eps=" + std::to_string(eps));
    ctx.Require(bk.applicable && bk.valid,
                "KL bound invalid at eps=" + std::to_string(eps));
  }

  const std::vector<mimt::LedgerRow> rows = mimt::TypoLedgerDefault();
  const std::string path = "mimt_typo_ledger.csv";
  {
    std::ofstream out(path);
    WriteLedgerCsv(rows, out);
  }
  std::ifstream back(path);
  std::size_t lines = 0;
  std::string line;
  while (std::getline(back, line)) ++lines;
  ctx.Require(lines == rows.size() + 1, "ledger CSV row count mismatch");

  bool found = false;
  for (const mimt::LedgerRow& row : rows) {
    if (row.equation_id == "kl_adjacent_printed" && row.s == 1 && row.k == 1 &&
        row.rho == 0.9) {
      found = true;
      ctx.Require(std::abs(row.exact - 0.051367) <= 1e-4,
                  "kl_adjacent_printed exact " + std::to_string(row.exact));
      ctx.Require(std::abs(row.printed - 0.056900) <= 1e-4,
                  "kl_adjacent_printed printed " + std::to_string(row.printed));
      ctx.Require(std::abs(row.abs_gap - 5.5e-3) <= 1e-4,
                  "kl_adjacent_printed gap " + std::to_string(row.abs_gap));
      ctx.detail << "kl_adjacent_printed(s=1,k=1,rho=0.9): exact = " << row.exact
                 << ", printed = " << row.printed << ", gap = " << row.abs_gap
                 << "; ";
    }
  }
  ctx.Require(found, "kl_adjacent_printed ledger row missing");
  ctx.detail << "ledger rows = " << rows.size() << " -> " << path;
}

struct Criterion {
  int id;
  const char* name;
  void (*fn)(CheckContext&);
  double budget_seconds;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "closed-form capacity agreement", Criterion1, 10.0},
      {2, "MITM Lipschitz invariant (lambda = 1)", Criterion2, 5.0},
      {3, "MIM range and subadditivity", Criterion3, 5.0},
      {4, "queue steady-state oracle equivalence", Criterion4, 5.0},
      {5, "perturbation series vs quadrature", Criterion5, 10.0},
      {6, "figure 2/3 qualitative reproduction", Criterion6, 300.0},
      {7, "simulation fidelity and determinism", Criterion7, 60.0},
      {8, "buffer sizing, bounds, typo ledger", Criterion8, 30.0},
  };

  int failures = 0;
  for (const Criterion& crit : criteria) {
    CheckContext ctx;
    const auto start = std::chrono::steady_clock::now();
    try {
      crit.fn(ctx);
    } catch (const std::exception& e) {
      ctx.ok = false;
      ctx.detail << " EXCEPTION{" << e.what() << "}";
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (elapsed > crit.budget_seconds) {
      ctx.ok = false;
      ctx.detail << " OVER-BUDGET{" << elapsed << "s > "
                 << crit.budget_seconds << "s}";
    }
    if (!ctx.ok) ++failures;
    std::printf("[%s] criterion %d (%.2fs): %s -- %s\n",
                ctx.ok ? "PASS" : "FAIL", crit.id, elapsed, crit.name,
                ctx.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/8 criteria passed\n", 8 - failures);
  return failures;
}
