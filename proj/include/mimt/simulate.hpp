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

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mimt/errors.hpp"
#include "mimt/measures.hpp"
#include "mimt/prob_vector.hpp"
#include "mimt/queue.hpp"
#include "mimt/random.hpp"

namespace mimt {

/// Interarrival-time model. All three kinds share the same mean
/// interarrival time 1/lambda: exponential with rate lambda, uniform on
/// (0, 2/lambda), normal with mean and standard deviation both 1/lambda
/// (resampled until positive).
enum class ArrivalKind { kExponential, kUniform, kNormal };

inline const char* ToString(ArrivalKind kind) {
  switch (kind) {
    case ArrivalKind::kExponential: return "exponential";
    case ArrivalKind::kUniform: return "uniform";
    case ArrivalKind::kNormal: return "normal";
  }
  return "?";
}

struct ArrivalModel {
  ArrivalKind kind = ArrivalKind::kExponential;
  double mean_interarrival = 1.0;
};

struct SimConfig {
  QueueSpec spec = QueueSpec::FromRho(1, 1, 0.9);
  ArrivalModel arrivals;
  std::uint64_t horizon_events = 1000000;  // arrival attempts per replication
  double warmup_fraction = 0.1;
  std::uint64_t seed = 1;
  int replications = 1;

  void Validate() const {
    if (!spec.buffer) {
      throw ValidationError("simulation needs a finite buffer");
    }
    const std::uint64_t n_states =
        static_cast<std::uint64_t>(spec.servers + *spec.buffer + 1);
    if (horizon_events < 10 * n_states) {
      throw ValidationError("horizon must cover at least 10 events per state");
    }
    if (!(warmup_fraction >= 0.0) || warmup_fraction >= 1.0) {
      throw ValidationError("warmup fraction must lie in [0, 1)");
    }
    if (replications < 1) {
      throw ValidationError("need at least one replication");
    }
    if (!(arrivals.mean_interarrival > 0.0)) {
      throw ValidationError("mean interarrival time must be > 0");
    }
  }
};

struct SimResult {
  ProbVector occupancy{1.0};  // time-averaged, post-warmup, pooled over reps
  std::uint64_t attempts = 0;
  std::uint64_t admissions = 0;
  std::uint64_t balks = 0;  // thinning rejections plus full-system blocks
  std::vector<std::vector<double>> replication_occupancy;
  std::vector<double> replication_time;
  std::uint64_t seed = 0;
  double total_time = 0.0;  // post-warmup simulated time, pooled
  std::uint64_t normal_resamples = 0;
  // Post-warmup, per state seen at the arrival instant.
  std::vector<std::uint64_t> state_attempts;
  std::vector<std::uint64_t> state_admissions;
};

namespace detail {

inline double DrawInterarrival(const ArrivalModel& m, RandomStream& rng,
                               std::uint64_t* resamples) {
  switch (m.kind) {
    case ArrivalKind::kExponential:
      return rng.Exponential(m.mean_interarrival);
    case ArrivalKind::kUniform:
      return rng.UniformOn(0.0, 2.0 * m.mean_interarrival);
    case ArrivalKind::kNormal: {
      // N(mean, mean^2) has mass at negative values; resample and record.
      double x = rng.Normal(m.mean_interarrival, m.mean_interarrival);
      while (x <= 0.0) {
        ++*resamples;
        x = rng.Normal(m.mean_interarrival, m.mean_interarrival);
      }
      return x;
    }
  }
  return m.mean_interarrival;
}

struct ReplicationTally {
  std::vector<double> durations;
  double time = 0.0;
  std::uint64_t attempts = 0;
  std::uint64_t admissions = 0;
  std::uint64_t balks = 0;
  std::uint64_t normal_resamples = 0;
  std::vector<std::uint64_t> state_attempts;
  std::vector<std::uint64_t> state_admissions;
};

/// One replication of the event-driven loop. Service is exponential, so the
/// pooled time-to-next-departure (rate min(j, s) * mu) can be redrawn after
/// every event; the renewal arrival stream keeps its absolute next-arrival
/// time across events.
inline ReplicationTally RunReplication(const SimConfig& cfg,
                                       std::uint64_t stream_seed) {
  const int s = cfg.spec.servers;
  const long cap = s + *cfg.spec.buffer;  // admission blocked at j == cap
  const std::size_t n_states = static_cast<std::size_t>(cap + 1);
  const double mu = cfg.spec.service_rate;

  ReplicationTally tally;
  tally.durations.assign(n_states, 0.0);
  tally.state_attempts.assign(n_states, 0);
  tally.state_admissions.assign(n_states, 0);

  RandomStream rng(stream_seed);
  const std::uint64_t warmup_attempts = static_cast<std::uint64_t>(
      cfg.warmup_fraction * static_cast<double>(cfg.horizon_events));

  long j = 0;
  double t = 0.0;
  double warmup_end = cfg.warmup_fraction == 0.0 ? 0.0 : -1.0;
  std::uint64_t attempts = 0;
  double next_arrival = DrawInterarrival(cfg.arrivals, rng,
                                         &tally.normal_resamples);

  auto account = [&](double from, double to, long state) {
    if (warmup_end < 0.0) return;  // still warming up
    const double lo = std::max(from, warmup_end);
    if (to > lo) tally.durations[static_cast<std::size_t>(state)] += to - lo;
  };

  while (attempts < cfg.horizon_events) {
    if (j > 0) {
      const double pooled_rate = static_cast<double>(std::min<long>(j, s)) * mu;
      const double dep_at = t + rng.Exponential(1.0 / pooled_rate);
      if (dep_at < next_arrival) {
        account(t, dep_at, j);
        t = dep_at;
        --j;
        continue;
      }
    }
    account(t, next_arrival, j);
    t = next_arrival;
    ++attempts;

    const bool measuring = attempts > warmup_attempts;
    if (measuring && warmup_end < 0.0) warmup_end = t;
    ++tally.attempts;
    if (measuring) ++tally.state_attempts[static_cast<std::size_t>(j)];
    const bool admitted =
        j < cap && rng.Uniform01() < 1.0 / (1.0 + static_cast<double>(j));
    if (admitted) {
      ++tally.admissions;
      if (measuring) ++tally.state_admissions[static_cast<std::size_t>(j)];
      ++j;
    } else {
      ++tally.balks;
    }
    next_arrival = t + DrawInterarrival(cfg.arrivals, rng,
                                        &tally.normal_resamples);
  }
  if (warmup_end < 0.0) warmup_end = t;  // degenerate: everything warmed away

  double total = 0.0;
  for (double d : tally.durations) total += d;
  tally.time = total;
  return tally;
}

inline void ParallelFor(std::size_t count, int threads,
                        const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  for (std::thread& th : pool) th.join();
}

}  // namespace detail

/// Event-driven simulation of the thinned M/M/s/k queue. Occupancy is the
/// time-weighted state distribution after the warmup fraction of arrival
/// attempts, pooled over replications. Fully deterministic given the seed.
inline SimResult Simulate(const SimConfig& cfg, int threads = 1) {
  cfg.Validate();
  const std::size_t n_states =
      static_cast<std::size_t>(cfg.spec.servers + *cfg.spec.buffer + 1);
  const std::size_t reps = static_cast<std::size_t>(cfg.replications);

  std::vector<detail::ReplicationTally> tallies(reps);
  detail::ParallelFor(reps, threads, [&](std::size_t r) {
    tallies[r] = detail::RunReplication(
        cfg, HashCombine(cfg.seed, static_cast<std::uint64_t>(r)));
  });

  SimResult out;
  out.seed = cfg.seed;
  std::vector<double> pooled(n_states, 0.0);
  out.state_attempts.assign(n_states, 0);
  out.state_admissions.assign(n_states, 0);
  for (const detail::ReplicationTally& tally : tallies) {
    for (std::size_t i = 0; i < n_states; ++i) {
      pooled[i] += tally.durations[i];
      out.state_attempts[i] += tally.state_attempts[i];
      out.state_admissions[i] += tally.state_admissions[i];
    }
    out.attempts += tally.attempts;
    out.admissions += tally.admissions;
    out.balks += tally.balks;
    out.normal_resamples += tally.normal_resamples;
    out.total_time += tally.time;
    out.replication_time.push_back(tally.time);
    std::vector<double> occ = tally.durations;
    for (double& d : occ) d = tally.time > 0.0 ? d / tally.time : 0.0;
    out.replication_occupancy.push_back(std::move(occ));
  }
  if (!(out.total_time > 0.0)) {
    throw ValidationError(
        "no post-warmup time was observed; lower warmup_fraction or raise "
        "horizon_events");
  }
  out.occupancy = ProbVector::Renormalized(std::move(pooled));
  return out;
}

/// Empirical divergences between two simulated occupancies (the larger
/// state space second). KL gets add-1/(2 * total-time) smoothing on empty
/// states; MITM needs none. Standard errors come from per-replication
/// pairs when both results carry the same replication count >= 2.
struct EmpiricalDivergences {
  double d_i_sim = 0.0;
  double d_kl_sim = 0.0;
  double d_i_se = std::numeric_limits<double>::quiet_NaN();
  double d_kl_se = std::numeric_limits<double>::quiet_NaN();
  bool kl_smoothed = false;
  bool kl_undefined = false;
};

namespace detail {

/// Add-delta smoothing of empty states, delta = 1/(2 * total_time).
inline std::vector<double> SmoothEmpty(const std::vector<double>& occ,
                                       double total_time, bool* smoothed) {
  std::vector<double> p = occ;
  const double delta = total_time > 0.0 ? 0.5 / total_time : 0.0;
  bool any = false;
  for (double& v : p) {
    if (v == 0.0) {
      v = delta;
      any = true;
    }
  }
  if (any && smoothed != nullptr) *smoothed = true;
  double total = 0.0;
  for (double v : p) total += v;
  if (total > 0.0) {
    for (double& v : p) v /= total;
  }
  return p;
}

inline double MimOf(const std::vector<double>& p) {
  double acc = 0.0;
  for (double v : p) acc += v * std::exp(-v);
  return acc;
}

/// KL over raw vectors; returns NaN when absolutely continuity fails.
inline double KlOrNan(const std::vector<double>& p,
                      const std::vector<double>& q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc;
}

}  // namespace detail

inline EmpiricalDivergences EmpiricalDivergencesOf(const SimResult& res_a,
                                                   const SimResult& res_b) {
  if (res_b.occupancy.size() < res_a.occupancy.size()) {
    throw ShapeError("second result must cover the larger state space");
  }
  const std::size_t n = res_b.occupancy.size();
  std::vector<double> a = res_a.occupancy.values();
  a.resize(n, 0.0);
  const std::vector<double>& b = res_b.occupancy.values();

  EmpiricalDivergences out;
  out.d_i_sim = detail::MimOf(b) - detail::MimOf(a);

  const std::vector<double> a_s =
      detail::SmoothEmpty(a, res_a.total_time, &out.kl_smoothed);
  const std::vector<double> b_s =
      detail::SmoothEmpty(b, res_b.total_time, &out.kl_smoothed);
  out.d_kl_sim = detail::KlOrNan(a_s, b_s);
  if (std::isnan(out.d_kl_sim)) out.kl_undefined = true;

  const std::size_t reps = res_a.replication_occupancy.size();
  if (reps >= 2 && res_b.replication_occupancy.size() == reps) {
    std::vector<double> di(reps), dkl(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      std::vector<double> ar = res_a.replication_occupancy[r];
      ar.resize(n, 0.0);
      const std::vector<double>& br = res_b.replication_occupancy[r];
      di[r] = detail::MimOf(br) - detail::MimOf(ar);
      const std::vector<double> ar_s =
          detail::SmoothEmpty(ar, res_a.replication_time[r], nullptr);
      const std::vector<double> br_s =
          detail::SmoothEmpty(br, res_b.replication_time[r], nullptr);
      dkl[r] = detail::KlOrNan(ar_s, br_s);
    }
    auto se = [reps](const std::vector<double>& v) {
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(reps);
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      var /= static_cast<double>(reps - 1);
      return std::sqrt(var / static_cast<double>(reps));
    };
    out.d_i_se = se(di);
    out.d_kl_se = se(dkl);
  }
  return out;
}

enum class SweepMode { kAdjacent, kVsInfinite };

struct SweepRow {
  long k = 0;
  ArrivalKind model = ArrivalKind::kExponential;
  double d_i_sim = 0.0;
  double d_i_ana = 0.0;
  double d_kl_sim = 0.0;
  double d_kl_ana = 0.0;
  double tv_to_analytic = 0.0;
  std::uint64_t events = 0;
  std::uint64_t seed = 0;
  double d_i_se = std::numeric_limits<double>::quiet_NaN();
  double d_kl_se = std::numeric_limits<double>::quiet_NaN();
};

/// Sweeps buffer sizes k_lo..k_hi for the three arrival models, simulating
/// the (k, k+1) pair (or k against a large-k stand-in for the infinite
/// buffer) and tabulating empirical next to analytic divergences. Cell
/// seeds derive from the base seed and (k, model), so the table is
/// reproducible and cells are independent.
inline std::vector<SweepRow> SweepK(const SimConfig& base, long k_lo,
                                    long k_hi, SweepMode mode,
                                    int threads = 1) {
  if (k_lo < 0 || k_hi < k_lo) throw ParameterError("bad buffer range");
  base.Validate();
  static constexpr ArrivalKind kModels[] = {
      ArrivalKind::kExponential, ArrivalKind::kUniform, ArrivalKind::kNormal};

  long k_proxy = 0;
  if (mode == SweepMode::kVsInfinite) {
    // Simulation cannot hold an infinite buffer; stand in the smallest k
    // whose exact divergence from the infinite case is below 1e-10.
    k_proxy = MinBufferSearch(base.spec, 1e-10, QueueMeasure::kMitm);
    if (k_proxy <= k_hi) k_proxy = k_hi + 1;
  }

  struct Cell {
    long k;
    int model_index;
  };
  std::vector<Cell> cells;
  for (long k = k_lo; k <= k_hi; ++k) {
    for (int m = 0; m < 3; ++m) cells.push_back(Cell{k, m});
  }
  std::vector<SweepRow> rows(cells.size());

  detail::ParallelFor(cells.size(), threads, [&](std::size_t ci) {
    const Cell cell = cells[ci];
    const ArrivalKind kind = kModels[cell.model_index];
    const std::uint64_t cell_seed =
        base.seed ^ HashCombine(static_cast<std::uint64_t>(cell.k),
                                static_cast<std::uint64_t>(cell.model_index));

    SimConfig cfg_a = base;
    cfg_a.spec = base.spec.WithBuffer(cell.k);
    cfg_a.arrivals = ArrivalModel{kind, 1.0 / base.spec.arrival_rate};
    cfg_a.seed = cell_seed;

    SimConfig cfg_b = cfg_a;
    cfg_b.spec = base.spec.WithBuffer(
        mode == SweepMode::kAdjacent ? cell.k + 1 : k_proxy);
    cfg_b.seed = HashCombine(cell_seed, 0xb);

    const SimResult res_a = Simulate(cfg_a);
    const SimResult res_b = Simulate(cfg_b);
    const EmpiricalDivergences emp = EmpiricalDivergencesOf(res_a, res_b);

    SweepRow row;
    row.k = cell.k;
    row.model = kind;
    row.d_i_sim = emp.d_i_sim;
    row.d_kl_sim = emp.d_kl_sim;
    row.d_i_se = emp.d_i_se;
    row.d_kl_se = emp.d_kl_se;
    if (mode == SweepMode::kAdjacent) {
      row.d_i_ana = MitmAdjacent(base.spec, cell.k).exact;
      row.d_kl_ana = KlAdjacent(base.spec, cell.k).exact;
    } else {
      row.d_i_ana = MitmVsInfinite(base.spec, cell.k).exact;
      row.d_kl_ana = KlVsInfinite(base.spec, cell.k).exact;
    }
    row.tv_to_analytic =
        0.5 * L1Distance(res_a.occupancy,
                         SteadyState(base.spec.WithBuffer(cell.k)).dist);
    row.events = base.horizon_events;
    row.seed = cell_seed;
    rows[ci] = row;
  });
  return rows;
}

}  // namespace mimt
