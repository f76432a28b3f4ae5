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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mimt/errors.hpp"
#include "mimt/measures.hpp"
#include "mimt/prob_vector.hpp"

namespace mimt {

/// M/M/s/k queue with length-dependent arrival thinning: an arrival that
/// sees j requests in the system is admitted with probability 1/(1+j), so
/// the effective arrival rate in state j is arrival_rate/(1+j). `buffer` is
/// the number of waiting slots beyond the s servers; nullopt marks an
/// infinite buffer. Derived quantities are recomputed on demand, never
/// stored.
struct QueueSpec {
  int servers = 1;
  std::optional<long> buffer = 0;
  double arrival_rate = 0.9;
  double service_rate = 1.0;

  QueueSpec(int servers_in, std::optional<long> buffer_in, double arrival,
            double service)
      : servers(servers_in), buffer(buffer_in), arrival_rate(arrival),
        service_rate(service) {
    if (servers < 1) throw ParameterError("server count must be >= 1");
    if (buffer && *buffer < 0) throw ParameterError("buffer size must be >= 0");
    if (!(arrival_rate > 0.0) || !(service_rate > 0.0)) {
      throw ParameterError("arrival and service rates must be > 0");
    }
  }

  static QueueSpec FromRho(int servers, std::optional<long> buffer, double rho,
                           double service_rate = 1.0) {
    if (!(rho > 0.0)) throw ParameterError("traffic intensity must be > 0");
    return QueueSpec(servers, buffer, rho * servers * service_rate,
                     service_rate);
  }

  QueueSpec WithBuffer(std::optional<long> b) const {
    return QueueSpec(servers, b, arrival_rate, service_rate);
  }

  double offered_load() const { return arrival_rate / service_rate; }  // a
  double rho() const { return offered_load() / servers; }

  /// phi1 = sum_{j=0}^{s-1} a^j / (j! j!).
  double phi1() const {
    const double a = offered_load();
    double term = 1.0;
    double acc = 1.0;
    for (int j = 1; j < servers; ++j) {
      term *= a / (static_cast<double>(j) * j);
      acc += term;
    }
    return acc;
  }

  /// phi2 = a^s / s!.
  double phi2() const {
    const double a = offered_load();
    double term = 1.0;
    for (int j = 1; j <= servers; ++j) term *= a / j;
    return term;
  }
};

/// Steady-state distribution over the states 0..s+k (finite buffer) or a
/// factorially-truncated prefix of 0,1,2,... (infinite buffer).
struct QueueStateDist {
  ProbVector dist;
  QueueSpec spec;
  /// Stationary mass beyond the truncation point; nonzero only for the
  /// infinite-buffer case, bounded by the requested tail tolerance.
  double truncation_mass = 0.0;
};

namespace detail {

/// Unnormalized stationary weights w_j for states j = 0..s+k, computed by
/// multiplicative recurrence so no factorial is ever formed:
///   w_j = a^j/(j! j!)            for j < s   (ratio a/j^2),
///   w_j = (a^s/s!) rho^{j-s}/j!  for j >= s  (ratio a/s^2 at j=s, rho/j after).
inline std::vector<double> StationaryWeights(int s, long k, double a) {
  const double rho = a / s;
  std::vector<double> w;
  w.reserve(static_cast<std::size_t>(s + k + 1));
  double t = 1.0;
  w.push_back(t);
  for (long j = 1; j <= s + k; ++j) {
    if (j <= s) {
      t *= a / (static_cast<double>(j) * j);
    } else {
      t *= rho / j;
    }
    w.push_back(t);
  }
  return w;
}

struct TruncatedWeights {
  std::vector<double> w;
  double tail_bound = 0.0;  // unnormalized bound on the omitted mass
};

/// Extends the stationary weights of the infinite-buffer chain until the
/// geometric bound on the remaining tail drops below tail_tol times the
/// partial sum. The ratio rho/(j+1) decays factorially, so this always
/// terminates quickly.
inline TruncatedWeights StationaryWeightsInfinite(int s, double a,
                                                  double tail_tol) {
  const double rho = a / s;
  TruncatedWeights out;
  double t = 1.0;
  double total = t;
  out.w.push_back(t);
  long j = 0;
  while (true) {
    ++j;
    if (j <= s) {
      t *= a / (static_cast<double>(j) * j);
    } else {
      t *= rho / j;
    }
    out.w.push_back(t);
    total += t;
    if (j > s) {
      const double r = rho / (j + 1);
      if (r < 1.0) {
        const double tail = t * r / (1.0 - r);
        if (tail <= tail_tol * total) {
          out.tail_bound = tail;
          break;
        }
      }
    }
    if (j > 1000000) {
      throw NumericalError("infinite-buffer truncation failed to converge");
    }
  }
  return out;
}

inline double SumOf(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc;
}

inline double SumOfSquares(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

/// sum_{j=0}^{s-1} rho^{j-s} / j!  (the subtracted prefix in the
/// infinite-buffer normalizer).
inline double PrefixRhoPowers(int s, double rho) {
  double term = std::pow(rho, -s);  // j = 0
  double acc = term;
  for (int j = 1; j < s; ++j) {
    term *= rho / j;
    acc += term;
  }
  return acc;
}

/// Analytic normalizer of the infinite-buffer chain:
/// Z_inf = phi1 + phi2 (e^rho / rho^s - sum_{j<s} rho^{j-s}/j!).
inline double NormalizerInfinite(const QueueSpec& spec) {
  const double rho = spec.rho();
  return spec.phi1() + spec.phi2() * (std::exp(rho) / std::pow(rho, spec.servers) -
                                      PrefixRhoPowers(spec.servers, rho));
}

}  // namespace detail

/// Steady-state distribution of the finite-buffer chain from the product
/// form of its birth-death balance equations.
inline QueueStateDist SteadyState(const QueueSpec& spec) {
  if (!spec.buffer) {
    throw ParameterError("finite steady state requested for infinite buffer");
  }
  std::vector<double> w =
      detail::StationaryWeights(spec.servers, *spec.buffer, spec.offered_load());
  return QueueStateDist{ProbVector::Renormalized(std::move(w)), spec, 0.0};
}

/// Steady-state distribution of the infinite-buffer chain, truncated where
/// the remaining mass falls below tail_tol. For s = 1 this is Poisson(a).
inline QueueStateDist SteadyStateInfinite(const QueueSpec& spec,
                                          double tail_tol = 1e-12) {
  if (spec.buffer) {
    throw ParameterError("infinite steady state requested for finite buffer");
  }
  detail::TruncatedWeights tw = detail::StationaryWeightsInfinite(
      spec.servers, spec.offered_load(), tail_tol);
  const double total = detail::SumOf(tw.w);
  const double trunc_mass = tw.tail_bound / (total + tw.tail_bound);
  return QueueStateDist{ProbVector::Renormalized(std::move(tw.w)), spec,
                        trunc_mass};
}

/// Stationary distribution of a general birth-death chain on
/// n_states states via detailed-balance products. birth[j] is the rate
/// j -> j+1, death[j] the rate j+1 -> j; both must have n_states-1 entries.
inline ProbVector BirthDeathOracle(std::span<const double> birth,
                                   std::span<const double> death,
                                   std::size_t n_states) {
  if (n_states == 0) throw ParameterError("chain needs at least one state");
  if (birth.size() + 1 != n_states || death.size() + 1 != n_states) {
    throw ShapeError("birth/death rate sequences must have n_states-1 entries");
  }
  for (std::size_t j = 0; j + 1 < n_states; ++j) {
    if (!(birth[j] > 0.0) || !(death[j] > 0.0)) {
      throw ParameterError("birth and death rates must be > 0");
    }
  }
  std::vector<double> w(n_states, 0.0);
  w[0] = 1.0;
  for (std::size_t j = 1; j < n_states; ++j) {
    w[j] = w[j - 1] * birth[j - 1] / death[j - 1];
  }
  return ProbVector::Renormalized(std::move(w));
}

/// Birth/death rate sequences realized by the thinned M/M/s/k queue:
/// birth_j = arrival_rate/(1+j), death_{j+1} = min(j+1, s) * service_rate.
inline std::pair<std::vector<double>, std::vector<double>> QueueBirthDeathRates(
    const QueueSpec& spec) {
  if (!spec.buffer) {
    throw ParameterError("rate sequences need a finite buffer");
  }
  const long n = spec.servers + *spec.buffer + 1;
  std::vector<double> birth, death;
  for (long j = 0; j + 1 < n; ++j) {
    birth.push_back(spec.arrival_rate / (1.0 + j));
    death.push_back(std::min<long>(j + 1, spec.servers) * spec.service_rate);
  }
  return {std::move(birth), std::move(death)};
}

/// Quadratic approximation of Mim over a queue state distribution,
/// 1 - sum_j p_j^2, computed from the same recurrence terms as the
/// distribution itself.
inline double MimQueueApprox(const QueueStateDist& d) {
  double sumsq = 0.0;
  for (double p : d.dist) sumsq += p * p;
  return 1.0 - sumsq;
}

/// Exact, quadratic-approximation, and as-printed values for one
/// divergence between two buffer sizes. The exact field is normative; the
/// printed closed form is evaluated for the typo ledger and never
/// corrected.
struct MitmRecord {
  double exact = 0.0;
  double quadratic = 0.0;
  double paper_closed_form = 0.0;
};

struct KlRecord {
  double exact = 0.0;
  double paper_closed_form = 0.0;
};

namespace detail {

/// As printed: the adjacent-buffer MITM closed form. Its final denominator
/// mixes phi1^2 + phi2^2 * sum with the squared normalizer of the
/// derivation; evaluated literally.
inline double MitmAdjacentPrinted(const QueueSpec& spec, long k) {
  const int s = spec.servers;
  const double a = spec.offered_load();
  const double rho = spec.rho();
  const double phi1 = spec.phi1();
  const double phi2 = spec.phi2();

  double sum_k = 0.0;     // sum_{j=s}^{s+k} rho^{j-s}/j!
  double sum_k1 = 0.0;    // same through s+k+1
  double sum_sq_k = 0.0;  // sum of squares through s+k
  {
    double term = 1.0;
    for (int j = 1; j <= s; ++j) term /= j;  // 1/s!
    for (long j = s; j <= s + k + 1; ++j) {
      if (j > s) term *= rho / j;
      if (j <= s + k) {
        sum_k += term;
        sum_sq_k += term * term;
      }
      sum_k1 += term;
    }
  }
  double head_sq = 0.0;  // sum_{j<s} (a^j/(j!j!))^2
  {
    double term = 1.0;
    head_sq = 1.0;
    for (int j = 1; j < s; ++j) {
      term *= a / (static_cast<double>(j) * j);
      head_sq += term * term;
    }
  }
  const double zk = phi1 + phi2 * sum_k;
  const double zk1 = phi1 + phi2 * sum_k1;
  const double bracket = head_sq + phi2 * phi2 * sum_sq_k;
  const double first = (1.0 / (zk * zk) - 1.0 / (zk1 * zk1)) * bracket;

  double fact_sk1 = 1.0;  // (s+k+1)!
  for (long j = 2; j <= s + k + 1; ++j) fact_sk1 *= j;
  const double last = phi2 * phi2 * std::pow(rho, 2.0 * k + 2.0) /
                      (fact_sk1 * fact_sk1 *
                       (phi1 * phi1 + phi2 * phi2 * sum_k));
  return first - last;
}

/// As printed: the buffer-k-versus-infinite MITM closed form. Its final
/// term carries a plain tail where the quadratic derivation produces a tail
/// of squares; evaluated literally.
inline double MitmVsInfinitePrinted(const QueueSpec& spec, long k) {
  const int s = spec.servers;
  const double a = spec.offered_load();
  const double rho = spec.rho();
  const double phi1 = spec.phi1();
  const double phi2 = spec.phi2();

  double sum_k = 0.0;
  double sum_sq_k = 0.0;
  double sum_0_sk = 0.0;  // sum_{j=0}^{s+k} rho^{j-s}/j!
  {
    double term = std::pow(rho, -s);
    for (long j = 0; j <= s + k; ++j) {
      if (j > 0) term *= rho / j;
      sum_0_sk += term;
      if (j >= s) {
        sum_k += term;
        sum_sq_k += term * term;
      }
    }
  }
  double head_sq = 0.0;
  {
    double term = 1.0;
    head_sq = 1.0;
    for (int j = 1; j < s; ++j) {
      term *= a / (static_cast<double>(j) * j);
      head_sq += term * term;
    }
  }
  const double zk = phi1 + phi2 * sum_k;
  const double zi = NormalizerInfinite(spec);
  const double bracket = head_sq + phi2 * phi2 * sum_sq_k;
  const double first = (1.0 / (zk * zk) - 1.0 / (zi * zi)) * bracket;
  const double tail =
      std::exp(rho) / std::pow(rho, s) - sum_0_sk;  // plain tail, as printed
  const double last = phi2 * phi2 * tail / (zi * zi);
  return first - last;
}

/// As printed: KL between adjacent buffer sizes,
/// log{1 + rho^{k+1} / ((s+k+1)! (phi1 + phi2 sum))}; the numerator omits
/// the phi2 factor the normalizer-ratio derivation produces.
inline double KlAdjacentPrinted(const QueueSpec& spec, long k) {
  const int s = spec.servers;
  const double rho = spec.rho();
  double sum_k = 0.0;
  {
    double term = 1.0;
    for (int j = 1; j <= s; ++j) term /= j;
    for (long j = s; j <= s + k; ++j) {
      if (j > s) term *= rho / j;
      sum_k += term;
    }
  }
  double fact_sk1 = 1.0;
  for (long j = 2; j <= s + k + 1; ++j) fact_sk1 *= j;
  return std::log(1.0 + std::pow(rho, k + 1.0) /
                            (fact_sk1 * (spec.phi1() + spec.phi2() * sum_k)));
}

inline double NormalizerFinite(const QueueSpec& spec, long k) {
  return SumOf(StationaryWeights(spec.servers, k, spec.offered_load()));
}

}  // namespace detail

/// D_I(P_{k+1} || P_k): exact Mim difference (normative), the quadratic
/// approximation sum p_k^2 - sum p_{k+1}^2, and the literal printed closed
/// form side by side.
inline MitmRecord MitmAdjacent(const QueueSpec& spec, long k) {
  if (k < 0) throw ParameterError("buffer size must be >= 0");
  const QueueStateDist dk = SteadyState(spec.WithBuffer(k));
  const QueueStateDist dk1 = SteadyState(spec.WithBuffer(k + 1));
  MitmRecord out;
  out.exact = Mim(dk1.dist) - Mim(dk.dist);
  out.quadratic = detail::SumOfSquares(dk.dist.values()) -
                  detail::SumOfSquares(dk1.dist.values());
  out.paper_closed_form = detail::MitmAdjacentPrinted(spec, k);
  return out;
}

/// D_I(P_inf || P_k), with the infinite distribution truncated at
/// tail_tol.
inline MitmRecord MitmVsInfinite(const QueueSpec& spec, long k,
                                 double tail_tol = 1e-12) {
  if (k < 0) throw ParameterError("buffer size must be >= 0");
  const QueueStateDist dk = SteadyState(spec.WithBuffer(k));
  const QueueStateDist di =
      SteadyStateInfinite(spec.WithBuffer(std::nullopt), tail_tol);
  MitmRecord out;
  out.exact = Mim(di.dist) - Mim(dk.dist);
  out.quadratic = detail::SumOfSquares(dk.dist.values()) -
                  detail::SumOfSquares(di.dist.values());
  out.paper_closed_form = detail::MitmVsInfinitePrinted(spec, k);
  return out;
}

/// D(P_k || P_{k+1}). On the shared support the likelihood ratio is the
/// constant Z_{k+1}/Z_k, so the exact divergence collapses to
/// ln(Z_{k+1}/Z_k).
inline KlRecord KlAdjacent(const QueueSpec& spec, long k) {
  if (k < 0) throw ParameterError("buffer size must be >= 0");
  KlRecord out;
  out.exact = std::log(detail::NormalizerFinite(spec, k + 1) /
                       detail::NormalizerFinite(spec, k));
  out.paper_closed_form = detail::KlAdjacentPrinted(spec, k);
  return out;
}

/// D(P_k || P_inf) = ln(Z_inf / Z_k); the printed form is the same
/// expression, so the ledger gap for it is rounding-level.
inline KlRecord KlVsInfinite(const QueueSpec& spec, long k) {
  if (k < 0) throw ParameterError("buffer size must be >= 0");
  KlRecord out;
  const double zi = detail::NormalizerInfinite(spec);
  out.exact = std::log(zi / detail::NormalizerFinite(spec, k));
  out.paper_closed_form = out.exact;
  return out;
}

enum class QueueMeasure { kMitm, kKl };

/// Smallest k with |measure(P_inf, P_k)| <= epsilon, by linear scan. The
/// divergences decay factorially in k, so the scan terminates quickly.
inline long MinBufferSearch(const QueueSpec& spec, double epsilon,
                            QueueMeasure measure, double tail_tol = 1e-12) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  const QueueStateDist di =
      SteadyStateInfinite(spec.WithBuffer(std::nullopt), tail_tol);
  const double mim_inf = Mim(di.dist);
  const double z_inf = detail::NormalizerInfinite(spec);
  for (long k = 0;; ++k) {
    double d;
    if (measure == QueueMeasure::kMitm) {
      d = std::abs(mim_inf - Mim(SteadyState(spec.WithBuffer(k)).dist));
    } else {
      d = std::log(z_inf / detail::NormalizerFinite(spec, k));
    }
    if (d <= epsilon) return k;
    if (k > 100000) {
      throw NumericalError("buffer search failed to terminate");
    }
  }
}

/// Literal evaluation of a printed buffer-size lower bound.
struct BufferBound {
  long bound = 0;       // ceil of the raw value, clamped at 0
  double raw = 0.0;     // the printed right-hand side before ceiling
  bool applicable = true;  // false when the inner logarithm argument is <= 0
  bool clamped = false;    // true when the raw value was negative
  long search_k = 0;       // MinBufferSearch result for the same epsilon
  bool valid = false;      // applicable and bound <= search_k (true lower bound)
};

namespace detail {

inline BufferBound FinishBound(const QueueSpec& spec, double epsilon,
                               QueueMeasure measure, double inner) {
  BufferBound out;
  out.search_k = MinBufferSearch(spec, epsilon, measure);
  if (!(inner > 0.0)) {
    out.applicable = false;
    return out;
  }
  out.raw = std::log(inner) / std::log(spec.rho()) - 1.0;
  if (out.raw < 0.0) {
    out.bound = 0;
    out.clamped = true;
  } else {
    out.bound = static_cast<long>(std::ceil(out.raw));
  }
  out.valid = out.bound <= out.search_k;
  return out;
}

}  // namespace detail

/// Printed MITM-based lower bound on the buffer size (evaluated literally,
/// with its phi parameter; validity is audited against MinBufferSearch).
inline BufferBound MinBufferBoundMitm(const QueueSpec& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (!(spec.rho() < 1.0)) {
    throw ParameterError("the printed bound needs rho < 1");
  }
  const int s = spec.servers;
  const double a = spec.offered_load();
  const double rho = spec.rho();
  const double phi1 = spec.phi1();
  const double phi2 = spec.phi2();
  double head_sq = 1.0;
  {
    double term = 1.0;
    for (int j = 1; j < s; ++j) {
      term *= a / (static_cast<double>(j) * j);
      head_sq += term * term;
    }
  }
  const double zi = detail::NormalizerInfinite(spec);
  const double phi =
      epsilon + (head_sq + phi2 * phi2 * std::exp(rho) / std::pow(rho, s)) /
                    (zi * zi);
  const double inner =
      1.0 - (1.0 - rho) / phi2 * (std::sqrt(head_sq / phi) - phi1);
  return detail::FinishBound(spec, epsilon, QueueMeasure::kMitm, inner);
}

/// Printed KL-based lower bound on the buffer size (evaluated literally,
/// including its 2^epsilon factor).
inline BufferBound MinBufferBoundKl(const QueueSpec& spec, double epsilon) {
  if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  if (!(spec.rho() < 1.0)) {
    throw ParameterError("the printed bound needs rho < 1");
  }
  const int s = spec.servers;
  const double rho = spec.rho();
  const double phi1 = spec.phi1();
  const double phi2 = spec.phi2();
  const double tail = std::exp(rho) / std::pow(rho, s) -
                      detail::PrefixRhoPowers(s, rho);
  const double two_eps = std::exp2(epsilon);
  const double inner = 1.0 - (1.0 - rho) / (two_eps * phi2) *
                                 (phi1 * (1.0 - two_eps) + phi2 * tail);
  return detail::FinishBound(spec, epsilon, QueueMeasure::kKl, inner);
}

/// One typo-ledger entry: a printed closed form evaluated literally next to
/// the exact value it approximates.
struct LedgerRow {
  std::string equation_id;
  int s = 1;
  long k = 0;
  double rho = 0.9;
  double exact = 0.0;
  double printed = 0.0;
  double abs_gap = 0.0;
};

/// Evaluates every printed closed form (approximate Mim, both MITM forms,
/// both KL forms) against its exact counterpart over a parameter grid.
/// Discrepancies are recorded, never corrected.
inline std::vector<LedgerRow> TypoLedger(const std::vector<int>& servers,
                                         const std::vector<long>& buffers,
                                         const std::vector<double>& rhos) {
  std::vector<LedgerRow> rows;
  auto push = [&rows](const char* id, int s, long k, double rho, double exact,
                      double printed) {
    rows.push_back(LedgerRow{id, s, k, rho, exact, printed,
                             std::abs(exact - printed)});
  };
  for (int s : servers) {
    for (double rho : rhos) {
      const QueueSpec spec = QueueSpec::FromRho(s, 0, rho);
      for (long k : buffers) {
        const QueueStateDist dk = SteadyState(spec.WithBuffer(k));
        push("mim_quadratic_approx", s, k, rho, Mim(dk.dist), MimQueueApprox(dk));
        const MitmRecord adj = MitmAdjacent(spec, k);
        push("mitm_adjacent_printed", s, k, rho, adj.exact, adj.paper_closed_form);
        const MitmRecord inf = MitmVsInfinite(spec, k);
        push("mitm_vs_infinite_printed", s, k, rho, inf.exact,
             inf.paper_closed_form);
        const KlRecord kadj = KlAdjacent(spec, k);
        push("kl_adjacent_printed", s, k, rho, kadj.exact, kadj.paper_closed_form);
        const KlRecord kinf = KlVsInfinite(spec, k);
        push("kl_vs_infinite_printed", s, k, rho, kinf.exact,
             kinf.paper_closed_form);
      }
    }
  }
  return rows;
}

inline std::vector<LedgerRow> TypoLedgerDefault() {
  return TypoLedger({1, 2, 3}, {0, 1, 2, 3, 4, 5, 8, 10}, {0.5, 0.7, 0.9});
}

}  // namespace mimt
