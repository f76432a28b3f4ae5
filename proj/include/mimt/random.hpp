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
#include <cstdint>
#include <random>

namespace mimt {

/// splitmix64 finalizer; used for seed derivation and cell hashing so
/// derived streams are decorrelated and platform-independent.
inline constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t HashCombine(std::uint64_t seed,
                                           std::uint64_t value) {
  return SplitMix64(seed ^ SplitMix64(value));
}

/// Deterministic random stream with explicit inverse-transform draws, so
/// results do not depend on the standard library's distribution
/// implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double Uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Exponential(double mean) {
    return -mean * std::log1p(-Uniform01());
  }

  double UniformOn(double lo, double hi) {
    return lo + (hi - lo) * Uniform01();
  }

  /// Box-Muller without caching the paired value, so every call consumes a
  /// fixed number of engine steps.
  double Normal(double mean, double sd) {
    const double u1 = 1.0 - Uniform01();  // (0, 1]
    const double u2 = Uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mimt
