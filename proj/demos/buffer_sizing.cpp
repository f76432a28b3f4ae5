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

// Picks the smallest buffer size whose steady state is within a tolerance
// of the infinite-buffer one, for both divergence measures.

#include <cstdio>

#include "mimt/queue.hpp"

int main() {
  const mimt::QueueSpec spec = mimt::QueueSpec::FromRho(1, 0, 0.9);
  std::printf("epsilon,k_star_mitm,k_star_kl\n");
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    const long k_mitm = MinBufferSearch(spec, eps, mimt::QueueMeasure::kMitm);
    const long k_kl = MinBufferSearch(spec, eps, mimt::QueueMeasure::kKl);
    std::printf("%.0e,%ld,%ld\n", eps, k_mitm, k_kl);
  }
  return 0;
}
