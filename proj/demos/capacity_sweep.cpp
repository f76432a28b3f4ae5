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

// Sweeps the binary symmetric transfer capacity and checks the numeric
// simplex maximizer against the closed form.

#include <cstdio>

#include "mimt/capacity.hpp"

int main() {
  std::printf("beta,closed_form,numeric,argmax_dev\n");
  for (int i = 1; i <= 19; ++i) {
    const double beta = 0.05 * i;
    const double closed = mimt::CapacityBsc(beta).value;
    const mimt::CapacityResult r =
        CapacityNumeric(mimt::TransferChannel::BinarySymmetric(beta));
    std::printf("%.2f,%.9f,%.9f,%.2e\n", beta, closed, r.value,
                std::abs(r.argmax[0] - 0.5));
  }
  return 0;
}
