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

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "mimt/queue.hpp"
#include "mimt/simulate.hpp"

namespace mimt {

inline std::string FormatDouble(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

/// Typo-ledger CSV: one row per printed closed form per grid point.
inline void WriteLedgerCsv(const std::vector<LedgerRow>& rows,
                           std::ostream& out) {
  out << "equation_id,s,k,rho,exact,printed,abs_gap\n";
  for (const LedgerRow& row : rows) {
    out << row.equation_id << ',' << row.s << ',' << row.k << ','
        << FormatDouble(row.rho) << ',' << FormatDouble(row.exact) << ','
        << FormatDouble(row.printed) << ',' << FormatDouble(row.abs_gap)
        << '\n';
  }
}

/// Sweep-table CSV with the simulator's interface columns.
inline void WriteSweepCsv(const std::vector<SweepRow>& rows,
                          std::ostream& out) {
  out << "k,model,d_i_sim,d_i_ana,d_kl_sim,d_kl_ana,tv_to_analytic,events,"
         "seed\n";
  for (const SweepRow& row : rows) {
    out << row.k << ',' << ToString(row.model) << ','
        << FormatDouble(row.d_i_sim) << ',' << FormatDouble(row.d_i_ana) << ','
        << FormatDouble(row.d_kl_sim) << ',' << FormatDouble(row.d_kl_ana)
        << ',' << FormatDouble(row.tv_to_analytic) << ',' << row.events << ','
        << row.seed << '\n';
  }
}

}  // namespace mimt
