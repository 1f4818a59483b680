// Copyright 2026 The PHADQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "phadq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "phadq/solver.hpp"

namespace phadq {

double sdr(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) {
    throw std::invalid_argument("sdr: length mismatch");
  }
  double signal = 0.0;
  double residual = 0.0;
  for (std::size_t l = 0; l < reference.size(); ++l) {
    signal += reference[l] * reference[l];
    double e = reference[l] - estimate[l];
    residual += e * e;
  }
  if (signal == 0.0) throw std::invalid_argument("sdr: all-zero reference");
  if (residual == 0.0) return kSdrCapDb;
  return std::min(kSdrCapDb, 10.0 * std::log10(signal / residual));
}

BestIterate best_iterate(const SolverTrace& trace) {
  BestIterate best;
  bool found = false;
  for (const TraceRecord& r : trace.records) {
    if (std::isnan(r.sdr)) continue;
    if (!found || r.sdr > best.sdr_db) {
      best = {r.iter, r.sdr};
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("best_iterate: trace has no SDR values");
  return best;
}

EvalResult make_eval(double sdr_db, double sdr_input_db, int wordlength,
                     std::string method, int best_iter) {
  EvalResult r;
  r.sdr_db = sdr_db;
  r.sdr_input_db = sdr_input_db;
  r.delta_db = sdr_db - sdr_input_db;
  r.wordlength = wordlength;
  r.method = std::move(method);
  r.best_iter = best_iter;
  return r;
}

}  // namespace phadq
