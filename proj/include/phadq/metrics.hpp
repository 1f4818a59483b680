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

#pragma once

#include <span>
#include <string>

namespace phadq {

struct SolverTrace;

/// Returned by sdr() when the residual is exactly zero.
inline constexpr double kSdrCapDb = 300.0;

/// 20 log10(||ref|| / ||ref - est||) in dB, over the whole signal.
double sdr(std::span<const double> reference, std::span<const double> estimate);

struct BestIterate {
  int iter = 0;
  double sdr_db = 0.0;
};

/// Recorded iteration with the highest SDR; ties go to the earliest.
/// Throws std::invalid_argument when the trace carries no SDR values.
BestIterate best_iterate(const SolverTrace& trace);

struct EvalResult {
  double sdr_db = 0.0;
  double sdr_input_db = 0.0;
  double delta_db = 0.0;
  int wordlength = 0;
  std::string method;
  int best_iter = 0;
};

EvalResult make_eval(double sdr_db, double sdr_input_db, int wordlength,
                     std::string method, int best_iter);

}  // namespace phadq
