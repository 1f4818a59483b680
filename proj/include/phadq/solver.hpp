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

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "phadq/gabor.hpp"
#include "phadq/phase_ops.hpp"
#include "phadq/quantization.hpp"

namespace phadq {

enum class Variant { consistent, inconsistent };

/// Where the instantaneous frequency driving the phase correction comes from.
enum class IfSource { degraded, oracle, update_every_k };

struct SolverConfig {
  double tau = 1.0;
  double sigma = 1.0;
  double rho = 1.0 / 3.0;
  double lambda = 1e-3;
  int max_iters = 200;
  Variant variant = Variant::consistent;
  IfSource if_source = IfSource::degraded;
  int k_update = 10;
  int record_every = 1;

  void validate() const;
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double feasibility = 0.0;
  /// NaN when no reference was supplied.
  double sdr = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct SolverTrace {
  std::vector<TraceRecord> records;
  /// Iterations before which omega was re-estimated (U-PHADQ only).
  std::vector<int> omega_refresh;
  int iterations_run = 0;

  bool has_sdr() const;
};

struct SolverResult {
  std::vector<double> signal;
  SolverTrace trace;
};

/// Elementwise z * max(0, 1 - t/|z|).
CoefficientGrid soft_threshold(const CoefficientGrid& z, double t);
/// Elementwise z * min(1, t/|z|) = z - soft_threshold(z, t).
CoefficientGrid clip(const CoefficientGrid& z, double t);

/// B-PHADQ: Chambolle-Pock iteration for
///   min lambda ||D R_omega G x||_1 + i_Gamma(x)        (consistent)
///   min lambda ||D R_omega G x||_1 + d_Gamma(x)^2 / 2  (inconsistent)
/// with omega held fixed. Starts from x = p = yq, q = 0 and returns the last
/// primal iterate p. `reference` (optional, may be empty) enables SDR tracing.
SolverResult bphadq_run(const FeasibleSet& set, const SolverConfig& cfg,
                        const GaborTransform& transform,
                        const InstFreqGrid& omega,
                        std::span<const double> reference = {});

/// U-PHADQ: like bphadq_run with omega estimated from yq, but omega is
/// re-estimated from the current p every cfg.k_update iterations. The dual
/// variable and relaxation history carry over across refreshes.
SolverResult uphadq_run(const FeasibleSet& set, const SolverConfig& cfg,
                        const GaborTransform& transform, double if_scale,
                        std::span<const double> reference = {});

/// Sparsity baseline: min lambda ||G x||_1 + i_Gamma(x), same iteration
/// with K = G.
SolverResult cp_sparse_baseline(const FeasibleSet& set, const SolverConfig& cfg,
                                const GaborTransform& transform,
                                std::span<const double> reference = {});

/// lambda per word length for 2..8 bits; out-of-range values use the
/// nearest endpoint with a warning.
double lambda_for_wordlength(int wordlength);

/// Instantaneous frequency of the clean signal.
InstFreqGrid oracle_omega(std::span<const double> clean,
                          const GaborTransform& transform, double if_scale);

/// "iter,objective,feasibility,sdr,seconds" with optional '#' header lines.
void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path,
                     const std::vector<std::string>& header_lines = {});

}  // namespace phadq
