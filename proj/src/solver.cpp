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

#include "phadq/solver.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include "phadq/metrics.hpp"

namespace phadq {

namespace {

/// Called before iteration `iter` (> 0) with the current primal iterate.
/// Returns a replacement operator, or nullptr to keep the current one.
using OperatorRefresh = std::function<const AnalysisOperator*(
    int iter, std::span<const double> p)>;

void warn_step_sizes(const SolverConfig& cfg, double norm_bound) {
  static std::atomic<bool> warned{false};
  const double product = cfg.tau * cfg.sigma * norm_bound * norm_bound;
  if (product > 1.0 && !warned.exchange(true)) {
    spdlog::warn(
        "tau * sigma * ||K||^2 may reach {:.3g} > 1; Chambolle-Pock "
        "convergence is not guaranteed for these step sizes",
        product);
  }
}

void check_set(const FeasibleSet& set, const GaborTransform& transform) {
  if (set.size() != transform.params().signal_len) {
    throw std::invalid_argument(
        "quantized signal length " + std::to_string(set.size()) +
        " does not match transform signal_len " +
        std::to_string(transform.params().signal_len));
  }
  if (!(set.delta > 0.0)) {
    throw std::invalid_argument("feasible set has non-positive step");
  }
}

void check_reference(std::span<const double> reference,
                     const FeasibleSet& set) {
  if (!reference.empty() && reference.size() != set.size()) {
    throw std::invalid_argument("reference length does not match signal");
  }
}

/// q <- clip_lambda(q + sigma * kx), in place.
void dual_update(CoefficientGrid& q, const CoefficientGrid& kx, double sigma,
                 double lambda) {
  std::vector<complex>& qv = q.values();
  const std::vector<complex>& kv = kx.values();
  const std::size_t count = qv.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < count; ++i) {
    complex v = qv[i] + sigma * kv[i];
    double mag = std::abs(v);
    qv[i] = mag <= lambda ? v : v * (lambda / mag);
  }
}

SolverResult primal_dual(const FeasibleSet& set, const SolverConfig& cfg,
                         const AnalysisOperator* op,
                         std::span<const double> reference,
                         const OperatorRefresh& refresh) {
  cfg.validate();
  check_reference(reference, set);
  warn_step_sizes(cfg, op->norm_bound());

  const bool consistent = cfg.variant == Variant::consistent;
  const std::size_t len = set.size();
  std::vector<double> p = set.yq;
  std::vector<double> x = set.yq;
  std::vector<double> u(len);
  CoefficientGrid q;

  SolverResult result;
  const auto start = std::chrono::steady_clock::now();

  for (int i = 0; i < cfg.max_iters; ++i) {
    if (i > 0 && refresh) {
      if (const AnalysisOperator* next = refresh(i, p)) {
        op = next;
        result.trace.omega_refresh.push_back(i);
      }
    }

    CoefficientGrid kx = op->forward(x);
    if (q.size() == 0) q = CoefficientGrid(kx.channels(), kx.frames());
    dual_update(q, kx, cfg.sigma, cfg.lambda);

    std::vector<double> ktq = op->adjoint(q);
    for (std::size_t l = 0; l < len; ++l) u[l] = p[l] - cfg.tau * ktq[l];

    std::vector<double> next = project_gamma(u, set);
    if (!consistent) {
      const double inv = 1.0 / (cfg.tau + 1.0);
      for (std::size_t l = 0; l < len; ++l) {
        next[l] = inv * (cfg.tau * next[l] + u[l]);
      }
    }
    for (std::size_t l = 0; l < len; ++l) {
      x[l] = next[l] + cfg.rho * (next[l] - p[l]);
    }
    p = std::move(next);

    if (!std::all_of(p.begin(), p.end(),
                     [](double v) { return std::isfinite(v); })) {
      throw std::runtime_error("non-finite primal iterate at iteration " +
                               std::to_string(i + 1));
    }

    const int iter = i + 1;
    result.trace.iterations_run = iter;
    if (iter % cfg.record_every == 0 || iter == cfg.max_iters) {
      TraceRecord rec;
      rec.iter = iter;
      rec.objective = cfg.lambda * l1_norm(op->forward(p));
      if (!consistent) rec.objective += 0.5 * squared_distance(p, set);
      rec.feasibility = feasibility_violation(p, set);
      if (!reference.empty()) rec.sdr = sdr(reference, p);
      rec.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      result.trace.records.push_back(rec);
    }
  }
  result.signal = std::move(p);
  return result;
}

PhaseAwareOperator make_phase_operator(const GaborTransform& transform,
                                       const InstFreqGrid& omega) {
  const GaborParams& params = transform.params();
  if (omega.channels != params.channels || omega.frames != params.frames()) {
    throw std::invalid_argument(
        "omega grid dimensions do not match the analysis operator");
  }
  return PhaseAwareOperator(transform, PhaseCorrector(omega, params.hop));
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tau > 0.0) || !(sigma > 0.0)) {
    throw std::invalid_argument("tau and sigma must be positive");
  }
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(rho >= 0.0 && rho <= 1.0)) {
    throw std::invalid_argument("rho must lie in [0, 1]");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (k_update < 1) throw std::invalid_argument("k_update must be >= 1");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
}

bool SolverTrace::has_sdr() const {
  return std::any_of(records.begin(), records.end(),
                     [](const TraceRecord& r) { return !std::isnan(r.sdr); });
}

CoefficientGrid soft_threshold(const CoefficientGrid& z, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("soft_threshold: t must be >= 0");
  CoefficientGrid out(z.channels(), z.frames());
  const std::vector<complex>& in = z.values();
  std::vector<complex>& dst = out.values();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < in.size(); ++i) {
    double mag = std::abs(in[i]);
    dst[i] = mag <= t ? complex(0.0, 0.0) : in[i] * (1.0 - t / mag);
  }
  return out;
}

CoefficientGrid clip(const CoefficientGrid& z, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("clip: t must be >= 0");
  CoefficientGrid out(z.channels(), z.frames());
  const std::vector<complex>& in = z.values();
  std::vector<complex>& dst = out.values();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < in.size(); ++i) {
    double mag = std::abs(in[i]);
    dst[i] = mag <= t ? in[i] : in[i] * (t / mag);
  }
  return out;
}

SolverResult bphadq_run(const FeasibleSet& set, const SolverConfig& cfg,
                        const GaborTransform& transform,
                        const InstFreqGrid& omega,
                        std::span<const double> reference) {
  check_set(set, transform);
  PhaseAwareOperator op = make_phase_operator(transform, omega);
  return primal_dual(set, cfg, &op, reference, {});
}

SolverResult uphadq_run(const FeasibleSet& set, const SolverConfig& cfg,
                        const GaborTransform& transform, double if_scale,
                        std::span<const double> reference) {
  check_set(set, transform);
  cfg.validate();
  PhaseAwareOperator initial =
      make_phase_operator(transform, estimate_if(set.yq, transform, if_scale));
  std::unique_ptr<PhaseAwareOperator> current;

  OperatorRefresh refresh =
      [&](int iter, std::span<const double> p) -> const AnalysisOperator* {
    if (iter % cfg.k_update != 0) return nullptr;
    current = std::make_unique<PhaseAwareOperator>(
        make_phase_operator(transform, estimate_if(p, transform, if_scale)));
    return current.get();
  };
  return primal_dual(set, cfg, &initial, reference, refresh);
}

SolverResult cp_sparse_baseline(const FeasibleSet& set, const SolverConfig& cfg,
                                const GaborTransform& transform,
                                std::span<const double> reference) {
  check_set(set, transform);
  SolverConfig baseline = cfg;
  baseline.variant = Variant::consistent;
  GaborOperator op(transform);
  return primal_dual(set, baseline, &op, reference, {});
}

double lambda_for_wordlength(int wordlength) {
  // Indexed by word length 2..8.
  static constexpr std::array<double, 7> kTable = {1e-1, 1e-1, 1e-3, 1e-2,
                                                   1e-3, 1e-4, 1e-4};
  if (wordlength < 2 || wordlength > 8) {
    int clamped = std::clamp(wordlength, 2, 8);
    spdlog::warn("no lambda tabulated for {} bits; using the {}-bit value",
                 wordlength, clamped);
    wordlength = clamped;
  }
  return kTable[static_cast<std::size_t>(wordlength - 2)];
}

InstFreqGrid oracle_omega(std::span<const double> clean,
                          const GaborTransform& transform, double if_scale) {
  return estimate_if(clean, transform, if_scale);
}

void write_trace_csv(const SolverTrace& trace, const std::filesystem::path& path,
                     const std::vector<std::string>& header_lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const std::string& line : header_lines) out << "# " << line << '\n';
  if (!trace.omega_refresh.empty()) {
    out << "# omega_refresh=";
    for (std::size_t i = 0; i < trace.omega_refresh.size(); ++i) {
      out << (i ? ";" : "") << trace.omega_refresh[i];
    }
    out << '\n';
  }
  out << "iter,objective,feasibility,sdr,seconds\n";
  out.precision(17);
  for (const TraceRecord& r : trace.records) {
    out << r.iter << ',' << r.objective << ',' << r.feasibility << ',';
    if (!std::isnan(r.sdr)) out << r.sdr;
    out << ',' << r.seconds << '\n';
  }
}

}  // namespace phadq
