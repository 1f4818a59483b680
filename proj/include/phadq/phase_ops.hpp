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
#include <span>
#include <utility>
#include <vector>

#include "phadq/gabor.hpp"

namespace phadq {

/// Instantaneous frequency per coefficient, in channels (cycles per M
/// samples). Same frame-major layout as CoefficientGrid.
struct InstFreqGrid {
  std::size_t channels = 0;
  std::size_t frames = 0;
  std::vector<double> omega;

  InstFreqGrid() = default;
  InstFreqGrid(std::size_t m, std::size_t n)
      : channels(m), frames(n), omega(m * n, 0.0) {}

  double& operator()(std::size_t m, std::size_t n) {
    return omega[n * channels + m];
  }
  double operator()(std::size_t m, std::size_t n) const {
    return omega[n * channels + m];
  }
};

/// Coefficients whose analysis magnitude falls below this fraction of the
/// grid maximum get omega = 0.
inline constexpr double kIfMaskThreshold = 1e-10;

/// omega[m,n] = -scale * Im[(G_{g'} s)[m,n] / (G_g s)[m,n]], using the
/// transform's analysis and derivative windows. Masked entries are 0.
InstFreqGrid estimate_if(std::span<const double> signal,
                         const GaborTransform& transform, double scale,
                         double eps = kIfMaskThreshold,
                         Exec exec = Exec::parallel);

struct IfCalibration {
  double scale = 0.0;
  /// Penalty ratio ||D R G x||_1 / ||D G x||_1 at the chosen scale.
  double ratio = 0.0;
  /// (candidate, ratio) for every candidate tried.
  std::vector<std::pair<double, double>> candidates;
};

inline constexpr double kCalibrationRatioBound = 0.05;

/// Fixes the unit conversion between the raw derivative-window quotient and
/// the channel units used by the phase corrector. A unit-amplitude cosine on
/// an exact channel (M/4 + 1) is analysed, and the candidate scale in
/// {1, M/(2 pi), 1/(2 pi), M} whose correction flattens the time evolution
/// best is returned. Only win_len, hop, channels and convention of `params`
/// are used. Throws std::runtime_error when no candidate reaches
/// kCalibrationRatioBound, which means the DGT phase convention does not
/// match the instantaneous-frequency model.
IfCalibration calibrate_if_scaling(const GaborParams& params);

/// Elementwise unit-modulus rotation exp(-i * cumulative_phase[m,n]) with
/// cumulative_phase[m,n] = 2 pi hop sum_{t<n} omega[m,t] / M.
class PhaseCorrector {
 public:
  PhaseCorrector() = default;
  PhaseCorrector(const InstFreqGrid& omega, std::size_t hop);

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  const std::vector<double>& cumulative_phase() const { return phase_; }
  /// exp(-i phase), frame-major.
  const std::vector<complex>& factors() const { return factors_; }

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::vector<double> phase_;
  std::vector<complex> factors_;
};

CoefficientGrid apply_phase_correction(const CoefficientGrid& c,
                                       const PhaseCorrector& pc, bool adjoint,
                                       Exec exec = Exec::parallel);

/// out[m,n] = c[m,n] - c[m,n+1], n = 0..N-2. Requires N >= 2.
CoefficientGrid time_diff(const CoefficientGrid& c, Exec exec = Exec::parallel);

/// Adjoint of time_diff: maps M x (N-1) back to M x N.
CoefficientGrid time_diff_adjoint(const CoefficientGrid& d,
                                  Exec exec = Exec::parallel);

/// Linear map from real signals to a coefficient grid, with its adjoint.
class AnalysisOperator {
 public:
  virtual ~AnalysisOperator() = default;
  virtual CoefficientGrid forward(std::span<const double> x) const = 0;
  virtual std::vector<double> adjoint(const CoefficientGrid& z) const = 0;
  /// Upper bound on the operator norm, used for step-size diagnostics.
  virtual double norm_bound() const = 0;
};

/// K = G.
class GaborOperator final : public AnalysisOperator {
 public:
  explicit GaborOperator(const GaborTransform& transform)
      : transform_(&transform) {}

  CoefficientGrid forward(std::span<const double> x) const override {
    return transform_->analysis(x);
  }
  std::vector<double> adjoint(const CoefficientGrid& z) const override {
    return transform_->synthesis(z);
  }
  double norm_bound() const override { return 1.0; }

 private:
  const GaborTransform* transform_;
};

/// K = D R G, the phase-aware time-variation operator.
class PhaseAwareOperator final : public AnalysisOperator {
 public:
  PhaseAwareOperator(const GaborTransform& transform, PhaseCorrector corrector);

  CoefficientGrid forward(std::span<const double> x) const override;
  std::vector<double> adjoint(const CoefficientGrid& z) const override;
  double norm_bound() const override { return 2.0; }

  const PhaseCorrector& corrector() const { return corrector_; }

 private:
  const GaborTransform* transform_;
  PhaseCorrector corrector_;
};

/// ||D R G x||_1 / ||D G x||_1 for the given omega.
double penalty_ratio(std::span<const double> x, const GaborTransform& transform,
                     const InstFreqGrid& omega);

/// Writes "m,n,omega" rows for debugging.
void dump_if_csv(const InstFreqGrid& omega, const std::filesystem::path& path);

}  // namespace phadq
