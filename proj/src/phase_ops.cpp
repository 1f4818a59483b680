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

#include "phadq/phase_ops.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace phadq {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

InstFreqGrid estimate_if(std::span<const double> signal,
                         const GaborTransform& transform, double scale,
                         double eps, Exec exec) {
  if (!(eps > 0.0)) throw std::invalid_argument("estimate_if: eps must be > 0");
  CoefficientGrid plain = transform.analysis(signal, exec);
  CoefficientGrid deriv =
      transform.analysis(signal, transform.derivative_window(), exec);

  double peak = 0.0;
  for (const complex& z : plain.values()) peak = std::max(peak, std::abs(z));

  InstFreqGrid out(plain.channels(), plain.frames());
  if (peak == 0.0) return out;
  const double floor = eps * peak;
  const std::vector<complex>& g = plain.values();
  const std::vector<complex>& gd = deriv.values();
  const std::size_t count = g.size();

  auto kernel = [&](std::size_t i) {
    out.omega[i] = std::abs(g[i]) < floor ? 0.0 : -scale * (gd[i] / g[i]).imag();
  };
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < count; ++i) kernel(i);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < count; ++i) kernel(i);
  }
  return out;
}

PhaseCorrector::PhaseCorrector(const InstFreqGrid& omega, std::size_t hop)
    : channels_(omega.channels), frames_(omega.frames) {
  if (omega.omega.size() != channels_ * frames_ || channels_ == 0) {
    throw std::invalid_argument("PhaseCorrector: malformed omega grid");
  }
  phase_.assign(channels_ * frames_, 0.0);
  factors_.assign(channels_ * frames_, complex(1.0, 0.0));
  const double cycles_per_unit = double(hop) / double(channels_);

#pragma omp parallel for schedule(static)
  for (std::size_t m = 0; m < channels_; ++m) {
    double cycles = 0.0;
    // Phase reduced to (-1/2, 1/2] cycles keeps sin/cos accurate.
    double wrapped = 0.0;
    for (std::size_t n = 1; n < frames_; ++n) {
      double step = cycles_per_unit * omega(m, n - 1);
      cycles += step;
      wrapped = std::remainder(wrapped + step, 1.0);
      std::size_t i = n * channels_ + m;
      phase_[i] = kTwoPi * cycles;
      factors_[i] = std::polar(1.0, -kTwoPi * wrapped);
    }
  }
}

CoefficientGrid apply_phase_correction(const CoefficientGrid& c,
                                       const PhaseCorrector& pc, bool adjoint,
                                       Exec exec) {
  if (c.channels() != pc.channels() || c.frames() != pc.frames()) {
    throw std::invalid_argument("apply_phase_correction: dimension mismatch");
  }
  CoefficientGrid out(c.channels(), c.frames());
  const std::vector<complex>& in = c.values();
  const std::vector<complex>& f = pc.factors();
  std::vector<complex>& dst = out.values();
  const std::size_t count = in.size();
  if (exec == Exec::serial) {
    for (std::size_t i = 0; i < count; ++i) {
      dst[i] = (adjoint ? std::conj(f[i]) : f[i]) * in[i];
    }
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < count; ++i) {
      dst[i] = (adjoint ? std::conj(f[i]) : f[i]) * in[i];
    }
  }
  return out;
}

CoefficientGrid time_diff(const CoefficientGrid& c, Exec exec) {
  if (c.frames() < 2) throw std::invalid_argument("time_diff: need N >= 2");
  const std::size_t m_ch = c.channels();
  const std::size_t n_out = c.frames() - 1;
  CoefficientGrid out(m_ch, n_out);
  auto column = [&](std::size_t n) {
    for (std::size_t m = 0; m < m_ch; ++m) out(m, n) = c(m, n) - c(m, n + 1);
  };
  if (exec == Exec::serial) {
    for (std::size_t n = 0; n < n_out; ++n) column(n);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < n_out; ++n) column(n);
  }
  return out;
}

CoefficientGrid time_diff_adjoint(const CoefficientGrid& d, Exec exec) {
  if (d.frames() < 1) {
    throw std::invalid_argument("time_diff_adjoint: empty difference grid");
  }
  const std::size_t m_ch = d.channels();
  const std::size_t n_in = d.frames();
  const std::size_t n_out = n_in + 1;
  CoefficientGrid out(m_ch, n_out);
  auto column = [&](std::size_t n) {
    for (std::size_t m = 0; m < m_ch; ++m) {
      complex v(0.0, 0.0);
      if (n < n_in) v = d(m, n);
      if (n > 0) v -= d(m, n - 1);
      out(m, n) = v;
    }
  };
  if (exec == Exec::serial) {
    for (std::size_t n = 0; n < n_out; ++n) column(n);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t n = 0; n < n_out; ++n) column(n);
  }
  return out;
}

PhaseAwareOperator::PhaseAwareOperator(const GaborTransform& transform,
                                       PhaseCorrector corrector)
    : transform_(&transform), corrector_(std::move(corrector)) {
  const GaborParams& p = transform.params();
  if (corrector_.channels() != p.channels || corrector_.frames() != p.frames()) {
    throw std::invalid_argument(
        "phase corrector does not match the transform's coefficient grid");
  }
}

CoefficientGrid PhaseAwareOperator::forward(std::span<const double> x) const {
  return time_diff(
      apply_phase_correction(transform_->analysis(x), corrector_, false));
}

std::vector<double> PhaseAwareOperator::adjoint(const CoefficientGrid& z) const {
  return transform_->synthesis(
      apply_phase_correction(time_diff_adjoint(z), corrector_, true));
}

double penalty_ratio(std::span<const double> x, const GaborTransform& transform,
                     const InstFreqGrid& omega) {
  CoefficientGrid c = transform.analysis(x);
  double plain = l1_norm(time_diff(c));
  PhaseCorrector pc(omega, transform.params().hop);
  double corrected = l1_norm(time_diff(apply_phase_correction(c, pc, false)));
  if (plain == 0.0) return corrected == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return corrected / plain;
}

IfCalibration calibrate_if_scaling(const GaborParams& params) {
  GaborParams cal = params;
  const std::size_t period = std::lcm(params.hop, params.channels);
  const std::size_t min_len = 8 * params.win_len;
  cal.signal_len = (min_len + period - 1) / period * period;
  GaborTransform transform(cal);

  const std::size_t m_ch = cal.channels;
  const std::size_t tone = m_ch / 4 + 1;
  std::vector<double> x(cal.signal_len);
  for (std::size_t l = 0; l < x.size(); ++l) {
    // Integer phase index keeps the tone exactly periodic.
    std::size_t idx = (tone * l) % m_ch;
    x[l] = std::cos(kTwoPi * double(idx) / double(m_ch));
  }

  InstFreqGrid raw = estimate_if(x, transform, 1.0);
  const double m = static_cast<double>(m_ch);
  const double candidates[] = {1.0, m / kTwoPi, 1.0 / kTwoPi, m};

  IfCalibration result;
  double best = std::numeric_limits<double>::infinity();
  for (double candidate : candidates) {
    InstFreqGrid omega = raw;
    for (double& v : omega.omega) v *= candidate;
    double ratio = penalty_ratio(x, transform, omega);
    result.candidates.emplace_back(candidate, ratio);
    if (ratio < best) {
      best = ratio;
      result.scale = candidate;
      result.ratio = ratio;
    }
  }
  if (!(best <= kCalibrationRatioBound)) {
    throw std::runtime_error(
        "instantaneous-frequency calibration failed: best penalty ratio " +
        std::to_string(best) +
        " exceeds bound; DGT phase convention does not match");
  }
  return result;
}

void dump_if_csv(const InstFreqGrid& omega, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "m,n,omega\n";
  out.precision(17);
  for (std::size_t n = 0; n < omega.frames; ++n) {
    for (std::size_t m = 0; m < omega.channels; ++m) {
      out << m << ',' << n << ',' << omega(m, n) << '\n';
    }
  }
}

}  // namespace phadq
