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

#include "phadq/gabor.hpp"

#include <fftw3.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace phadq {

namespace {

// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n)
      : data_(static_cast<complex*>(fftw_malloc(sizeof(complex) * n))), n_(n) {
    if (data_ == nullptr) throw std::bad_alloc();
  }
  ~FftBuffer() { fftw_free(data_); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  complex* data() { return data_; }
  fftw_complex* raw() { return reinterpret_cast<fftw_complex*>(data_); }
  void clear() { std::fill(data_, data_ + n_, complex(0.0, 0.0)); }

 private:
  complex* data_;
  std::size_t n_;
};

void check_window(const Window& w, const GaborParams& p) {
  if (w.size() != p.win_len) {
    throw std::invalid_argument("window length " + std::to_string(w.size()) +
                                " does not match win_len " +
                                std::to_string(p.win_len));
  }
}

void check_length(std::size_t win_len) {
  if (win_len < 2 || win_len % 2 != 0) {
    throw std::invalid_argument("window length must be even and >= 2, got " +
                                std::to_string(win_len));
  }
}

}  // namespace

Window make_hann(std::size_t win_len) {
  check_length(win_len);
  Window w;
  w.kind = WindowKind::hann;
  w.samples.resize(win_len);
  const double n = static_cast<double>(win_len);
  for (std::size_t k = 0; k < win_len; ++k) {
    w.samples[k] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * double(k) / n));
  }
  return w;
}

Window make_hann_derivative(std::size_t win_len) {
  check_length(win_len);
  Window w;
  w.kind = WindowKind::hann_derivative;
  w.samples.resize(win_len);
  const double n = static_cast<double>(win_len);
  for (std::size_t k = 0; k < win_len; ++k) {
    w.samples[k] =
        (std::numbers::pi / n) * std::sin(2.0 * std::numbers::pi * double(k) / n);
  }
  return w;
}

Window scaled(Window w, double factor) {
  for (double& v : w.samples) v *= factor;
  w.scale *= factor;
  return w;
}

std::size_t GaborParams::padded_len() const {
  if (hop == 0) return 0;
  std::size_t base = std::max(signal_len, win_len);
  return (base + hop - 1) / hop * hop;
}

void GaborParams::validate() const {
  check_length(win_len);
  if (hop == 0 || hop > win_len) {
    throw std::invalid_argument("hop must be in [1, win_len]");
  }
  if (channels < win_len) {
    throw std::invalid_argument(
        "channels (" + std::to_string(channels) + ") < win_len (" +
        std::to_string(win_len) + "): only the painless case is supported");
  }
  if (signal_len == 0) {
    throw std::invalid_argument("signal_len must be positive");
  }
}

double l1_norm(const CoefficientGrid& grid) {
  double sum = 0.0;
  for (const complex& z : grid.values()) sum += std::abs(z);
  return sum;
}

FrameBounds frame_bounds(const GaborParams& params, const Window& window) {
  check_window(window, params);
  FrameBounds fb;
  fb.painless = window.size() <= params.channels;
  if (!fb.painless) return fb;
  const double m = static_cast<double>(params.channels);
  fb.lower = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < params.hop; ++l) {
    double sum = 0.0;
    for (std::size_t k = l; k < window.size(); k += params.hop) {
      sum += window.samples[k] * window.samples[k];
    }
    fb.lower = std::min(fb.lower, m * sum);
    fb.upper = std::max(fb.upper, m * sum);
  }
  return fb;
}

Window tight_scaled(const Window& window, const GaborParams& params) {
  FrameBounds fb = frame_bounds(params, window);
  if (!fb.is_frame()) {
    throw std::invalid_argument("window does not generate a painless frame");
  }
  if (fb.upper - fb.lower > 1e-12 * fb.upper) {
    throw std::invalid_argument(
        "hop-summed squared window is not constant; cannot tight-scale");
  }
  Window out = scaled(window, 1.0 / std::sqrt(0.5 * (fb.lower + fb.upper)));
  out.tight = true;
  return out;
}

struct GaborTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(std::size_t n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    FftBuffer scratch(n);
    const int len = static_cast<int>(n);
    forward = fftw_plan_dft_1d(len, scratch.raw(), scratch.raw(), FFTW_FORWARD,
                               FFTW_ESTIMATE);
    backward = fftw_plan_dft_1d(len, scratch.raw(), scratch.raw(),
                                FFTW_BACKWARD, FFTW_ESTIMATE);
    if (forward == nullptr || backward == nullptr) {
      throw std::runtime_error("FFTW planning failed");
    }
  }
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }
};

GaborTransform::GaborTransform(const GaborParams& params)
    : GaborTransform(params, [&] {
        params.validate();
        return tight_scaled(make_hann(params.win_len), params);
      }()) {}

GaborTransform::GaborTransform(const GaborParams& params, Window window)
    : params_(params), window_(std::move(window)) {
  params_.validate();
  check_window(window_, params_);
  derivative_ = scaled(make_hann_derivative(params_.win_len), window_.scale);

  const std::size_t m = params_.channels;
  twiddles_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    twiddles_[j] = std::polar(1.0, -2.0 * std::numbers::pi * double(j) / double(m));
  }
  plans_ = std::make_unique<Plans>(m);
}

GaborTransform::~GaborTransform() = default;
GaborTransform::GaborTransform(GaborTransform&&) noexcept = default;
GaborTransform& GaborTransform::operator=(GaborTransform&&) noexcept = default;

CoefficientGrid GaborTransform::analysis(std::span<const double> signal,
                                         Exec exec) const {
  return analysis(signal, window_, exec);
}

CoefficientGrid GaborTransform::analysis(std::span<const double> signal,
                                         const Window& window,
                                         Exec exec) const {
  check_window(window, params_);
  if (signal.size() > params_.padded_len()) {
    throw std::invalid_argument("signal longer than padded_len");
  }
  const std::size_t m_ch = params_.channels;
  const std::size_t n_fr = params_.frames();
  const std::size_t len = params_.padded_len();
  const std::size_t hop = params_.hop;
  const std::size_t win = params_.win_len;
  const bool freqinv =
      params_.convention == PhaseConvention::frequency_invariant;
  CoefficientGrid out(m_ch, n_fr);

  auto run_frame = [&](std::size_t n, FftBuffer& buf) {
    buf.clear();
    complex* b = buf.data();
    const std::size_t start = n * hop;
    for (std::size_t k = 0; k < win; ++k) {
      std::size_t l = (start + k) % len;
      if (l < signal.size()) b[k] = signal[l] * window.samples[k];
    }
    fftw_execute_dft(plans_->forward, buf.raw(), buf.raw());
    std::span<complex> col = out.frame(n);
    if (freqinv) {
      const std::size_t shift = start % m_ch;
      for (std::size_t m = 0; m < m_ch; ++m) {
        col[m] = twiddles_[(m * shift) % m_ch] * b[m];
      }
    } else {
      std::copy(b, b + m_ch, col.begin());
    }
  };

  if (exec == Exec::serial) {
    FftBuffer buf(m_ch);
    for (std::size_t n = 0; n < n_fr; ++n) run_frame(n, buf);
    return out;
  }

#pragma omp parallel
  {
    FftBuffer buf(m_ch);
#pragma omp for schedule(static)
    for (std::size_t n = 0; n < n_fr; ++n) run_frame(n, buf);
  }
  return out;
}

std::vector<double> GaborTransform::synthesis(
    const CoefficientGrid& coefficients, Exec exec) const {
  const std::size_t m_ch = params_.channels;
  const std::size_t n_fr = params_.frames();
  if (coefficients.channels() != m_ch || coefficients.frames() != n_fr) {
    throw std::invalid_argument("coefficient grid does not match GaborParams");
  }
  const std::size_t len = params_.padded_len();
  const std::size_t hop = params_.hop;
  const std::size_t win = params_.win_len;
  const bool freqinv =
      params_.convention == PhaseConvention::frequency_invariant;

  // Windowed time-domain contribution of frame n, length win.
  auto frame_contribution = [&](std::size_t n, FftBuffer& buf, double* dst) {
    complex* b = buf.data();
    std::span<const complex> col = coefficients.frame(n);
    if (freqinv) {
      const std::size_t shift = (n * hop) % m_ch;
      for (std::size_t m = 0; m < m_ch; ++m) {
        b[m] = std::conj(twiddles_[(m * shift) % m_ch]) * col[m];
      }
    } else {
      std::copy(col.begin(), col.end(), b);
    }
    fftw_execute_dft(plans_->backward, buf.raw(), buf.raw());
    for (std::size_t k = 0; k < win; ++k) {
      dst[k] = b[k].real() * window_.samples[k];
    }
  };

  std::vector<double> padded(len, 0.0);

  if (exec == Exec::serial) {
    FftBuffer buf(m_ch);
    std::vector<double> contrib(win);
    for (std::size_t n = 0; n < n_fr; ++n) {
      frame_contribution(n, buf, contrib.data());
      for (std::size_t k = 0; k < win; ++k) {
        padded[(n * hop + k) % len] += contrib[k];
      }
    }
  } else {
    std::vector<double> contrib(n_fr * win);
#pragma omp parallel
    {
      FftBuffer buf(m_ch);
#pragma omp for schedule(static)
      for (std::size_t n = 0; n < n_fr; ++n) {
        frame_contribution(n, buf, contrib.data() + n * win);
      }
    }
    // Gather per output sample, visiting frames in ascending order so the
    // summation sequence matches the serial overlap-add exactly.
    const std::size_t reach = (win + hop - 1) / hop + 1;
#pragma omp parallel
    {
      std::vector<std::size_t> covering;
      covering.reserve(reach);
#pragma omp for schedule(static)
      for (std::size_t l = 0; l < len; ++l) {
        covering.clear();
        const std::size_t newest = l / hop;
        for (std::size_t j = 0; j < reach && j < n_fr; ++j) {
          std::size_t n = (newest + n_fr - j) % n_fr;
          std::size_t k = (l + len - n * hop) % len;
          if (k < win) covering.push_back(n);
        }
        std::sort(covering.begin(), covering.end());
        covering.erase(std::unique(covering.begin(), covering.end()),
                       covering.end());
        double sum = 0.0;
        for (std::size_t n : covering) {
          sum += contrib[n * win + (l + len - n * hop) % len];
        }
        padded[l] = sum;
      }
    }
  }

  padded.resize(params_.signal_len);
  return padded;
}

void dump_magnitudes_csv(const CoefficientGrid& grid,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "m,n,magnitude\n";
  out.precision(17);
  for (std::size_t n = 0; n < grid.frames(); ++n) {
    for (std::size_t m = 0; m < grid.channels(); ++m) {
      out << m << ',' << n << ',' << std::abs(grid(m, n)) << '\n';
    }
  }
}

}  // namespace phadq
