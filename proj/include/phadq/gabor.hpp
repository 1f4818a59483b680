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

#include <complex>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace phadq {

using complex = std::complex<double>;

/// Selects the OpenMP kernel or its serial reference. Both produce
/// bit-identical results.
enum class Exec { serial, parallel };

enum class WindowKind { hann, hann_derivative };

struct Window {
  std::vector<double> samples;
  WindowKind kind = WindowKind::hann;
  /// Factor applied on top of the closed form (1 when unscaled).
  double scale = 1.0;
  bool tight = false;

  std::size_t size() const { return samples.size(); }
};

/// Periodic Hann: 0.5 (1 - cos(2 pi k / len)), k = 0..len-1.
Window make_hann(std::size_t win_len);

/// Per-sample time derivative of the continuous periodic Hann:
/// (pi / len) sin(2 pi k / len).
Window make_hann_derivative(std::size_t win_len);

/// Returns `w` multiplied by `factor`, with the factor folded into w.scale.
Window scaled(Window w, double factor);

/// How the complex phase of a coefficient is referenced.
///  - frequency_invariant: c[m,n] = sum_l s[l] w[l - na] exp(-2 pi i m l / M)
///  - time_invariant: phase measured from the start of each frame.
enum class PhaseConvention { frequency_invariant, time_invariant };

struct GaborParams {
  std::size_t win_len = 8192;
  std::size_t hop = 2048;
  std::size_t channels = 16384;
  /// Length of the (unpadded) signals this transform acts on.
  std::size_t signal_len = 0;
  PhaseConvention convention = PhaseConvention::frequency_invariant;

  /// signal_len rounded up to a multiple of hop, and never shorter than
  /// one window.
  std::size_t padded_len() const;
  std::size_t frames() const { return padded_len() / hop; }

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Complex M x N grid, stored frame-major: value(m, n) = values[n * M + m].
class CoefficientGrid {
 public:
  CoefficientGrid() = default;
  CoefficientGrid(std::size_t channels, std::size_t frames)
      : channels_(channels), frames_(frames), values_(channels * frames) {}

  std::size_t channels() const { return channels_; }
  std::size_t frames() const { return frames_; }
  std::size_t size() const { return values_.size(); }

  complex& operator()(std::size_t m, std::size_t n) {
    return values_[n * channels_ + m];
  }
  const complex& operator()(std::size_t m, std::size_t n) const {
    return values_[n * channels_ + m];
  }

  std::span<complex> frame(std::size_t n) {
    return {values_.data() + n * channels_, channels_};
  }
  std::span<const complex> frame(std::size_t n) const {
    return {values_.data() + n * channels_, channels_};
  }

  std::vector<complex>& values() { return values_; }
  const std::vector<complex>& values() const { return values_; }

  bool same_shape(const CoefficientGrid& other) const {
    return channels_ == other.channels_ && frames_ == other.frames_;
  }

 private:
  std::size_t channels_ = 0;
  std::size_t frames_ = 0;
  std::vector<complex> values_;
};

/// Sum of magnitudes. Serial, fixed order.
double l1_norm(const CoefficientGrid& grid);

struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
  /// win_len <= channels, so the frame operator is diagonal.
  bool painless = false;

  bool is_frame() const { return painless && lower > 0.0; }
};

/// Min/max over samples of channels * sum_n w[l - n hop]^2.
FrameBounds frame_bounds(const GaborParams& params, const Window& window);

/// Scales a window so that the Gabor system it generates is a Parseval frame.
/// Throws when the hop-summed squared window is not constant.
Window tight_scaled(const Window& window, const GaborParams& params);

/// Discrete Gabor transform with a fixed window, plus its exact adjoint.
///
/// Analysis zero-pads the input to padded_len() and treats it as periodic;
/// synthesis truncates back to signal_len. Each frame is windowed, embedded
/// in a length-M buffer and transformed with one FFT. FFT plans are created
/// once in the constructor; the object is safe to share between threads.
class GaborTransform {
 public:
  /// Tight-scaled Hann analysis window and matching derivative window.
  explicit GaborTransform(const GaborParams& params);
  /// Uses `window` as given; the derivative window is the Hann derivative
  /// with the same scale factor.
  GaborTransform(const GaborParams& params, Window window);
  ~GaborTransform();
  GaborTransform(GaborTransform&&) noexcept;
  GaborTransform& operator=(GaborTransform&&) noexcept;

  const GaborParams& params() const { return params_; }
  const Window& window() const { return window_; }
  const Window& derivative_window() const { return derivative_; }

  CoefficientGrid analysis(std::span<const double> signal,
                           Exec exec = Exec::parallel) const;
  /// Analysis with an arbitrary window of the same length.
  CoefficientGrid analysis(std::span<const double> signal, const Window& window,
                           Exec exec = Exec::parallel) const;
  /// Real part of the adjoint, truncated to signal_len.
  std::vector<double> synthesis(const CoefficientGrid& coefficients,
                                Exec exec = Exec::parallel) const;

 private:
  struct Plans;

  GaborParams params_;
  Window window_;
  Window derivative_;
  std::vector<complex> twiddles_;
  std::unique_ptr<Plans> plans_;
};

/// Writes "m,n,magnitude" rows for debugging.
void dump_magnitudes_csv(const CoefficientGrid& grid,
                         const std::filesystem::path& path);

}  // namespace phadq
