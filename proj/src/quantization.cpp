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

#include "phadq/quantization.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace phadq {

namespace {

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) +
                                ")");
  }
}

}  // namespace

QuantSpec::QuantSpec(int wordlength) : wordlength_(wordlength) {
  if (wordlength < kMinWordlength || wordlength > kMaxWordlength) {
    throw std::invalid_argument("wordlength must be in [2, 16], got " +
                                std::to_string(wordlength));
  }
  delta_ = std::ldexp(1.0, 1 - wordlength);
}

std::vector<double> quantize_midriser(std::span<const double> samples,
                                      const QuantSpec& spec) {
  const double delta = spec.delta();
  const double top = 1.0 - 0.5 * delta;
  std::vector<double> out(samples.size());
  std::size_t clamped = 0;
  for (std::size_t l = 0; l < samples.size(); ++l) {
    double s = samples[l];
    if (s > 1.0 || s < -1.0) {
      ++clamped;
      s = std::clamp(s, -1.0, 1.0);
    }
    double level = delta * (std::floor(s / delta) + 0.5);
    out[l] = std::clamp(level, -top, top);
  }
  if (clamped > 0) {
    spdlog::warn("quantize: clamped {} samples outside [-1, 1]", clamped);
  }
  return out;
}

bool on_midriser_level(double v, double delta) {
  double k = v / delta - 0.5;
  return k == std::floor(k) && std::abs(v) <= 1.0 - 0.5 * delta;
}

std::vector<double> project_gamma(std::span<const double> x,
                                  const FeasibleSet& set) {
  check_sizes(x.size(), set.size(), "project_gamma");
  const double h = set.half_width();
  std::vector<double> out(x.size());
  for (std::size_t l = 0; l < x.size(); ++l) {
    out[l] = std::clamp(x[l], set.yq[l] - h, set.yq[l] + h);
  }
  return out;
}

std::vector<double> prox_sqdist(std::span<const double> x,
                                const FeasibleSet& set, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("prox_sqdist: alpha must be > 0");
  std::vector<double> out = project_gamma(x, set);
  const double inv = 1.0 / (1.0 + alpha);
  for (std::size_t l = 0; l < x.size(); ++l) {
    out[l] = (alpha * out[l] + x[l]) * inv;
  }
  return out;
}

double feasibility_violation(std::span<const double> x, const FeasibleSet& set) {
  check_sizes(x.size(), set.size(), "feasibility_violation");
  const double h = set.half_width();
  double worst = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    worst = std::max(worst, std::abs(x[l] - set.yq[l]) - h);
  }
  return worst;
}

double squared_distance(std::span<const double> x, const FeasibleSet& set) {
  check_sizes(x.size(), set.size(), "squared_distance");
  const double h = set.half_width();
  double sum = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    double excess = std::max(0.0, std::abs(x[l] - set.yq[l]) - h);
    sum += excess * excess;
  }
  return sum;
}

}  // namespace phadq
