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
#include <vector>

namespace phadq {

/// Uniform quantizer with w bits over [-1, 1]; step 2^(1 - w).
class QuantSpec {
 public:
  static constexpr int kMinWordlength = 2;
  static constexpr int kMaxWordlength = 16;

  explicit QuantSpec(int wordlength);

  int wordlength() const { return wordlength_; }
  double delta() const { return delta_; }

 private:
  int wordlength_;
  double delta_;
};

/// Mid-riser levels delta * (floor(s / delta) + 1/2), clamped to
/// [-1 + delta/2, 1 - delta/2]. Inputs outside [-1, 1] are clamped first
/// (with a warning).
std::vector<double> quantize_midriser(std::span<const double> samples,
                                      const QuantSpec& spec);

/// True when v sits on a mid-riser level of step delta.
bool on_midriser_level(double v, double delta);

/// Closed box {y : |y[l] - yq[l]| <= delta / 2}.
struct FeasibleSet {
  std::vector<double> yq;
  double delta = 0.0;

  double half_width() const { return 0.5 * delta; }
  std::size_t size() const { return yq.size(); }
};

std::vector<double> project_gamma(std::span<const double> x,
                                  const FeasibleSet& set);

/// prox of (alpha/2) d^2: (alpha proj(x) + x) / (1 + alpha).
std::vector<double> prox_sqdist(std::span<const double> x,
                                const FeasibleSet& set, double alpha);

/// max_l max(0, |x[l] - yq[l]| - delta/2).
double feasibility_violation(std::span<const double> x, const FeasibleSet& set);

/// Squared Euclidean distance to the box.
double squared_distance(std::span<const double> x, const FeasibleSet& set);

}  // namespace phadq
