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

// Serial vs OpenMP timings for the transform and phase kernels.
//
//   bench_kernels [preset] [seconds] [repeats]
//
// preset is "desk" (default) or "full".

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "phadq/experiment.hpp"
#include "phadq/phase_ops.hpp"

using namespace phadq;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-22s %10.3f ms %10.3f ms %7.2fx  %s\n", name, 1e3 * serial,
              1e3 * parallel, serial / parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::string preset_name = argc > 1 ? argv[1] : "desk";
  Preset preset = preset_by_name(preset_name);
  double seconds = argc > 2 ? std::stod(argv[2]) : preset.seconds;
  int repeats = argc > 3 ? std::stoi(argv[3]) : 5;

  const std::size_t len = std::size_t(seconds * 44100.0);
  std::vector<double> x(len);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::size_t l = 0; l < len; ++l) {
    x[l] = 0.5 * std::sin(2.0 * 3.141592653589793 * 440.0 * double(l) / 44100.0) + noise(rng);
  }

  GaborTransform g(gabor_params(preset, len));
  const GaborParams& p = g.params();
  std::printf("preset %s: win %zu hop %zu M %zu, L %zu, %zu frames, %d threads\n",
              preset_name.c_str(), p.win_len, p.hop, p.channels, len, p.frames(),
              omp_get_max_threads());
  std::printf("%-22s %13s %13s %8s\n", "kernel", "serial", "parallel", "speedup");

  CoefficientGrid cs, cp;
  double ts = best_of(repeats, [&] { cs = g.analysis(x, Exec::serial); });
  double tp = best_of(repeats, [&] { cp = g.analysis(x, Exec::parallel); });
  row("analysis", ts, tp, cs.values() == cp.values());

  std::vector<double> ys, yp;
  ts = best_of(repeats, [&] { ys = g.synthesis(cs, Exec::serial); });
  tp = best_of(repeats, [&] { yp = g.synthesis(cs, Exec::parallel); });
  row("synthesis", ts, tp, ys == yp);

  InstFreqGrid ws, wp;
  ts = best_of(repeats, [&] { ws = estimate_if(x, g, 1.0, kIfMaskThreshold, Exec::serial); });
  tp = best_of(repeats, [&] { wp = estimate_if(x, g, 1.0, kIfMaskThreshold, Exec::parallel); });
  row("estimate_if", ts, tp, ws.omega == wp.omega);

  PhaseCorrector pc(ws, p.hop);
  CoefficientGrid rs, rp;
  ts = best_of(repeats, [&] { rs = apply_phase_correction(cs, pc, false, Exec::serial); });
  tp = best_of(repeats, [&] { rp = apply_phase_correction(cs, pc, false, Exec::parallel); });
  row("phase correction", ts, tp, rs.values() == rp.values());

  CoefficientGrid ds, dp;
  ts = best_of(repeats, [&] { ds = time_diff(rs, Exec::serial); });
  tp = best_of(repeats, [&] { dp = time_diff(rs, Exec::parallel); });
  row("time_diff", ts, tp, ds.values() == dp.values());

  ts = best_of(repeats, [&] { cs = time_diff_adjoint(ds, Exec::serial); });
  tp = best_of(repeats, [&] { cp = time_diff_adjoint(ds, Exec::parallel); });
  row("time_diff_adjoint", ts, tp, cs.values() == cp.values());
  return 0;
}
