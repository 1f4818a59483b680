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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phadq/gabor.hpp"
#include "phadq/signal_io.hpp"
#include "phadq/solver.hpp"

namespace phadq {

enum class Method {
  bphadq_consistent,
  bphadq_inconsistent,
  uphadq,
  oracle,
  cp_baseline,
};

std::string_view method_name(Method method);
/// Throws std::invalid_argument("unknown method ...").
Method parse_method(std::string_view name);
std::vector<Method> all_methods();

/// Transform geometry plus excerpt length.
struct Preset {
  std::size_t win_len = 8192;
  std::size_t hop = 2048;
  std::size_t channels = 16384;
  double seconds = 7.0;
  int record_every = 10;
};

/// "full" (8192 / 2048 / 16384, 7 s) or "desk" (512 / 128 / 1024, 1 s).
Preset preset_by_name(std::string_view name);

GaborParams gabor_params(const Preset& preset, std::size_t signal_len);

/// Explicit per-run solver settings; unset fields fall back to defaults.
struct SolverOverrides {
  std::optional<double> tau;
  std::optional<double> sigma;
  std::optional<double> rho;
  std::optional<double> lambda;
  std::optional<int> iters;
  std::optional<int> k_update;
  std::optional<int> record_every;
};

/// Defaults: tau = sigma = 1, rho = 1/3, lambda from the word-length table,
/// 200 iterations (500 for the baseline), k_update 10.
SolverConfig solver_config_for(Method method, int wordlength,
                               const SolverOverrides& overrides,
                               int default_record_every = 1);

/// Dispatches to the solver for `method`. The oracle method needs a
/// non-empty reference.
SolverResult run_method(Method method, const FeasibleSet& set,
                        const SolverConfig& cfg,
                        const GaborTransform& transform, double if_scale,
                        std::span<const double> reference);

struct ExperimentConfig {
  std::vector<std::filesystem::path> inputs;
  std::vector<int> wordlengths = {2, 3, 4, 5, 6, 7, 8};
  std::vector<Method> methods = all_methods();
  std::string preset_name = "full";
  Preset preset = preset_by_name("full");
  SolverOverrides overrides;
  std::filesystem::path out_dir = "results";
  std::uint64_t seed = 0;
  bool write_traces = true;

  void validate() const;
};

/// Applies one "key = value" setting. Unknown keys throw.
void apply_config_entry(ExperimentConfig& config, std::string_view key,
                        std::string_view value);

/// Flat key-value file: one "key = value" per line, '#' starts a comment.
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Parses "2,4,6", "2-8" or mixtures such as "2-4,8".
std::vector<int> parse_wordlengths(std::string_view text);

struct ResultRow {
  std::string file;
  std::string method;
  int wordlength = 0;
  double sdr_in = 0.0;
  /// Best SDR over the recorded iterations.
  double sdr_out = 0.0;
  double sdr_final = 0.0;
  double delta = 0.0;
  int best_iter = 0;
  int iters_run = 0;
  double seconds = 0.0;
  /// "ok" or "error: ..." for a failed cell.
  std::string status = "ok";
};

struct ResultsTable {
  std::vector<ResultRow> rows;

  void sort();
  void write_csv(const std::filesystem::path& path) const;
  /// Per (method, wordlength) means over successful rows.
  void write_averages_csv(const std::filesystem::path& path) const;
};

/// Column carrying wall time in results.csv; excluded from determinism checks.
inline constexpr std::string_view kSecondsColumn = "seconds";

/// Excerpt preparation shared by all commands: truncate, then peak-normalize.
Signal prepare_excerpt(const Signal& raw, std::optional<double> seconds);

struct Sidecar {
  int wordlength = 0;
  double delta = 0.0;
  double gain = 1.0;
  double sample_rate = 0.0;
  std::size_t length = 0;
  std::string source;
};

void write_sidecar(const Sidecar& sidecar, const std::filesystem::path& path);
Sidecar read_sidecar(const std::filesystem::path& path);
std::filesystem::path sidecar_path_for(const std::filesystem::path& wav);

/// Loads, optionally truncates, peak-normalizes and quantizes `input`; writes
/// the quantized WAV plus a JSON sidecar next to it.
Sidecar cmd_quantize(const std::filesystem::path& input, int wordlength,
                     const std::filesystem::path& output,
                     std::optional<double> seconds = std::nullopt,
                     WavEncoding encoding = WavEncoding::float32);

struct RestoreOptions {
  std::filesystem::path input;
  std::optional<std::filesystem::path> sidecar;
  std::optional<int> wordlength;
  Method method = Method::bphadq_consistent;
  std::string preset_name = "full";
  SolverOverrides overrides;
  std::optional<std::filesystem::path> reference;
  std::filesystem::path out_dir = ".";
  WavEncoding encoding = WavEncoding::float64;
};

struct RestoreOutcome {
  std::filesystem::path restored_wav;
  std::filesystem::path trace_csv;
  std::filesystem::path result_json;
  SolverConfig config;
  double feasibility = 0.0;
  std::optional<double> sdr_in;
  std::optional<double> sdr_out;
};

RestoreOutcome cmd_restore(const RestoreOptions& options);

/// Runs every (file, wordlength, method) cell, writes results.csv and
/// averages.csv (and per-cell traces) into config.out_dir.
ResultsTable cmd_sweep(const ExperimentConfig& config);

/// Merges trace CSVs into one table: "iteration,<label>,..." with one SDR
/// column per trace. Labels come from the "# method=" header, else the file
/// stem. Returns the number of data rows.
std::size_t cmd_trace_plotdata(const std::vector<std::filesystem::path>& traces,
                               const std::filesystem::path& output);

/// Parsed trace CSV.
struct TraceFile {
  std::string label;
  std::vector<std::string> header_lines;
  SolverTrace trace;
};

TraceFile read_trace_csv(const std::filesystem::path& path);

}  // namespace phadq
