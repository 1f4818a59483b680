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

// phadq: quantize, restore and evaluate audio with the phase-aware
// dequantizer and the sparsity baseline.

#include <spdlog/spdlog.h>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phadq/experiment.hpp"

namespace {

struct SolverFlags {
  std::optional<double> lambda, tau, sigma, rho;
  std::optional<int> iters, k_update, record_every;

  void add_to(CLI::App* app) {
    app->add_option("--lambda", lambda, "Penalty weight (default: per word length)");
    app->add_option("--tau", tau, "Primal step size (default 1)");
    app->add_option("--sigma", sigma, "Dual step size (default 1)");
    app->add_option("--rho", rho, "Relaxation factor in [0, 1] (default 1/3)");
    app->add_option("--iters", iters, "Iterations (default 200, baseline 500)");
    app->add_option("--k-update", k_update, "U-PHADQ refresh period (default 10)");
    app->add_option("--record-every", record_every, "Trace sampling period");
  }

  void merge_into(phadq::SolverOverrides& o) const {
    if (lambda) o.lambda = lambda;
    if (tau) o.tau = tau;
    if (sigma) o.sigma = sigma;
    if (rho) o.rho = rho;
    if (iters) o.iters = iters;
    if (k_update) o.k_update = k_update;
    if (record_every) o.record_every = record_every;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-aware audio dequantization"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  // quantize
  auto* quantize = app.add_subcommand("quantize", "Peak-normalize and quantize a WAV file");
  std::string q_input, q_output, q_encoding = "f32";
  int q_wordlength = 0;
  std::optional<double> q_seconds;
  quantize->add_option("input", q_input, "Input WAV")->required();
  quantize->add_option("output", q_output, "Quantized WAV")->required();
  quantize->add_option("-w,--wordlength", q_wordlength, "Bits per sample (2..16)")->required();
  quantize->add_option("--seconds", q_seconds, "Truncate to this many seconds first");
  quantize->add_option("--encoding", q_encoding, "16, 24, 32, f32 or f64");

  // restore
  auto* restore = app.add_subcommand("restore", "Dequantize a quantized WAV file");
  phadq::RestoreOptions r_opts;
  std::string r_input, r_method = "bphadq_consistent", r_encoding = "f64";
  std::optional<std::string> r_sidecar, r_reference;
  std::optional<int> r_wordlength;
  std::string r_out_dir = ".";
  SolverFlags r_flags;
  restore->add_option("input", r_input, "Quantized WAV")->required();
  restore->add_option("--sidecar", r_sidecar, "Sidecar JSON (default: <input>.json)");
  restore->add_option("-w,--wordlength", r_wordlength, "Override the sidecar word length");
  restore->add_option("-m,--method", r_method,
                      "bphadq_consistent, bphadq_inconsistent, uphadq, oracle, cp_baseline");
  restore->add_option("--preset", r_opts.preset_name, "full or desk");
  restore->add_option("--reference", r_reference, "Clean WAV for SDR (required by oracle)");
  restore->add_option("--out-dir", r_out_dir, "Output directory");
  restore->add_option("--encoding", r_encoding, "Restored WAV encoding");
  r_flags.add_to(restore);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the full word-length x method grid");
  std::optional<std::string> s_config, s_preset, s_out_dir;
  std::vector<std::string> s_inputs, s_methods, s_wordlengths;
  std::optional<std::string> s_input_dir;
  SolverFlags s_flags;
  sweep->add_option("inputs", s_inputs, "Input WAV files");
  sweep->add_option("--input-dir", s_input_dir, "Directory of WAV files");
  sweep->add_option("--config", s_config, "key = value config file");
  sweep->add_option("-w,--wordlength", s_wordlengths, "Word lengths, e.g. 2-8 or 4,6");
  sweep->add_option("-m,--method", s_methods, "Methods to run (repeatable)");
  sweep->add_option("--preset", s_preset, "full or desk");
  sweep->add_option("--out-dir", s_out_dir, "Output directory");
  s_flags.add_to(sweep);

  // trace-plotdata
  auto* plot = app.add_subcommand("trace-plotdata", "Merge trace CSVs into one SDR table");
  std::vector<std::string> p_traces;
  std::string p_output = "plotdata.csv";
  plot->add_option("traces", p_traces, "Trace CSV files")->required();
  plot->add_option("-o,--output", p_output, "Merged CSV");

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::debug);

  try {
    if (*quantize) {
      auto sidecar = phadq::cmd_quantize(q_input, q_wordlength, q_output, q_seconds,
                                         phadq::parse_wav_encoding(q_encoding));
      std::printf("quantized %zu samples at %d bits (delta %g) -> %s\n",
                  sidecar.length, sidecar.wordlength, sidecar.delta, q_output.c_str());
    } else if (*restore) {
      r_opts.input = r_input;
      if (r_sidecar) r_opts.sidecar = *r_sidecar;
      if (r_reference) r_opts.reference = *r_reference;
      r_opts.wordlength = r_wordlength;
      r_opts.method = phadq::parse_method(r_method);
      r_opts.out_dir = r_out_dir;
      r_opts.encoding = phadq::parse_wav_encoding(r_encoding);
      r_flags.merge_into(r_opts.overrides);
      auto outcome = phadq::cmd_restore(r_opts);
      std::printf("restored -> %s (feasibility violation %g)\n",
                  outcome.restored_wav.string().c_str(), outcome.feasibility);
      if (outcome.sdr_out) {
        std::printf("SDR %.3f dB -> %.3f dB\n", *outcome.sdr_in, *outcome.sdr_out);
      }
    } else if (*sweep) {
      phadq::ExperimentConfig config;
      if (s_config) config = phadq::load_config_file(*s_config);
      if (s_preset) phadq::apply_config_entry(config, "preset", *s_preset);
      if (!s_inputs.empty()) {
        config.inputs.clear();
        for (const auto& in : s_inputs) config.inputs.emplace_back(in);
      }
      if (s_input_dir) phadq::apply_config_entry(config, "input_dir", *s_input_dir);
      if (!s_wordlengths.empty()) {
        std::string joined;
        for (const auto& w : s_wordlengths) joined += (joined.empty() ? "" : ",") + w;
        config.wordlengths = phadq::parse_wordlengths(joined);
      }
      if (!s_methods.empty()) {
        config.methods.clear();
        for (const auto& m : s_methods) config.methods.push_back(phadq::parse_method(m));
      }
      if (s_out_dir) config.out_dir = *s_out_dir;
      s_flags.merge_into(config.overrides);
      auto table = phadq::cmd_sweep(config);
      std::size_t failed = 0;
      for (const auto& row : table.rows) failed += row.status != "ok";
      std::printf("%zu rows (%zu failed) -> %s\n", table.rows.size(), failed,
                  (config.out_dir / "results.csv").string().c_str());
    } else if (*plot) {
      std::vector<std::filesystem::path> paths(p_traces.begin(), p_traces.end());
      std::size_t rows = phadq::cmd_trace_plotdata(paths, p_output);
      std::printf("%zu rows -> %s\n", rows, p_output.c_str());
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
