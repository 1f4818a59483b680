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

#include "phadq/experiment.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "phadq/metrics.hpp"
#include "phadq/quantization.hpp"

namespace phadq {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

/// Shortest representation that round-trips.
std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fixed6(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  std::string s = trim(text);
  T value{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("invalid value '" + s + "' for " +
                                std::string(what));
  }
  return value;
}

std::string csv_safe(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

/// Calibration depends only on the transform geometry; cache it.
double if_scale_for(const GaborParams& params) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, std::size_t, int>, double>
      cache;
  auto key = std::make_tuple(params.win_len, params.hop, params.channels,
                             static_cast<int>(params.convention));
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  IfCalibration cal = calibrate_if_scaling(params);
  spdlog::debug("IF calibration: scale {} (ratio {})", cal.scale, cal.ratio);
  std::lock_guard<std::mutex> lock(mutex);
  cache[key] = cal.scale;
  return cal.scale;
}

std::vector<std::string> trace_header(Method method, int wordlength,
                                      const SolverConfig& cfg) {
  std::ostringstream line;
  line << "method=" << method_name(method) << " wordlength=" << wordlength
       << " lambda=" << shortest(cfg.lambda) << " tau=" << shortest(cfg.tau)
       << " sigma=" << shortest(cfg.sigma) << " rho=" << shortest(cfg.rho)
       << " iters=" << cfg.max_iters << " k_update=" << cfg.k_update
       << " variant="
       << (cfg.variant == Variant::consistent ? "consistent" : "inconsistent");
  return {line.str()};
}

std::vector<fs::path> wav_files_in(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::invalid_argument("not a directory: " + dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (entry.is_regular_file() && ext == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

std::string_view method_name(Method method) {
  switch (method) {
    case Method::bphadq_consistent: return "bphadq_consistent";
    case Method::bphadq_inconsistent: return "bphadq_inconsistent";
    case Method::uphadq: return "uphadq";
    case Method::oracle: return "oracle";
    case Method::cp_baseline: return "cp_baseline";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : all_methods()) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::vector<Method> all_methods() {
  return {Method::bphadq_consistent, Method::bphadq_inconsistent,
          Method::uphadq, Method::oracle, Method::cp_baseline};
}

Preset preset_by_name(std::string_view name) {
  if (name == "full") return Preset{8192, 2048, 16384, 7.0, 10};
  if (name == "desk") return Preset{512, 128, 1024, 1.0, 1};
  throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
}

GaborParams gabor_params(const Preset& preset, std::size_t signal_len) {
  GaborParams p;
  p.win_len = preset.win_len;
  p.hop = preset.hop;
  p.channels = preset.channels;
  p.signal_len = signal_len;
  p.validate();
  return p;
}

SolverConfig solver_config_for(Method method, int wordlength,
                               const SolverOverrides& overrides,
                               int default_record_every) {
  SolverConfig cfg;
  cfg.tau = overrides.tau.value_or(1.0);
  cfg.sigma = overrides.sigma.value_or(1.0);
  cfg.rho = overrides.rho.value_or(1.0 / 3.0);
  cfg.lambda = overrides.lambda ? *overrides.lambda
                                : lambda_for_wordlength(wordlength);
  cfg.max_iters =
      overrides.iters.value_or(method == Method::cp_baseline ? 500 : 200);
  cfg.k_update = overrides.k_update.value_or(10);
  cfg.record_every = overrides.record_every.value_or(default_record_every);
  cfg.variant = method == Method::bphadq_inconsistent ? Variant::inconsistent
                                                      : Variant::consistent;
  switch (method) {
    case Method::oracle: cfg.if_source = IfSource::oracle; break;
    case Method::uphadq: cfg.if_source = IfSource::update_every_k; break;
    default: cfg.if_source = IfSource::degraded; break;
  }
  cfg.validate();
  return cfg;
}

SolverResult run_method(Method method, const FeasibleSet& set,
                        const SolverConfig& cfg,
                        const GaborTransform& transform, double if_scale,
                        std::span<const double> reference) {
  switch (method) {
    case Method::bphadq_consistent:
    case Method::bphadq_inconsistent:
      return bphadq_run(set, cfg, transform,
                        estimate_if(set.yq, transform, if_scale), reference);
    case Method::uphadq:
      return uphadq_run(set, cfg, transform, if_scale, reference);
    case Method::oracle: {
      if (reference.empty()) {
        throw std::invalid_argument("oracle requires reference");
      }
      SolverConfig consistent = cfg;
      consistent.variant = Variant::consistent;
      return bphadq_run(set, consistent, transform,
                        oracle_omega(reference, transform, if_scale),
                        reference);
    }
    case Method::cp_baseline:
      return cp_sparse_baseline(set, cfg, transform, reference);
  }
  throw std::invalid_argument("unknown method");
}

void ExperimentConfig::validate() const {
  if (inputs.empty()) throw std::invalid_argument("no input files");
  if (wordlengths.empty()) throw std::invalid_argument("no word lengths");
  if (methods.empty()) throw std::invalid_argument("no methods");
  for (int w : wordlengths) QuantSpec{w};
}

std::vector<int> parse_wordlengths(std::string_view text) {
  std::vector<int> out;
  for (const std::string& part : split(text, ',')) {
    if (part.empty()) continue;
    auto dash = part.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(parse_number<int>(part, "wordlengths"));
      continue;
    }
    int lo = parse_number<int>(std::string_view(part).substr(0, dash), "wordlengths");
    int hi = parse_number<int>(std::string_view(part).substr(dash + 1), "wordlengths");
    if (hi < lo) throw std::invalid_argument("empty word-length range " + part);
    for (int w = lo; w <= hi; ++w) out.push_back(w);
  }
  if (out.empty()) throw std::invalid_argument("no word lengths in '" + std::string(text) + "'");
  return out;
}

void apply_config_entry(ExperimentConfig& config, std::string_view key_view,
                        std::string_view value_view) {
  const std::string key = trim(key_view);
  const std::string value = trim(value_view);
  SolverOverrides& o = config.overrides;
  if (key == "input" || key == "inputs") {
    for (const std::string& p : split(value, ',')) {
      if (!p.empty()) config.inputs.emplace_back(p);
    }
  } else if (key == "input_dir") {
    for (fs::path& p : wav_files_in(value)) config.inputs.push_back(std::move(p));
  } else if (key == "wordlengths" || key == "wordlength") {
    config.wordlengths = parse_wordlengths(value);
  } else if (key == "methods" || key == "method") {
    config.methods.clear();
    for (const std::string& m : split(value, ',')) {
      if (!m.empty()) config.methods.push_back(parse_method(m));
    }
  } else if (key == "preset") {
    config.preset = preset_by_name(value);
    config.preset_name = value;
  } else if (key == "win_len") {
    config.preset.win_len = parse_number<std::size_t>(value, key);
  } else if (key == "hop") {
    config.preset.hop = parse_number<std::size_t>(value, key);
  } else if (key == "channels") {
    config.preset.channels = parse_number<std::size_t>(value, key);
  } else if (key == "seconds") {
    config.preset.seconds = parse_number<double>(value, key);
  } else if (key == "tau") {
    o.tau = parse_number<double>(value, key);
  } else if (key == "sigma") {
    o.sigma = parse_number<double>(value, key);
  } else if (key == "rho") {
    o.rho = parse_number<double>(value, key);
  } else if (key == "lambda") {
    o.lambda = parse_number<double>(value, key);
  } else if (key == "iters") {
    o.iters = parse_number<int>(value, key);
  } else if (key == "k_update") {
    o.k_update = parse_number<int>(value, key);
  } else if (key == "record_every") {
    o.record_every = parse_number<int>(value, key);
  } else if (key == "out_dir") {
    config.out_dir = value;
  } else if (key == "seed") {
    config.seed = parse_number<std::uint64_t>(value, key);
  } else if (key == "write_traces") {
    config.write_traces = value == "true" || value == "1" || value == "yes";
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ExperimentConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  ExperimentConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    apply_config_entry(config, std::string_view(line).substr(0, eq),
                       std::string_view(line).substr(eq + 1));
  }
  return config;
}

void ResultsTable::sort() {
  std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.file, a.method, a.wordlength) <
           std::tie(b.file, b.method, b.wordlength);
  });
}

void ResultsTable::write_csv(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "file,method,wordlength,sdr_in,sdr_out,sdr_final,delta,best_iter,"
         "iters_run,"
      << kSecondsColumn << ",status\n";
  for (const ResultRow& r : rows) {
    bool ok = r.status == "ok";
    out << csv_safe(r.file) << ',' << r.method << ',' << r.wordlength << ','
        << fixed6(r.sdr_in) << ',' << (ok ? fixed6(r.sdr_out) : "") << ','
        << (ok ? fixed6(r.sdr_final) : "") << ','
        << (ok ? fixed6(r.delta) : "") << ',' << r.best_iter << ','
        << r.iters_run << ',' << fixed6(r.seconds) << ',' << csv_safe(r.status)
        << '\n';
  }
}

void ResultsTable::write_averages_csv(const fs::path& path) const {
  struct Acc {
    int count = 0;
    double sdr_in = 0.0, sdr_out = 0.0, delta = 0.0, best_iter = 0.0;
  };
  std::map<std::pair<std::string, int>, Acc> groups;
  for (const ResultRow& r : rows) {
    if (r.status != "ok") continue;
    Acc& a = groups[{r.method, r.wordlength}];
    ++a.count;
    a.sdr_in += r.sdr_in;
    a.sdr_out += r.sdr_out;
    a.delta += r.delta;
    a.best_iter += r.best_iter;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "method,wordlength,files,sdr_in,sdr_out,delta,best_iter\n";
  for (const auto& [key, a] : groups) {
    double n = a.count;
    out << key.first << ',' << key.second << ',' << a.count << ','
        << fixed6(a.sdr_in / n) << ',' << fixed6(a.sdr_out / n) << ','
        << fixed6(a.delta / n) << ',' << fixed6(a.best_iter / n) << '\n';
  }
}

Signal prepare_excerpt(const Signal& raw, std::optional<double> seconds) {
  Signal s = seconds ? truncate(raw, *seconds) : raw;
  return peak_normalize(s).first;
}

void write_sidecar(const Sidecar& sidecar, const fs::path& path) {
  json j = {{"wordlength", sidecar.wordlength},
            {"delta", sidecar.delta},
            {"gain", sidecar.gain},
            {"sample_rate", sidecar.sample_rate},
            {"length", sidecar.length},
            {"source", sidecar.source}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Sidecar read_sidecar(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sidecar " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  Sidecar s;
  s.wordlength = j.value("wordlength", 0);
  s.delta = j.value("delta", 0.0);
  s.gain = j.value("gain", 1.0);
  s.sample_rate = j.value("sample_rate", 0.0);
  s.length = j.value("length", std::size_t{0});
  s.source = j.value("source", std::string{});
  return s;
}

fs::path sidecar_path_for(const fs::path& wav) {
  fs::path p = wav;
  p.replace_extension(".json");
  return p;
}

Sidecar cmd_quantize(const fs::path& input, int wordlength,
                     const fs::path& output, std::optional<double> seconds,
                     WavEncoding encoding) {
  QuantSpec spec(wordlength);
  Signal raw = load_wav(input);
  Signal trimmed = seconds ? truncate(raw, *seconds) : raw;
  auto [normalized, gain] = peak_normalize(trimmed);

  Signal quantized;
  quantized.sample_rate = normalized.sample_rate;
  quantized.samples = quantize_midriser(normalized.samples, spec);
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  save_wav(quantized, output, encoding);

  Sidecar sidecar;
  sidecar.wordlength = wordlength;
  sidecar.delta = spec.delta();
  sidecar.gain = gain;
  sidecar.sample_rate = quantized.sample_rate;
  sidecar.length = quantized.size();
  sidecar.source = input.filename().string();
  write_sidecar(sidecar, sidecar_path_for(output));
  return sidecar;
}

RestoreOutcome cmd_restore(const RestoreOptions& options) {
  if (options.method == Method::oracle && !options.reference) {
    throw std::invalid_argument("oracle requires reference");
  }
  Signal observed = load_wav(options.input);

  std::optional<int> wordlength = options.wordlength;
  fs::path sidecar_path = options.sidecar.value_or(sidecar_path_for(options.input));
  if (!wordlength && fs::exists(sidecar_path)) {
    Sidecar sidecar = read_sidecar(sidecar_path);
    if (sidecar.wordlength > 0) wordlength = sidecar.wordlength;
  } else if (options.sidecar && !fs::exists(sidecar_path)) {
    throw std::runtime_error("sidecar not found: " + sidecar_path.string());
  }
  if (!wordlength) {
    throw std::invalid_argument(
        "missing wordlength: no sidecar found and --wordlength not given");
  }
  QuantSpec spec(*wordlength);
  FeasibleSet set{observed.samples, spec.delta()};
  std::size_t off_level = std::count_if(
      set.yq.begin(), set.yq.end(),
      [&](double v) { return !on_midriser_level(v, spec.delta()); });
  if (off_level > 0) {
    spdlog::warn("{} of {} samples are not on {}-bit mid-riser levels",
                 off_level, set.size(), *wordlength);
  }

  std::vector<double> reference;
  if (options.reference) {
    Signal raw = load_wav(*options.reference);
    if (raw.size() < set.size()) {
      throw std::invalid_argument("reference is shorter than the observation");
    }
    raw.samples.resize(set.size());
    reference = peak_normalize(raw).first.samples;
  }

  Preset preset = preset_by_name(options.preset_name);
  GaborTransform transform(gabor_params(preset, set.size()));
  double if_scale = if_scale_for(transform.params());
  SolverConfig cfg =
      solver_config_for(options.method, *wordlength, options.overrides, 1);
  SolverResult result =
      run_method(options.method, set, cfg, transform, if_scale, reference);

  fs::create_directories(options.out_dir);
  const std::string base = options.input.stem().string() + "_" +
                           std::string(method_name(options.method));
  RestoreOutcome outcome;
  outcome.restored_wav = options.out_dir / (base + ".wav");
  outcome.trace_csv = options.out_dir / (base + "_trace.csv");
  outcome.result_json = options.out_dir / (base + ".json");
  outcome.config = cfg;
  outcome.feasibility = feasibility_violation(result.signal, set);

  Signal restored{result.signal, observed.sample_rate};
  save_wav(restored, outcome.restored_wav, options.encoding);
  write_trace_csv(result.trace, outcome.trace_csv,
                  trace_header(options.method, *wordlength, cfg));

  json j = {{"method", method_name(options.method)},
            {"wordlength", *wordlength},
            {"delta", spec.delta()},
            {"lambda", cfg.lambda},
            {"tau", cfg.tau},
            {"sigma", cfg.sigma},
            {"rho", cfg.rho},
            {"iters", cfg.max_iters},
            {"k_update", cfg.k_update},
            {"preset", options.preset_name},
            {"if_scale", if_scale},
            {"feasibility_violation", outcome.feasibility}};
  if (!reference.empty()) {
    outcome.sdr_in = sdr(reference, set.yq);
    outcome.sdr_out = sdr(reference, result.signal);
    BestIterate best = best_iterate(result.trace);
    j["sdr_in"] = *outcome.sdr_in;
    j["sdr_out"] = *outcome.sdr_out;
    j["best_iter"] = best.iter;
    j["best_sdr"] = best.sdr_db;
  }
  std::ofstream out(outcome.result_json);
  if (!out) throw std::runtime_error("cannot write " + outcome.result_json.string());
  out << j.dump(2) << '\n';
  return outcome;
}

ResultsTable cmd_sweep(const ExperimentConfig& config) {
  config.validate();
  fs::create_directories(config.out_dir);
  const fs::path trace_dir = config.out_dir / "traces";
  if (config.write_traces) fs::create_directories(trace_dir);

  struct Prepared {
    std::string name;
    Signal clean;
    std::unique_ptr<GaborTransform> transform;
    std::string error;
  };
  std::vector<Prepared> files(config.inputs.size());
  for (std::size_t i = 0; i < config.inputs.size(); ++i) {
    Prepared& f = files[i];
    f.name = config.inputs[i].filename().string();
    try {
      f.clean = prepare_excerpt(load_wav(config.inputs[i]), config.preset.seconds);
      f.transform = std::make_unique<GaborTransform>(
          gabor_params(config.preset, f.clean.size()));
    } catch (const std::exception& e) {
      f.error = e.what();
      spdlog::error("{}: {}", config.inputs[i].string(), e.what());
    }
  }
  double if_scale = 0.0;
  for (const Prepared& f : files) {
    if (f.transform) {
      if_scale = if_scale_for(f.transform->params());
      break;
    }
  }

  struct Cell {
    std::size_t file;
    int wordlength;
    Method method;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < files.size(); ++i) {
    for (int w : config.wordlengths) {
      for (Method m : config.methods) cells.push_back({i, w, m});
    }
  }

  ResultsTable table;
  table.rows.resize(cells.size());
  const std::int64_t cell_count = static_cast<std::int64_t>(cells.size());

#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < cell_count; ++c) {
    const Cell& cell = cells[static_cast<std::size_t>(c)];
    const Prepared& f = files[cell.file];
    ResultRow& row = table.rows[static_cast<std::size_t>(c)];
    row.file = f.name;
    row.method = std::string(method_name(cell.method));
    row.wordlength = cell.wordlength;
    if (!f.error.empty()) {
      row.status = "error: " + f.error;
      continue;
    }
    try {
      const auto start = std::chrono::steady_clock::now();
      QuantSpec spec(cell.wordlength);
      FeasibleSet set{quantize_midriser(f.clean.samples, spec), spec.delta()};
      row.sdr_in = sdr(f.clean.samples, set.yq);
      SolverConfig cfg = solver_config_for(cell.method, cell.wordlength,
                                           config.overrides,
                                           config.preset.record_every);
      SolverResult result = run_method(cell.method, set, cfg, *f.transform,
                                       if_scale, f.clean.samples);
      BestIterate best = best_iterate(result.trace);
      row.sdr_out = best.sdr_db;
      row.best_iter = best.iter;
      row.sdr_final = sdr(f.clean.samples, result.signal);
      row.delta = row.sdr_out - row.sdr_in;
      row.iters_run = result.trace.iterations_run;
      row.seconds = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start)
                        .count();
      if (config.write_traces) {
        fs::path trace = trace_dir / (fs::path(f.name).stem().string() + "_" +
                                      row.method + "_w" +
                                      std::to_string(cell.wordlength) + ".csv");
        write_trace_csv(result.trace, trace,
                        trace_header(cell.method, cell.wordlength, cfg));
      }
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
      spdlog::error("{} / {} / {} bits: {}", f.name, row.method,
                    cell.wordlength, e.what());
    }
  }

  table.sort();
  table.write_csv(config.out_dir / "results.csv");
  table.write_averages_csv(config.out_dir / "averages.csv");
  return table;
}

TraceFile read_trace_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace " + path.string());
  TraceFile file;
  file.label = path.stem().string();
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = trim(std::string_view(line).substr(1));
      file.header_lines.push_back(body);
      std::istringstream tokens(body);
      std::string token;
      while (tokens >> token) {
        auto eq = token.find('=');
        if (eq == std::string::npos) continue;
        std::string key = token.substr(0, eq);
        std::string value = token.substr(eq + 1);
        if (key == "method") file.label = value;
        if (key == "omega_refresh") {
          for (const std::string& v : split(value, ';')) {
            if (!v.empty()) file.trace.omega_refresh.push_back(parse_number<int>(v, key));
          }
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line.rfind("iter,", 0) != 0) {
        throw std::runtime_error(path.string() + ": unexpected trace header");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> cols = split(line, ',');
    if (cols.size() != 5) {
      throw std::runtime_error(path.string() + ": malformed trace row");
    }
    TraceRecord r;
    r.iter = parse_number<int>(cols[0], "iter");
    r.objective = parse_number<double>(cols[1], "objective");
    r.feasibility = parse_number<double>(cols[2], "feasibility");
    if (!cols[3].empty()) r.sdr = parse_number<double>(cols[3], "sdr");
    r.seconds = parse_number<double>(cols[4], "seconds");
    file.trace.records.push_back(r);
    file.trace.iterations_run = r.iter;
  }
  if (!header_seen) throw std::runtime_error(path.string() + ": not a trace CSV");
  return file;
}

std::size_t cmd_trace_plotdata(const std::vector<fs::path>& traces,
                               const fs::path& output) {
  if (traces.empty()) throw std::invalid_argument("no traces given");
  std::vector<TraceFile> files;
  for (const fs::path& p : traces) files.push_back(read_trace_csv(p));

  // Disambiguate repeated labels with the file stem.
  std::map<std::string, int> seen;
  for (const TraceFile& f : files) ++seen[f.label];
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::string label = files[i].label;
    if (seen[label] > 1) label += ":" + traces[i].stem().string();
    labels.push_back(csv_safe(label));
  }

  std::map<int, std::vector<std::string>> table;
  for (std::size_t i = 0; i < files.size(); ++i) {
    for (const TraceRecord& r : files[i].trace.records) {
      auto& cells = table[r.iter];
      cells.resize(files.size());
      if (!std::isnan(r.sdr)) cells[i] = shortest(r.sdr);
    }
  }

  std::ofstream out(output);
  if (!out) throw std::runtime_error("cannot write " + output.string());
  out << "iteration";
  for (const std::string& l : labels) out << ',' << l;
  out << '\n';
  for (auto& [iter, cells] : table) {
    cells.resize(files.size());
    out << iter;
    for (const std::string& c : cells) out << ',' << c;
    out << '\n';
  }
  return table.size();
}

}  // namespace phadq
