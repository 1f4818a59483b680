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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "phadq/experiment.hpp"
#include "phadq/metrics.hpp"

namespace fs = std::filesystem;
using namespace phadq;
namespace orc = phadq::oracle;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "phadq_test_experiment" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_tone_wav(const fs::path& path, double seconds, double amp = 0.4) {
  Signal s;
  s.sample_rate = 8000;
  s.samples.resize(std::size_t(seconds * s.sample_rate));
  for (std::size_t l = 0; l < s.size(); ++l) {
    double t = double(l) / s.sample_rate;
    s.samples[l] = amp * (std::sin(2.0 * orc::kPi * 500.0 * t) +
                          0.5 * std::sin(2.0 * orc::kPi * 1310.0 * t + 0.7));
  }
  save_wav(s, path, WavEncoding::float64);
  return path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    rows.push_back(cols);
  }
  return rows;
}

// Small geometry that keeps every solver run in the millisecond range.
void small_geometry(ExperimentConfig& c) {
  apply_config_entry(c, "win_len", "64");
  apply_config_entry(c, "hop", "16");
  apply_config_entry(c, "channels", "128");
  apply_config_entry(c, "seconds", "0.125");
  apply_config_entry(c, "iters", "6");
  apply_config_entry(c, "record_every", "1");
}

int run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + PHADQ_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
  CHECK(all_methods().size() == 5);
  CHECK_THROWS_WITH(parse_method("nonsense"), "unknown method 'nonsense'");
}

TEST_CASE("presets") {
  Preset full = preset_by_name("full");
  CHECK(full.win_len == 8192);
  CHECK(full.hop == 2048);
  CHECK(full.channels == 16384);
  CHECK(full.seconds == 7.0);
  CHECK(full.record_every == 10);
  Preset desk = preset_by_name("desk");
  CHECK(desk.win_len == 512);
  CHECK(desk.hop == 128);
  CHECK(desk.channels == 1024);
  CHECK(desk.seconds == 1.0);
  CHECK_THROWS(preset_by_name("huge"));
  GaborParams p = gabor_params(desk, 44100);
  CHECK(p.signal_len == 44100);
  CHECK(p.channels == 1024);
}

TEST_CASE("solver configuration defaults and overrides") {
  SolverConfig c = solver_config_for(Method::bphadq_consistent, 4, {});
  CHECK(c.max_iters == 200);
  CHECK(c.lambda == 1e-3);
  CHECK(c.tau == 1.0);
  CHECK(c.sigma == 1.0);
  CHECK(c.rho == doctest::Approx(1.0 / 3.0));
  CHECK(c.variant == Variant::consistent);
  CHECK(solver_config_for(Method::bphadq_inconsistent, 4, {}).variant == Variant::inconsistent);
  CHECK(solver_config_for(Method::cp_baseline, 4, {}).max_iters == 500);
  CHECK(solver_config_for(Method::uphadq, 4, {}).if_source == IfSource::update_every_k);
  CHECK(solver_config_for(Method::oracle, 4, {}).if_source == IfSource::oracle);
  for (int w = 2; w <= 8; ++w) {
    CHECK(solver_config_for(Method::uphadq, w, {}).lambda == lambda_for_wordlength(w));
  }
  SolverOverrides o;
  o.lambda = 0.5;
  o.iters = 3;
  o.record_every = 2;
  SolverConfig over = solver_config_for(Method::cp_baseline, 4, o, 10);
  CHECK(over.lambda == 0.5);
  CHECK(over.max_iters == 3);
  CHECK(over.record_every == 2);
  CHECK(solver_config_for(Method::cp_baseline, 4, {}, 10).record_every == 10);
}

TEST_CASE("oracle without a reference is rejected") {
  GaborParams p;
  p.win_len = 64;
  p.hop = 16;
  p.channels = 128;
  p.signal_len = 256;
  GaborTransform g(p);
  FeasibleSet set{std::vector<double>(256, 0.0625), 0.125};
  CHECK_THROWS_WITH(run_method(Method::oracle, set, SolverConfig{}, g, 20.0, {}),
                    "oracle requires reference");
}

TEST_CASE("word length lists") {
  CHECK(parse_wordlengths("2-4,8") == std::vector<int>{2, 3, 4, 8});
  CHECK(parse_wordlengths("5") == std::vector<int>{5});
  CHECK_THROWS(parse_wordlengths("6-3"));
  CHECK_THROWS(parse_wordlengths(""));
  CHECK_THROWS(parse_wordlengths("x"));
}

TEST_CASE("config file parsing") {
  fs::path dir = scratch("config");
  fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "# comment line\n"
                     << "inputs = a.wav, b.wav\n"
                     << "wordlengths = 3-5\n"
                     << "methods = oracle,cp_baseline  # trailing comment\n"
                     << "preset = desk\n"
                     << "lambda = 0.02\n"
                     << "out_dir = " << (dir / "out").string() << "\n";
  ExperimentConfig c = load_config_file(cfg);
  CHECK(c.inputs.size() == 2);
  CHECK(c.wordlengths == std::vector<int>{3, 4, 5});
  CHECK(c.methods == std::vector<Method>{Method::oracle, Method::cp_baseline});
  CHECK(c.preset.win_len == 512);
  CHECK(c.preset_name == "desk");
  CHECK(*c.overrides.lambda == 0.02);
  CHECK(c.out_dir == dir / "out");
  CHECK_NOTHROW(c.validate());

  ExperimentConfig bad;
  CHECK_THROWS(apply_config_entry(bad, "colour", "blue"));
  CHECK_THROWS(apply_config_entry(bad, "iters", "many"));
  CHECK_THROWS(bad.validate());
  std::ofstream(dir / "broken.cfg") << "no equals sign here\n";
  CHECK_THROWS(load_config_file(dir / "broken.cfg"));
  CHECK_THROWS(load_config_file(dir / "absent.cfg"));
}

TEST_CASE("sidecar round trip") {
  fs::path dir = scratch("sidecar");
  Sidecar s{5, 0.0625, 1.75, 8000.0, 1234, "x.wav"};
  fs::path path = sidecar_path_for(dir / "q.wav");
  CHECK(path.extension() == ".json");
  write_sidecar(s, path);
  Sidecar back = read_sidecar(path);
  CHECK(back.wordlength == 5);
  CHECK(back.delta == 0.0625);
  CHECK(back.gain == 1.75);
  CHECK(back.length == 1234);
  CHECK(back.source == "x.wav");
}

TEST_CASE("quantize command") {
  fs::path dir = scratch("quantize");
  fs::path in = write_tone_wav(dir / "tone.wav", 0.5);
  Sidecar s = cmd_quantize(in, 4, dir / "tone_q.wav", 0.25);
  CHECK(s.delta == 0.125);
  CHECK(s.length == 2000);
  Signal q = load_wav(dir / "tone_q.wav");
  CHECK(q.size() == 2000);
  for (double v : q.samples) CHECK(on_midriser_level(v, 0.125));
  CHECK(read_sidecar(sidecar_path_for(dir / "tone_q.wav")).delta == 0.125);
  CHECK_THROWS(cmd_quantize(dir / "missing.wav", 4, dir / "never.wav"));
}

TEST_CASE("restore command") {
  fs::path dir = scratch("restore");
  fs::path clean = write_tone_wav(dir / "clip.wav", 0.1);
  cmd_quantize(clean, 4, dir / "clip_q.wav");

  RestoreOptions opt;
  opt.input = dir / "clip_q.wav";
  opt.preset_name = "desk";
  opt.overrides.iters = 4;
  opt.overrides.lambda = 0.025;
  opt.out_dir = dir / "out";

  RestoreOutcome r = cmd_restore(opt);
  CHECK(fs::exists(r.restored_wav));
  CHECK(r.restored_wav.filename() == "clip_q_bphadq_consistent.wav");
  CHECK(r.feasibility <= 1e-12);
  FeasibleSet set{load_wav(opt.input).samples, 0.125};
  CHECK(feasibility_violation(load_wav(r.restored_wav).samples, set) <= 1e-12);
  CHECK(slurp(r.trace_csv).find("lambda=0.025 ") != std::string::npos);
  CHECK(!r.sdr_out);

  opt.method = Method::oracle;
  CHECK_THROWS_WITH(cmd_restore(opt), "oracle requires reference");
  opt.reference = clean;
  RestoreOutcome o = cmd_restore(opt);
  REQUIRE(o.sdr_out);
  CHECK(*o.sdr_in > 0.0);
  CHECK(slurp(o.result_json).find("\"best_iter\"") != std::string::npos);

  RestoreOptions no_len;
  no_len.input = clean;
  no_len.preset_name = "desk";
  CHECK_THROWS(cmd_restore(no_len));
}

TEST_CASE("sweep grid, averages and determinism") {
  fs::path dir = scratch("sweep");
  fs::path a = write_tone_wav(dir / "a.wav", 0.2, 0.3);
  fs::path b = write_tone_wav(dir / "b.wav", 0.2, 0.7);
  ExperimentConfig c;
  c.inputs = {a, b, dir / "missing.wav"};
  apply_config_entry(c, "wordlengths", "3,5");
  apply_config_entry(c, "methods", "bphadq_consistent,oracle");
  small_geometry(c);
  c.out_dir = dir / "run1";

  ResultsTable t = cmd_sweep(c);
  CHECK(t.rows.size() == 3 * 2 * 2);
  int failed = 0;
  for (const ResultRow& r : t.rows) {
    if (r.status != "ok") {
      ++failed;
      CHECK(r.file == "missing.wav");
      continue;
    }
    CHECK(r.delta == doctest::Approx(r.sdr_out - r.sdr_in));
    CHECK(r.iters_run == 6);
    CHECK(r.best_iter >= 1);
    CHECK(r.sdr_out >= r.sdr_final);
  }
  CHECK(failed == 4);

  auto results = read_csv(c.out_dir / "results.csv");
  CHECK(results[0] == std::vector<std::string>{"file", "method", "wordlength", "sdr_in",
                                               "sdr_out", "sdr_final", "delta", "best_iter",
                                               "iters_run", "seconds", "status"});
  auto averages = read_csv(c.out_dir / "averages.csv");
  REQUIRE(averages.size() == 1 + 4);
  // Recompute each average from the successful rows.
  for (std::size_t i = 1; i < averages.size(); ++i) {
    double sum = 0.0;
    int n = 0;
    for (const ResultRow& r : t.rows) {
      if (r.status == "ok" && r.method == averages[i][0] &&
          std::to_string(r.wordlength) == averages[i][1]) {
        sum += r.sdr_out;
        ++n;
      }
    }
    CHECK(averages[i][2] == std::to_string(n));
    CHECK(std::stod(averages[i][4]) == doctest::Approx(sum / n).epsilon(1e-6));
  }
  CHECK(fs::exists(c.out_dir / "traces" / "a_oracle_w3.csv"));

  c.out_dir = dir / "run2";
  cmd_sweep(c);
  CHECK(slurp(dir / "run1" / "averages.csv") == slurp(dir / "run2" / "averages.csv"));
  auto r1 = read_csv(dir / "run1" / "results.csv");
  auto r2 = read_csv(dir / "run2" / "results.csv");
  REQUIRE(r1.size() == r2.size());
  const auto seconds_col = std::size_t(
      std::find(r1[0].begin(), r1[0].end(), std::string(kSecondsColumn)) - r1[0].begin());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    r1[i].erase(r1[i].begin() + long(seconds_col));
    r2[i].erase(r2[i].begin() + long(seconds_col));
    CHECK(r1[i] == r2[i]);
  }
}

TEST_CASE("trace plot data") {
  fs::path dir = scratch("plot");
  std::vector<fs::path> traces;
  const char* methods[] = {"oracle", "uphadq", "cp_baseline"};
  for (int k = 0; k < 3; ++k) {
    SolverTrace t;
    for (int i = 1; i <= 4; ++i) {
      TraceRecord r;
      r.iter = i;
      r.sdr = 10.0 + i + k;
      t.records.push_back(r);
    }
    fs::path p = dir / (std::string(methods[k]) + ".csv");
    write_trace_csv(t, p, {std::string("method=") + methods[k] + " wordlength=4"});
    traces.push_back(p);
  }
  CHECK(cmd_trace_plotdata(traces, dir / "plot.csv") == 4);
  auto rows = read_csv(dir / "plot.csv");
  CHECK(rows[0] == std::vector<std::string>{"iteration", "oracle", "uphadq", "cp_baseline"});
  CHECK(rows.size() == 5);
  CHECK(std::stod(rows[2][1]) == 12.0);

  cmd_trace_plotdata(traces, dir / "plot2.csv");
  CHECK(slurp(dir / "plot.csv") == slurp(dir / "plot2.csv"));

  TraceFile f = read_trace_csv(traces[0]);
  CHECK(f.label == "oracle");
  CHECK(f.trace.records.size() == 4);
  CHECK_THROWS(cmd_trace_plotdata({dir / "nope.csv"}, dir / "x.csv"));
  CHECK_THROWS(cmd_trace_plotdata({}, dir / "x.csv"));
}

TEST_CASE("command-line exit codes") {
  fs::path dir = scratch("cli");
  fs::path clean = write_tone_wav(dir / "c.wav", 0.05);
  const std::string d = dir.string();
  CHECK(run_cli("quantize " + clean.string() + " " + d + "/q.wav -w 4") == 0);
  CHECK(run_cli("quantize " + d + "/absent.wav " + d + "/q2.wav -w 4") != 0);
  CHECK(run_cli("restore " + d + "/q.wav --preset desk --iters 2 --out-dir " + d) == 0);
  CHECK(fs::exists(dir / "q_bphadq_consistent.wav"));
  CHECK(run_cli("restore " + d + "/q.wav --method oracle --preset desk --out-dir " + d) != 0);
  CHECK(run_cli("restore " + d + "/q.wav --method bogus") != 0);
  CHECK(run_cli("frobnicate") != 0);
}
