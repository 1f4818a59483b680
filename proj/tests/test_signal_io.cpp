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
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "phadq/signal_io.hpp"

namespace fs = std::filesystem;
using namespace phadq;

namespace {

fs::path temp_file(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "phadq_test_signal_io";
  fs::create_directories(dir);
  return dir / name;
}

void put16(std::string& s, std::uint16_t v) {
  s.push_back(char(v & 0xFF));
  s.push_back(char(v >> 8));
}
void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xFF));
}

// Hand-assembled 16-bit PCM WAV with interleaved samples.
fs::path write_pcm16(const std::string& name, std::uint16_t channels,
                     const std::vector<std::int16_t>& interleaved) {
  std::string b = "RIFF";
  put32(b, 36 + 2 * std::uint32_t(interleaved.size()));
  b += "WAVEfmt ";
  put32(b, 16);
  put16(b, 1);
  put16(b, channels);
  put32(b, 8000);
  put32(b, 8000 * 2 * channels);
  put16(b, 2 * channels);
  put16(b, 16);
  b += "data";
  put32(b, 2 * std::uint32_t(interleaved.size()));
  for (std::int16_t v : interleaved) put16(b, std::uint16_t(v));
  fs::path p = temp_file(name);
  std::ofstream(p, std::ios::binary).write(b.data(), std::streamsize(b.size()));
  return p;
}

Signal random_signal(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Signal s;
  s.sample_rate = 44100;
  s.samples.resize(n);
  for (double& v : s.samples) v = dist(rng);
  return s;
}

}  // namespace

TEST_CASE("load_wav maps 16-bit full scale to -1") {
  fs::path p = write_pcm16("full.wav", 1, {-32768, 0, 16384});
  Signal s = load_wav(p);
  REQUIRE(s.size() == 3);
  CHECK(s.samples[0] == -1.0);
  CHECK(s.samples[1] == 0.0);
  CHECK(s.samples[2] == 0.5);
  CHECK(s.sample_rate == 8000.0);
}

TEST_CASE("load_wav keeps the first channel of a stereo file") {
  fs::path p = write_pcm16("stereo.wav", 2, {100, -100, 200, -200, 300, -300});
  Signal s = load_wav(p);
  REQUIRE(s.size() == 3);
  CHECK(s.samples[0] == doctest::Approx(100.0 / 32768.0));
  CHECK(s.samples[2] == doctest::Approx(300.0 / 32768.0));
}

TEST_CASE("load_wav rejects empty, missing and malformed files") {
  fs::path empty = write_pcm16("empty.wav", 1, {});
  CHECK_THROWS_WITH(load_wav(empty), "empty signal");
  CHECK_THROWS(load_wav(temp_file("missing.wav")));

  fs::path junk = temp_file("junk.wav");
  std::ofstream(junk) << "definitely not audio";
  CHECK_THROWS(load_wav(junk));
}

TEST_CASE("64-bit float round trip is bit-exact") {
  Signal s = random_signal(1000, 1);
  fs::path p = temp_file("f64.wav");
  save_wav(s, p, WavEncoding::float64);
  Signal back = load_wav(p);
  CHECK(back.samples == s.samples);
  CHECK(back.sample_rate == s.sample_rate);
}

TEST_CASE("32-bit float round trip matches float precision") {
  Signal s = random_signal(500, 2);
  for (double& v : s.samples) v = static_cast<float>(v);
  fs::path p = temp_file("f32.wav");
  save_wav(s, p, WavEncoding::float32);
  CHECK(load_wav(p).samples == s.samples);
}

TEST_CASE("integer PCM round trip stays within one quantization step") {
  Signal s = random_signal(2000, 3);
  for (auto [enc, bits] : {std::pair{WavEncoding::pcm16, 16},
                           std::pair{WavEncoding::pcm24, 24},
                           std::pair{WavEncoding::pcm32, 32}}) {
    fs::path p = temp_file("pcm" + std::to_string(bits) + ".wav");
    save_wav(s, p, enc);
    Signal back = load_wav(p);
    REQUIRE(back.size() == s.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      worst = std::max(worst, std::abs(back.samples[i] - s.samples[i]));
    }
    CHECK(worst <= std::ldexp(1.0, 1 - bits));
  }
}

TEST_CASE("save_wav clips out-of-range samples") {
  Signal s{{1.2, -3.0, 0.5}, 44100};
  fs::path p = temp_file("clip.wav");
  save_wav(s, p, WavEncoding::float64);
  Signal back = load_wav(p);
  CHECK(back.samples == std::vector<double>{1.0, -1.0, 0.5});
}

TEST_CASE("save_wav reports unwritable paths") {
  Signal s{{0.0}, 44100};
  CHECK_THROWS(save_wav(s, "/nonexistent-dir/x/y.wav", WavEncoding::pcm16));
}

TEST_CASE("parse_wav_encoding") {
  CHECK(parse_wav_encoding("16") == WavEncoding::pcm16);
  CHECK(parse_wav_encoding("f64") == WavEncoding::float64);
  CHECK_THROWS(parse_wav_encoding("8"));
}

TEST_CASE("peak_normalize") {
  SUBCASE("scales to unit peak and reports the gain") {
    auto [out, gain] = peak_normalize(Signal{{0.5, -0.25}, 44100});
    CHECK(out.samples == std::vector<double>{1.0, -0.5});
    CHECK(gain == 2.0);
  }
  SUBCASE("all-zero input is the identity") {
    auto [out, gain] = peak_normalize(Signal{{0.0, 0.0, 0.0}, 44100});
    CHECK(out.samples == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(gain == 1.0);
  }
  SUBCASE("peak is exactly one and normalization is idempotent") {
    for (unsigned seed = 0; seed < 20; ++seed) {
      Signal s = random_signal(257, seed);
      for (double& v : s.samples) v *= 0.37;
      auto once = peak_normalize(s).first;
      double peak = 0.0;
      for (double v : once.samples) peak = std::max(peak, std::abs(v));
      CHECK(peak == 1.0);
      CHECK(peak_normalize(once).first.samples == once.samples);
    }
  }
}

TEST_CASE("truncate") {
  Signal ten;
  ten.sample_rate = 44100;
  ten.samples.assign(441000, 0.1);
  CHECK(truncate(ten, 7.0).size() == 308700);

  Signal three;
  three.sample_rate = 44100;
  three.samples.assign(3 * 44100, 0.1);
  CHECK(truncate(three, 7.0).size() == three.size());

  CHECK_THROWS(truncate(ten, 0.0));
  CHECK_THROWS(truncate(ten, -1.0));

  Signal once = truncate(ten, 2.5);
  CHECK(truncate(once, 2.5).samples == once.samples);
}
