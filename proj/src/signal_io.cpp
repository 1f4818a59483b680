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

#include "phadq/signal_io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

namespace phadq {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return std::uint16_t(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(char(v & 0xFF));
  out.push_back(char((v >> 8) & 0xFF));
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
};

double decode_sample(const unsigned char* p, const Format& fmt) {
  if (fmt.tag == kFormatFloat) {
    if (fmt.bits == 32) {
      return double(std::bit_cast<float>(read_u32(p)));
    }
    std::uint64_t raw = std::uint64_t(read_u32(p)) |
                        (std::uint64_t(read_u32(p + 4)) << 32);
    return std::bit_cast<double>(raw);
  }
  switch (fmt.bits) {
    case 16:
      return double(std::int16_t(read_u16(p))) / 32768.0;
    case 24: {
      std::int32_t v = std::int32_t(std::uint32_t(p[0]) << 8 |
                                    std::uint32_t(p[1]) << 16 |
                                    std::uint32_t(p[2]) << 24) >> 8;
      return double(v) / 8388608.0;
    }
    case 32:
      return double(std::int32_t(read_u32(p))) / 2147483648.0;
  }
  throw std::runtime_error("unsupported PCM bit depth");
}

}  // namespace

WavEncoding parse_wav_encoding(std::string_view text) {
  if (text == "16") return WavEncoding::pcm16;
  if (text == "24") return WavEncoding::pcm24;
  if (text == "32") return WavEncoding::pcm32;
  if (text == "f32" || text == "float32") return WavEncoding::float32;
  if (text == "f64" || text == "float64") return WavEncoding::float64;
  throw std::invalid_argument("unknown WAV encoding '" + std::string(text) +
                              "'");
}

Signal load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw std::runtime_error(path.string() + ": not a RIFF/WAVE file");
  }

  Format fmt;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    std::uint32_t size = read_u32(chunk + 4);
    std::size_t body = pos + 8;
    std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) {
        throw std::runtime_error(path.string() + ": truncated fmt chunk");
      }
      const unsigned char* f = bytes.data() + body;
      fmt.tag = read_u16(f);
      fmt.channels = read_u16(f + 2);
      fmt.rate = read_u32(f + 4);
      fmt.bits = read_u16(f + 14);
      if (fmt.tag == kFormatExtensible) {
        if (size < 40 || available < 40) {
          throw std::runtime_error(path.string() + ": truncated fmt chunk");
        }
        fmt.tag = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, available);
    }
    pos = body + size + (size & 1);
  }

  if (!have_fmt || data == nullptr) {
    throw std::runtime_error(path.string() + ": missing fmt or data chunk");
  }
  bool supported =
      (fmt.tag == kFormatPcm &&
       (fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32)) ||
      (fmt.tag == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64));
  if (!supported || fmt.channels == 0) {
    throw std::runtime_error(path.string() + ": unsupported encoding (tag " +
                             std::to_string(fmt.tag) + ", " +
                             std::to_string(fmt.bits) + " bits)");
  }

  const std::size_t sample_bytes = fmt.bits / 8;
  const std::size_t frame_bytes = sample_bytes * fmt.channels;
  const std::size_t frames = data_size / frame_bytes;
  if (frames == 0) throw std::runtime_error("empty signal");

  Signal s;
  s.sample_rate = fmt.rate;
  s.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    s.samples[i] = decode_sample(data + i * frame_bytes, fmt);
  }
  if (!std::all_of(s.samples.begin(), s.samples.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw std::runtime_error(path.string() + ": non-finite samples");
  }
  return s;
}

void save_wav(const Signal& signal, const std::filesystem::path& path,
              WavEncoding encoding) {
  std::uint16_t tag = kFormatPcm;
  std::uint16_t bits = 16;
  switch (encoding) {
    case WavEncoding::pcm16: bits = 16; break;
    case WavEncoding::pcm24: bits = 24; break;
    case WavEncoding::pcm32: bits = 32; break;
    case WavEncoding::float32: tag = kFormatFloat; bits = 32; break;
    case WavEncoding::float64: tag = kFormatFloat; bits = 64; break;
  }
  const std::uint32_t sample_bytes = bits / 8;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(signal.size() * sample_bytes);

  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32(out, 36 + data_size);
  out.append("WAVEfmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(std::lround(signal.sample_rate)));
  put_u32(out, static_cast<std::uint32_t>(std::lround(signal.sample_rate)) *
                   sample_bytes);
  put_u16(out, static_cast<std::uint16_t>(sample_bytes));
  put_u16(out, bits);
  out.append("data");
  put_u32(out, data_size);

  std::size_t clipped = 0;
  for (double v : signal.samples) {
    if (v > 1.0 || v < -1.0) {
      ++clipped;
      v = std::clamp(v, -1.0, 1.0);
    }
    if (tag == kFormatFloat) {
      if (bits == 32) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      } else {
        auto raw = std::bit_cast<std::uint64_t>(v);
        put_u32(out, std::uint32_t(raw));
        put_u32(out, std::uint32_t(raw >> 32));
      }
      continue;
    }
    const double full = std::ldexp(1.0, bits - 1);
    auto q = static_cast<std::int64_t>(std::llround(v * full));
    q = std::clamp<std::int64_t>(q, -std::int64_t(full),
                                 std::int64_t(full) - 1);
    auto u = static_cast<std::uint32_t>(q);
    for (std::uint32_t b = 0; b < sample_bytes; ++b) {
      out.push_back(char((u >> (8 * b)) & 0xFF));
    }
  }
  if (clipped > 0) {
    spdlog::warn("{}: clipped {} samples outside [-1, 1]", path.string(),
                 clipped);
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("write failed for " + path.string());
}

std::pair<Signal, double> peak_normalize(const Signal& signal) {
  double peak = 0.0;
  for (double v : signal.samples) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return {signal, 1.0};
  Signal out = signal;
  for (double& v : out.samples) v /= peak;
  return {std::move(out), 1.0 / peak};
}

Signal truncate(const Signal& signal, double seconds) {
  if (!(seconds > 0.0)) {
    throw std::invalid_argument("truncate: duration must be positive");
  }
  auto limit = static_cast<std::size_t>(std::floor(seconds * signal.sample_rate));
  if (limit >= signal.size()) return signal;
  Signal out;
  out.sample_rate = signal.sample_rate;
  out.samples.assign(signal.samples.begin(),
                     signal.samples.begin() + static_cast<std::ptrdiff_t>(limit));
  return out;
}

}  // namespace phadq
