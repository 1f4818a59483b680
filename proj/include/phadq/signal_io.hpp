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

#include <cstddef>
#include <filesystem>
#include <string_view>
#include <utility>
#include <vector>

namespace phadq {

/// Mono audio in the canonical sample domain: doubles in [-1, 1].
struct Signal {
  std::vector<double> samples;
  double sample_rate = 44100.0;

  std::size_t size() const { return samples.size(); }
};

/// On-disk sample encodings supported by the WAV writer.
enum class WavEncoding { pcm16, pcm24, pcm32, float32, float64 };

/// Parses "16", "24", "32" (integer PCM), "f32"/"float32" and "f64"/"float64".
WavEncoding parse_wav_encoding(std::string_view text);

/// Reads a RIFF/WAVE file and keeps only its first channel.
/// Integer PCM is scaled by 1/2^(bits-1); float data is taken as is.
/// Throws std::runtime_error on unreadable, unsupported or empty files.
Signal load_wav(const std::filesystem::path& path);

/// Writes a mono WAV. Samples outside [-1, 1] are clipped with a warning.
void save_wav(const Signal& signal, const std::filesystem::path& path,
              WavEncoding encoding);

/// Scales the signal so that max|s| == 1. Returns the applied gain.
/// All-zero input comes back unchanged with gain 1.
std::pair<Signal, double> peak_normalize(const Signal& signal);

/// Keeps the first floor(seconds * rate) samples.
Signal truncate(const Signal& signal, double seconds);

}  // namespace phadq
