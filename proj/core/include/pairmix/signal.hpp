// Copyright 2026 The PairMix Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pairmix {

/// Raised for unreadable, malformed or unsupported audio and mel files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mono 32-bit float audio. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 0;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_seconds() const noexcept {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

/// Throws std::invalid_argument if the waveform is empty, has a non-positive
/// rate or contains non-finite samples.
void validate(const Waveform& w);

/// Parameters of the log-mel front end.
struct MelParams {
  int sample_rate = 32000;
  std::size_t fft_size = 1024;
  std::size_t hop_size = 320;
  std::size_t window_size = 1024;
  std::size_t n_mels = 64;
  double f_min = 50.0;
  double f_max = 14000.0;
  double log_floor = 1e-10;

  friend bool operator==(const MelParams&, const MelParams&) = default;
};

/// Throws std::invalid_argument when hop <= window <= fft, 0 <= f_min < f_max <= sr/2,
/// n_mels >= 1 or log_floor > 0 is violated.
void validate(const MelParams& p);

/// Log-power mel grid, row-major [frame][mel].
struct MelSpectrogram {
  std::vector<float> data;
  std::size_t n_frames = 0;
  std::size_t n_mels = 0;
  MelParams params;

  float& at(std::size_t frame, std::size_t mel) { return data[frame * n_mels + mel]; }
  float at(std::size_t frame, std::size_t mel) const { return data[frame * n_mels + mel]; }
  std::span<const float> frame(std::size_t i) const {
    return std::span<const float>(data).subspan(i * n_mels, n_mels);
  }
};

// --- WAV I/O ---------------------------------------------------------------

enum class WavEncoding { kPcm16, kFloat32 };

/// Reads a RIFF/WAVE file (PCM 8/16/24/32-bit integer or 32-bit IEEE float,
/// including WAVE_FORMAT_EXTENSIBLE). Multi-channel input is averaged to mono.
/// Integer PCM is scaled by 1/2^(bits-1); 8-bit PCM is unsigned with offset 128.
Waveform load_wav(const std::filesystem::path& path);

/// Parses an in-memory WAV image.
Waveform decode_wav(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_wav(const Waveform& w, WavEncoding encoding = WavEncoding::kPcm16);

void write_wav(const std::filesystem::path& path, const Waveform& w,
               WavEncoding encoding = WavEncoding::kPcm16);

// --- Conditioning ------------------------------------------------------------

/// Band-limited (Kaiser-windowed sinc) resampling. Returns an exact copy when
/// the rates already match.
Waveform resample(const Waveform& w, int target_rate);

/// Truncates from the end or zero-pads at the end to round(seconds * rate) samples.
Waveform fix_length(const Waveform& w, double seconds);

// --- Mel front end ---------------------------------------------------------

/// Mel scale with Slaney's piecewise mapping: linear below 1 kHz, logarithmic above.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular, area-normalized filterbank. Row m holds weights for the
/// fft_size/2 + 1 power bins.
class MelFilterbank {
 public:
  explicit MelFilterbank(const MelParams& params);

  std::size_t n_mels() const noexcept { return n_mels_; }
  std::size_t n_bins() const noexcept { return n_bins_; }

  /// Center frequency of filter m in Hz.
  double center_hz(std::size_t m) const { return edges_hz_.at(m + 1); }

  std::span<const double> row(std::size_t m) const {
    return std::span<const double>(weights_).subspan(m * n_bins_, n_bins_);
  }

  /// Applies the bank to one power spectrum.
  void apply(std::span<const double> power, std::span<double> out) const;

 private:
  std::size_t n_mels_;
  std::size_t n_bins_;
  std::vector<double> edges_hz_;
  std::vector<double> weights_;
  // First and one-past-last nonzero bin per row.
  std::vector<std::pair<std::size_t, std::size_t>> support_;
};

/// Number of frames for a signal of `length` samples under centered
/// (reflect-padded by window_size/2) framing.
std::size_t frame_count(std::size_t length, const MelParams& p);

/// Hann-windowed power STFT -> mel filterbank -> ln(max(power, log_floor)).
/// Throws std::invalid_argument if w.sample_rate != p.sample_rate.
MelSpectrogram mel_transform(const Waveform& w, const MelParams& p);

// --- Mel binary format ("MELS", version 1, little-endian) --------------------

std::vector<std::uint8_t> encode_mel(const MelSpectrogram& s);

/// The result carries default MelParams except n_mels; the file stores
/// dimensions only.
MelSpectrogram decode_mel(std::span<const std::uint8_t> bytes);

void write_mel(const std::filesystem::path& path, const MelSpectrogram& s);
MelSpectrogram read_mel(const std::filesystem::path& path);

}  // namespace pairmix
