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

#include "pairmix/signal.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>

#include "pairmix/dsp.hpp"
#include "pairmix/fileio.hpp"

namespace pairmix {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) |
         (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5]) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t off, const char (&tag)[5]) {
  return std::memcmp(b.data() + off, tag, 4) == 0;
}

// Decodes one sample at `p` to [-1, 1].
double decode_sample(const std::uint8_t* p, std::uint16_t format, std::uint16_t bits) {
  if (format == kFormatFloat) {
    const std::uint32_t raw = static_cast<std::uint32_t>(p[0]) |
                              (static_cast<std::uint32_t>(p[1]) << 8) |
                              (static_cast<std::uint32_t>(p[2]) << 16) |
                              (static_cast<std::uint32_t>(p[3]) << 24);
    return static_cast<double>(std::bit_cast<float>(raw));
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16: {
      const auto v = static_cast<std::int16_t>(p[0] | (p[1] << 8));
      return v / 32768.0;
    }
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) {
        v -= 0x1000000;
      }
      return v / 8388608.0;
    }
    default: {
      const auto v = static_cast<std::int32_t>(static_cast<std::uint32_t>(p[0]) |
                                               (static_cast<std::uint32_t>(p[1]) << 8) |
                                               (static_cast<std::uint32_t>(p[2]) << 16) |
                                               (static_cast<std::uint32_t>(p[3]) << 24));
      return v / 2147483648.0;
    }
  }
}

// Kaiser-windowed sinc, tabulated at kTableDensity points per zero crossing.
constexpr int kZeroCrossings = 16;
constexpr int kTableDensity = 512;
constexpr double kKaiserBeta = 8.6;

const std::vector<double>& sinc_table() {
  static const std::vector<double> table = [] {
    const std::size_t size = static_cast<std::size_t>(kZeroCrossings * kTableDensity) + 2;
    std::vector<double> t(size);
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (std::size_t i = 0; i < size; ++i) {
      const double x = static_cast<double>(i) / kTableDensity;
      const double r = std::min(1.0, x / kZeroCrossings);
      const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
      const double sinc = x == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
      t[i] = sinc * window;
    }
    t.back() = 0.0;
    return t;
  }();
  return table;
}

double windowed_sinc(double x) {
  x = std::abs(x);
  if (x >= kZeroCrossings) {
    return 0.0;
  }
  const auto& t = sinc_table();
  const double pos = x * kTableDensity;
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return t[i] + frac * (t[i + 1] - t[i]);
}

// Mirror index into [0, n) with numpy-style 'reflect' (edge not repeated),
// applied repeatedly for pads longer than the signal.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) {
    return 0;
  }
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) {
    m += period;
  }
  if (m >= static_cast<std::ptrdiff_t>(n)) {
    m = period - m;
  }
  return static_cast<std::size_t>(m);
}

}  // namespace

void validate(const Waveform& w) {
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("waveform sample rate must be positive");
  }
  if (w.samples.empty()) {
    throw std::invalid_argument("waveform is empty");
  }
  for (float s : w.samples) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("waveform contains non-finite samples");
    }
  }
}

void validate(const MelParams& p) {
  if (p.sample_rate <= 0) {
    throw std::invalid_argument("mel: sample_rate must be positive");
  }
  if (p.hop_size == 0 || p.hop_size > p.window_size || p.window_size > p.fft_size) {
    throw std::invalid_argument("mel: require 0 < hop_size <= window_size <= fft_size");
  }
  if (!(p.f_min >= 0.0 && p.f_min < p.f_max && p.f_max <= p.sample_rate / 2.0)) {
    throw std::invalid_argument("mel: require 0 <= f_min < f_max <= sample_rate/2");
  }
  if (p.n_mels == 0) {
    throw std::invalid_argument("mel: n_mels must be >= 1");
  }
  if (!(p.log_floor > 0.0)) {
    throw std::invalid_argument("mel: log_floor must be > 0");
  }
}

// --- WAV ---------------------------------------------------------------------

Waveform decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw FormatError("not a RIFF/WAVE file");
  }
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  bool have_fmt = false;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = read_u32(bytes, off + 4);
    const std::size_t body = off + 8;
    // Tolerate a truncated final data chunk (common with streamed writers).
    const std::size_t avail = std::min<std::size_t>(chunk_size, bytes.size() - body);
    if (tag_is(bytes, off, "fmt ")) {
      if (avail < 16) {
        throw FormatError("fmt chunk too short");
      }
      format = read_u16(bytes, body);
      channels = read_u16(bytes, body + 2);
      rate = read_u32(bytes, body + 4);
      bits = read_u16(bytes, body + 14);
      if (format == kFormatExtensible) {
        if (avail < 26) {
          throw FormatError("extensible fmt chunk too short");
        }
        format = read_u16(bytes, body + 24);
      }
      have_fmt = true;
    } else if (tag_is(bytes, off, "data")) {
      data = bytes.subspan(body, avail);
      have_data = true;
    }
    off = body + avail + (avail & 1U);
  }

  if (!have_fmt || !have_data) {
    throw FormatError("missing fmt or data chunk");
  }
  if (channels == 0 || rate == 0) {
    throw FormatError("invalid channel count or sample rate");
  }
  const bool pcm_ok = format == kFormatPcm && (bits == 8 || bits == 16 || bits == 24 || bits == 32);
  const bool float_ok = format == kFormatFloat && bits == 32;
  if (!pcm_ok && !float_ok) {
    throw FormatError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits)");
  }

  const std::size_t frame_bytes = static_cast<std::size_t>(bits / 8) * channels;
  const std::size_t n_frames = data.size() / frame_bytes;
  if (n_frames == 0) {
    throw FormatError("WAV contains no audio");
  }

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const std::uint8_t* frame = data.data() + i * frame_bytes;
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      acc += decode_sample(frame + static_cast<std::size_t>(c) * (bits / 8), format, bits);
    }
    const double mono = acc / channels;
    if (!std::isfinite(mono)) {
      throw FormatError("WAV contains non-finite samples");
    }
    w.samples[i] = static_cast<float>(mono);
  }
  return w;
}

Waveform load_wav(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const std::runtime_error& e) {
    throw FormatError(e.what());
  }
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const Waveform& w, WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t format = encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * (bits / 8));

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  put_u16(out, bits / 8);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (float s : w.samples) {
    if (encoding == WavEncoding::kPcm16) {
      const double scaled = std::round(static_cast<double>(s) * 32768.0);
      const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
      put_u16(out, static_cast<std::uint16_t>(v));
    } else {
      put_u32(out, std::bit_cast<std::uint32_t>(s));
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, const Waveform& w, WavEncoding encoding) {
  write_file_atomic(path, encode_wav(w, encoding));
}

// --- Conditioning --------------------------------------------------------------

Waveform resample(const Waveform& w, int target_rate) {
  if (target_rate <= 0) {
    throw std::invalid_argument("resample: target rate must be positive");
  }
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("resample: source rate must be positive");
  }
  if (w.sample_rate == target_rate) {
    return w;
  }
  const double ratio = static_cast<double>(target_rate) / w.sample_rate;
  const double cutoff = std::min(1.0, ratio);
  const double half_width = kZeroCrossings / cutoff;  // in input samples
  const auto n_in = static_cast<std::ptrdiff_t>(w.samples.size());
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(w.samples.size()) * ratio));

  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (std::size_t m = 0; m < n_out; ++m) {
    const double t = static_cast<double>(m) / ratio;
    const auto first = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(t - half_width)));
    const auto last = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(t + half_width)));
    double acc = 0.0;
    double weight_sum = 0.0;
    for (std::ptrdiff_t k = first; k <= last; ++k) {
      const double weight = windowed_sinc((t - static_cast<double>(k)) * cutoff);
      acc += weight * w.samples[static_cast<std::size_t>(k)];
      weight_sum += weight;
    }
    // Normalizing by the realized kernel mass keeps DC gain at exactly one,
    // including near the edges where the kernel is cut off.
    out.samples[m] = weight_sum > 0.0 ? static_cast<float>(acc / weight_sum) : 0.0F;
  }
  return out;
}

Waveform fix_length(const Waveform& w, double seconds) {
  if (!(seconds > 0.0)) {
    throw std::invalid_argument("fix_length: duration must be positive");
  }
  const auto target = static_cast<std::size_t>(std::llround(seconds * w.sample_rate));
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(target, 0.0F);
  std::copy_n(w.samples.begin(), std::min(target, w.samples.size()), out.samples.begin());
  return out;
}

// --- Mel --------------------------------------------------------------------------

double hz_to_mel(double hz) {
  constexpr double kSpacing = 200.0 / 3.0;
  constexpr double kBreakHz = 1000.0;
  const double log_step = std::log(6.4) / 27.0;
  if (hz < kBreakHz) {
    return hz / kSpacing;
  }
  return kBreakHz / kSpacing + std::log(hz / kBreakHz) / log_step;
}

double mel_to_hz(double mel) {
  constexpr double kSpacing = 200.0 / 3.0;
  constexpr double kBreakHz = 1000.0;
  constexpr double kBreakMel = kBreakHz / kSpacing;
  const double log_step = std::log(6.4) / 27.0;
  if (mel < kBreakMel) {
    return mel * kSpacing;
  }
  return kBreakHz * std::exp(log_step * (mel - kBreakMel));
}

MelFilterbank::MelFilterbank(const MelParams& params)
    : n_mels_(params.n_mels), n_bins_(params.fft_size / 2 + 1) {
  validate(params);
  const double mel_lo = hz_to_mel(params.f_min);
  const double mel_hi = hz_to_mel(params.f_max);
  edges_hz_.resize(n_mels_ + 2);
  for (std::size_t i = 0; i < edges_hz_.size(); ++i) {
    const double mel =
        mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels_ + 1);
    edges_hz_[i] = mel_to_hz(mel);
  }

  weights_.assign(n_mels_ * n_bins_, 0.0);
  support_.assign(n_mels_, {0, 0});
  const double bin_hz = static_cast<double>(params.sample_rate) / static_cast<double>(params.fft_size);
  for (std::size_t m = 0; m < n_mels_; ++m) {
    const double lo = edges_hz_[m];
    const double center = edges_hz_[m + 1];
    const double hi = edges_hz_[m + 2];
    const double area_norm = 2.0 / (hi - lo);
    std::size_t first = n_bins_;
    std::size_t last = 0;
    for (std::size_t k = 0; k < n_bins_; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      const double rising = (f - lo) / (center - lo);
      const double falling = (hi - f) / (hi - center);
      const double w = std::max(0.0, std::min(rising, falling));
      if (w > 0.0) {
        weights_[m * n_bins_ + k] = w * area_norm;
        first = std::min(first, k);
        last = k + 1;
      }
    }
    if (first >= last) {
      throw std::invalid_argument("mel: filter " + std::to_string(m) +
                                  " covers no FFT bin; increase fft_size or reduce n_mels");
    }
    support_[m] = {first, last};
  }
}

void MelFilterbank::apply(std::span<const double> power, std::span<double> out) const {
  for (std::size_t m = 0; m < n_mels_; ++m) {
    const auto [first, last] = support_[m];
    const double* w = weights_.data() + m * n_bins_;
    double acc = 0.0;
    for (std::size_t k = first; k < last; ++k) {
      acc += w[k] * power[k];
    }
    out[m] = acc;
  }
}

std::size_t frame_count(std::size_t length, const MelParams& p) {
  const std::size_t padded = length + 2 * (p.window_size / 2);
  if (padded < p.window_size) {
    return 0;
  }
  return 1 + (padded - p.window_size) / p.hop_size;
}

MelSpectrogram mel_transform(const Waveform& w, const MelParams& p) {
  validate(p);
  if (w.sample_rate != p.sample_rate) {
    throw std::invalid_argument("mel_transform: waveform rate " + std::to_string(w.sample_rate) +
                                " Hz does not match mel params rate " +
                                std::to_string(p.sample_rate) + " Hz; resample first");
  }
  if (w.samples.empty()) {
    throw std::invalid_argument("mel_transform: empty waveform");
  }

  const MelFilterbank bank(p);
  const std::vector<double> window = dsp::hann_window(p.window_size);
  const auto pad = static_cast<std::ptrdiff_t>(p.window_size / 2);
  const std::size_t n = w.samples.size();

  MelSpectrogram out;
  out.params = p;
  out.n_mels = p.n_mels;
  out.n_frames = frame_count(n, p);
  out.data.resize(out.n_frames * out.n_mels);

  std::vector<double> frame(p.window_size);
  std::vector<double> mel(p.n_mels);
  const double floor = p.log_floor;
  for (std::size_t f = 0; f < out.n_frames; ++f) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(f * p.hop_size) - pad;
    for (std::size_t i = 0; i < p.window_size; ++i) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
      const std::size_t src = (idx >= 0 && idx < static_cast<std::ptrdiff_t>(n))
                                  ? static_cast<std::size_t>(idx)
                                  : reflect_index(idx, n);
      frame[i] = static_cast<double>(w.samples[src]) * window[i];
    }
    const std::vector<double> power = dsp::power_spectrum(frame, p.fft_size);
    bank.apply(power, mel);
    for (std::size_t m = 0; m < p.n_mels; ++m) {
      out.data[f * out.n_mels + m] = static_cast<float>(std::log(std::max(mel[m], floor)));
    }
  }
  return out;
}

// --- MELS binary --------------------------------------------------------------------

std::vector<std::uint8_t> encode_mel(const MelSpectrogram& s) {
  if (s.data.size() != s.n_frames * s.n_mels) {
    throw std::invalid_argument("encode_mel: data size does not match dimensions");
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * s.data.size());
  put_tag(out, "MELS");
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(s.n_frames));
  put_u32(out, static_cast<std::uint32_t>(s.n_mels));
  for (float v : s.data) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

MelSpectrogram decode_mel(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || !tag_is(bytes, 0, "MELS")) {
    throw FormatError("not a MELS file");
  }
  const std::uint32_t version = read_u32(bytes, 4);
  if (version != 1) {
    throw FormatError("unsupported MELS version " + std::to_string(version));
  }
  MelSpectrogram s;
  s.n_frames = read_u32(bytes, 8);
  s.n_mels = read_u32(bytes, 12);
  s.params.n_mels = s.n_mels;
  const std::size_t count = s.n_frames * s.n_mels;
  if (bytes.size() != 16 + 4 * count) {
    throw FormatError("MELS payload size does not match header");
  }
  s.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    s.data[i] = std::bit_cast<float>(read_u32(bytes, 16 + 4 * i));
  }
  return s;
}

void write_mel(const std::filesystem::path& path, const MelSpectrogram& s) {
  write_file_atomic(path, encode_mel(s));
}

MelSpectrogram read_mel(const std::filesystem::path& path) {
  try {
    return decode_mel(read_file_bytes(path));
  } catch (const std::runtime_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace pairmix
