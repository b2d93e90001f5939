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

#include "pairmix/dsp.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <utility>

namespace pairmix::dsp {

namespace {

void direct_dft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  const double sign = inverse ? 1.0 : -1.0;
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((k * t) % n) /
                           static_cast<double>(n);
      acc += data[t] * std::polar(1.0, angle);
    }
    out[k] = acc;
  }
  data = std::move(out);
}

// Forward twiddles exp(-2*pi*i*k/n), k < n/2, cached per thread and size.
// Plain product; std::complex operator* goes through the slow NaN-recovering
// path (__muldc3) unless -fcx-limited-range is on.
inline std::complex<double> mul(std::complex<double> a, std::complex<double> b) noexcept {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

const std::vector<std::complex<double>>& twiddles(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::vector<std::complex<double>>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<std::complex<double>> table(n / 2);
    for (std::size_t k = 0; k < table.size(); ++k) {
      table[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(n));
    }
    it = cache.emplace(n, std::move(table)).first;
  }
  return it->second;
}

}  // namespace

std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) {
    p <<= 1;
  }
  return p;
}

void fft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  if (n <= 1) {
    return;
  }
  if (!is_power_of_two(n)) {
    direct_dft(data, inverse);
    if (inverse) {
      for (auto& v : data) {
        v /= static_cast<double>(n);
      }
    }
    return;
  }

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) {
      j ^= bit;
    }
    j ^= bit;
    if (i < j) {
      std::swap(data[i], data[j]);
    }
  }

  const std::vector<std::complex<double>>& table = twiddles(n);
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = n / len;
    for (std::size_t k = 0; k < half; ++k) {
      const std::complex<double> w =
          inverse ? std::conj(table[k * stride]) : table[k * stride];
      for (std::size_t start = 0; start < n; start += len) {
        const std::complex<double> u = data[start + k];
        const std::complex<double> v = mul(data[start + k + half], w);
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }

  if (inverse) {
    for (auto& v : data) {
      v /= static_cast<double>(n);
    }
  }
}

std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size) {
  std::vector<std::complex<double>> buf(fft_size);
  const std::size_t count = frame.size() < fft_size ? frame.size() : fft_size;
  for (std::size_t i = 0; i < count; ++i) {
    buf[i] = {frame[i], 0.0};
  }
  fft(buf);
  std::vector<double> power(fft_size / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) {
    power[k] = std::norm(buf[k]);
  }
  return power;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) {
    return {};
  }
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_power_of_two(out_len);
  std::vector<std::complex<double>> fa(n);
  std::vector<std::complex<double>> fb(n);
  for (std::size_t i = 0; i < a.size(); ++i) {
    fa[i] = {a[i], 0.0};
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    fb[i] = {b[i], 0.0};
  }
  fft(fa);
  fft(fb);
  for (std::size_t i = 0; i < n; ++i) {
    fa[i] = mul(fa[i], fb[i]);
  }
  fft(fa, /*inverse=*/true);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    out[i] = fa[i].real();
  }
  return out;
}

std::vector<double> hann_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t i = 0; i < length; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(length));
  }
  return w;
}

}  // namespace pairmix::dsp
