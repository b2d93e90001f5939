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

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace pairmix::dsp {

/// In-place complex FFT. Power-of-two sizes use iterative radix-2; any other
/// size falls back to a direct O(n^2) DFT.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

/// |DFT|^2 of a real frame zero-padded to fft_size. Returns fft_size/2 + 1 bins.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size);

/// Full linear convolution (length a.size() + b.size() - 1) via FFT.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

/// Periodic Hann window of the given length.
std::vector<double> hann_window(std::size_t length);

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) noexcept;

}  // namespace pairmix::dsp
