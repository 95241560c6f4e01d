#pragma once

#include <complex>
#include <span>
#include <vector>

namespace tajweed {

/// In-place iterative radix-2 Cooley-Tukey FFT (forward, unscaled).
/// `data.size()` must be a power of two.
void fft_inplace(std::span<std::complex<double>> data);

/// One-sided power spectrum |X[k]|^2 / fft_size for k = 0 .. fft_size/2.
/// The frame is zero-padded to fft_size.
std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size);

constexpr bool is_power_of_two(std::size_t n) noexcept {
  return n != 0 && (n & (n - 1)) == 0;
}

}  // namespace tajweed
