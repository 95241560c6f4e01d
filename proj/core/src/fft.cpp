#include "tajweed/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "tajweed/error.hpp"

namespace tajweed {

void fft_inplace(std::span<std::complex<double>> data) {
  const std::size_t n = data.size();
  if (!is_power_of_two(n)) fail(ErrorCode::InvalidArgument, "FFT size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }

  // Twiddles exp(-2 pi i j / n), each computed directly; recurrence drift
  // would cost accuracy. Cached per thread for the last size used.
  thread_local std::vector<std::complex<double>> twiddles;
  if (twiddles.size() != n / 2) {
    twiddles.resize(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      twiddles[j] = {std::cos(angle), std::sin(angle)};
    }
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t k = 0; k < half; ++k) {
      const double wr = twiddles[k * step].real(), wi = twiddles[k * step].imag();
      for (std::size_t start = 0; start < n; start += len) {
        const std::complex<double> u = data[start + k];
        const std::complex<double> x = data[start + k + half];
        // Written out: operator* goes through the Annex G NaN handling path.
        const std::complex<double> v(x.real() * wr - x.imag() * wi, x.real() * wi + x.imag() * wr);
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

std::vector<double> power_spectrum(std::span<const double> frame, std::size_t fft_size) {
  if (frame.size() > fft_size) {
    fail(ErrorCode::InvalidArgument, "frame longer than FFT size");
  }
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  fft_inplace(buf);

  std::vector<double> power(fft_size / 2 + 1);
  const double scale = 1.0 / static_cast<double>(fft_size);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]) * scale;
  return power;
}

}  // namespace tajweed
