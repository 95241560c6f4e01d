#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tajweed/audio.hpp"
#include "tajweed/matrix.hpp"

namespace tajweed {

enum class Aggregation : std::uint8_t {
  MeanStdPool = 0,  ///< per-filter mean then per-filter std over frames
  Flatten = 1,      ///< row-major frames x filters
};

std::string_view to_string(Aggregation agg) noexcept;
Aggregation parse_aggregation(std::string_view text);

struct FeatureConfig {
  int frame_ms = 25;
  int hop_ms = 10;
  int num_filters = 70;
  int fft_size = 256;
  int sample_rate_hz = 8000;
  double f_min_hz = 0.0;
  double f_max_hz = 4000.0;
  double log_floor = 1e-10;
  Aggregation aggregation = Aggregation::MeanStdPool;

  std::size_t frame_length() const noexcept;
  std::size_t hop_length() const noexcept;

  /// Throws InvalidConfig when any invariant is broken.
  void validate() const;

  /// FNV-1a over the binary image of every field.
  std::uint64_t fingerprint() const noexcept;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct FilterBank {
  Matrix weights;  ///< num_filters x (fft_size/2 + 1)
  std::vector<double> center_freqs_hz;
};

struct FeatureVector {
  std::vector<double> values;
  std::uint64_t config_fingerprint = 0;
};

double hz_to_mel(double hz) noexcept;
double mel_to_hz(double mel) noexcept;

/// Splits into frame_length() windows advanced by hop_length(); the partial
/// tail is dropped. Throws TooShort when not even one frame fits.
Matrix frame_signal(std::span<const double> samples, const FeatureConfig& config);

/// w[k] = 0.54 - 0.46 cos(2 pi k / (n - 1)).
std::vector<double> hamming_window(std::size_t n);

/// Mel-spaced triangles. Each triangle is evaluated at FFT bin centre
/// frequencies and rescaled so its largest weight is exactly 1.
/// Throws DegenerateBank when a triangle covers no bin.
FilterBank build_filterbank(const FeatureConfig& config);

/// Log filter-bank energies, frames x filters.
Matrix log_filterbank_energies(const AudioClip& clip, const FeatureConfig& config,
                               const FilterBank& bank);

FeatureVector extract_features(const AudioClip& clip, const FeatureConfig& config);
FeatureVector extract_features(const AudioClip& clip, const FeatureConfig& config,
                               const FilterBank& bank);

/// Per-dimension standardization parameters.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  static constexpr double kStdFloor = 1e-8;

  static Scaler identity(std::size_t dim);
  std::size_t dim() const noexcept { return mean.size(); }
  std::vector<double> apply(std::span<const double> v) const;

  friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// Population mean/std per column; needs at least two rows.
Scaler fit_scaler(const Matrix& vectors);
Matrix apply_scaler(const Matrix& vectors, const Scaler& scaler);

}  // namespace tajweed
