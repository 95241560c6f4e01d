#include "tajweed/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tajweed/error.hpp"
#include "tajweed/fft.hpp"
#include "tajweed/hash.hpp"

namespace tajweed {

namespace {

// Mean and population std via offsets from the first element, so a constant
// sequence yields its value and exactly zero spread.
std::pair<double, double> mean_and_std(std::span<const double> xs) {
  const double pivot = xs.front();
  double sum = 0.0, sum_sq = 0.0;
  for (double x : xs) {
    const double d = x - pivot;
    sum += d;
    sum_sq += d * d;
  }
  const auto n = static_cast<double>(xs.size());
  const double mean_offset = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean_offset * mean_offset);
  return {pivot + mean_offset, std::sqrt(var)};
}

}  // namespace

std::string_view to_string(Aggregation agg) noexcept {
  switch (agg) {
    case Aggregation::MeanStdPool: return "mean_std_pool";
    case Aggregation::Flatten: return "flatten";
  }
  return "unknown";
}

Aggregation parse_aggregation(std::string_view text) {
  if (text == "mean_std_pool") return Aggregation::MeanStdPool;
  if (text == "flatten") return Aggregation::Flatten;
  fail(ErrorCode::InvalidConfig, "unknown aggregation '" + std::string(text) + "'");
}

std::size_t FeatureConfig::frame_length() const noexcept {
  return static_cast<std::size_t>(std::lround(frame_ms * sample_rate_hz / 1000.0));
}

std::size_t FeatureConfig::hop_length() const noexcept {
  return static_cast<std::size_t>(std::lround(hop_ms * sample_rate_hz / 1000.0));
}

void FeatureConfig::validate() const {
  if (sample_rate_hz <= 0 || frame_ms <= 0 || hop_ms <= 0 || num_filters <= 0) {
    fail(ErrorCode::InvalidConfig, "frame, hop, filter count and rate must be positive");
  }
  if (hop_length() == 0 || frame_length() < 2) {
    fail(ErrorCode::InvalidConfig, "frame/hop shorter than one sample");
  }
  if (fft_size <= 0 || !is_power_of_two(static_cast<std::size_t>(fft_size))) {
    fail(ErrorCode::InvalidConfig, "fft_size must be a power of two");
  }
  if (static_cast<std::size_t>(fft_size) < frame_length()) {
    fail(ErrorCode::InvalidConfig, "fft_size smaller than the frame length");
  }
  if (!(f_min_hz >= 0.0) || !(f_max_hz > f_min_hz) || f_max_hz > sample_rate_hz / 2.0) {
    fail(ErrorCode::InvalidConfig, "need 0 <= f_min < f_max <= rate/2");
  }
  if (!(log_floor > 0.0)) fail(ErrorCode::InvalidConfig, "log_floor must be positive");
}

std::uint64_t FeatureConfig::fingerprint() const noexcept {
  Fnv1a h;
  h.u64(static_cast<std::uint64_t>(frame_ms));
  h.u64(static_cast<std::uint64_t>(hop_ms));
  h.u64(static_cast<std::uint64_t>(num_filters));
  h.u64(static_cast<std::uint64_t>(fft_size));
  h.u64(static_cast<std::uint64_t>(sample_rate_hz));
  h.f64(f_min_hz);
  h.f64(f_max_hz);
  h.f64(log_floor);
  h.u64(static_cast<std::uint64_t>(aggregation));
  return h.value();
}

double hz_to_mel(double hz) noexcept { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) noexcept { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix frame_signal(std::span<const double> samples, const FeatureConfig& config) {
  const std::size_t frame_len = config.frame_length();
  const std::size_t hop = config.hop_length();
  if (samples.size() < frame_len) {
    fail(ErrorCode::TooShort, std::to_string(samples.size()) + " samples, need at least " +
                                  std::to_string(frame_len));
  }
  const std::size_t n_frames = (samples.size() - frame_len) / hop + 1;
  Matrix frames(n_frames, frame_len);
  for (std::size_t f = 0; f < n_frames; ++f) {
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(f * hop), frame_len,
                frames.row(f).begin());
  }
  return frames;
}

std::vector<double> hamming_window(std::size_t n) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "Hamming window needs n >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    // Mirror the index so w[k] == w[n-1-k] bit for bit.
    const std::size_t m = std::min(k, n - 1 - k);
    w[k] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / denom);
  }
  return w;
}

FilterBank build_filterbank(const FeatureConfig& config) {
  config.validate();
  const auto n_filters = static_cast<std::size_t>(config.num_filters);
  const std::size_t n_bins = static_cast<std::size_t>(config.fft_size) / 2 + 1;
  const double mel_lo = hz_to_mel(config.f_min_hz);
  const double mel_hi = hz_to_mel(config.f_max_hz);

  std::vector<double> edges(n_filters + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_filters + 1);
    edges[i] = mel_to_hz(mel);
  }
  edges.front() = config.f_min_hz;
  edges.back() = config.f_max_hz;

  const double bin_hz = static_cast<double>(config.sample_rate_hz) / config.fft_size;
  FilterBank bank{Matrix(n_filters, n_bins), std::vector<double>(n_filters)};
  for (std::size_t i = 0; i < n_filters; ++i) {
    const double lo = edges[i], centre = edges[i + 1], hi = edges[i + 2];
    bank.center_freqs_hz[i] = centre;
    auto row = bank.weights.row(i);
    double peak = 0.0;
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= centre) {
        w = (f - lo) / (centre - lo);
      } else if (f > centre && f < hi) {
        w = (hi - f) / (hi - centre);
      }
      row[k] = w;
      peak = std::max(peak, w);
    }
    if (peak <= 0.0) {
      fail(ErrorCode::DegenerateBank,
           "filter " + std::to_string(i) + " spans no FFT bin (" + std::to_string(lo) + "-" +
               std::to_string(hi) + " Hz)");
    }
    for (double& w : row) w /= peak;
  }
  return bank;
}

Matrix log_filterbank_energies(const AudioClip& clip, const FeatureConfig& config,
                               const FilterBank& bank) {
  if (clip.sample_rate_hz() != config.sample_rate_hz) {
    fail(ErrorCode::WrongRate, "clip at " + std::to_string(clip.sample_rate_hz()) +
                                   " Hz, config expects " +
                                   std::to_string(config.sample_rate_hz));
  }
  const Matrix frames = frame_signal(clip.samples(), config);
  const auto window = hamming_window(config.frame_length());
  const std::size_t n_filters = bank.weights.rows();
  const std::size_t n_bins = bank.weights.cols();

  Matrix energies(frames.rows(), n_filters);
  std::vector<double> windowed(window.size());
  for (std::size_t f = 0; f < frames.rows(); ++f) {
    const auto frame = frames.row(f);
    for (std::size_t i = 0; i < window.size(); ++i) windowed[i] = frame[i] * window[i];
    const auto power = power_spectrum(windowed, static_cast<std::size_t>(config.fft_size));
    for (std::size_t j = 0; j < n_filters; ++j) {
      const auto weights = bank.weights.row(j);
      double e = 0.0;
      for (std::size_t k = 0; k < n_bins; ++k) e += weights[k] * power[k];
      energies(f, j) = std::log(std::max(e, config.log_floor));
    }
  }
  return energies;
}

FeatureVector extract_features(const AudioClip& clip, const FeatureConfig& config) {
  return extract_features(clip, config, build_filterbank(config));
}

FeatureVector extract_features(const AudioClip& clip, const FeatureConfig& config,
                               const FilterBank& bank) {
  const Matrix energies = log_filterbank_energies(clip, config, bank);
  FeatureVector out;
  out.config_fingerprint = config.fingerprint();
  if (config.aggregation == Aggregation::Flatten) {
    out.values = energies.data();
    return out;
  }
  const std::size_t n_filters = energies.cols();
  out.values.resize(2 * n_filters);
  std::vector<double> column(energies.rows());
  for (std::size_t j = 0; j < n_filters; ++j) {
    for (std::size_t f = 0; f < energies.rows(); ++f) column[f] = energies(f, j);
    const auto [mean, sd] = mean_and_std(column);
    out.values[j] = mean;
    out.values[n_filters + j] = sd;
  }
  return out;
}

Scaler Scaler::identity(std::size_t dim) {
  return Scaler{std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

std::vector<double> Scaler::apply(std::span<const double> v) const {
  if (v.size() != mean.size()) {
    fail(ErrorCode::DimensionMismatch, "vector has " + std::to_string(v.size()) +
                                           " dims, scaler " + std::to_string(mean.size()));
  }
  std::vector<double> z(v.size());
  for (std::size_t d = 0; d < v.size(); ++d) {
    z[d] = (v[d] - mean[d]) / std::max(stddev[d], kStdFloor);
  }
  return z;
}

Scaler fit_scaler(const Matrix& vectors) {
  if (vectors.rows() < 2) fail(ErrorCode::TooFewVectors, "need at least two vectors");
  Scaler s{std::vector<double>(vectors.cols()), std::vector<double>(vectors.cols())};
  std::vector<double> column(vectors.rows());
  for (std::size_t d = 0; d < vectors.cols(); ++d) {
    for (std::size_t r = 0; r < vectors.rows(); ++r) column[r] = vectors(r, d);
    std::tie(s.mean[d], s.stddev[d]) = mean_and_std(column);
  }
  return s;
}

Matrix apply_scaler(const Matrix& vectors, const Scaler& scaler) {
  Matrix out(vectors.rows(), vectors.cols());
  for (std::size_t r = 0; r < vectors.rows(); ++r) {
    const auto z = scaler.apply(vectors.row(r));
    std::copy(z.begin(), z.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace tajweed
