#pragma once

// Small hand-rolled generators for property tests. Each case gets its own
// seed so a failure message names a reproducible input.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "tajweed/audio.hpp"
#include "tajweed/svm.hpp"

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(rng_);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }
  bool coin() { return index(0, 1) == 1; }

  std::vector<double> vector(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  tajweed::AudioClip noise_clip(double seconds, int rate, double level = 0.3) {
    const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
    std::vector<double> s(n);
    for (double& x : s) x = level * normal();
    return tajweed::AudioClip(std::move(s), rate);
  }

  // Two Gaussian blobs in `dim` dimensions, `sep` apart along every axis.
  // Guaranteed to contain both labels.
  tajweed::TrainingProblem blobs(std::size_t l, std::size_t dim, double sep, double sd = 1.0) {
    tajweed::TrainingProblem p;
    for (std::size_t i = 0; i < l; ++i) {
      const int y = i == 0 ? 1 : i == 1 ? -1 : (coin() ? 1 : -1);
      std::vector<double> x(dim);
      for (double& v : x) v = normal(0.5 * sep * y, sd);
      p.x.append_row(x);
      p.y.push_back(y);
    }
    return p;
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline tajweed::AudioClip tone(double hz, double seconds, int rate, double amp = 0.5,
                               double phase = 0.0) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate + phase);
  }
  return tajweed::AudioClip(std::move(s), rate);
}

}  // namespace gen
