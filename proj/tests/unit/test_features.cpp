#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dft.hpp"
#include "generators.hpp"
#include "tajweed/error.hpp"
#include "tajweed/features.hpp"
#include "tajweed/fft.hpp"

using namespace tajweed;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST(Fft, MatchesNaiveDftOnRandomFrames) {
  gen::Gen g(11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::complex<double>> x(256);
    for (auto& v : x) v = {g.uniform(-1, 1), g.uniform(-1, 1)};
    const auto expected = oracle::naive_dft(x);
    fft_inplace(x);
    for (std::size_t k = 0; k < x.size(); ++k) worst = std::max(worst, std::abs(x[k] - expected[k]));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(Fft, RejectsNonPowerOfTwo) {
  std::vector<std::complex<double>> x(100);
  EXPECT_EQ(code_of([&] { fft_inplace(x); }), ErrorCode::InvalidArgument);
  EXPECT_TRUE(is_power_of_two(256));
  EXPECT_FALSE(is_power_of_two(200));
  EXPECT_FALSE(is_power_of_two(0));
}

TEST(PowerSpectrum, ZeroFrame) {
  const auto p = power_spectrum(std::vector<double>(200, 0.0), 256);
  ASSERT_EQ(p.size(), 129u);
  for (double v : p) EXPECT_EQ(v, 0.0);
}

TEST(PowerSpectrum, CosinePeaksAtBinEight) {
  std::vector<double> frame(256);
  for (std::size_t t = 0; t < 256; ++t) frame[t] = std::cos(2.0 * std::numbers::pi * 8.0 * t / 256.0);
  const auto p = power_spectrum(frame, 256);
  const auto ref = oracle::naive_power_spectrum(frame, 256);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    EXPECT_NEAR(p[k], ref[k], 1e-9);
    if (p[k] > p[peak]) peak = k;
  }
  EXPECT_EQ(peak, 8u);
}

TEST(PowerSpectrum, ParsevalOneSided) {
  gen::Gen g(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto frame = g.vector(g.index(1, 256));
    double energy = 0.0;
    for (double v : frame) energy += v * v;
    const auto p = power_spectrum(frame, 256);
    double sum = p.front() + p.back();
    for (std::size_t k = 1; k + 1 < p.size(); ++k) sum += 2.0 * p[k];
    EXPECT_NEAR(sum, energy, 1e-9);
  }
}

TEST(FrameSignal, Counts) {
  const FeatureConfig cfg;
  EXPECT_EQ(cfg.frame_length(), 200u);
  EXPECT_EQ(cfg.hop_length(), 80u);
  const Matrix frames = frame_signal(std::vector<double>(32000, 0.1), cfg);
  EXPECT_EQ(frames.rows(), 398u);
  EXPECT_EQ(frames.rows(), (32000u - 200u) / 80u + 1u);
  EXPECT_EQ(frames.cols(), 200u);
  EXPECT_EQ(frame_signal(std::vector<double>(200, 0.0), cfg).rows(), 1u);
  EXPECT_EQ(code_of([&] { frame_signal(std::vector<double>(199, 0.0), cfg); }), ErrorCode::TooShort);
}

TEST(FrameSignal, FramesAreHopShiftedCopies) {
  std::vector<double> s(1000);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i);
  const Matrix frames = frame_signal(s, FeatureConfig{});
  for (std::size_t f = 0; f < frames.rows(); ++f)
    for (std::size_t i = 0; i < 200; ++i) ASSERT_EQ(frames(f, i), static_cast<double>(f * 80 + i));
}

TEST(Hamming, EndpointsCentreSymmetry) {
  for (std::size_t n : {2u, 3u, 199u, 200u, 201u}) {
    const auto w = hamming_window(n);
    EXPECT_NEAR(w.front(), 0.08, 1e-15) << n;
    EXPECT_NEAR(w.back(), 0.08, 1e-15) << n;
    for (std::size_t k = 0; k < n; ++k) ASSERT_EQ(w[k], w[n - 1 - k]) << n << " " << k;
    if (n % 2 == 1) {
      EXPECT_NEAR(w[(n - 1) / 2], 1.0, 1e-15);
    }
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(w[k], 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / (n - 1.0)), 1e-15);
    }
  }
  EXPECT_EQ(code_of([] { hamming_window(1); }), ErrorCode::InvalidArgument);
}

TEST(Mel, Formula) {
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(hz_to_mel(700.0), 781.17, 0.01);
  for (double hz : {0.0, 100.0, 1000.0, 3999.0}) EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
}

TEST(FilterBank, ShapeTrianglesAndCoverage) {
  const FeatureConfig cfg;
  const FilterBank bank = build_filterbank(cfg);
  ASSERT_EQ(bank.weights.rows(), 70u);
  ASSERT_EQ(bank.weights.cols(), 129u);
  ASSERT_EQ(bank.center_freqs_hz.size(), 70u);

  for (std::size_t i = 0; i < 70; ++i) {
    const auto row = bank.weights.row(i);
    double peak = 0.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      ASSERT_GE(row[k], 0.0);
      if (row[k] > peak) {
        peak = row[k];
        arg = k;
      }
    }
    EXPECT_EQ(peak, 1.0) << i;
    // Unimodal: non-decreasing up to the peak, non-increasing after.
    for (std::size_t k = 1; k <= arg; ++k) EXPECT_GE(row[k], row[k - 1]) << i;
    for (std::size_t k = arg + 1; k < row.size(); ++k) EXPECT_LE(row[k], row[k - 1]) << i;

    EXPECT_GT(bank.center_freqs_hz[i], cfg.f_min_hz);
    EXPECT_LT(bank.center_freqs_hz[i], cfg.f_max_hz);
    if (i > 0) {
      EXPECT_GT(bank.center_freqs_hz[i], bank.center_freqs_hz[i - 1]);
    }
  }

  // Mel-equal spacing of the centres.
  const double step = hz_to_mel(cfg.f_max_hz) / 71.0;
  for (std::size_t i = 0; i < 70; ++i) {
    EXPECT_NEAR(hz_to_mel(bank.center_freqs_hz[i]), step * (i + 1.0), 1e-9);
  }

  // No dead bands strictly inside (f_min, f_max).
  for (std::size_t k = 1; k < 128; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 70; ++i) sum += bank.weights(i, k);
    EXPECT_GT(sum, 0.0) << "bin " << k;
  }
}

TEST(FilterBank, DegenerateIsDetected) {
  FeatureConfig cfg;
  cfg.num_filters = 200;  // far more triangles than 129 bins can support
  EXPECT_EQ(code_of([&] { build_filterbank(cfg); }), ErrorCode::DegenerateBank);
}

TEST(FeatureConfig, Validation) {
  FeatureConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.fft_size = 200;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidConfig);
  cfg = {};
  cfg.fft_size = 128;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidConfig);
  cfg = {};
  cfg.f_max_hz = 5000;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidConfig);
  cfg = {};
  cfg.log_floor = 0.0;
  EXPECT_EQ(code_of([&] { cfg.validate(); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(code_of([] { parse_aggregation("median"); }), ErrorCode::InvalidConfig);
  EXPECT_EQ(parse_aggregation("flatten"), Aggregation::Flatten);
  EXPECT_EQ(to_string(Aggregation::MeanStdPool), "mean_std_pool");
}

TEST(FeatureConfig, FingerprintSeparatesConfigs) {
  FeatureConfig a, b;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  b.aggregation = Aggregation::Flatten;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
  b = a;
  b.log_floor = 1e-9;
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(ExtractFeatures, SilenceHitsLogFloor) {
  const FeatureConfig cfg;
  const auto fv = extract_features(AudioClip(std::vector<double>(32000, 0.0), 8000), cfg);
  ASSERT_EQ(fv.values.size(), 140u);
  for (std::size_t i = 0; i < 70; ++i) EXPECT_EQ(fv.values[i], std::log(1e-10));
  for (std::size_t i = 70; i < 140; ++i) EXPECT_EQ(fv.values[i], 0.0);
  EXPECT_EQ(fv.config_fingerprint, cfg.fingerprint());
}

TEST(ExtractFeatures, FlattenShape) {
  FeatureConfig cfg;
  cfg.aggregation = Aggregation::Flatten;
  gen::Gen g(13);
  const auto fv = extract_features(g.noise_clip(4.0, 8000), cfg);
  EXPECT_EQ(fv.values.size(), 27860u);
  for (double v : fv.values) ASSERT_TRUE(std::isfinite(v));
}

TEST(ExtractFeatures, WrongRate) {
  gen::Gen g(14);
  EXPECT_EQ(code_of([&] { extract_features(g.noise_clip(4.0, 16000), FeatureConfig{}); }),
            ErrorCode::WrongRate);
}

TEST(ExtractFeatures, ToneAndNoiseDiffer) {
  gen::Gen g(15);
  const FeatureConfig cfg;
  const auto tone = extract_features(gen::tone(1000.0, 4.0, 8000), cfg);
  const auto noise = extract_features(g.noise_clip(4.0, 8000), cfg);
  EXPECT_LT(cosine(tone.values, noise.values), 0.99);
}

TEST(ExtractFeatures, Deterministic) {
  gen::Gen g(16);
  const AudioClip c = g.noise_clip(4.0, 8000);
  const FeatureConfig cfg;
  const FilterBank bank = build_filterbank(cfg);
  EXPECT_EQ(extract_features(c, cfg).values, extract_features(c, cfg, bank).values);
}

TEST(ExtractFeatures, DelayChangesFlattenButNotPooledMeans) {
  std::vector<double> early(32000, 0.0), late(32000, 0.0);
  const AudioClip burst = gen::tone(700.0, 1.0, 8000, 0.5);
  for (std::size_t i = 0; i < burst.size(); ++i) {
    early[8000 + i] = burst.samples()[i];
    late[16000 + i] = burst.samples()[i];
  }
  FeatureConfig flat;
  flat.aggregation = Aggregation::Flatten;
  EXPECT_NE(extract_features(AudioClip(early, 8000), flat).values,
            extract_features(AudioClip(late, 8000), flat).values);

  const FeatureConfig pooled;
  const auto a = extract_features(AudioClip(early, 8000), pooled).values;
  const auto b = extract_features(AudioClip(late, 8000), pooled).values;
  for (std::size_t i = 0; i < 70; ++i) EXPECT_NEAR(a[i], b[i], 0.05 * std::abs(a[i])) << i;
}

TEST(Scaler, TwoPoints) {
  Matrix m;
  m.append_row(std::vector<double>{0.0});
  m.append_row(std::vector<double>{2.0});
  const Scaler s = fit_scaler(m);
  EXPECT_EQ(s.mean[0], 1.0);
  EXPECT_EQ(s.stddev[0], 1.0);
  const Matrix z = apply_scaler(m, s);
  EXPECT_EQ(z(0, 0), -1.0);
  EXPECT_EQ(z(1, 0), 1.0);
}

TEST(Scaler, ConstantDimensionBecomesZero) {
  Matrix m;
  for (int i = 0; i < 5; ++i) m.append_row(std::vector<double>{0.3, static_cast<double>(i)});
  const Matrix z = apply_scaler(m, fit_scaler(m));
  for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(z(r, 0), 0.0);
}

TEST(Scaler, RandomMatrixStandardizes) {
  gen::Gen g(17);
  Matrix m;
  for (int r = 0; r < 50; ++r) {
    auto row = g.vector(140, -5.0, 5.0);
    for (auto& v : row) v = v * 3.0 + 10.0;
    m.append_row(row);
  }
  const Matrix z = apply_scaler(m, fit_scaler(m));
  for (std::size_t d = 0; d < 140; ++d) {
    double mean = 0.0, var = 0.0;
    for (std::size_t r = 0; r < 50; ++r) mean += z(r, d);
    mean /= 50;
    for (std::size_t r = 0; r < 50; ++r) var += (z(r, d) - mean) * (z(r, d) - mean);
    EXPECT_NEAR(mean, 0.0, 1e-9);
    EXPECT_NEAR(std::sqrt(var / 50), 1.0, 1e-6);
  }
}

TEST(Scaler, Errors) {
  Matrix one;
  one.append_row(std::vector<double>{1.0, 2.0});
  EXPECT_EQ(code_of([&] { fit_scaler(one); }), ErrorCode::TooFewVectors);
  const Scaler s = Scaler::identity(3);
  EXPECT_EQ(code_of([&] { s.apply(std::vector<double>{1.0}); }), ErrorCode::DimensionMismatch);
}
