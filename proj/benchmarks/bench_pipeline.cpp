#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "tajweed/detection.hpp"
#include "tajweed/fft.hpp"

using namespace tajweed;

namespace {

AudioClip noise(double seconds, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 0.2);
  std::vector<double> s(static_cast<std::size_t>(seconds * 8000));
  for (double& v : s) v = n(rng);
  return AudioClip(std::move(s), 8000);
}

TrainingProblem blobs(std::size_t l, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  TrainingProblem p;
  for (std::size_t i = 0; i < l; ++i) {
    const int y = i % 2 ? 1 : -1;
    std::vector<double> x(dim);
    for (double& v : x) v = n(rng) + 0.4 * y;
    p.x.append_row(x);
    p.y.push_back(y);
  }
  return p;
}

void BM_Fft256(benchmark::State& state) {
  std::vector<std::complex<double>> x(256);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x) v = {u(rng), 0.0};
  for (auto _ : state) {
    auto y = x;
    fft_inplace(y);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_Fft256);

void BM_ExtractFeatures(benchmark::State& state) {
  FeatureConfig cfg;
  cfg.aggregation = static_cast<Aggregation>(state.range(0));
  const FilterBank bank = build_filterbank(cfg);
  const AudioClip clip = noise(4.0, 2);
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(clip, cfg, bank));
}
BENCHMARK(BM_ExtractFeatures)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SmoTrain(benchmark::State& state) {
  const TrainingProblem p = blobs(static_cast<std::size_t>(state.range(0)), 140, 3);
  for (auto _ : state) benchmark::DoNotOptimize(train(p, 1.0, KernelParams{0.01}));
}
BENCHMARK(BM_SmoTrain)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Detect(benchmark::State& state) {
  RuleModel model;
  model.feature_fingerprint = model.features.fingerprint();
  const FilterBank bank = build_filterbank(model.features);
  Matrix raw;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    raw.append_row(extract_features(noise(4.0, 100 + i), model.features, bank).values);
    y.push_back(i % 2 ? 1 : -1);
  }
  model.svm = train(TrainingProblem{apply_scaler(raw, fit_scaler(raw)), y}, 1.0, KernelParams{0.1});
  model.svm.scaler = fit_scaler(raw);
  const AudioClip verse = noise(static_cast<double>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(detect(model, verse));
}
BENCHMARK(BM_Detect)->Arg(10)->Arg(15)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
