#include <algorithm>
#include <cmath>
#include <random>

#include "tajweed/detection.hpp"
#include "tajweed/error.hpp"
#include "tajweed/hash.hpp"

namespace tajweed {

namespace {

constexpr std::uint64_t kHoldoutStream = 0x686f6c646f7574ULL;  // "holdout"

}  // namespace

AudioClip prepare_clip(const AudioClip& clip, const FeatureConfig& config, std::uint64_t seed) {
  return normalize_duration(resample(clip, config.sample_rate_hz), kWindowSeconds, seed);
}

TrainedRule fit_rule_model(RuleId rule, std::span<const LabeledClip> clips,
                           const RuleTrainingParams& params) {
  params.features.validate();
  if (!(params.calibration_fraction > 0.0 && params.calibration_fraction < 1.0)) {
    fail(ErrorCode::InvalidArgument, "calibration fraction must lie in (0, 1)");
  }
  const FeatureConfig& cfg = params.features;
  const FilterBank bank = build_filterbank(cfg);

  Matrix raw;
  std::vector<int> labels;
  Fnv1a dataset_hash;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (!clips[i].label) continue;
    const auto fv = extract_features(prepare_clip(clips[i].clip, cfg, derive_seed(params.seed, i)),
                                     cfg, bank);
    raw.append_row(fv.values);
    labels.push_back(svm_label(*clips[i].label));
    for (double v : fv.values) dataset_hash.f64(v);
    dataset_hash.u64(static_cast<std::uint64_t>(labels.back() + 1));
  }

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] > 0 ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    fail(ErrorCode::SingleClass, std::string(to_string(rule)) + " needs both Right and Wrong clips");
  }
  if (pos.size() < 2 || neg.size() < 2) {
    fail(ErrorCode::TooFewSamples, "each polarity needs at least two clips");
  }

  // Stratified calibration holdout; at least one sample of each class on each side.
  std::mt19937_64 rng(derive_seed(params.seed, kHoldoutStream));
  std::vector<bool> is_holdout(labels.size(), false);
  for (auto* members : {&pos, &neg}) {
    std::shuffle(members->begin(), members->end(), rng);
    const auto n = static_cast<std::ptrdiff_t>(members->size());
    const auto take = std::clamp<std::ptrdiff_t>(
        std::llround(params.calibration_fraction * static_cast<double>(n)), 1, n - 1);
    for (std::ptrdiff_t r = 0; r < take; ++r) is_holdout[(*members)[r]] = true;
  }

  Matrix fit_rows, holdout_rows;
  std::vector<int> fit_labels, holdout_labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (is_holdout[i]) {
      holdout_rows.append_row(raw.row(i));
      holdout_labels.push_back(labels[i]);
    } else {
      fit_rows.append_row(raw.row(i));
      fit_labels.push_back(labels[i]);
    }
  }

  const Scaler scaler = fit_scaler(fit_rows);
  TrainingProblem problem{apply_scaler(fit_rows, scaler), fit_labels};

  TrainedRule out;
  RuleModel& model = out.model;
  model.rule = rule;
  model.features = cfg;
  model.feature_fingerprint = cfg.fingerprint();
  model.svm = train(problem, params.C, KernelParams{params.gamma}, params.solver);
  model.svm.scaler = scaler;
  model.calibration = fit_calibration(model.svm, holdout_rows, holdout_labels);
  model.training = TrainingFingerprint{dataset_hash.value(), params.seed};

  std::size_t correct = 0;
  for (std::size_t i = 0; i < holdout_rows.rows(); ++i) {
    const double f = decision_value(model.svm, holdout_rows.row(i));
    if ((f >= 0.0 ? 1 : -1) == holdout_labels[i]) ++correct;
  }

  std::vector<ScoredWindow> positives, negatives;
  for (std::size_t i = 0; i < raw.rows(); ++i) {
    const double p = model.calibration.probability(decision_value(model.svm, raw.row(i)));
    const Label label = labels[i] > 0 ? Polarity::Right : Polarity::Wrong;
    positives.push_back({p, label});
    negatives.push_back({p, label});
  }
  for (const auto& c : clips) {
    if (c.label) continue;
    const AudioClip clip = resample(c.clip, cfg.sample_rate_hz);
    for (const auto& w : slide_windows(clip, kWindowSeconds, kStrideSeconds)) {
      const FeatureVector fv = extract_features(w.clip, cfg, bank);
      negatives.push_back({predict_features(model, fv), std::nullopt});
    }
  }
  const ThresholdCalibration thresholds = calibrate_thresholds(positives, negatives);
  model.tau_right = thresholds.tau_right;
  model.tau_wrong = thresholds.tau_wrong;

  out.summary.svm_samples = fit_labels.size();
  out.summary.holdout_samples = holdout_labels.size();
  out.summary.support_vectors = model.svm.support_vectors.rows();
  out.summary.holdout_accuracy =
      static_cast<double>(correct) / static_cast<double>(holdout_labels.size());
  out.summary.thresholds = thresholds;
  return out;
}

}  // namespace tajweed
