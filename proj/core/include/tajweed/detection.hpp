#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "tajweed/audio.hpp"
#include "tajweed/features.hpp"
#include "tajweed/manifest.hpp"
#include "tajweed/rules.hpp"
#include "tajweed/svm.hpp"

namespace tajweed {

inline constexpr double kWindowSeconds = 4.0;
inline constexpr double kStrideSeconds = 0.5;

struct TrainingFingerprint {
  std::uint64_t dataset_hash = 0;
  std::uint64_t seed = 0;
  friend bool operator==(const TrainingFingerprint&, const TrainingFingerprint&) = default;
};

/// One binary model per rule: SVM class +1 is Right, -1 is Wrong.
struct RuleModel {
  RuleId rule = RuleId::EdghamMeem;
  SvmModel svm;
  FeatureConfig features;
  std::uint64_t feature_fingerprint = 0;  ///< fingerprint the SVM was trained under
  Calibration calibration;
  double tau_right = 0.5;
  double tau_wrong = 0.5;
  TrainingFingerprint training;
};

struct Detection {
  double offset_s = 0.0;
  Polarity polarity = Polarity::Right;
  double score = 0.0;  ///< p_right for Right, 1 - p_right for Wrong
  int closeness_pct = 0;
};

struct WindowScore {
  double offset_s = 0.0;
  double p_right = 0.0;
};

struct DetectionReport {
  RuleId rule = RuleId::EdghamMeem;
  std::optional<Detection> verdict;
  std::vector<WindowScore> window_scores;  ///< offset order
};

/// Calibrated probability that the feature vector is a Right pronunciation.
/// Throws ConfigMismatch if the vector was not produced under the model's config.
double predict_features(const RuleModel& rule, const FeatureVector& features);

/// Extracts features from a 4 s window at the model's rate and scores it.
double predict_window(const RuleModel& rule, const AudioClip& window);

/// Candidate selection for one window score, or nullopt when both gates reject.
std::optional<Detection> gate(const RuleModel& rule, double offset_s, double p_right);

/// Slides 4 s windows (0.5 s stride) over the recording, resampled to the
/// model's rate, and keeps the highest gated score (earliest offset on ties).
DetectionReport detect(const RuleModel& rule, const AudioClip& recording);

/// A window scored by the model. label == nullopt means no rule is present.
struct ScoredWindow {
  double p_right = 0.0;
  Label label;
};

struct LabeledWindow {
  AudioClip clip;
  Label label;
};

struct ThresholdCalibration {
  double tau_right = 0.5;
  double tau_wrong = 0.5;
  bool right_saturated = false;
  bool wrong_saturated = false;
  /// Fraction of positives of each polarity passing its gate (NaN if none given).
  double right_recall = 0.0;
  double wrong_recall = 0.0;
};

inline constexpr double kThresholdMargin = 0.01;
inline constexpr double kThresholdFloor = 0.5;
inline constexpr double kThresholdCeiling = 0.99;

/// tau_right = clamp(max over non-Right negatives of p_right + 0.01, 0.5, 0.99);
/// tau_wrong likewise over non-Wrong negatives on 1 - p_right.
ThresholdCalibration calibrate_thresholds(std::span<const ScoredWindow> positives,
                                          std::span<const ScoredWindow> negatives);

ThresholdCalibration calibrate_thresholds(const RuleModel& rule,
                                          std::span<const LabeledWindow> positives,
                                          std::span<const LabeledWindow> negatives);

struct ConfusionTable {
  RuleId rule = RuleId::EdghamMeem;
  int tp = 0;  ///< Right entry, predicted Right
  int fp = 0;  ///< non-Right entry, predicted Right
  int tn = 0;
  int fn = 0;

  int total() const noexcept { return tp + fp + tn + fn; }
  double accuracy() const noexcept {
    return total() == 0 ? 0.0 : static_cast<double>(tp + tn) / total();
  }
};

/// Maps a manifest entry to the predicted label (nullopt = nothing detected).
using Predictor = std::function<Label(const ManifestEntry&)>;

/// One table per rule in `rules`, in that order. Throws MissingModel if an
/// entry's rule is not among `rules`.
std::vector<ConfusionTable> evaluate(std::span<const RuleId> rules,
                                     std::span<const ManifestEntry> test_set,
                                     const Predictor& predict);

/// Runs detect() with the matching model over every entry's audio.
std::vector<ConfusionTable> evaluate(std::span<const RuleModel> models,
                                     std::span<const ManifestEntry> test_set,
                                     const std::filesystem::path& base_dir);

/// Tab-separated layout: Rule Name, True Positive, False Positive,
/// True Negative, False Negative, Accuracy.
void write_confusion_table(std::ostream& out, std::span<const ConfusionTable> tables);
/// Machine-readable rows: rule_id,tp,fp,tn,fn,accuracy.
void write_confusion_csv(std::ostream& out, std::span<const ConfusionTable> tables);

/// One row per window plus a trailing verdict row.
void write_timeline(std::ostream& out, const RuleModel& rule, const DetectionReport& report,
                    std::optional<double> truth_s = std::nullopt);

// --- training pipeline -------------------------------------------------------

struct LabeledClip {
  AudioClip clip;
  Label label;
};

struct RuleTrainingParams {
  double C = 1.0;
  double gamma = 0.1;
  std::uint64_t seed = 0;
  double calibration_fraction = 0.2;
  FeatureConfig features;
  TrainOptions solver;
};

struct RuleTrainingSummary {
  std::size_t svm_samples = 0;
  std::size_t holdout_samples = 0;
  std::size_t support_vectors = 0;
  double holdout_accuracy = 0.0;
  ThresholdCalibration thresholds;
};

struct TrainedRule {
  RuleModel model;
  RuleTrainingSummary summary;
};

/// Resamples to the config rate and normalizes to 4 s (seeded truncation).
AudioClip prepare_clip(const AudioClip& clip, const FeatureConfig& config, std::uint64_t seed);

/// Standard pipeline: features -> stratified calibration holdout -> scaler ->
/// SVM -> Platt sigmoid on the holdout -> thresholds. Right/Wrong clips train
/// the SVM; every clip (label-aware) and every window of unlabeled clips
/// serve as threshold negatives.
TrainedRule fit_rule_model(RuleId rule, std::span<const LabeledClip> clips,
                           const RuleTrainingParams& params);

}  // namespace tajweed
