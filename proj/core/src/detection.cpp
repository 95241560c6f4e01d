#include "tajweed/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "tajweed/error.hpp"

namespace tajweed {

namespace {

double score_with_bank(const RuleModel& rule, const AudioClip& window, const FilterBank& bank) {
  return predict_features(rule, extract_features(window, rule.features, bank));
}

void check_config(const RuleModel& rule) {
  if (rule.features.fingerprint() != rule.feature_fingerprint) {
    fail(ErrorCode::ConfigMismatch, "model feature config does not match its fingerprint");
  }
}

}  // namespace

double predict_features(const RuleModel& rule, const FeatureVector& features) {
  if (features.config_fingerprint != rule.feature_fingerprint) {
    fail(ErrorCode::ConfigMismatch, "feature fingerprint differs from the model's");
  }
  return rule.calibration.probability(decision_value(rule.svm, features.values));
}

double predict_window(const RuleModel& rule, const AudioClip& window) {
  check_config(rule);
  return score_with_bank(rule, window, build_filterbank(rule.features));
}

std::optional<Detection> gate(const RuleModel& rule, double offset_s, double p_right) {
  const int closeness = static_cast<int>(std::lround(100.0 * p_right));
  const bool right = p_right >= rule.tau_right;
  const bool wrong = 1.0 - p_right >= rule.tau_wrong;
  if (right && (!wrong || p_right >= 1.0 - p_right)) {
    return Detection{offset_s, Polarity::Right, p_right, closeness};
  }
  if (wrong) return Detection{offset_s, Polarity::Wrong, 1.0 - p_right, closeness};
  return std::nullopt;
}

DetectionReport detect(const RuleModel& rule, const AudioClip& recording) {
  check_config(rule);
  const FilterBank bank = build_filterbank(rule.features);
  const AudioClip clip = resample(recording, rule.features.sample_rate_hz);

  DetectionReport report;
  report.rule = rule.rule;
  for (const auto& w : slide_windows(clip, kWindowSeconds, kStrideSeconds)) {
    const double p = score_with_bank(rule, w.clip, bank);
    report.window_scores.push_back({w.offset_s, p});
    const auto candidate = gate(rule, w.offset_s, p);
    if (candidate && (!report.verdict || candidate->score > report.verdict->score)) {
      report.verdict = candidate;
    }
  }
  return report;
}

ThresholdCalibration calibrate_thresholds(std::span<const ScoredWindow> positives,
                                          std::span<const ScoredWindow> negatives) {
  if (negatives.empty()) fail(ErrorCode::EmptyNegatives, "threshold calibration needs negatives");

  double max_right = -std::numeric_limits<double>::infinity();
  double max_wrong = -std::numeric_limits<double>::infinity();
  for (const auto& n : negatives) {
    if (n.label != Polarity::Right) max_right = std::max(max_right, n.p_right);
    if (n.label != Polarity::Wrong) max_wrong = std::max(max_wrong, 1.0 - n.p_right);
  }

  ThresholdCalibration out;
  const auto pick = [](double worst_negative, bool& saturated) {
    const double raw = std::max(kThresholdFloor, worst_negative + kThresholdMargin);
    saturated = raw > kThresholdCeiling;
    return std::clamp(raw, kThresholdFloor, kThresholdCeiling);
  };
  out.tau_right = pick(max_right, out.right_saturated);
  out.tau_wrong = pick(max_wrong, out.wrong_saturated);

  std::size_t n_right = 0, hit_right = 0, n_wrong = 0, hit_wrong = 0;
  for (const auto& p : positives) {
    if (p.label == Polarity::Right) {
      ++n_right;
      if (p.p_right >= out.tau_right) ++hit_right;
    } else if (p.label == Polarity::Wrong) {
      ++n_wrong;
      if (1.0 - p.p_right >= out.tau_wrong) ++hit_wrong;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.right_recall = n_right ? static_cast<double>(hit_right) / n_right : nan;
  out.wrong_recall = n_wrong ? static_cast<double>(hit_wrong) / n_wrong : nan;
  return out;
}

ThresholdCalibration calibrate_thresholds(const RuleModel& rule,
                                          std::span<const LabeledWindow> positives,
                                          std::span<const LabeledWindow> negatives) {
  if (negatives.empty()) fail(ErrorCode::EmptyNegatives, "threshold calibration needs negatives");
  check_config(rule);
  const FilterBank bank = build_filterbank(rule.features);
  const auto score_all = [&](std::span<const LabeledWindow> windows) {
    std::vector<ScoredWindow> scored;
    scored.reserve(windows.size());
    for (const auto& w : windows) scored.push_back({score_with_bank(rule, w.clip, bank), w.label});
    return scored;
  };
  return calibrate_thresholds(score_all(positives), score_all(negatives));
}

std::vector<ConfusionTable> evaluate(std::span<const RuleId> rules,
                                     std::span<const ManifestEntry> test_set,
                                     const Predictor& predict) {
  std::vector<ConfusionTable> tables;
  for (RuleId r : rules) tables.push_back(ConfusionTable{r});
  for (const auto& entry : test_set) {
    const auto it = std::find_if(tables.begin(), tables.end(),
                                 [&](const ConfusionTable& t) { return t.rule == entry.rule; });
    if (it == tables.end()) {
      fail(ErrorCode::MissingModel, "no model for rule " + std::string(to_string(entry.rule)));
    }
    const bool actual_right = entry.polarity == Polarity::Right;
    const bool predicted_right = predict(entry) == Polarity::Right;
    if (actual_right) (predicted_right ? it->tp : it->fn) += 1;
    else (predicted_right ? it->fp : it->tn) += 1;
  }
  return tables;
}

std::vector<ConfusionTable> evaluate(std::span<const RuleModel> models,
                                     std::span<const ManifestEntry> test_set,
                                     const std::filesystem::path& base_dir) {
  std::vector<RuleId> rules;
  std::map<RuleId, const RuleModel*> by_rule;
  for (const auto& m : models) {
    if (by_rule.emplace(m.rule, &m).second) rules.push_back(m.rule);
  }
  Manifest resolver;
  resolver.base_dir = base_dir;
  const Predictor predictor = [&](const ManifestEntry& entry) -> Label {
    const auto report = detect(*by_rule.at(entry.rule), load_wav(resolver.resolve(entry)));
    if (!report.verdict) return std::nullopt;
    return report.verdict->polarity;
  };
  return evaluate(rules, test_set, predictor);
}

void write_confusion_table(std::ostream& out, std::span<const ConfusionTable> tables) {
  out << "Rule Name\tTrue Positive\tFalse Positive\tTrue Negative\tFalse Negative\tAccuracy\n";
  for (const auto& t : tables) {
    out << display_name(t.rule) << '\t' << t.tp << '\t' << t.fp << '\t' << t.tn << '\t' << t.fn
        << '\t' << format_double(t.accuracy()) << '\n';
  }
}

void write_confusion_csv(std::ostream& out, std::span<const ConfusionTable> tables) {
  out << "rule_id,tp,fp,tn,fn,accuracy\n";
  for (const auto& t : tables) {
    out << to_string(t.rule) << ',' << t.tp << ',' << t.fp << ',' << t.tn << ',' << t.fn << ','
        << format_double(t.accuracy()) << '\n';
  }
}

void write_timeline(std::ostream& out, const RuleModel& rule, const DetectionReport& report,
                    std::optional<double> truth_s) {
  const std::string truth = truth_s ? "," + format_double(*truth_s) : "";
  out << "kind,offset_s,p_right,tau_right,tau_wrong,gated,verdict" << (truth_s ? ",truth_s" : "")
      << '\n';
  const std::string taus = format_double(rule.tau_right) + "," + format_double(rule.tau_wrong);
  for (const auto& w : report.window_scores) {
    const auto g = gate(rule, w.offset_s, w.p_right);
    const bool chosen = report.verdict && report.verdict->offset_s == w.offset_s;
    out << "window," << format_double(w.offset_s) << ',' << format_double(w.p_right) << ','
        << taus << ',' << (g ? (g->polarity == Polarity::Right ? "right" : "wrong") : "none")
        << ',' << (chosen ? 1 : 0) << truth << '\n';
  }
  if (report.verdict) {
    const auto& v = *report.verdict;
    out << "verdict," << format_double(v.offset_s) << ','
        << format_double(v.polarity == Polarity::Right ? v.score : 1.0 - v.score) << ',' << taus
        << ',' << (v.polarity == Polarity::Right ? "right" : "wrong") << ",1" << truth << '\n';
  } else {
    out << "verdict,,," << taus << ",none,0" << truth << '\n';
  }
}

}  // namespace tajweed
