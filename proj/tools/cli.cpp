#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "tajweed/detection.hpp"
#include "tajweed/error.hpp"
#include "tajweed/hash.hpp"
#include "tajweed/manifest.hpp"
#include "tajweed/model_io.hpp"
#include "tajweed/review.hpp"
#include "tajweed/synth.hpp"

namespace tajweed::cli {

namespace {

namespace fs = std::filesystem;

constexpr int kUsageExit = 2;

struct Options {
  std::string manifest;
  std::string rule;
  std::vector<double> c{1.0};
  std::vector<double> gamma{0.1};
  std::optional<std::uint64_t> seed;
  std::size_t folds = 5;
  std::vector<std::string> models;
  std::string out;
  std::optional<double> truth;
  std::string agg = "mean_std_pool";
  double fraction = 0.7;
  std::string recipe;
  std::string audio;
  std::string timeline;
  std::string verdict_out;
  std::string queue;
  std::string verdict_file;
  std::string status;
  std::string label;
  std::uint64_t record_id = 0;
  bool force = false;
  std::string split = "test";
};

std::uint64_t require_seed(const Options& o, std::string_view command) {
  if (!o.seed) {
    fail(ErrorCode::InvalidArgument, std::string(command) + " needs an explicit --seed");
  }
  return *o.seed;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::IoError, "cannot write " + path.string());
  f << text;
  if (!f) fail(ErrorCode::IoError, "write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::NotFound, path.string());
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

FeatureConfig feature_config(const Options& o) {
  FeatureConfig cfg;
  cfg.aggregation = parse_aggregation(o.agg);
  return cfg;
}

Manifest load_checked(const std::string& path, std::ostream& err) {
  Manifest m = load_manifest(path);
  for (const auto& p : m.dangling_paths) err << "warning: missing audio " << p << "\n";
  return m;
}

// Train-split clips of one rule, in manifest order.
std::vector<LabeledClip> rule_clips(const Manifest& m, RuleId rule) {
  bool any = false;
  std::vector<LabeledClip> clips;
  for (const auto& e : m.entries) {
    if (e.rule != rule) continue;
    any = true;
    if (e.split != Split::Train) continue;
    clips.push_back({load_wav(m.resolve(e)), e.polarity});
  }
  if (!any) fail(ErrorCode::MissingStratum, "manifest has no entries for " + std::string(to_string(rule)));
  if (clips.empty()) {
    fail(ErrorCode::MissingStratum,
         "manifest has no train-split entries for " + std::string(to_string(rule)));
  }
  return clips;
}

void cmd_synth(const Options& o, std::ostream& out) {
  const SynthRecipe recipe = load_recipe(o.recipe);
  const SynthOutput result = synth_generate(recipe, require_seed(o, "synth"), o.out);
  out << "clips: " << result.clips.size() << "\n"
      << "verses: " << result.verses.size() << "\n"
      << "manifest: " << result.manifest_path.string() << "\n"
      << "verses_manifest: " << result.verses_path.string() << "\n";
}

void cmd_split(const Options& o, std::ostream& out) {
  const std::uint64_t seed = require_seed(o, "split");
  const Manifest m = load_manifest(o.manifest);
  std::vector<ManifestEntry> entries = split(m.entries, o.fraction, seed);

  // Keep relative paths valid from the output manifest's directory.
  const fs::path out_dir = fs::absolute(fs::path(o.out)).parent_path();
  for (auto& e : entries) {
    if (fs::path(e.path).is_absolute()) continue;
    e.path = fs::absolute(m.resolve(e)).lexically_normal().lexically_relative(out_dir).generic_string();
  }
  save_manifest(entries, o.out);
  std::size_t train = 0;
  for (const auto& e : entries) train += e.split == Split::Train;
  out << "train: " << train << "\n" << "test: " << entries.size() - train << "\n";
}

void cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(o, "train");
  const RuleId rule = parse_rule_id(o.rule);
  if (o.c.size() != 1 || o.gamma.size() != 1) {
    fail(ErrorCode::InvalidArgument, "train takes exactly one --c and one --gamma");
  }
  const Manifest m = load_checked(o.manifest, err);
  const auto clips = rule_clips(m, rule);

  RuleTrainingParams params;
  params.C = o.c.front();
  params.gamma = o.gamma.front();
  params.seed = seed;
  params.features = feature_config(o);
  const TrainedRule trained = fit_rule_model(rule, clips, params);
  save_model(trained.model, o.out);

  const auto& s = trained.summary;
  out << "rule: " << to_string(rule) << "\n"
      << "svm_samples: " << s.svm_samples << "\n"
      << "holdout_samples: " << s.holdout_samples << "\n"
      << "support_vectors: " << s.support_vectors << "\n"
      << "holdout_accuracy: " << format_double(s.holdout_accuracy) << "\n"
      << "tau_right: " << format_double(s.thresholds.tau_right)
      << (s.thresholds.right_saturated ? " (saturated)" : "") << "\n"
      << "tau_wrong: " << format_double(s.thresholds.tau_wrong)
      << (s.thresholds.wrong_saturated ? " (saturated)" : "") << "\n"
      << "model: " << o.out << "\n";
}

void cmd_gridsearch(const Options& o, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = require_seed(o, "gridsearch");
  const RuleId rule = parse_rule_id(o.rule);
  const Manifest m = load_checked(o.manifest, err);
  const auto clips = rule_clips(m, rule);
  const FeatureConfig cfg = feature_config(o);
  const FilterBank bank = build_filterbank(cfg);

  Matrix raw;
  std::vector<int> y;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (!clips[i].label) continue;
    const AudioClip c = prepare_clip(clips[i].clip, cfg, derive_seed(seed, i));
    raw.append_row(extract_features(c, cfg, bank).values);
    y.push_back(svm_label(*clips[i].label));
  }
  const TrainingProblem problem{apply_scaler(raw, fit_scaler(raw)), y};

  GridSearchOptions gs;
  gs.c_grid = o.c;
  gs.gamma_grid = o.gamma;
  gs.folds = o.folds;
  gs.seed = seed;
  const GridSearchResult r = grid_search(problem, gs);

  out << "C,gamma,mean_accuracy";
  for (std::size_t f = 0; f < o.folds; ++f) out << ",fold" << f;
  out << "\n";
  for (const auto& cell : r.table) {
    out << format_double(cell.C) << "," << format_double(cell.gamma) << ","
        << format_double(cell.mean_accuracy);
    for (double a : cell.fold_accuracy) out << "," << format_double(a);
    out << "\n";
  }
  out << "best: C=" << format_double(r.best_C) << " gamma=" << format_double(r.best_gamma)
      << " accuracy=" << format_double(r.best_accuracy) << "\n";
}

void cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
  const Manifest m = load_checked(o.manifest, err);
  std::vector<RuleModel> models;
  for (const auto& p : o.models) models.push_back(load_model(p));

  std::optional<Split> wanted;
  if (o.split == "train") wanted = Split::Train;
  else if (o.split == "test") wanted = Split::Test;
  else if (o.split != "all") fail(ErrorCode::InvalidArgument, "--split must be train, test or all");

  std::vector<ManifestEntry> entries;
  for (const auto& e : m.entries) {
    if (!wanted || e.split == *wanted) entries.push_back(e);
  }
  const auto tables = evaluate(models, entries, m.base_dir);
  write_confusion_table(out, tables);
  out << "\n";
  write_confusion_csv(out, tables);
  if (!o.out.empty()) {
    std::ostringstream csv;
    write_confusion_csv(csv, tables);
    write_file(o.out, csv.str());
  }
}

void cmd_detect(const Options& o, std::ostream& out) {
  const RuleModel model = load_model(o.models.at(0));
  if (!o.rule.empty() && parse_rule_id(o.rule) != model.rule) {
    fail(ErrorCode::ConfigMismatch, "model is for " + std::string(to_string(model.rule)) +
                                        ", not " + o.rule);
  }
  const DetectionReport report = detect(model, load_wav(o.audio));

  out << to_string(model.rule) << ": ";
  if (report.verdict) {
    const auto& v = *report.verdict;
    out << to_string(v.polarity) << " onset_s=" << format_double(v.offset_s)
        << " closeness=" << v.closeness_pct << "%\n";
  } else {
    out << "none\n";
  }
  if (!o.timeline.empty()) {
    std::ostringstream t;
    write_timeline(t, model, report, o.truth);
    write_file(o.timeline, t.str());
  }
  if (!o.verdict_out.empty()) {
    write_file(o.verdict_out, format_verdict_file({o.audio, model.rule, report.verdict}));
  }
}

void print_record(std::ostream& out, const ReviewRecord& r) {
  out << r.record_id << "," << r.audio_path << "," << to_string(r.rule) << ",";
  if (r.verdict) {
    out << to_string(r.verdict->polarity) << "," << format_double(r.verdict->offset_s) << ","
        << r.verdict->closeness_pct;
  } else {
    out << "None,,";
  }
  out << "," << r.created_at << "," << to_string(r.status) << ","
      << (r.corrected_label ? std::string(label_name(*r.corrected_label)) : "") << "\n";
}

void cmd_review_append(const Options& o, std::ostream& out) {
  const VerdictFile v = parse_verdict_file(read_file(o.verdict_file));
  ReviewQueue q = ReviewQueue::open(o.queue);
  ReviewRecord r;
  r.record_id = o.record_id;
  r.audio_path = v.audio_path;
  r.rule = v.rule;
  r.verdict = v.verdict;
  out << q.append(r) << "\n";
}

void cmd_review_list(const Options& o, std::ostream& out) {
  const ReviewQueue q = ReviewQueue::open(o.queue);
  std::optional<ReviewStatus> filter;
  if (!o.status.empty()) filter = parse_review_status(o.status);
  out << "record_id,audio,rule_id,verdict,offset_s,closeness_pct,created_at,status,label\n";
  for (const auto& r : q.list(filter)) print_record(out, r);
}

void cmd_review_label(const Options& o, std::ostream& out) {
  ReviewQueue q = ReviewQueue::open(o.queue);
  const ReviewStatus status = parse_review_status(o.status);
  std::optional<Label> label;
  if (!o.label.empty()) label = parse_label(o.label);
  q.label(o.record_id, status, label, o.force);
  print_record(out, q.get(o.record_id));
}

void cmd_review_export(const Options& o, std::ostream& out) {
  const ReviewQueue q = ReviewQueue::open(o.queue);
  const auto rows = q.export_labeled();
  save_manifest(rows, o.out);
  out << "exported: " << rows.size() << "\n";
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Tajweed rule recognizer"};
  app.name(args.empty() ? "tajweed" : fs::path(args[0]).filename().string());
  app.require_subcommand(1);

  const auto add_seed = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "Random seed (explicit, no hidden entropy)");
  };
  const auto add_agg = [&](CLI::App* s) {
    s->add_option("--agg", o.agg, "Feature aggregation")
        ->check(CLI::IsMember({"mean_std_pool", "flatten"}));
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--recipe", o.recipe, "JSON recipe")->required();
  synth->add_option("--out", o.out, "Output directory")->required();
  add_seed(synth);

  auto* split_cmd = app.add_subcommand("split", "Assign train/test splits per stratum");
  split_cmd->add_option("--manifest", o.manifest)->required();
  split_cmd->add_option("--out", o.out, "Output manifest")->required();
  split_cmd->add_option("--fraction", o.fraction, "Train fraction")->check(CLI::Range(0.0, 1.0));
  add_seed(split_cmd);

  auto* train_cmd = app.add_subcommand("train", "Train one rule model");
  train_cmd->add_option("--manifest", o.manifest)->required();
  train_cmd->add_option("--rule", o.rule)->required();
  train_cmd->add_option("--c", o.c, "Soft-margin C")->expected(1);
  train_cmd->add_option("--gamma", o.gamma, "RBF gamma")->expected(1);
  train_cmd->add_option("--out", o.out, "Model file")->required();
  add_seed(train_cmd);
  add_agg(train_cmd);

  auto* gs_cmd = app.add_subcommand("gridsearch", "Cross-validated (C, gamma) search");
  gs_cmd->add_option("--manifest", o.manifest)->required();
  gs_cmd->add_option("--rule", o.rule)->required();
  auto* gs_c = gs_cmd->add_option("--c", o.c, "C grid (default 0.1 1 10 100)")->expected(1, 64);
  auto* gs_gamma =
      gs_cmd->add_option("--gamma", o.gamma, "gamma grid (default 0.001 0.01 0.1 1)")->expected(1, 64);
  gs_cmd->add_option("--folds", o.folds)->check(CLI::Range(2, 100));
  add_seed(gs_cmd);
  add_agg(gs_cmd);

  auto* eval_cmd = app.add_subcommand("evaluate", "Confusion tables over a manifest split");
  eval_cmd->add_option("--manifest", o.manifest)->required();
  eval_cmd->add_option("--model", o.models, "Model files, one per rule")->required();
  eval_cmd->add_option("--split", o.split, "train, test or all");
  eval_cmd->add_option("--out", o.out, "Also write machine-readable rows here");

  auto* detect_cmd = app.add_subcommand("detect", "Locate a rule in a recording");
  detect_cmd->add_option("audio", o.audio, "WAV recording")->required();
  detect_cmd->add_option("--model", o.models)->required()->expected(1);
  detect_cmd->add_option("--rule", o.rule, "Expected rule (checked against the model)");
  detect_cmd->add_option("--out,--timeline", o.timeline, "Timeline CSV");
  detect_cmd->add_option("--truth", o.truth, "Reference onset in seconds");
  detect_cmd->add_option("--verdict-out", o.verdict_out, "Verdict JSON for the review queue");

  auto* review = app.add_subcommand("review", "Expert review queue");
  review->require_subcommand(1);
  review->add_option("--queue", o.queue, "Queue file")->required();
  auto* r_append = review->add_subcommand("append", "Queue a detect verdict file");
  r_append->add_option("verdict", o.verdict_file)->required();
  r_append->add_option("--id", o.record_id, "Explicit record id (idempotent)");
  auto* r_list = review->add_subcommand("list", "List records");
  r_list->add_option("--status", o.status)->check(CLI::IsMember({"pending", "approved", "corrected"}));
  auto* r_label = review->add_subcommand("label", "Approve or correct a record");
  r_label->add_option("--id", o.record_id)->required();
  r_label->add_option("--status", o.status)->required()->check(
      CLI::IsMember({"pending", "approved", "corrected"}));
  r_label->add_option("--label", o.label, "Right, Wrong or None");
  r_label->add_flag("--force", o.force, "Relabel a reviewed record");
  auto* r_export = review->add_subcommand("export", "Write reviewed records as a manifest");
  r_export->add_option("--out", o.out)->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("tajweed");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kUsageExit;
  }

  try {
    if (*synth) cmd_synth(o, out);
    else if (*split_cmd) cmd_split(o, out);
    else if (*train_cmd) cmd_train(o, out, err);
    else if (*gs_cmd) {
      const GridSearchOptions defaults;
      if (gs_c->count() == 0) o.c = defaults.c_grid;
      if (gs_gamma->count() == 0) o.gamma = defaults.gamma_grid;
      cmd_gridsearch(o, out, err);
    }
    else if (*eval_cmd) cmd_evaluate(o, out, err);
    else if (*detect_cmd) cmd_detect(o, out);
    else if (*r_append) cmd_review_append(o, out);
    else if (*r_list) cmd_review_list(o, out);
    else if (*r_label) cmd_review_label(o, out);
    else if (*r_export) cmd_review_export(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  out.flush();
  return 0;
}

}  // namespace tajweed::cli
