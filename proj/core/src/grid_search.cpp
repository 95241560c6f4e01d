#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#include "tajweed/svm.hpp"

namespace tajweed {

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) fail(ErrorCode::InvalidArgument, "need at least two folds");
  if (labels.size() < k) {
    fail(ErrorCode::TooFewSamples, std::to_string(labels.size()) + " samples for " +
                                       std::to_string(k) + " folds");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (const auto& [label, members] : by_class) {
    if (members.size() < k) {
      fail(ErrorCode::TooFewSamples, "class " + std::to_string(label) + " has " +
                                         std::to_string(members.size()) +
                                         " samples, fewer than the fold count");
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> fold_of(labels.size());
  for (auto& [label, members] : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t r = 0; r < members.size(); ++r) fold_of[members[r]] = r % k;
  }
  return fold_of;
}

CvCell cross_validate(const TrainingProblem& problem, double C, const KernelParams& kernel,
                      std::span<const std::size_t> fold_of, std::size_t folds,
                      const TrainOptions& options) {
  CvCell cell{C, kernel.gamma, 0.0, {}};
  for (std::size_t fold = 0; fold < folds; ++fold) {
    TrainingProblem train_part;
    std::vector<std::size_t> held;
    for (std::size_t i = 0; i < problem.size(); ++i) {
      if (fold_of[i] == fold) {
        held.push_back(i);
      } else {
        train_part.x.append_row(problem.x.row(i));
        train_part.y.push_back(problem.y[i]);
      }
    }
    const SvmModel model = train(train_part, C, kernel, options);
    std::size_t correct = 0;
    for (std::size_t i : held) {
      const double f = decision_value_standardized(model, problem.x.row(i));
      if ((f >= 0.0 ? 1 : -1) == problem.y[i]) ++correct;
    }
    cell.fold_accuracy.push_back(held.empty() ? 0.0
                                              : static_cast<double>(correct) /
                                                    static_cast<double>(held.size()));
  }
  cell.mean_accuracy = std::accumulate(cell.fold_accuracy.begin(), cell.fold_accuracy.end(), 0.0) /
                       static_cast<double>(folds);
  return cell;
}

GridSearchResult grid_search(const TrainingProblem& problem, const GridSearchOptions& options) {
  problem.validate();
  if (options.c_grid.empty() || options.gamma_grid.empty()) {
    fail(ErrorCode::InvalidArgument, "empty hyperparameter grid");
  }
  if (problem.size() < options.folds) {
    fail(ErrorCode::TooFewSamples, std::to_string(problem.size()) + " samples for " +
                                       std::to_string(options.folds) + " folds");
  }
  const auto fold_of = stratified_folds(problem.y, options.folds, options.seed);

  auto cs = options.c_grid;
  auto gammas = options.gamma_grid;
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  std::sort(gammas.begin(), gammas.end());
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  GridSearchResult result;
  bool have_best = false;
  for (double c : cs) {
    for (double g : gammas) {
      CvCell cell = cross_validate(problem, c, KernelParams{g}, fold_of, options.folds,
                                   options.train);
      // Strictly greater keeps the earliest (smallest C, then gamma) on ties.
      if (!have_best || cell.mean_accuracy > result.best_accuracy) {
        result.best_C = c;
        result.best_gamma = g;
        result.best_accuracy = cell.mean_accuracy;
        have_best = true;
      }
      result.table.push_back(std::move(cell));
    }
  }
  return result;
}

}  // namespace tajweed
