#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tajweed/error.hpp"
#include "tajweed/features.hpp"
#include "tajweed/matrix.hpp"

namespace tajweed {

struct KernelParams {
  double gamma = 0.1;
  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// exp(-gamma * ||a - b||^2)
double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

/// Full l x l Gram matrix.
Matrix gram_matrix(const Matrix& x, const KernelParams& kernel);

/// Rows of `x` are (standardized) samples; labels are -1 or +1.
struct TrainingProblem {
  Matrix x;
  std::vector<int> y;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t dim() const noexcept { return x.cols(); }

  /// Throws TooFewSamples, DimensionMismatch, InvalidArgument or SingleClass.
  void validate() const;
};

struct TrainOptions {
  /// KKT tolerance the returned solution must satisfy.
  double tol = 1e-3;
  /// Iteration budget, in sweeps of l pair updates.
  std::size_t max_passes = 10000;
  /// Maximal-violating-pair gap at which SMO stops.
  double gap_eps = 1e-6;
};

struct DualSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// SMO on the soft-margin dual with first-order (maximal violating pair)
/// working-set selection. Ties go to the lowest index, so the result is a
/// pure function of the inputs.
DualSolution solve_dual(const TrainingProblem& problem, double C, const KernelParams& kernel,
                        const TrainOptions& options = {});

/// sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
double dual_objective(const TrainingProblem& problem, std::span<const double> alpha,
                      const KernelParams& kernel);

/// Largest KKT violation of (alpha, bias), measured on y_i f(x_i).
double max_kkt_violation(const TrainingProblem& problem, std::span<const double> alpha,
                         double bias, double C, const KernelParams& kernel);

struct SvmModel {
  Matrix support_vectors;          ///< standardized coordinates
  std::vector<double> dual_coefs;  ///< alpha_i * y_i
  double bias = 0.0;
  KernelParams kernel;
  double C = 1.0;
  Scaler scaler;

  std::size_t dim() const noexcept { return support_vectors.cols(); }

  /// Throws SchemaError when shapes or dual constraints are inconsistent.
  void validate() const;
};

/// Thrown by train() when the pass budget runs out. Carries the best iterate.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, SvmModel best, DualSolution solution)
      : Error(ErrorCode::NoConvergence, what),
        best_(std::move(best)),
        solution_(std::move(solution)) {}

  const SvmModel& best_iterate() const noexcept { return best_; }
  const DualSolution& solution() const noexcept { return solution_; }

 private:
  SvmModel best_;
  DualSolution solution_;
};

/// The returned model carries an identity scaler; callers that standardized
/// the problem install their fitted scaler afterwards.
SvmModel train(const TrainingProblem& problem, double C, const KernelParams& kernel,
               const TrainOptions& options = {});

/// Expansion over support vectors of an already standardized vector.
double decision_value_standardized(const SvmModel& model, std::span<const double> z);

/// Applies the model's scaler to `x` first.
double decision_value(const SvmModel& model, std::span<const double> x);

/// Platt sigmoid: p(+1 | f) = 1 / (1 + exp(A f + B)).
struct Calibration {
  double A = -1.0;
  double B = 0.0;

  double probability(double decision) const noexcept;
  friend bool operator==(const Calibration&, const Calibration&) = default;
};

/// Newton fit of the regularized sigmoid likelihood with smoothed targets
/// t+ = (N+ + 1)/(N+ + 2), t- = 1/(N- + 2).
Calibration fit_calibration(std::span<const double> decision_values, std::span<const int> labels);

/// Scores raw holdout rows through `model` and fits on them.
Calibration fit_calibration(const SvmModel& model, const Matrix& holdout,
                            std::span<const int> labels);

/// Stratified fold index per sample. Each class is shuffled with `seed` and
/// dealt round-robin over the folds.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t k,
                                          std::uint64_t seed);

struct CvCell {
  double C = 0.0;
  double gamma = 0.0;
  double mean_accuracy = 0.0;
  std::vector<double> fold_accuracy;
};

struct GridSearchOptions {
  std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_grid{0.001, 0.01, 0.1, 1.0};
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  TrainOptions train;
};

struct GridSearchResult {
  double best_C = 0.0;
  double best_gamma = 0.0;
  double best_accuracy = 0.0;
  std::vector<CvCell> table;  ///< C ascending, then gamma ascending
};

/// Mean fold accuracy of one (C, gamma) cell for a fixed fold assignment.
CvCell cross_validate(const TrainingProblem& problem, double C, const KernelParams& kernel,
                      std::span<const std::size_t> fold_of, std::size_t folds,
                      const TrainOptions& options = {});

/// Exhaustive search; ties go to the smaller C, then the smaller gamma.
GridSearchResult grid_search(const TrainingProblem& problem, const GridSearchOptions& options);

}  // namespace tajweed
