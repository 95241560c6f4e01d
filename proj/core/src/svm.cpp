#include "tajweed/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tajweed {

namespace {

constexpr double kTau = 1e-12;

// alpha_i can still grow along +y_i.
bool in_up(int y, double alpha, double C) { return y > 0 ? alpha < C : alpha > 0.0; }
// alpha_i can still shrink along -y_i.
bool in_low(int y, double alpha, double C) { return y > 0 ? alpha > 0.0 : alpha < C; }

// Bias from the gradient G = Q alpha - e: average of -y_i G_i over free
// vectors, or the midpoint of the feasible interval when none are free.
double compute_bias(std::span<const int> y, std::span<const double> alpha,
                    std::span<const double> grad, double C) {
  double sum_free = 0.0;
  std::size_t n_free = 0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yg = y[i] * grad[i];
    if (alpha[i] >= C) {
      if (y[i] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[i] <= 0.0) {
      if (y[i] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      sum_free += yg;
      ++n_free;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2.0;
  return -rho;
}

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  if (a.size() != b.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

Matrix gram_matrix(const Matrix& x, const KernelParams& kernel) {
  const std::size_t n = x.rows();
  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = rbf_kernel(x.row(i), x.row(j), kernel.gamma);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

void TrainingProblem::validate() const {
  if (y.size() < 2) fail(ErrorCode::TooFewSamples, "need at least two samples");
  if (x.rows() != y.size()) {
    fail(ErrorCode::DimensionMismatch, std::to_string(x.rows()) + " rows but " +
                                           std::to_string(y.size()) + " labels");
  }
  bool pos = false, neg = false;
  for (int label : y) {
    if (label == 1) pos = true;
    else if (label == -1) neg = true;
    else fail(ErrorCode::InvalidArgument, "labels must be -1 or +1");
  }
  if (!pos || !neg) fail(ErrorCode::SingleClass, "training labels contain a single class");
}

DualSolution solve_dual(const TrainingProblem& problem, double C, const KernelParams& kernel,
                        const TrainOptions& options) {
  problem.validate();
  if (!(C > 0.0)) fail(ErrorCode::InvalidArgument, "C must be positive");
  if (!(kernel.gamma > 0.0)) fail(ErrorCode::InvalidArgument, "gamma must be positive");

  const std::size_t n = problem.size();
  const auto& y = problem.y;
  const Matrix K = gram_matrix(problem.x, kernel);

  DualSolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& alpha = sol.alpha;

  const std::size_t max_iter = std::max<std::size_t>(1, options.max_passes) * n;
  while (sol.iterations < max_iter) {
    std::size_t i = n, j = n;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(y[t], alpha[t], C) && v > g_max) { g_max = v; i = t; }
      if (in_low(y[t], alpha[t], C) && v < g_min) { g_min = v; j = t; }
    }
    if (i == n || j == n || g_max - g_min < options.gap_eps) {
      sol.converged = true;
      break;
    }
    ++sol.iterations;

    const double Kij = K(i, j);
    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      const double quad = std::max(K(i, i) + K(j, j) - 2.0 * Kij, kTau);
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = C - diff; }
      } else {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = C + diff; }
      }
    } else {
      const double quad = std::max(K(i, i) + K(j, j) - 2.0 * Kij, kTau);
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) { alpha[i] = C; alpha[j] = sum - C; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > C) {
        if (alpha[j] > C) { alpha[j] = C; alpha[i] = sum - C; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    alpha[i] = std::clamp(alpha[i], 0.0, C);
    alpha[j] = std::clamp(alpha[j], 0.0, C);

    const double dai = (alpha[i] - old_ai) * y[i];
    const double daj = (alpha[j] - old_aj) * y[j];
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (K(i, t) * dai + K(j, t) * daj);
    }
  }

  sol.bias = compute_bias(y, alpha, grad, C);
  return sol;
}

double dual_objective(const TrainingProblem& problem, std::span<const double> alpha,
                      const KernelParams& kernel) {
  const Matrix K = gram_matrix(problem.x, kernel);
  double linear = 0.0, quad = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    linear += alpha[i];
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      quad += alpha[i] * alpha[j] * problem.y[i] * problem.y[j] * K(i, j);
    }
  }
  return linear - 0.5 * quad;
}

double max_kkt_violation(const TrainingProblem& problem, std::span<const double> alpha,
                         double bias, double C, const KernelParams& kernel) {
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.size(); ++i) {
    double f = bias;
    for (std::size_t j = 0; j < problem.size(); ++j) {
      if (alpha[j] > 0.0) {
        f += alpha[j] * problem.y[j] * rbf_kernel(problem.x.row(j), problem.x.row(i), kernel.gamma);
      }
    }
    const double margin = problem.y[i] * f;
    double v = 0.0;
    if (alpha[i] <= 0.0) v = std::max(0.0, 1.0 - margin);
    else if (alpha[i] >= C) v = std::max(0.0, margin - 1.0);
    else v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

void SvmModel::validate() const {
  if (dual_coefs.empty() || dual_coefs.size() != support_vectors.rows()) {
    fail(ErrorCode::SchemaError, std::to_string(dual_coefs.size()) + " dual coefficients for " +
                                     std::to_string(support_vectors.rows()) + " support vectors");
  }
  if (scaler.mean.size() != dim() || scaler.stddev.size() != dim()) {
    fail(ErrorCode::SchemaError, "scaler dimension does not match support vectors");
  }
  if (!(C > 0.0) || !(kernel.gamma > 0.0)) {
    fail(ErrorCode::SchemaError, "C and gamma must be positive");
  }
  double sum = 0.0;
  for (double c : dual_coefs) {
    if (std::abs(c) > C) fail(ErrorCode::SchemaError, "dual coefficient exceeds C");
    sum += c;
  }
  if (std::abs(sum) > 1e-6) fail(ErrorCode::SchemaError, "dual coefficients do not sum to zero");
}

SvmModel train(const TrainingProblem& problem, double C, const KernelParams& kernel,
               const TrainOptions& options) {
  DualSolution sol = solve_dual(problem, C, kernel, options);

  SvmModel model;
  model.bias = sol.bias;
  model.kernel = kernel;
  model.C = C;
  model.scaler = Scaler::identity(problem.dim());
  for (std::size_t i = 0; i < problem.size(); ++i) {
    if (sol.alpha[i] > 0.0) {
      model.support_vectors.append_row(problem.x.row(i));
      model.dual_coefs.push_back(sol.alpha[i] * problem.y[i]);
    }
  }

  const double violation = max_kkt_violation(problem, sol.alpha, sol.bias, C, kernel);
  if (!sol.converged || violation > options.tol) {
    throw NoConvergenceError(
        std::string(error_name(ErrorCode::NoConvergence)) + ": KKT violation " +
            std::to_string(violation) + " after " + std::to_string(sol.iterations) + " iterations",
        std::move(model), std::move(sol));
  }
  return model;
}

double decision_value_standardized(const SvmModel& model, std::span<const double> z) {
  if (z.size() != model.dim()) {
    fail(ErrorCode::DimensionMismatch, "input has " + std::to_string(z.size()) +
                                           " dims, model " + std::to_string(model.dim()));
  }
  double f = model.bias;
  for (std::size_t i = 0; i < model.dual_coefs.size(); ++i) {
    f += model.dual_coefs[i] * rbf_kernel(model.support_vectors.row(i), z, model.kernel.gamma);
  }
  return f;
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  return decision_value_standardized(model, model.scaler.apply(x));
}

}  // namespace tajweed
