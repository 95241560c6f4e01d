#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dual_qp.hpp"
#include "eigen.hpp"
#include "generators.hpp"
#include "platt.hpp"
#include "tajweed/error.hpp"
#include "tajweed/svm.hpp"

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

std::vector<std::vector<double>> kernel_rows(const TrainingProblem& p, double gamma) {
  std::vector<std::vector<double>> K(p.size(), std::vector<double>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < p.dim(); ++k) d2 += std::pow(p.x(i, k) - p.x(j, k), 2);
      K[i][j] = std::exp(-gamma * d2);
    }
  }
  return K;
}

}  // namespace

TEST(RbfKernel, Values) {
  gen::Gen g(21);
  const auto x = g.vector(5);
  EXPECT_EQ(rbf_kernel(x, x, 0.7), 1.0);
  const std::vector<double> a{0.0, 0.0}, b{3.0, 1.0};  // squared distance 10
  EXPECT_NEAR(rbf_kernel(a, b, 0.1), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(rbf_kernel(a, b, 0.1), 0.367879, 1e-6);
  for (int i = 0; i < 50; ++i) {
    const auto u = g.vector(4), v = g.vector(4);
    EXPECT_EQ(rbf_kernel(u, v, 0.3), rbf_kernel(v, u, 0.3));
    EXPECT_GT(rbf_kernel(u, v, 0.3), 0.0);
    EXPECT_LE(rbf_kernel(u, v, 0.3), 1.0);
  }
  EXPECT_EQ(code_of([&] { rbf_kernel(g.vector(2), g.vector(3), 0.1); }), ErrorCode::DimensionMismatch);
}

TEST(RbfKernel, GramIsPositiveSemidefinite) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gen::Gen g(seed);
    Matrix x;
    for (int i = 0; i < 10; ++i) x.append_row(g.vector(3, -2.0, 2.0));
    const Matrix K = gram_matrix(x, KernelParams{g.uniform(0.01, 3.0)});
    std::vector<std::vector<double>> k(10, std::vector<double>(10));
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = 0; j < 10; ++j) {
        EXPECT_EQ(K(i, j), K(j, i));
        k[i][j] = K(i, j);
      }
    for (double ev : oracle::symmetric_eigenvalues(k)) EXPECT_GE(ev, -1e-8) << "seed " << seed;
  }
}

TEST(Train, TwoPointMaximalMargin) {
  TrainingProblem p;
  p.x.append_row(std::vector<double>{0.0});
  p.x.append_row(std::vector<double>{2.0});
  p.y = {-1, 1};
  // Small gamma puts the RBF machine in its near-linear regime.
  const SvmModel m = train(p, 1e6, KernelParams{1e-3});
  EXPECT_NEAR(decision_value(m, std::vector<double>{1.0}), 0.0, 1e-3);
  EXPECT_LE(decision_value(m, std::vector<double>{0.0}), -1.0 + 1e-3);
  EXPECT_GE(decision_value(m, std::vector<double>{2.0}), 1.0 - 1e-3);
}

TEST(Train, PreconditionErrors) {
  TrainingProblem p;
  p.x.append_row(std::vector<double>{0.0});
  p.x.append_row(std::vector<double>{1.0});
  p.y = {1, 1};
  EXPECT_EQ(code_of([&] { train(p, 1.0, {}); }), ErrorCode::SingleClass);
  p.y = {1, -1};
  EXPECT_EQ(code_of([&] { train(p, 0.0, {}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { train(p, 1.0, KernelParams{-1.0}); }), ErrorCode::InvalidArgument);
  p.y = {1, 2};
  EXPECT_EQ(code_of([&] { train(p, 1.0, {}); }), ErrorCode::InvalidArgument);
  p.y = {1};
  EXPECT_NE(code_of([&] { train(p, 1.0, {}); }), ErrorCode{});
}

TEST(Train, SixPointsMatchBruteForceQp) {
  gen::Gen g(22);
  const TrainingProblem p = g.blobs(6, 2, 3.0);
  const double C = 10.0, gamma = 0.5;
  const DualSolution smo = solve_dual(p, C, KernelParams{gamma});
  const auto ref = oracle::solve_dual_bruteforce(kernel_rows(p, gamma), p.y, C);
  ASSERT_TRUE(smo.converged);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(smo.alpha[i], ref.alpha[i], 1e-3) << i;

  // Decision values from the oracle's alphas, with the bias from free vectors.
  const SvmModel m = train(p, C, KernelParams{gamma});
  const auto K = kernel_rows(p, gamma);
  double b_sum = 0.0;
  int free = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    if (ref.alpha[i] > 1e-6 && ref.alpha[i] < C - 1e-6) {
      double f = 0.0;
      for (std::size_t j = 0; j < 6; ++j) f += ref.alpha[j] * p.y[j] * K[j][i];
      b_sum += p.y[i] - f;
      ++free;
    }
  }
  ASSERT_GT(free, 0);
  const double b = b_sum / free;
  for (int t = 0; t < 20; ++t) {
    const auto x = g.vector(2, -3.0, 3.0);
    double f = b;
    for (std::size_t j = 0; j < 6; ++j) f += ref.alpha[j] * p.y[j] * rbf_kernel(p.x.row(j), x, gamma);
    EXPECT_NEAR(decision_value(m, x), f, 1e-3);
  }
}

TEST(Train, PropertyOptimalFeasibleKkt) {
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    gen::Gen g(seed);
    const std::size_t l = g.index(2, 8);
    const TrainingProblem p = g.blobs(l, g.index(1, 3), g.uniform(0.0, 4.0));
    const double C = std::pow(10.0, g.uniform(-1.0, 2.0));
    const KernelParams k{std::pow(10.0, g.uniform(-1.0, 0.5))};

    const DualSolution s = solve_dual(p, C, k);
    ASSERT_TRUE(s.converged) << "seed " << seed;
    double balance = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      ASSERT_GE(s.alpha[i], 0.0);
      ASSERT_LE(s.alpha[i], C);
      balance += s.alpha[i] * p.y[i];
    }
    EXPECT_LT(std::abs(balance), 1e-6) << "seed " << seed;
    EXPECT_LE(max_kkt_violation(p, s.alpha, s.bias, C, k), 1e-3) << "seed " << seed;

    const auto ref = oracle::solve_dual_bruteforce(kernel_rows(p, k.gamma), p.y, C);
    EXPECT_GE(dual_objective(p, s.alpha, k), ref.objective - 1e-6) << "seed " << seed;
  }
}

TEST(Train, ModelInvariants) {
  gen::Gen g(23);
  const TrainingProblem p = g.blobs(40, 3, 1.5);
  const SvmModel m = train(p, 1.0, KernelParams{0.5});
  EXPECT_NO_THROW(m.validate());
  ASSERT_GE(m.dual_coefs.size(), 1u);
  EXPECT_EQ(m.dual_coefs.size(), m.support_vectors.rows());
  double sum = 0.0;
  for (double c : m.dual_coefs) {
    EXPECT_LE(std::abs(c), m.C);
    EXPECT_NE(c, 0.0);
    sum += c;
  }
  EXPECT_LT(std::abs(sum), 1e-6);

  // Free support vectors sit on the margin.
  for (std::size_t i = 0; i < m.support_vectors.rows(); ++i) {
    const double a = std::abs(m.dual_coefs[i]);
    if (a > 1e-9 && a < m.C - 1e-9) {
      const double yf = (m.dual_coefs[i] > 0 ? 1 : -1) *
                        decision_value_standardized(m, m.support_vectors.row(i));
      EXPECT_NEAR(yf, 1.0, 1e-3);
    }
  }
}

TEST(Train, PermutationInvariantPredictions) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    gen::Gen g(seed);
    const TrainingProblem p = g.blobs(20, 2, 2.0);
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), g.rng());
    TrainingProblem q;
    for (std::size_t i : order) {
      q.x.append_row(p.x.row(i));
      q.y.push_back(p.y[i]);
    }
    const SvmModel a = train(p, 1.0, KernelParams{0.5});
    const SvmModel b = train(q, 1.0, KernelParams{0.5});
    for (int t = 0; t < 50; ++t) {
      const auto x = g.vector(2, -4.0, 4.0);
      const double fa = decision_value(a, x), fb = decision_value(b, x);
      if (std::abs(fa) > 1e-3) {
        EXPECT_EQ(fa > 0, fb > 0) << "seed " << seed;
      }
    }
  }
}

TEST(Train, DeterministicAndPure) {
  gen::Gen g(24);
  const TrainingProblem p = g.blobs(30, 4, 1.0);
  const SvmModel a = train(p, 1.0, KernelParams{0.1});
  const SvmModel b = train(p, 1.0, KernelParams{0.1});
  EXPECT_EQ(a.dual_coefs, b.dual_coefs);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.support_vectors, b.support_vectors);
  const auto x = g.vector(4);
  EXPECT_EQ(decision_value(a, x), decision_value(a, x));
}

TEST(Train, NoConvergenceCarriesBestIterate) {
  gen::Gen g(25);
  const TrainingProblem p = g.blobs(60, 3, 0.5);
  TrainOptions opts;
  opts.max_passes = 0;
  try {
    train(p, 10.0, KernelParams{1.0}, opts);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergenceError& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoConvergence);
    EXPECT_FALSE(e.solution().converged);
    EXPECT_EQ(e.solution().alpha.size(), p.size());
  }
}

TEST(SvmModel, ValidateRejectsInconsistentShapes) {
  gen::Gen g(26);
  SvmModel m = train(g.blobs(10, 2, 3.0), 1.0, KernelParams{0.5});
  m.dual_coefs.push_back(0.0);
  EXPECT_EQ(code_of([&] { m.validate(); }), ErrorCode::SchemaError);
}

TEST(Calibration, SigmoidAtZeroDependsOnlyOnB) {
  const Calibration c{-3.0, 0.7};
  EXPECT_DOUBLE_EQ(c.probability(0.0), 1.0 / (1.0 + std::exp(0.7)));
  EXPECT_GT(c.probability(1.0), c.probability(0.5));
  EXPECT_GE(c.probability(1e6), 0.0);
  EXPECT_LE(c.probability(-1e6), 1.0);
}

TEST(Calibration, SeparatedHoldout) {
  std::vector<double> f;
  std::vector<int> y;
  for (int i = 0; i < 20; ++i) {
    f.push_back(2.0);
    y.push_back(1);
    f.push_back(-2.0);
    y.push_back(-1);
  }
  const Calibration c = fit_calibration(f, y);
  EXPECT_LT(c.A, 0.0);
  EXPECT_GT(c.probability(2.0), 0.9);
  EXPECT_LT(c.probability(-2.0), 0.1);

  for (int& v : y) v = -v;
  const Calibration flipped = fit_calibration(f, y);
  EXPECT_GT(flipped.A, 0.0);
}

TEST(Calibration, MatchesBruteForceLikelihood) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    gen::Gen g(seed);
    std::vector<double> f;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
      const int label = g.coin() ? 1 : -1;
      f.push_back(g.normal(0.8 * label, 1.0));
      y.push_back(label);
    }
    y[0] = 1;
    y[1] = -1;
    const Calibration c = fit_calibration(f, y);
    const auto ref = oracle::platt_bruteforce(f, y);
    EXPECT_NEAR(c.A, ref.A, 1e-4) << "seed " << seed;
    EXPECT_NEAR(c.B, ref.B, 1e-4) << "seed " << seed;
    EXPECT_LE(oracle::platt_nll(f, y, c.A, c.B), ref.nll + 1e-9);
  }
}

TEST(Calibration, MonotoneWhenANegative) {
  const Calibration c{-1.5, 0.2};
  double prev = -1.0;
  for (double f = -5.0; f <= 5.0; f += 0.25) {
    const double p = c.probability(f);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Calibration, Errors) {
  const std::vector<double> f{1.0, 2.0};
  EXPECT_EQ(code_of([&] { fit_calibration(f, std::vector<int>{1, 1}); }), ErrorCode::SingleClass);
  EXPECT_EQ(code_of([&] { fit_calibration(f, std::vector<int>{1}); }), ErrorCode::DimensionMismatch);
}

TEST(StratifiedFolds, BalancedPerClass) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    gen::Gen g(seed);
    const std::size_t k = g.index(2, 6);
    std::vector<int> y;
    const std::size_t pos = g.index(k, 40), neg = g.index(k, 40);
    for (std::size_t i = 0; i < pos; ++i) y.push_back(1);
    for (std::size_t i = 0; i < neg; ++i) y.push_back(-1);
    std::shuffle(y.begin(), y.end(), g.rng());
    const auto fold_of = stratified_folds(y, k, seed);
    for (int label : {1, -1}) {
      std::vector<std::size_t> count(k, 0);
      for (std::size_t i = 0; i < y.size(); ++i)
        if (y[i] == label) ++count[fold_of[i]];
      const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      EXPECT_LE(*hi - *lo, 1u) << "seed " << seed;
    }
    EXPECT_EQ(fold_of, stratified_folds(y, k, seed));
  }
  EXPECT_EQ(code_of([] { stratified_folds(std::vector<int>{1, 1, -1}, 2, 0); }),
            ErrorCode::TooFewSamples);
}

TEST(GridSearch, SingletonGridIsThatCell) {
  gen::Gen g(30);
  const TrainingProblem p = g.blobs(30, 2, 2.0);
  GridSearchOptions opts;
  opts.c_grid = {3.0};
  opts.gamma_grid = {0.2};
  const auto r = grid_search(p, opts);
  ASSERT_EQ(r.table.size(), 1u);
  EXPECT_EQ(r.best_C, 3.0);
  EXPECT_EQ(r.best_gamma, 0.2);
  EXPECT_EQ(r.best_accuracy, r.table[0].mean_accuracy);
  EXPECT_EQ(r.table[0].fold_accuracy.size(), opts.folds);
}

TEST(GridSearch, SeparableDataReachesPerfectAccuracy) {
  gen::Gen g(31);
  const TrainingProblem p = g.blobs(40, 3, 12.0, 0.5);
  GridSearchOptions opts;
  opts.c_grid = {1.0, 10.0};
  opts.gamma_grid = {0.01, 0.1};
  EXPECT_EQ(grid_search(p, opts).best_accuracy, 1.0);
}

TEST(GridSearch, CellsMatchIndependentRecomputation) {
  gen::Gen g(32);
  const TrainingProblem p = g.blobs(35, 2, 1.2);
  GridSearchOptions opts;
  opts.c_grid = {0.5, 5.0};
  opts.gamma_grid = {0.1, 1.0};
  opts.folds = 4;
  opts.seed = 9;
  const auto r = grid_search(p, opts);
  const auto fold_of = stratified_folds(p.y, opts.folds, opts.seed);

  double best = -1.0;
  for (const CvCell& cell : r.table) {
    double sum = 0.0;
    for (std::size_t fold = 0; fold < opts.folds; ++fold) {
      TrainingProblem part;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (fold_of[i] != fold) {
          part.x.append_row(p.x.row(i));
          part.y.push_back(p.y[i]);
        }
      }
      const SvmModel m = train(part, cell.C, KernelParams{cell.gamma});
      int right = 0, n = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (fold_of[i] != fold) continue;
        ++n;
        if ((decision_value(m, p.x.row(i)) >= 0.0 ? 1 : -1) == p.y[i]) ++right;
      }
      const double acc = static_cast<double>(right) / n;
      EXPECT_DOUBLE_EQ(cell.fold_accuracy[fold], acc);
      sum += acc;
    }
    EXPECT_NEAR(cell.mean_accuracy, sum / opts.folds, 1e-12);
    best = std::max(best, cell.mean_accuracy);
  }
  EXPECT_EQ(r.best_accuracy, best);
}

TEST(GridSearch, TiesGoToSmallestCThenGamma) {
  gen::Gen g(33);
  const TrainingProblem p = g.blobs(30, 2, 12.0, 0.5);
  GridSearchOptions opts;
  opts.c_grid = {10.0, 1.0, 10.0};
  opts.gamma_grid = {0.5, 0.05};
  const auto r = grid_search(p, opts);
  for (const CvCell& c : r.table) ASSERT_EQ(c.mean_accuracy, 1.0);
  ASSERT_EQ(r.table.size(), 4u);
  EXPECT_EQ(r.table.front().C, 1.0);
  EXPECT_EQ(r.table.front().gamma, 0.05);
  EXPECT_EQ(r.best_C, 1.0);
  EXPECT_EQ(r.best_gamma, 0.05);
}

TEST(GridSearch, Errors) {
  gen::Gen g(34);
  const TrainingProblem p = g.blobs(4, 2, 2.0);
  GridSearchOptions opts;
  EXPECT_EQ(code_of([&] { grid_search(p, opts); }), ErrorCode::TooFewSamples);
  opts.c_grid.clear();
  EXPECT_EQ(code_of([&] { grid_search(g.blobs(20, 2, 2.0), opts); }), ErrorCode::InvalidArgument);
}
