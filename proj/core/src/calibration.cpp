#include <cmath>

#include "tajweed/svm.hpp"

namespace tajweed {

namespace {

constexpr int kMaxNewtonSteps = 100;
constexpr double kMinStep = 1e-10;
constexpr double kHessianRidge = 1e-12;
constexpr double kGradTol = 1e-5;

// -log-likelihood term for one sample, written to avoid exp overflow.
double nll_term(double target, double a_f_plus_b) {
  if (a_f_plus_b >= 0.0) return target * a_f_plus_b + std::log1p(std::exp(-a_f_plus_b));
  return (target - 1.0) * a_f_plus_b + std::log1p(std::exp(a_f_plus_b));
}

}  // namespace

double Calibration::probability(double decision) const noexcept {
  const double z = A * decision + B;
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

Calibration fit_calibration(std::span<const double> f, std::span<const int> labels) {
  if (f.size() != labels.size()) {
    fail(ErrorCode::DimensionMismatch, "decision values and labels differ in length");
  }
  double n_pos = 0.0, n_neg = 0.0;
  for (int y : labels) (y > 0 ? n_pos : n_neg) += 1.0;
  if (n_pos == 0.0 || n_neg == 0.0) fail(ErrorCode::SingleClass, "holdout needs both labels");

  const double hi_target = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo_target = 1.0 / (n_neg + 2.0);
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = labels[i] > 0 ? hi_target : lo_target;

  auto objective = [&](double a, double b) {
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) total += nll_term(t[i], f[i] * a + b);
    return total;
  };

  Calibration c{0.0, std::log((n_neg + 1.0) / (n_pos + 1.0))};
  double value = objective(c.A, c.B);

  for (int step = 0; step < kMaxNewtonSteps; ++step) {
    double h11 = kHessianRidge, h22 = kHessianRidge, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double p = c.probability(f[i]);
      const double q = 1.0 - p;
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < kGradTol && std::abs(g2) < kGradTol) break;

    const double det = h11 * h22 - h21 * h21;
    const double dA = -(h22 * g1 - h21 * g2) / det;
    const double dB = -(-h21 * g1 + h11 * g2) / det;
    const double slope = g1 * dA + g2 * dB;

    double scale = 1.0;
    while (scale >= kMinStep) {
      const double a = c.A + scale * dA;
      const double b = c.B + scale * dB;
      const double next = objective(a, b);
      if (next < value + 1e-4 * scale * slope) {
        c = {a, b};
        value = next;
        break;
      }
      scale /= 2.0;
    }
    if (scale < kMinStep) break;
  }
  return c;
}

Calibration fit_calibration(const SvmModel& model, const Matrix& holdout,
                            std::span<const int> labels) {
  std::vector<double> f(holdout.rows());
  for (std::size_t i = 0; i < holdout.rows(); ++i) f[i] = decision_value(model, holdout.row(i));
  return fit_calibration(f, labels);
}

}  // namespace tajweed
