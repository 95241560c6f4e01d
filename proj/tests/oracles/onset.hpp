#pragma once

// Locates a known template inside a longer signal by brute-force normalized
// cross-correlation.

#include <cmath>
#include <span>

namespace oracle {

inline std::size_t best_lag(std::span<const double> signal, std::span<const double> templ) {
  double tt = 0.0;
  for (double v : templ) tt += v * v;
  std::size_t best = 0;
  double best_score = -2.0;
  for (std::size_t lag = 0; lag + templ.size() <= signal.size(); ++lag) {
    double st = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < templ.size(); ++i) {
      st += signal[lag + i] * templ[i];
      ss += signal[lag + i] * signal[lag + i];
    }
    const double score = ss > 0.0 ? st / std::sqrt(ss * tt) : 0.0;
    if (score > best_score) {
      best_score = score;
      best = lag;
    }
  }
  return best;
}

}  // namespace oracle
