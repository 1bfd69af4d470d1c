#include "conformal/core.hpp"

#include <algorithm>
#include <cmath>

namespace conformal {

double conformal_quantile(std::span<const double> scores, const Alpha& alpha) {
  if (scores.empty()) {
    throw InputError("conformal_quantile: empty score vector");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw InputError("conformal_quantile: scores must be finite");
    }
  }
  const auto n = static_cast<double>(scores.size());
  const auto rank = static_cast<std::size_t>(
      std::ceil((n + 1.0) * (1.0 - alpha.value())));
  if (rank > scores.size()) return kInf;
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[rank - 1];
}

double weighted_conformal_quantile(std::span<const double> scores,
                                   std::span<const double> weights,
                                   double test_weight, const Alpha& alpha) {
  if (scores.empty()) {
    throw InputError("weighted_conformal_quantile: empty score vector");
  }
  if (weights.size() != scores.size()) {
    throw InputError("weighted_conformal_quantile: |weights| != |scores|");
  }
  double total = test_weight;
  if (test_weight < 0.0) {
    throw InputError("weighted_conformal_quantile: negative test weight");
  }
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) {
      throw InputError("weighted_conformal_quantile: weights must be nonnegative finite");
    }
    total += w;
  }
  if (total <= 0.0) {
    throw InputError("weighted_conformal_quantile: total weight mass is zero");
  }

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  const double target = (1.0 - alpha.value()) * total;
  double mass = 0.0;
  for (std::size_t i : order) {
    mass += weights[i];
    if (mass >= target) return scores[i];
  }
  return kInf;  // remaining mass sits at the test point
}

}  // namespace conformal
