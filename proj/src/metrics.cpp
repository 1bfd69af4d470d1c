#include "conformal/metrics.hpp"

#include <cmath>

namespace conformal {

namespace {

void check_nonempty(std::size_t a, std::size_t b) {
  if (a == 0) throw InputError("metrics: empty input");
  if (a != b) throw InputError("metrics: predictions/truths length mismatch");
}

}  // namespace

double coverage_rate(std::span<const PredictionSet> sets,
                     std::span<const int> truths) {
  check_nonempty(sets.size(), truths.size());
  std::size_t covered = 0;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].contains(truths[i])) ++covered;
  }
  return static_cast<double>(covered) / sets.size();
}

double coverage_rate(std::span<const PredictionInterval> intervals,
                     const std::vector<std::vector<double>>& truths) {
  check_nonempty(intervals.size(), truths.size());
  std::size_t covered = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (intervals[i].covers(truths[i])) ++covered;
  }
  return static_cast<double>(covered) / intervals.size();
}

double average_size(std::span<const PredictionSet> sets) {
  if (sets.empty()) throw InputError("metrics: empty input");
  double total = 0.0;
  for (const auto& s : sets) total += static_cast<double>(s.size());
  return total / sets.size();
}

double average_width(std::span<const PredictionInterval> intervals) {
  if (intervals.empty()) throw InputError("metrics: empty input");
  double total = 0.0;
  for (const auto& iv : intervals) total += iv.width();
  return total / intervals.size();
}

double cov_gap(std::span<const PredictionSet> sets, std::span<const int> truths,
               const Alpha& alpha, int num_classes) {
  check_nonempty(sets.size(), truths.size());
  if (num_classes < 1) throw InputError("cov_gap: num_classes < 1");
  std::vector<long> count(num_classes, 0), hit(num_classes, 0);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const int y = truths[i];
    if (y < 0 || y >= num_classes) throw InputError("cov_gap: truth out of range");
    ++count[y];
    if (sets[i].contains(y)) ++hit[y];
  }
  double gap = 0.0;
  int present = 0;
  for (int k = 0; k < num_classes; ++k) {
    if (count[k] == 0) continue;  // absent classes are excluded
    ++present;
    const double cov = static_cast<double>(hit[k]) / count[k];
    gap += std::abs(cov - (1.0 - alpha.value()));
  }
  if (present == 0) throw InputError("cov_gap: no class present in test set");
  return 100.0 * gap / present;
}

}  // namespace conformal
