#pragma once

#include <span>
#include <vector>

#include "conformal/core.hpp"

namespace conformal {

struct EvaluationReport {
  double coverage_rate = 0.0;
  double average_size = 0.0;  // set cardinality or interval width; may be +inf
  double cov_gap = 0.0;       // classification only, percentage points
  long n_test = 0;
};

double coverage_rate(std::span<const PredictionSet> sets,
                     std::span<const int> truths);
double coverage_rate(std::span<const PredictionInterval> intervals,
                     const std::vector<std::vector<double>>& truths);

double average_size(std::span<const PredictionSet> sets);
double average_width(std::span<const PredictionInterval> intervals);

// Mean absolute deviation of class-conditional coverage from 1 - alpha, in
// percentage points, over classes present in the test set.
double cov_gap(std::span<const PredictionSet> sets, std::span<const int> truths,
               const Alpha& alpha, int num_classes);

}  // namespace conformal
