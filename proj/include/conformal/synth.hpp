#pragma once

#include <cstdint>
#include <vector>

#include "conformal/core.hpp"

namespace conformal {

// X_t uniform on [0,1]^6; Y_t a fixed nonlinear function of the first five
// coordinates plus ARMA(1,1) noise eps_{t+1} = phi*eps_t + xi_{t+1} + theta*xi_t.
struct ArmaConfig {
  double phi = 0.8;
  double theta = 0.8;
  double innovation_std = 1.0;
  std::uint64_t seed = 0;
  int t_total = 500;
  int burn_in = 0;
};

struct TimeSeriesBatch {
  std::vector<std::vector<double>> inputs;  // t_total x 6
  std::vector<double> targets;
  std::vector<double> noise;  // the realized eps_t, for diagnostics
};

TimeSeriesBatch generate_time_series(const ArmaConfig& config);

// Noise-free regression surface underlying the series.
double time_series_mean(std::span<const double> x);

struct SyntheticClassificationConfig {
  int num_classes = 10;
  int n = 1000;
  double class_separation = 2.0;
  std::uint64_t seed = 0;
  // geometric decay of class priors; 1.0 = balanced
  double prior_decay = 1.0;
  // geometric decay of the per-class bump height, so higher class indices are
  // harder to classify; 1.0 = uniform difficulty
  double separation_decay = 1.0;
};

struct ClassificationBatch {
  std::vector<std::vector<double>> logits;  // n x K
  std::vector<int> labels;
};

// labels drawn from the (possibly decayed) prior; logits are a one-hot bump
// of height class_separation plus standard Gaussian noise.
ClassificationBatch generate_classification(
    const SyntheticClassificationConfig& config);

}  // namespace conformal
