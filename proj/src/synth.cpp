#include "conformal/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "conformal/rng.hpp"

namespace conformal {

double time_series_mean(std::span<const double> x) {
  if (x.size() != 6) throw InputError("time_series_mean: expected 6 features");
  return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) +
         20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4] +
         0.0 * x[5];
}

TimeSeriesBatch generate_time_series(const ArmaConfig& config) {
  if (config.t_total < 1) throw InputError("t_total must be >= 1");
  std::mt19937_64 rng(mix64(config.seed));
  std::normal_distribution<double> gauss(0.0, config.innovation_std);

  TimeSeriesBatch batch;
  batch.inputs.reserve(config.t_total);
  batch.targets.reserve(config.t_total);
  batch.noise.reserve(config.t_total);

  double eps = 0.0, xi_prev = 0.0;
  const int total = config.burn_in + config.t_total;
  for (int t = 0; t < total; ++t) {
    if (t == 0) {
      xi_prev = gauss(rng);
      eps = xi_prev;  // eps_0 = xi_0
    } else {
      const double xi = gauss(rng);
      eps = config.phi * eps + xi + config.theta * xi_prev;
      xi_prev = xi;
    }
    if (t < config.burn_in) continue;
    std::vector<double> x(6);
    for (double& v : x) v = uniform01(rng);
    batch.targets.push_back(time_series_mean(x) + eps);
    batch.inputs.push_back(std::move(x));
    batch.noise.push_back(eps);
  }
  return batch;
}

ClassificationBatch generate_classification(
    const SyntheticClassificationConfig& config) {
  if (config.num_classes < 2) throw InputError("num_classes must be >= 2");
  if (config.n < 1) throw InputError("n must be >= 1");
  std::mt19937_64 rng(mix64(config.seed));
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> priors(config.num_classes);
  double mass = 0.0;
  for (int k = 0; k < config.num_classes; ++k) {
    priors[k] = std::pow(config.prior_decay, k);
    mass += priors[k];
  }
  for (double& p : priors) p /= mass;

  ClassificationBatch batch;
  batch.logits.reserve(config.n);
  batch.labels.reserve(config.n);
  std::discrete_distribution<int> label_dist(priors.begin(), priors.end());
  for (int i = 0; i < config.n; ++i) {
    const int y = label_dist(rng);
    std::vector<double> row(config.num_classes);
    for (int k = 0; k < config.num_classes; ++k) {
      const double bump =
          config.class_separation * std::pow(config.separation_decay, y);
      row[k] = gauss(rng) + (k == y ? bump : 0.0);
    }
    batch.labels.push_back(y);
    batch.logits.push_back(std::move(row));
  }
  return batch;
}

}  // namespace conformal
