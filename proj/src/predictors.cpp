#include "conformal/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "conformal/rng.hpp"

namespace conformal {

std::vector<double> softmax_with_temperature(std::span<const double> logits,
                                             double temperature) {
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
  if (logits.empty()) throw InputError("empty logits row");
  double zmax = -kInf;
  for (double z : logits) {
    if (!std::isfinite(z)) throw InputError("non-finite logit");
    zmax = std::max(zmax, z / temperature);
  }
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] / temperature - zmax);
    sum += out[i];
  }
  for (double& p : out) p /= sum;
  return out;
}

namespace {

std::vector<std::vector<double>> to_probs(
    const std::vector<std::vector<double>>& logits, double temperature) {
  std::vector<std::vector<double>> probs;
  probs.reserve(logits.size());
  for (const auto& row : logits) {
    probs.push_back(softmax_with_temperature(row, temperature));
  }
  return probs;
}

double empirical_quantile(std::vector<double> values, double level) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto idx = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  if (idx == 0) idx = 1;
  if (idx > n) idx = n;
  return values[idx - 1];
}

}  // namespace

std::vector<int> kmeans_assign(const std::vector<std::vector<double>>& points,
                               int k, int iters, std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (k < 1 || n < 1) throw InputError("kmeans: need k >= 1 and points");
  k = std::min(k, n);
  const std::size_t dim = points[0].size();
  auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double t = a[j] - b[j];
      d += t * t;
    }
    return d;
  };

  // k-means++ seeding
  std::mt19937_64 rng(mix64(seed));
  std::vector<std::vector<double>> centers;
  centers.push_back(points[rng() % n]);
  std::vector<double> d2(n);
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      d2[i] = kInf;
      for (const auto& c : centers) d2[i] = std::min(d2[i], dist2(points[i], c));
      total += d2[i];
    }
    if (total <= 0.0) {
      centers.push_back(points[rng() % n]);
      continue;
    }
    double r = uniform01(rng) * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      r -= d2[i];
      if (r <= 0.0) {
        pick = i;
        break;
      }
    }
    centers.push_back(points[pick]);
  }

  std::vector<int> assign(n, 0);
  for (int it = 0; it < iters; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double bd = kInf;
      for (int c = 0; c < static_cast<int>(centers.size()); ++c) {
        const double d = dist2(points[i], centers[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && it > 0) break;
    std::vector<std::vector<double>> sums(centers.size(),
                                          std::vector<double>(dim, 0.0));
    std::vector<int> counts(centers.size(), 0);
    for (int i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += points[i][j];
    }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its old center
      for (std::size_t j = 0; j < dim; ++j) {
        centers[c][j] = sums[c][j] / counts[c];
      }
    }
  }
  return assign;
}

CalibratedPredictor calculate_threshold(
    const PredictorConfig& config,
    const std::vector<std::vector<double>>& cal_logits,
    std::span<const int> cal_labels, const Alpha& alpha) {
  if (cal_logits.empty()) throw InputError("empty calibration set");
  if (cal_logits.size() != cal_labels.size()) {
    throw InputError("calibration logits/labels length mismatch");
  }
  const int num_classes = static_cast<int>(cal_logits[0].size());
  for (int y : cal_labels) {
    if (y < 0 || y >= num_classes) throw InputError("calibration label out of range");
  }

  const auto probs = to_probs(cal_logits, config.temperature);
  const auto scores = score_batch(config.score, probs, cal_labels);

  CalibratedPredictor out;
  out.config = config;
  out.alpha = alpha.value();
  out.num_classes = num_classes;
  auto& th = out.threshold;

  switch (config.kind) {
    case PredictorKind::kSplit: {
      th.kind = ThresholdKind::kScalar;
      th.scalar = conformal_quantile(scores, alpha);
      break;
    }
    case PredictorKind::kClassWise: {
      th.kind = ThresholdKind::kPerClass;
      th.per_class.assign(num_classes, kInf);
      for (int k = 0; k < num_classes; ++k) {
        std::vector<double> cls;
        for (std::size_t i = 0; i < scores.size(); ++i) {
          if (cal_labels[i] == k) cls.push_back(scores[i]);
        }
        if (!cls.empty()) th.per_class[k] = conformal_quantile(cls, alpha);
      }
      break;
    }
    case PredictorKind::kCluster: {
      th.kind = ThresholdKind::kPerCluster;
      std::vector<std::vector<double>> per_class_scores(num_classes);
      for (std::size_t i = 0; i < scores.size(); ++i) {
        per_class_scores[cal_labels[i]].push_back(scores[i]);
      }
      std::vector<int> eligible;
      for (int k = 0; k < num_classes; ++k) {
        if (static_cast<int>(per_class_scores[k].size()) >=
            config.cluster.min_class_count) {
          eligible.push_back(k);
        }
      }
      int k_clusters = config.cluster.num_clusters;
      if (k_clusters <= 0) {
        k_clusters = std::clamp(static_cast<int>(eligible.size()) / 2, 1, 10);
      }
      th.cluster_of.assign(num_classes, -1);  // -1 = fallback
      int n_real = 0;
      if (!eligible.empty()) {
        std::vector<std::vector<double>> embeddings;
        embeddings.reserve(eligible.size());
        for (int k : eligible) {
          std::vector<double> emb;
          for (double q : config.cluster.quantile_levels) {
            emb.push_back(empirical_quantile(per_class_scores[k], q));
          }
          embeddings.push_back(std::move(emb));
        }
        const auto assign =
            kmeans_assign(embeddings, k_clusters, config.cluster.kmeans_iters,
                          config.cluster.kmeans_seed);
        n_real = *std::max_element(assign.begin(), assign.end()) + 1;
        for (std::size_t i = 0; i < eligible.size(); ++i) {
          th.cluster_of[eligible[i]] = assign[i];
        }
      }
      th.per_cluster.assign(n_real + 1, kInf);
      for (int c = 0; c < n_real; ++c) {
        std::vector<double> pooled;
        for (int k = 0; k < num_classes; ++k) {
          if (th.cluster_of[k] == c) {
            pooled.insert(pooled.end(), per_class_scores[k].begin(),
                          per_class_scores[k].end());
          }
        }
        if (!pooled.empty()) th.per_cluster[c] = conformal_quantile(pooled, alpha);
      }
      // rare classes share the marginal threshold
      th.per_cluster[n_real] = conformal_quantile(scores, alpha);
      for (int k = 0; k < num_classes; ++k) {
        if (th.cluster_of[k] < 0) th.cluster_of[k] = n_real;
      }
      break;
    }
    case PredictorKind::kWeighted: {
      if (!config.weight_fn) {
        throw InputError("Weighted predictor requires a weight_fn");
      }
      th.kind = ThresholdKind::kWeighted;
      th.weighted_scores = scores;
      th.weighted_weights.resize(scores.size());
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const double w = config.weight_fn(cal_logits[i], i);
        if (!(w > 0.0) || !std::isfinite(w)) {
          throw InputError("weight_fn must return positive finite weights");
        }
        th.weighted_weights[i] = w;
      }
      break;
    }
  }
  return out;
}

std::vector<PredictionSet> predict_with_logits(
    const CalibratedPredictor& predictor,
    const std::vector<std::vector<double>>& test_logits,
    std::span<const double> test_weights) {
  if (predictor.num_classes == 0) throw StateError("predictor is not calibrated");
  if (test_logits.empty()) throw InputError("empty test set");
  const auto& cfg = predictor.config;
  const auto& th = predictor.threshold;
  if (cfg.kind == PredictorKind::kWeighted &&
      test_weights.size() != test_logits.size()) {
    throw InputError("Weighted predictor needs one test weight per row");
  }
  const Alpha alpha(predictor.alpha);

  std::vector<PredictionSet> sets(test_logits.size());
  for (std::size_t i = 0; i < test_logits.size(); ++i) {
    if (static_cast<int>(test_logits[i].size()) != predictor.num_classes) {
      throw InputError("test logits width does not match calibration");
    }
    const auto probs = softmax_with_temperature(test_logits[i], cfg.temperature);
    const auto row_scores = score_all(cfg.score, probs, i);
    double scalar_q = th.scalar;
    if (cfg.kind == PredictorKind::kWeighted) {
      scalar_q = weighted_conformal_quantile(th.weighted_scores,
                                             th.weighted_weights,
                                             test_weights[i], alpha);
    }
    for (int k = 0; k < predictor.num_classes; ++k) {
      double q = scalar_q;
      if (th.kind == ThresholdKind::kPerClass) {
        q = th.per_class[k];
      } else if (th.kind == ThresholdKind::kPerCluster) {
        q = th.per_cluster[th.cluster_of[k]];
      }
      if (row_scores[k] <= q) sets[i].members.insert(k);
    }
  }
  return sets;
}

namespace {

std::vector<std::vector<double>> apply_model(
    const RowModel& model, const std::vector<std::vector<double>>& inputs) {
  std::vector<std::vector<double>> logits;
  logits.reserve(inputs.size());
  for (const auto& x : inputs) logits.push_back(model(x));
  return logits;
}

}  // namespace

CalibratedPredictor calibrate(const PredictorConfig& config,
                              const RowModel& model,
                              const std::vector<std::vector<double>>& cal_inputs,
                              std::span<const int> cal_labels,
                              const Alpha& alpha) {
  return calculate_threshold(config, apply_model(model, cal_inputs), cal_labels,
                             alpha);
}

std::vector<PredictionSet> predict(
    const CalibratedPredictor& predictor, const RowModel& model,
    const std::vector<std::vector<double>>& test_inputs,
    std::span<const double> test_weights) {
  return predict_with_logits(predictor, apply_model(model, test_inputs),
                             test_weights);
}

}  // namespace conformal
