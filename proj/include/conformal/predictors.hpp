#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "conformal/core.hpp"
#include "conformal/scores.hpp"

namespace conformal {

enum class PredictorKind { kSplit, kClassWise, kCluster, kWeighted };

struct ClusterConfig {
  int num_clusters = 0;  // 0 = auto: floor(#eligible / 2) clamped to [1, 10]
  std::vector<double> quantile_levels = {0.5, 0.6, 0.7, 0.8, 0.9};
  int min_class_count = 20;
  int kmeans_iters = 100;
  std::uint64_t kmeans_seed = 0;
};

// Maps a calibration/test instance (its logits row and row index) to a
// positive likelihood-ratio weight; required by the Weighted predictor.
using WeightFn =
    std::function<double(std::span<const double> logits, std::size_t index)>;

struct PredictorConfig {
  PredictorKind kind = PredictorKind::kSplit;
  ScoreConfig score;
  double temperature = 1.0;
  ClusterConfig cluster;
  WeightFn weight_fn;  // Weighted only
};

enum class ThresholdKind { kScalar, kPerClass, kPerCluster, kWeighted };

struct CalibratedThreshold {
  ThresholdKind kind = ThresholdKind::kScalar;
  double scalar = kInf;
  std::vector<double> per_class;
  std::vector<double> per_cluster;   // last entry is the rare-class fallback
  std::vector<int> cluster_of;       // class index -> entry of per_cluster
  std::vector<double> weighted_scores;
  std::vector<double> weighted_weights;
};

struct CalibratedPredictor {
  PredictorConfig config;
  CalibratedThreshold threshold;
  double alpha = 0.1;
  int num_classes = 0;
};

std::vector<double> softmax_with_temperature(std::span<const double> logits,
                                             double temperature);

CalibratedPredictor calculate_threshold(
    const PredictorConfig& config,
    const std::vector<std::vector<double>>& cal_logits,
    std::span<const int> cal_labels, const Alpha& alpha);

std::vector<PredictionSet> predict_with_logits(
    const CalibratedPredictor& predictor,
    const std::vector<std::vector<double>>& test_logits,
    std::span<const double> test_weights = {});

// Convenience pair over a caller-supplied instance -> logits function.
using RowModel = std::function<std::vector<double>(std::span<const double>)>;

CalibratedPredictor calibrate(const PredictorConfig& config,
                              const RowModel& model,
                              const std::vector<std::vector<double>>& cal_inputs,
                              std::span<const int> cal_labels,
                              const Alpha& alpha);

std::vector<PredictionSet> predict(
    const CalibratedPredictor& predictor, const RowModel& model,
    const std::vector<std::vector<double>>& test_inputs,
    std::span<const double> test_weights = {});

// Seeded k-means++ on row vectors; returns the assignment of each row.
std::vector<int> kmeans_assign(const std::vector<std::vector<double>>& points,
                               int k, int iters, std::uint64_t seed);

}  // namespace conformal
