#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conformal/core.hpp"
#include "conformal/mlp.hpp"
#include "conformal/predictors.hpp"
#include "conformal/regression.hpp"
#include "conformal/synth.hpp"

namespace conformal {

struct ClassificationBenchConfig {
  SyntheticClassificationConfig data;  // per-trial seed is data.seed + trial
  int n_cal = 2000;
  int n_test = 2000;
  std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int trials = 5;
  std::vector<ScoreKind> scores = {ScoreKind::kThr, ScoreKind::kAps,
                                   ScoreKind::kRaps, ScoreKind::kSaps,
                                   ScoreKind::kMargin};
  std::vector<PredictorKind> predictors = {PredictorKind::kSplit,
                                           PredictorKind::kClassWise,
                                           PredictorKind::kCluster};
  double raps_penalty = 1.0;
  int raps_kreg = 0;
  double saps_weight = 0.25;
  bool randomized = true;
  int cluster_min_class_count = 20;
  // optional precomputed logits; when set, trials reuse these and only the
  // score randomization seed varies
  std::vector<std::vector<double>> cal_logits, test_logits;
  std::vector<int> cal_labels, test_labels;
};

struct ClassificationBenchRow {
  std::string score;
  std::string predictor;
  double alpha;
  int trial;
  double coverage;
  double average_size;
  double cov_gap;
};

std::vector<ClassificationBenchRow> bench_classification(
    const ClassificationBenchConfig& config);

std::string classification_rows_to_csv(
    const std::vector<ClassificationBenchRow>& rows);

struct TimeseriesBenchConfig {
  ArmaConfig arma;  // arma.t_total must equal n_train + n_cal + n_test
  int n_train = 100;
  int n_cal = 100;
  int n_test = 300;
  double alpha = 0.1;
  double gamma = 0.03;
  TrainConfig train{0.01, 800, 25};
  std::vector<int> hidden_widths = {64, 64};
  int trials = 5;
};

struct TimeseriesPoint {
  int t;
  double lo;
  double hi;
  double y;
  bool covered;
};

struct TimeseriesTrialResult {
  std::vector<TimeseriesPoint> cqr;
  std::vector<TimeseriesPoint> aci;
  double cqr_coverage;
  double aci_coverage;
};

struct TimeseriesBenchResult {
  std::vector<TimeseriesTrialResult> trials;
  double mean_cqr_coverage;
  double mean_aci_coverage;
};

TimeseriesBenchResult bench_timeseries(const TimeseriesBenchConfig& config);

std::string timeseries_points_to_csv(const TimeseriesBenchResult& result);
std::string timeseries_summary_to_csv(const TimeseriesBenchResult& result);

}  // namespace conformal
