#pragma once

#include <span>
#include <utility>
#include <vector>

#include "conformal/core.hpp"
#include "conformal/regression.hpp"
#include "conformal/scores.hpp"

namespace conformal {

// Loss value plus gradient with respect to the model-output argument.
struct LossEvaluation {
  double value = 0.0;
  std::vector<std::vector<double>> grad;  // same shape as the outputs
};

// Pinball loss averaged over items and over the two quantile heads.
// predictions: n x 2 (lo head, hi head). Subgradient at a kink is 0.
LossEvaluation quantile_loss(const std::vector<std::vector<double>>& predictions,
                             std::span<const double> targets,
                             std::pair<double, double> quantiles);

// Distance-weighted bin penalty minus tau * entropy, on softmaxed bin logits.
LossEvaluation r2ccp_loss(const std::vector<std::vector<double>>& bin_logits,
                          std::span<const double> targets, const BinGrid& grid,
                          double p_exponent = 2.0, double tau = 0.1);

// Smooth prediction-set size: the batch is split into pseudo-calibration and
// pseudo-test folds, a conformal threshold is taken on the calibration fold,
// and each test label contributes sigmoid((qhat - s_k) / sigmoid_temp).
LossEvaluation contr_loss(const std::vector<std::vector<double>>& logits,
                          std::span<const int> labels, const ScoreConfig& score,
                          const Alpha& alpha, double sigmoid_temp = 1.0,
                          double split_fraction = 0.5);

}  // namespace conformal
