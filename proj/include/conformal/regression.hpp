#pragma once

#include <span>
#include <vector>

#include "conformal/core.hpp"

namespace conformal {

// Low/high quantile predictions for one output dimension.
struct QuantilePair {
  double lo = 0.0;
  double hi = 0.0;
};
using QuantileRow = std::vector<QuantilePair>;  // one entry per dimension

// Absolute-residual split conformal; one threshold per output dimension.
std::vector<double> split_calibrate(
    const std::vector<std::vector<double>>& predictions,
    const std::vector<std::vector<double>>& targets, const Alpha& alpha);

PredictionInterval split_predict(std::span<const double> prediction,
                                 std::span<const double> qhat);

// Conformalized quantile regression: score max(lo - y, y - hi) per dimension.
std::vector<double> cqr_scores_1d(std::span<const QuantilePair> pairs,
                                  std::span<const double> targets);

std::vector<double> cqr_calibrate(const std::vector<QuantileRow>& predictions,
                                  const std::vector<std::vector<double>>& targets,
                                  const Alpha& alpha);

PredictionInterval cqr_predict(const QuantileRow& prediction,
                               std::span<const double> qhat);

// Adaptive conformal inference over a stream; strictly sequential.
struct AciState {
  double alpha_target;
  double alpha_t;
  double gamma;
  long history = 0;
};

AciState make_aci_state(const Alpha& alpha, double gamma);

// alpha_{t+1} = alpha_t + gamma * (alpha_target - err_t); never clamped.
AciState aci_update(const AciState& state, bool covered);

// Interval at the current adjusted level; alpha_t <= 0 gives (-inf, +inf),
// alpha_t >= 1 collapses to the point prediction (flagged).
PredictionInterval aci_predict_interval(const AciState& state,
                                        std::span<const double> cal_scores,
                                        const QuantilePair& test);

// Regression-to-classification: bins over [y_min, y_max] with a density
// obtained by linear interpolation of bin probabilities between midpoints.
struct BinGrid {
  std::vector<double> midpoints;  // strictly increasing, inside [y_min, y_max]
  double y_min;
  double y_max;
};

BinGrid make_uniform_grid(double y_min, double y_max, int num_bins);

double interpolated_density(const BinGrid& grid,
                            std::span<const double> bin_probs, double y);

struct R2ccpThreshold {
  double qhat;  // on scores -density(y)
};

R2ccpThreshold r2ccp_calibrate(const BinGrid& grid,
                               const std::vector<std::vector<double>>& bin_probs,
                               std::span<const double> targets,
                               const Alpha& alpha);

// Prediction set {y : density(y) >= -qhat} as a union of disjoint intervals,
// materialized by scanning a uniform grid over the output range.
std::vector<PredictionInterval> r2ccp_predict(
    const BinGrid& grid, std::span<const double> bin_probs,
    const R2ccpThreshold& threshold, int grid_resolution = 2048);

}  // namespace conformal
