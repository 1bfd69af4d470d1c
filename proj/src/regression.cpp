#include "conformal/regression.hpp"

#include <algorithm>
#include <cmath>

namespace conformal {

namespace {

void check_shapes(std::size_t n_pred, std::size_t n_targ) {
  if (n_pred == 0) throw InputError("empty calibration set");
  if (n_pred != n_targ) throw InputError("predictions/targets length mismatch");
}

}  // namespace

std::vector<double> split_calibrate(
    const std::vector<std::vector<double>>& predictions,
    const std::vector<std::vector<double>>& targets, const Alpha& alpha) {
  check_shapes(predictions.size(), targets.size());
  const std::size_t d = predictions[0].size();
  std::vector<double> qhat(d);
  std::vector<double> scores(predictions.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i].size() != d || targets[i].size() != d) {
        throw InputError("ragged predictions/targets");
      }
      scores[i] = std::abs(targets[i][j] - predictions[i][j]);
    }
    qhat[j] = conformal_quantile(scores, alpha);
  }
  return qhat;
}

PredictionInterval split_predict(std::span<const double> prediction,
                                 std::span<const double> qhat) {
  if (prediction.size() != qhat.size()) {
    throw InputError("prediction/threshold dimension mismatch");
  }
  PredictionInterval out;
  out.dims.reserve(prediction.size());
  for (std::size_t j = 0; j < prediction.size(); ++j) {
    out.dims.push_back({prediction[j] - qhat[j], prediction[j] + qhat[j]});
  }
  return out;
}

std::vector<double> cqr_scores_1d(std::span<const QuantilePair> pairs,
                                  std::span<const double> targets) {
  if (pairs.size() != targets.size()) {
    throw InputError("cqr: pairs/targets length mismatch");
  }
  std::vector<double> scores(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    scores[i] = std::max(pairs[i].lo - targets[i], targets[i] - pairs[i].hi);
  }
  return scores;
}

std::vector<double> cqr_calibrate(const std::vector<QuantileRow>& predictions,
                                  const std::vector<std::vector<double>>& targets,
                                  const Alpha& alpha) {
  check_shapes(predictions.size(), targets.size());
  const std::size_t d = predictions[0].size();
  std::vector<double> qhat(d);
  std::vector<QuantilePair> pairs(predictions.size());
  std::vector<double> col(predictions.size());
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i].size() != d || targets[i].size() != d) {
        throw InputError("ragged predictions/targets");
      }
      pairs[i] = predictions[i][j];
      col[i] = targets[i][j];
    }
    qhat[j] = conformal_quantile(cqr_scores_1d(pairs, col), alpha);
  }
  return qhat;
}

PredictionInterval cqr_predict(const QuantileRow& prediction,
                               std::span<const double> qhat) {
  if (prediction.size() != qhat.size()) {
    throw InputError("prediction/threshold dimension mismatch");
  }
  PredictionInterval out;
  out.dims.reserve(prediction.size());
  for (std::size_t j = 0; j < prediction.size(); ++j) {
    out.dims.push_back({prediction[j].lo - qhat[j], prediction[j].hi + qhat[j]});
  }
  return out;
}

AciState make_aci_state(const Alpha& alpha, double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InputError("aci: gamma must be a nonnegative real");
  }
  return AciState{alpha.value(), alpha.value(), gamma, 0};
}

AciState aci_update(const AciState& state, bool covered) {
  AciState next = state;
  const double err = covered ? 0.0 : 1.0;
  next.alpha_t = state.alpha_t + state.gamma * (state.alpha_target - err);
  next.history = state.history + 1;
  return next;
}

PredictionInterval aci_predict_interval(const AciState& state,
                                        std::span<const double> cal_scores,
                                        const QuantilePair& test) {
  PredictionInterval out;
  if (state.alpha_t <= 0.0) {
    out.dims.push_back({-kInf, kInf});
    return out;
  }
  if (state.alpha_t >= 1.0) {
    const double mid = 0.5 * (test.lo + test.hi);
    out.dims.push_back({mid, mid});
    out.collapsed = true;
    return out;
  }
  const double q = conformal_quantile(cal_scores, Alpha(state.alpha_t));
  out.dims.push_back({test.lo - q, test.hi + q});
  return out;
}

BinGrid make_uniform_grid(double y_min, double y_max, int num_bins) {
  if (num_bins < 2 || !(y_min < y_max)) {
    throw InputError("grid needs y_min < y_max and at least 2 bins");
  }
  BinGrid grid;
  grid.y_min = y_min;
  grid.y_max = y_max;
  const double step = (y_max - y_min) / num_bins;
  for (int k = 0; k < num_bins; ++k) {
    grid.midpoints.push_back(y_min + (k + 0.5) * step);
  }
  return grid;
}

double interpolated_density(const BinGrid& grid,
                            std::span<const double> bin_probs, double y) {
  const auto& m = grid.midpoints;
  if (bin_probs.size() != m.size()) {
    throw InputError("bin probability row width does not match grid");
  }
  if (y <= m.front()) return bin_probs.front();  // constant extension
  if (y >= m.back()) return bin_probs.back();
  const auto it = std::upper_bound(m.begin(), m.end(), y);
  const std::size_t hi = static_cast<std::size_t>(it - m.begin());
  const std::size_t lo = hi - 1;
  const double t = (y - m[lo]) / (m[hi] - m[lo]);
  return (1.0 - t) * bin_probs[lo] + t * bin_probs[hi];
}

R2ccpThreshold r2ccp_calibrate(const BinGrid& grid,
                               const std::vector<std::vector<double>>& bin_probs,
                               std::span<const double> targets,
                               const Alpha& alpha) {
  check_shapes(bin_probs.size(), targets.size());
  std::vector<double> scores(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < grid.y_min || targets[i] > grid.y_max) {
      throw InputError("r2ccp: target outside the grid range");
    }
    double sum = 0.0;
    for (double p : bin_probs[i]) sum += p;
    if (std::abs(sum - 1.0) > 1e-6) {
      throw InputError("r2ccp: bin probability row does not sum to 1");
    }
    scores[i] = -interpolated_density(grid, bin_probs[i], targets[i]);
  }
  return R2ccpThreshold{conformal_quantile(scores, alpha)};
}

std::vector<PredictionInterval> r2ccp_predict(
    const BinGrid& grid, std::span<const double> bin_probs,
    const R2ccpThreshold& threshold, int grid_resolution) {
  if (grid_resolution < 2) throw InputError("r2ccp: grid_resolution < 2");
  const double cutoff = -threshold.qhat;
  std::vector<PredictionInterval> out;
  const double step = (grid.y_max - grid.y_min) / (grid_resolution - 1);
  bool in_run = false;
  double run_start = 0.0, run_end = 0.0;
  for (int i = 0; i < grid_resolution; ++i) {
    const double y = grid.y_min + i * step;
    const bool above = interpolated_density(grid, bin_probs, y) >= cutoff;
    if (above && !in_run) {
      in_run = true;
      run_start = y;
    }
    if (above) run_end = y;
    if (!above && in_run) {
      in_run = false;
      out.push_back({{{run_start, run_end}}, false});
    }
  }
  if (in_run) out.push_back({{{run_start, run_end}}, false});
  return out;
}

}  // namespace conformal
