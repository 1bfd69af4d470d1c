#include "conformal/losses.hpp"

#include <algorithm>
#include <cmath>

#include "conformal/predictors.hpp"

namespace conformal {

LossEvaluation quantile_loss(const std::vector<std::vector<double>>& predictions,
                             std::span<const double> targets,
                             std::pair<double, double> quantiles) {
  const auto [q_lo, q_hi] = quantiles;
  if (!(q_lo > 0.0 && q_lo < 1.0 && q_hi > 0.0 && q_hi < 1.0 && q_lo < q_hi)) {
    throw InputError("quantile_loss: levels must satisfy 0 < lo < hi < 1");
  }
  if (predictions.size() != targets.size() || predictions.empty()) {
    throw InputError("quantile_loss: predictions/targets shape mismatch");
  }
  const std::size_t n = predictions.size();
  LossEvaluation out;
  out.grad.assign(n, std::vector<double>(2, 0.0));
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  const double levels[2] = {q_lo, q_hi};
  for (std::size_t i = 0; i < n; ++i) {
    if (predictions[i].size() != 2) {
      throw InputError("quantile_loss: predictions must be n x 2");
    }
    for (int h = 0; h < 2; ++h) {
      const double q = levels[h];
      const double e = targets[i] - predictions[i][h];
      out.value += std::max(q * e, (q - 1.0) * e) * scale;
      if (e > 0.0) {
        out.grad[i][h] = -q * scale;
      } else if (e < 0.0) {
        out.grad[i][h] = (1.0 - q) * scale;
      }
    }
  }
  return out;
}

namespace {

std::vector<double> plain_softmax(std::span<const double> z) {
  return softmax_with_temperature(z, 1.0);
}

// dL/dz given dL/dp for p = softmax(z).
std::vector<double> softmax_backward(std::span<const double> p,
                                     std::span<const double> gp) {
  double dot = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) dot += p[j] * gp[j];
  std::vector<double> gz(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) gz[j] = p[j] * (gp[j] - dot);
  return gz;
}

}  // namespace

LossEvaluation r2ccp_loss(const std::vector<std::vector<double>>& bin_logits,
                          std::span<const double> targets, const BinGrid& grid,
                          double p_exponent, double tau) {
  if (bin_logits.size() != targets.size() || bin_logits.empty()) {
    throw InputError("r2ccp_loss: logits/targets shape mismatch");
  }
  if (tau < 0.0) throw InputError("r2ccp_loss: tau must be >= 0");
  const std::size_t n = bin_logits.size();
  const std::size_t kb = grid.midpoints.size();
  LossEvaluation out;
  out.grad.assign(n, {});
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (bin_logits[i].size() != kb) {
      throw InputError("r2ccp_loss: logit width does not match grid");
    }
    if (targets[i] < grid.y_min || targets[i] > grid.y_max) {
      throw InputError("r2ccp_loss: target outside the grid range");
    }
    const auto probs = plain_softmax(bin_logits[i]);
    std::vector<double> gp(kb);
    for (std::size_t k = 0; k < kb; ++k) {
      const double cost = std::pow(std::abs(targets[i] - grid.midpoints[k]),
                                   p_exponent);
      out.value += probs[k] * cost * scale;
      out.value += tau * probs[k] * std::log(probs[k]) * scale;  // -tau * H
      gp[k] = (cost + tau * (std::log(probs[k]) + 1.0)) * scale;
    }
    out.grad[i] = softmax_backward(probs, gp);
  }
  return out;
}

LossEvaluation contr_loss(const std::vector<std::vector<double>>& logits,
                          std::span<const int> labels, const ScoreConfig& score,
                          const Alpha& alpha, double sigmoid_temp,
                          double split_fraction) {
  const std::size_t n = logits.size();
  if (n < 4) throw InputError("contr_loss: batch must hold at least 4 items");
  if (n != labels.size()) throw InputError("contr_loss: labels length mismatch");
  if (!(sigmoid_temp > 0.0)) throw InputError("contr_loss: sigmoid_temp <= 0");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw InputError("contr_loss: split_fraction outside (0, 1)");
  }
  const auto n_cal = static_cast<std::size_t>(
      std::ceil(split_fraction * static_cast<double>(n)));
  if (n_cal == 0 || n_cal >= n) {
    throw InputError("contr_loss: split leaves an empty fold");
  }
  const std::size_t n_test = n - n_cal;
  const std::size_t num_classes = logits[0].size();

  std::vector<std::vector<double>> probs(n);
  for (std::size_t i = 0; i < n; ++i) probs[i] = plain_softmax(logits[i]);

  // Calibration-fold scores at the true labels (deterministic u = 1),
  // keeping the linear coefficients for the chain rule.
  std::vector<double> cal_scores(n_cal);
  std::vector<std::vector<double>> cal_coeffs(n_cal,
                                              std::vector<double>(num_classes));
  for (std::size_t i = 0; i < n_cal; ++i) {
    const double c = score_linear(score, probs[i], labels[i], cal_coeffs[i]);
    double s = c;
    for (std::size_t j = 0; j < num_classes; ++j) {
      s += cal_coeffs[i][j] * probs[i][j];
    }
    cal_scores[i] = s;
  }

  const auto rank = static_cast<std::size_t>(std::ceil(
      (static_cast<double>(n_cal) + 1.0) * (1.0 - alpha.value())));
  double qhat = kInf;
  std::size_t selected = n_cal;  // index of the order statistic, if finite
  if (rank <= n_cal) {
    std::vector<std::size_t> order(n_cal);
    for (std::size_t i = 0; i < n_cal; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return cal_scores[a] < cal_scores[b];
    });
    selected = order[rank - 1];
    qhat = cal_scores[selected];
  }

  LossEvaluation out;
  out.grad.assign(n, std::vector<double>(num_classes, 0.0));
  const double scale = 1.0 / static_cast<double>(n_test);
  double dvalue_dqhat = 0.0;
  std::vector<double> coeffs(num_classes);
  for (std::size_t i = n_cal; i < n; ++i) {
    std::vector<double> gp(num_classes, 0.0);
    for (std::size_t k = 0; k < num_classes; ++k) {
      const double c =
          score_linear(score, probs[i], static_cast<int>(k), coeffs);
      double s = c;
      for (std::size_t j = 0; j < num_classes; ++j) s += coeffs[j] * probs[i][j];
      const double sig =
          std::isinf(qhat) ? 1.0
                           : 1.0 / (1.0 + std::exp(-(qhat - s) / sigmoid_temp));
      out.value += sig * scale;
      const double dsig_ds = std::isinf(qhat)
                                 ? 0.0
                                 : -sig * (1.0 - sig) / sigmoid_temp;
      for (std::size_t j = 0; j < num_classes; ++j) {
        gp[j] += dsig_ds * coeffs[j] * scale;
      }
      dvalue_dqhat += -dsig_ds * scale;
    }
    out.grad[i] = softmax_backward(probs[i], gp);
  }

  // Gradient flows through the single selected order statistic.
  if (selected < n_cal) {
    std::vector<double> gp(num_classes);
    for (std::size_t j = 0; j < num_classes; ++j) {
      gp[j] = dvalue_dqhat * cal_coeffs[selected][j];
    }
    const auto gz = softmax_backward(probs[selected], gp);
    for (std::size_t j = 0; j < num_classes; ++j) out.grad[selected][j] += gz[j];
  }
  return out;
}

}  // namespace conformal
