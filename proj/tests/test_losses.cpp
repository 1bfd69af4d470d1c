#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "conformal/losses.hpp"
#include "conformal/mlp.hpp"
#include "conformal/predictors.hpp"

using namespace conformal;

namespace {

// central finite differences over a flattened n x k argument
void check_gradient(
    const std::function<LossEvaluation(const std::vector<std::vector<double>>&)>&
        loss,
    std::vector<std::vector<double>> point, double rel_tol) {
  const auto eval = loss(point);
  for (std::size_t i = 0; i < point.size(); ++i) {
    for (std::size_t j = 0; j < point[i].size(); ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(point[i][j]));
      const double orig = point[i][j];
      point[i][j] = orig + h;
      const double up = loss(point).value;
      point[i][j] = orig - h;
      const double down = loss(point).value;
      point[i][j] = orig;
      const double fd = (up - down) / (2.0 * h);
      const double got = eval.grad[i][j];
      const double denom = std::max({std::abs(fd), std::abs(got), 1e-8});
      CHECK(std::abs(fd - got) / denom <= rel_tol);
    }
  }
}

}  // namespace

TEST_CASE("quantile loss worked examples") {
  // exact predictions at both heads -> zero loss, zero grad
  std::vector<std::vector<double>> exact = {{1.0, 1.0}};
  std::vector<double> y = {1.0};
  const auto e = quantile_loss(exact, y, {0.05, 0.95});
  CHECK(e.value == 0.0);
  CHECK(e.grad[0][0] == 0.0);
  CHECK(e.grad[0][1] == 0.0);

  // hand pinball arithmetic
  std::vector<std::vector<double>> preds = {{0.0, 2.0}};
  const auto v = quantile_loss(preds, y, {0.05, 0.95});
  CHECK(v.value == doctest::Approx(0.05));
}

TEST_CASE("quantile loss is nonnegative, zero only at the target") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-3, 3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> preds = {{d(rng), d(rng)}};
    std::vector<double> y = {d(rng)};
    const auto e = quantile_loss(preds, y, {0.1, 0.9});
    CHECK(e.value >= 0.0);
    if (preds[0][0] != y[0] || preds[0][1] != y[0]) CHECK(e.value > 0.0);
  }
}

TEST_CASE("quantile loss rejects bad levels") {
  std::vector<std::vector<double>> preds = {{0.0, 1.0}};
  std::vector<double> y = {0.5};
  CHECK_THROWS_AS(quantile_loss(preds, y, {0.9, 0.1}), InputError);
  CHECK_THROWS_AS(quantile_loss(preds, y, {0.0, 0.9}), InputError);
}

TEST_CASE("quantile loss gradient vs finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::vector<double>> preds;
    std::vector<double> y;
    for (int i = 0; i < 4; ++i) {
      preds.push_back({d(rng), d(rng)});
      y.push_back(d(rng) + 0.123);  // offset keeps us away from kinks
    }
    check_gradient(
        [&](const std::vector<std::vector<double>>& p) {
          return quantile_loss(p, y, {0.05, 0.95});
        },
        preds, 1e-5);
  }
}

TEST_CASE("r2ccp loss hand cases") {
  const auto grid = make_uniform_grid(0.0, 10.0, 5);  // midpoints 1,3,5,7,9
  // almost all mass on the nearest bin, tau = 0
  std::vector<std::vector<double>> logits = {{0, 0, 30, 0, 0}};
  std::vector<double> y = {5.0};
  const auto e = r2ccp_loss(logits, y, grid, 2.0, 0.0);
  CHECK(e.value == doctest::Approx(0.0).epsilon(1e-6));

  // minimal over one-hot allocations at the nearest bin
  double best = kInf;
  int best_bin = -1;
  std::vector<double> y2 = {6.2};
  for (int k = 0; k < 5; ++k) {
    std::vector<std::vector<double>> onehot = {{0, 0, 0, 0, 0}};
    onehot[0][k] = 40.0;
    const double v = r2ccp_loss(onehot, y2, grid, 2.0, 0.0).value;
    if (v < best) {
      best = v;
      best_bin = k;
    }
  }
  CHECK(best_bin == 3);  // midpoint 7 is nearest to 6.2

  // uniform probabilities, tau = 0 -> mean of |y - m_k|^p
  std::vector<std::vector<double>> unif = {{0, 0, 0, 0, 0}};
  std::vector<double> y3 = {5.0};
  double expect = 0.0;
  for (double m : grid.midpoints) expect += (5.0 - m) * (5.0 - m) / 5.0;
  CHECK(r2ccp_loss(unif, y3, grid, 2.0, 0.0).value == doctest::Approx(expect));

  // entropy term lowers the loss of a peaked allocation
  const double with_tau = r2ccp_loss(unif, y3, grid, 2.0, 0.5).value;
  CHECK(with_tau < expect);  // uniform has maximal entropy

  std::vector<double> outside = {11.0};
  CHECK_THROWS_AS(r2ccp_loss(unif, outside, grid, 2.0, 0.1), InputError);
}

TEST_CASE("r2ccp loss gradient vs finite differences") {
  const auto grid = make_uniform_grid(-2.0, 2.0, 7);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<std::vector<double>> logits;
    std::vector<double> y;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> row(7);
      for (double& v : row) v = d(rng);
      logits.push_back(row);
      y.push_back(d(rng));
    }
    check_gradient(
        [&](const std::vector<std::vector<double>>& p) {
          return r2ccp_loss(p, y, grid, 2.0, 0.1);
        },
        logits, 1e-5);
  }
}

TEST_CASE("contr loss symmetry case") {
  // identical logits everywhere: every soft membership is sigmoid(0) = 0.5
  std::vector<std::vector<double>> logits(8, std::vector<double>(4, 0.7));
  std::vector<int> labels = {0, 1, 2, 3, 0, 1, 2, 3};
  ScoreConfig sc;
  sc.kind = ScoreKind::kThr;
  const auto e = contr_loss(logits, labels, sc, Alpha(0.3), 1.0, 0.5);
  CHECK(e.value == doctest::Approx(2.0));  // K/2
}

TEST_CASE("contr loss input validation") {
  std::vector<std::vector<double>> logits(3, std::vector<double>(4, 0.0));
  std::vector<int> labels = {0, 1, 2};
  ScoreConfig sc;
  CHECK_THROWS_AS(contr_loss(logits, labels, sc, Alpha(0.1)), InputError);
}

TEST_CASE("contr soft size stays within [0, K]") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> d(-3, 3);
  ScoreConfig sc;
  sc.kind = ScoreKind::kAps;
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<std::vector<double>> logits;
    std::vector<int> labels;
    for (int i = 0; i < 12; ++i) {
      std::vector<double> row(5);
      for (double& v : row) v = d(rng);
      logits.push_back(row);
      labels.push_back(static_cast<int>(rng() % 5));
    }
    const auto e = contr_loss(logits, labels, sc, Alpha(0.2), 0.7, 0.5);
    CHECK(e.value >= 0.0);
    CHECK(e.value <= 5.0);
  }
}

TEST_CASE("contr approaches the hard set size at low sigmoid temperature") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> d(-3, 3);
  ScoreConfig sc;
  sc.kind = ScoreKind::kThr;
  std::vector<std::vector<double>> logits;
  std::vector<int> labels;
  const int n = 40, k = 6;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(k);
    for (double& v : row) v = d(rng);
    logits.push_back(row);
    labels.push_back(static_cast<int>(rng() % k));
  }
  const auto soft = contr_loss(logits, labels, sc, Alpha(0.1), 1e-4, 0.5);

  // hard counterpart: calibrate on the first half, threshold the second
  const std::size_t n_cal = n / 2;
  std::vector<std::vector<double>> cal(logits.begin(), logits.begin() + n_cal);
  std::vector<int> cal_y(labels.begin(), labels.begin() + n_cal);
  PredictorConfig pc;
  pc.score = sc;
  const auto cp = calculate_threshold(pc, cal, cal_y, Alpha(0.1));
  double hard = 0.0;
  std::vector<std::vector<double>> test(logits.begin() + n_cal, logits.end());
  for (const auto& s : predict_with_logits(cp, test)) {
    hard += static_cast<double>(s.size());
  }
  hard /= static_cast<double>(n - n_cal);
  CHECK(std::abs(soft.value - hard) <= 0.05);
}

TEST_CASE("contr gradient vs finite differences") {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> d(-2, 2);
  ScoreConfig sc;
  sc.kind = ScoreKind::kThr;
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<std::vector<double>> logits;
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) {
      std::vector<double> row(4);
      for (double& v : row) v = d(rng);
      logits.push_back(row);
      labels.push_back(static_cast<int>(rng() % 4));
    }
    // skip batches with near-tied calibration scores (sort kinks)
    std::vector<double> cal_scores;
    bool tied = false;
    for (int i = 0; i < 4; ++i) {
      const auto p = softmax_with_temperature(logits[i], 1.0);
      cal_scores.push_back(1.0 - p[labels[i]]);
    }
    std::sort(cal_scores.begin(), cal_scores.end());
    for (std::size_t i = 1; i < cal_scores.size(); ++i) {
      if (cal_scores[i] - cal_scores[i - 1] < 1e-3) tied = true;
    }
    if (tied) continue;
    ++checked;
    check_gradient(
        [&](const std::vector<std::vector<double>>& p) {
          return contr_loss(p, labels, sc, Alpha(0.3), 1.0, 0.5);
        },
        logits, 1e-4);
  }
  CHECK(checked >= 30);
}

TEST_CASE("trainer: lr = 0 leaves parameters and loss untouched") {
  MlpSpec spec;
  spec.input_dim = 2;
  spec.hidden_widths = {8};
  spec.output_dim = 2;
  spec.seed = 3;
  Mlp model(spec);
  const auto before = model.parameters();
  std::vector<std::vector<double>> xs = {{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}};
  std::vector<double> ys = {1.0, 2.0, 3.0};
  TrainConfig tc;
  tc.lr = 0.0;
  tc.epochs = 3;
  const auto result = train(model, xs,
                            [&](const std::vector<std::vector<double>>& out,
                                std::span<const std::size_t> idx) {
                              std::vector<double> t(idx.size());
                              for (std::size_t i = 0; i < idx.size(); ++i) {
                                t[i] = ys[idx[i]];
                              }
                              return quantile_loss(out, t, {0.05, 0.95});
                            },
                            tc);
  CHECK(model.parameters() == before);
  for (double l : result.epoch_losses) {
    CHECK(l == doctest::Approx(result.epoch_losses[0]));
  }
}

TEST_CASE("trainer beats the constant-predictor pinball baseline") {
  // y = 3x + noise-free linear target; the empirical-quantile constant
  // predictor is the best constant, so a trained model must do better
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 64; ++i) {
    const double x = i / 64.0;
    xs.push_back({x});
    ys.push_back(3.0 * x);
  }
  auto loss_fn = [&](const std::vector<std::vector<double>>& out,
                     std::span<const std::size_t> idx) {
    std::vector<double> t(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) t[i] = ys[idx[i]];
    return quantile_loss(out, t, {0.05, 0.95});
  };

  // baseline: constant outputs at the empirical 5% and 95% quantiles
  std::vector<double> sorted = ys;
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted[3], hi = sorted[60];
  std::vector<std::vector<double>> const_out(xs.size());
  std::vector<std::size_t> all_idx(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const_out[i] = {lo, hi};
    all_idx[i] = i;
  }
  const double baseline = loss_fn(const_out, all_idx).value;

  MlpSpec spec;
  spec.input_dim = 1;
  spec.hidden_widths = {16, 16};
  spec.output_dim = 2;
  spec.seed = 5;
  Mlp model(spec);
  TrainConfig tc;
  tc.lr = 0.01;
  tc.epochs = 200;
  tc.batch_size = 16;
  train(model, xs, loss_fn, tc);
  const double final_loss = loss_fn(model.forward_batch(xs), all_idx).value;
  CHECK(final_loss < baseline);
}

TEST_CASE("training is deterministic given seeds") {
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  for (int i = 0; i < 32; ++i) {
    xs.push_back({i / 32.0});
    ys.push_back(std::sin(i / 5.0));
  }
  auto run = [&]() {
    MlpSpec spec;
    spec.input_dim = 1;
    spec.output_dim = 2;
    spec.seed = 11;
    Mlp model(spec);
    TrainConfig tc;
    tc.epochs = 5;
    train(model, xs,
          [&](const std::vector<std::vector<double>>& out,
              std::span<const std::size_t> idx) {
            std::vector<double> t(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) t[i] = ys[idx[i]];
            return quantile_loss(out, t, {0.05, 0.95});
          },
          tc);
    return model.parameters();
  };
  CHECK(run() == run());
}

TEST_CASE("divergence raises a training error") {
  std::vector<std::vector<double>> xs = {{1.0}, {2.0}};
  MlpSpec spec;
  spec.input_dim = 1;
  spec.output_dim = 1;
  Mlp model(spec);
  TrainConfig tc;
  CHECK_THROWS_AS(
      train(model, xs,
            [](const std::vector<std::vector<double>>& out,
               std::span<const std::size_t>) {
              LossEvaluation e;
              e.value = std::numeric_limits<double>::quiet_NaN();
              e.grad.assign(out.size(), std::vector<double>(1, 0.0));
              return e;
            },
            tc),
      TrainingError);
}

TEST_CASE("contr composes with cross-entropy as a weighted sum") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> d(-1, 1);
  std::vector<std::vector<double>> logits;
  std::vector<int> labels;
  for (int i = 0; i < 8; ++i) {
    std::vector<double> row(3);
    for (double& v : row) v = d(rng);
    logits.push_back(row);
    labels.push_back(static_cast<int>(rng() % 3));
  }
  ScoreConfig sc;
  auto composite = [&](const std::vector<std::vector<double>>& p) {
    auto e = contr_loss(p, labels, sc, Alpha(0.3), 1.0, 0.5);
    // plus 0.5 * cross-entropy
    for (std::size_t i = 0; i < p.size(); ++i) {
      const auto probs = softmax_with_temperature(p[i], 1.0);
      e.value += -0.5 * std::log(probs[labels[i]]) / p.size();
      for (std::size_t j = 0; j < probs.size(); ++j) {
        const double ind = (static_cast<int>(j) == labels[i]) ? 1.0 : 0.0;
        e.grad[i][j] += 0.5 * (probs[j] - ind) / p.size();
      }
    }
    return e;
  };
  check_gradient(composite, logits, 1e-4);
}
