#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "conformal/regression.hpp"

using namespace conformal;

TEST_CASE("split calibration worked examples") {
  // perfect predictions -> degenerate intervals
  std::vector<std::vector<double>> preds = {{1.0}, {2.0}, {3.0}};
  const auto q0 = split_calibrate(preds, preds, Alpha(0.5));
  CHECK(q0[0] == 0.0);
  const auto iv = split_predict(std::vector<double>{5.0}, q0);
  CHECK(iv.dims[0].lo == 5.0);
  CHECK(iv.dims[0].hi == 5.0);

  // residuals 1..10 at alpha=0.1 -> qhat = 10
  std::vector<std::vector<double>> p10, t10;
  for (int i = 1; i <= 10; ++i) {
    p10.push_back({0.0});
    t10.push_back({static_cast<double>(i)});
  }
  CHECK(split_calibrate(p10, t10, Alpha(0.1))[0] == 10.0);
}

TEST_CASE("multi-dimension split equals per-dimension runs") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-3, 3);
  std::vector<std::vector<double>> preds, targs;
  for (int i = 0; i < 30; ++i) {
    preds.push_back({d(rng), d(rng)});
    targs.push_back({d(rng), d(rng)});
  }
  const auto q2 = split_calibrate(preds, targs, Alpha(0.2));
  for (int j = 0; j < 2; ++j) {
    std::vector<std::vector<double>> p1, t1;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      p1.push_back({preds[i][j]});
      t1.push_back({targs[i][j]});
    }
    CHECK(split_calibrate(p1, t1, Alpha(0.2))[0] == q2[j]);
  }
}

TEST_CASE("cqr scores and calibration") {
  // target exactly at hi -> score 0
  std::vector<QuantilePair> pairs = {{-1.0, 2.0}};
  std::vector<double> y = {2.0};
  CHECK(cqr_scores_1d(pairs, y)[0] == 0.0);

  // slack on both sides -> negative scores, shrinking intervals
  std::vector<QuantileRow> preds;
  std::vector<std::vector<double>> targs;
  for (int i = 0; i < 20; ++i) {
    preds.push_back({{-2.0, 2.0}});
    targs.push_back({0.5});  // slack 1.5 on the tight side
  }
  const auto q = cqr_calibrate(preds, targs, Alpha(0.2));
  CHECK(q[0] == doctest::Approx(-1.5));
  const auto iv = cqr_predict({{-2.0, 2.0}}, q);
  CHECK(iv.dims[0].lo == doctest::Approx(-0.5));
  CHECK(iv.dims[0].hi == doctest::Approx(0.5));

  // qhat = 0 -> raw band
  const std::vector<double> zero = {0.0};
  const auto raw = cqr_predict({{-2.0, 2.0}}, zero);
  CHECK(raw.dims[0].lo == -2.0);
  CHECK(raw.dims[0].hi == 2.0);
}

TEST_CASE("cqr with lo = hi = point equals split scores") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> d(-5, 5);
  for (int rep = 0; rep < 30; ++rep) {
    const double pred = d(rng), y = d(rng);
    std::vector<QuantilePair> pairs = {{pred, pred}};
    std::vector<double> ys = {y};
    CHECK(cqr_scores_1d(pairs, ys)[0] == doctest::Approx(std::abs(y - pred)));
  }
}

TEST_CASE("interval widths nonincreasing in alpha") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> preds, targs;
  for (int i = 0; i < 100; ++i) {
    preds.push_back({0.0});
    targs.push_back({g(rng)});
  }
  double prev = kInf;
  for (double a : {0.05, 0.1, 0.3, 0.5, 0.8}) {
    const auto q = split_calibrate(preds, targs, Alpha(a));
    CHECK(q[0] <= prev);
    prev = q[0];
  }
}

TEST_CASE("aci update arithmetic") {
  AciState s = make_aci_state(Alpha(0.1), 0.03);
  const auto up = aci_update(s, true);
  CHECK(up.alpha_t == doctest::Approx(0.103));
  CHECK(up.history == 1);
  const auto down = aci_update(s, false);
  CHECK(down.alpha_t == doctest::Approx(0.073));
}

TEST_CASE("aci with gamma 0 never moves") {
  AciState s = make_aci_state(Alpha(0.1), 0.0);
  for (int i = 0; i < 100; ++i) s = aci_update(s, i % 3 == 0);
  CHECK(s.alpha_t == 0.1);
}

TEST_CASE("aci long-run miscoverage tracks alpha") {
  // coverage mechanism: covered iff alpha_t <= threshold draw
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(0.0, 0.2);
  AciState s = make_aci_state(Alpha(0.1), 0.03);
  long misses = 0;
  const int T = 10000;
  for (int t = 0; t < T; ++t) {
    const bool covered = s.alpha_t <= d(rng);
    if (!covered) ++misses;
    s = aci_update(s, covered);
  }
  CHECK(std::abs(static_cast<double>(misses) / T - 0.1) <= 0.02);
}

TEST_CASE("aci interval branches") {
  std::vector<double> scores = {0.1, 0.2, 0.3, 0.4, 0.5};
  AciState s = make_aci_state(Alpha(0.5), 0.03);

  s.alpha_t = -0.2;
  auto iv = aci_predict_interval(s, scores, {1.0, 2.0});
  CHECK(std::isinf(iv.dims[0].lo));
  CHECK(std::isinf(iv.dims[0].hi));

  s.alpha_t = 1.3;
  iv = aci_predict_interval(s, scores, {1.0, 2.0});
  CHECK(iv.collapsed);
  CHECK(iv.dims[0].lo == iv.dims[0].hi);

  // no updates yet: identical to plain cqr_predict
  s = make_aci_state(Alpha(0.5), 0.03);
  iv = aci_predict_interval(s, scores, {1.0, 2.0});
  const std::vector<double> q = {conformal_quantile(scores, Alpha(0.5))};
  const auto ref = cqr_predict({{1.0, 2.0}}, q);
  CHECK(iv.dims[0].lo == ref.dims[0].lo);
  CHECK(iv.dims[0].hi == ref.dims[0].hi);
}

TEST_CASE("aci widths nondecreasing over an uncovered streak") {
  std::vector<double> scores;
  for (int i = 1; i <= 50; ++i) scores.push_back(i * 0.1);
  AciState s = make_aci_state(Alpha(0.3), 0.05);
  double prev = -kInf;
  for (int t = 0; t < 10; ++t) {
    const auto iv = aci_predict_interval(s, scores, {0.0, 1.0});
    const double w = iv.dims[0].hi - iv.dims[0].lo;
    CHECK(w >= prev);
    prev = w;
    s = aci_update(s, false);
  }
}

TEST_CASE("r2ccp densities and sets") {
  const auto grid = make_uniform_grid(0.0, 10.0, 5);  // midpoints 1,3,5,7,9

  // triangular density peaked at the middle bin
  std::vector<double> tri = {0.05, 0.2, 0.5, 0.2, 0.05};
  CHECK(interpolated_density(grid, tri, 5.0) == doctest::Approx(0.5));
  CHECK(interpolated_density(grid, tri, 4.0) == doctest::Approx(0.35));
  CHECK(interpolated_density(grid, tri, 0.0) == doctest::Approx(0.05));
  CHECK(interpolated_density(grid, tri, 10.0) == doctest::Approx(0.05));

  // unimodal: threshold below the peak -> single interval containing the mode
  const auto sets = r2ccp_predict(grid, tri, {-0.3}, 512);
  REQUIRE(sets.size() == 1);
  CHECK(sets[0].dims[0].lo <= 5.0);
  CHECK(sets[0].dims[0].hi >= 5.0);

  // threshold below the minimum -> whole range
  const auto all = r2ccp_predict(grid, tri, {-0.01}, 512);
  REQUIRE(all.size() == 1);
  CHECK(all[0].dims[0].lo == doctest::Approx(0.0));
  CHECK(all[0].dims[0].hi == doctest::Approx(10.0));

  // bimodal -> two disjoint intervals
  std::vector<double> bim = {0.4, 0.05, 0.1, 0.05, 0.4};
  const auto two = r2ccp_predict(grid, bim, {-0.3}, 512);
  REQUIRE(two.size() == 2);
  CHECK(two[0].dims[0].hi < two[1].dims[0].lo);
}

TEST_CASE("r2ccp calibration and membership oracle") {
  const auto grid = make_uniform_grid(-1.0, 1.0, 8);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<std::vector<double>> probs;
  std::vector<double> targets;
  for (int i = 0; i < 40; ++i) {
    std::vector<double> row(8);
    double sum = 0.0;
    for (double& p : row) {
      p = 0.05 + (rng() % 100) / 100.0;
      sum += p;
    }
    for (double& p : row) p /= sum;
    probs.push_back(row);
    targets.push_back(d(rng));
  }
  const auto th = r2ccp_calibrate(grid, probs, targets, Alpha(0.2));

  // grid-scan set vs direct pointwise rule at random y values
  const auto sets = r2ccp_predict(grid, probs[0], th, 4096);
  for (int rep = 0; rep < 1000; ++rep) {
    const double y = d(rng);
    const bool direct = interpolated_density(grid, probs[0], y) >= -th.qhat;
    bool in_set = false;
    for (const auto& iv : sets) {
      if (y >= iv.dims[0].lo && y <= iv.dims[0].hi) in_set = true;
    }
    // allow disagreement only within one scan step of a boundary
    const double step = 2.0 / 4095.0;
    if (direct != in_set) {
      bool near_boundary = false;
      for (const auto& iv : sets) {
        if (std::abs(y - iv.dims[0].lo) <= step ||
            std::abs(y - iv.dims[0].hi) <= step) {
          near_boundary = true;
        }
      }
      if (!near_boundary && sets.empty()) near_boundary = true;
      CHECK(near_boundary);
    }
  }

  // target outside the range is rejected
  std::vector<double> bad_target = {2.0};
  std::vector<std::vector<double>> one_row = {probs[0]};
  CHECK_THROWS_AS(r2ccp_calibrate(grid, one_row, bad_target, Alpha(0.2)),
                  InputError);
}
