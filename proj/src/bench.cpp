#include "conformal/bench.hpp"

#include <sstream>

#include "conformal/io.hpp"
#include "conformal/losses.hpp"
#include "conformal/metrics.hpp"

namespace conformal {

std::vector<ClassificationBenchRow> bench_classification(
    const ClassificationBenchConfig& config) {
  std::vector<ClassificationBenchRow> rows;
  const bool user_data = !config.cal_logits.empty();
  for (int trial = 0; trial < config.trials; ++trial) {
    ClassificationBatch cal, test;
    if (user_data) {
      cal = {config.cal_logits, config.cal_labels};
      test = {config.test_logits, config.test_labels};
    } else {
      auto data_cfg = config.data;
      data_cfg.seed = config.data.seed + static_cast<std::uint64_t>(trial) * 2;
      data_cfg.n = config.n_cal;
      cal = generate_classification(data_cfg);
      data_cfg.seed += 1;
      data_cfg.n = config.n_test;
      test = generate_classification(data_cfg);
    }
    for (ScoreKind score : config.scores) {
      for (PredictorKind pk : config.predictors) {
        for (double a : config.alphas) {
          PredictorConfig pc;
          pc.kind = pk;
          pc.score.kind = score;
          pc.score.raps_penalty = config.raps_penalty;
          pc.score.raps_kreg = config.raps_kreg;
          pc.score.saps_weight = config.saps_weight;
          pc.score.randomized = config.randomized;
          pc.score.rng_seed = config.data.seed + 7919 * trial;
          pc.cluster.min_class_count = config.cluster_min_class_count;
          const Alpha alpha(a);
          const auto calibrated =
              calculate_threshold(pc, cal.logits, cal.labels, alpha);
          const auto sets = predict_with_logits(calibrated, test.logits);
          rows.push_back({score_kind_name(score), predictor_kind_name(pk), a,
                          trial, coverage_rate(sets, test.labels),
                          average_size(sets),
                          cov_gap(sets, test.labels, alpha,
                                  calibrated.num_classes)});
        }
      }
    }
  }
  return rows;
}

std::string classification_rows_to_csv(
    const std::vector<ClassificationBenchRow>& rows) {
  std::ostringstream out;
  out << "score,predictor,alpha,trial,coverage,size,covgap\n";
  for (const auto& r : rows) {
    out << r.score << ',' << r.predictor << ',' << format_double(r.alpha) << ','
        << r.trial << ',' << format_double(r.coverage) << ','
        << format_double(r.average_size) << ',' << format_double(r.cov_gap)
        << '\n';
  }
  return out.str();
}

TimeseriesBenchResult bench_timeseries(const TimeseriesBenchConfig& config) {
  const int total = config.n_train + config.n_cal + config.n_test;
  TimeseriesBenchResult result;
  double cqr_sum = 0.0, aci_sum = 0.0;
  for (int trial = 0; trial < config.trials; ++trial) {
    auto arma = config.arma;
    arma.t_total = total;
    arma.seed = config.arma.seed + static_cast<std::uint64_t>(trial);
    const auto series = generate_time_series(arma);

    const Alpha alpha(config.alpha);
    const std::pair<double, double> quantiles = {config.alpha / 2.0,
                                                 1.0 - config.alpha / 2.0};

    std::vector<std::vector<double>> train_x(series.inputs.begin(),
                                             series.inputs.begin() +
                                                 config.n_train);
    std::vector<double> train_y(series.targets.begin(),
                                series.targets.begin() + config.n_train);

    MlpSpec spec;
    spec.input_dim = 6;
    spec.hidden_widths = config.hidden_widths;
    spec.output_dim = 2;
    spec.seed = arma.seed + 1000003;
    Mlp model(spec);
    train(model, train_x,
          [&](const std::vector<std::vector<double>>& outputs,
              std::span<const std::size_t> indices) {
            std::vector<double> targets(indices.size());
            for (std::size_t i = 0; i < indices.size(); ++i) {
              targets[i] = train_y[indices[i]];
            }
            return quantile_loss(outputs, targets, quantiles);
          },
          config.train);

    auto predict_pair = [&](const std::vector<double>& x) {
      const auto out = model.forward(x);
      return QuantilePair{out[0], out[1]};
    };

    std::vector<QuantilePair> cal_pairs(config.n_cal);
    std::vector<double> cal_y(config.n_cal);
    for (int i = 0; i < config.n_cal; ++i) {
      cal_pairs[i] = predict_pair(series.inputs[config.n_train + i]);
      cal_y[i] = series.targets[config.n_train + i];
    }
    const auto cal_scores = cqr_scores_1d(cal_pairs, cal_y);
    const std::vector<double> qhat = {conformal_quantile(cal_scores, alpha)};

    TimeseriesTrialResult tr;
    AciState state = make_aci_state(alpha, config.gamma);
    int cqr_hits = 0, aci_hits = 0;
    for (int i = 0; i < config.n_test; ++i) {
      const int t = config.n_train + config.n_cal + i;
      const double y = series.targets[t];
      const auto pair = predict_pair(series.inputs[t]);

      const auto cqr_iv = cqr_predict({pair}, qhat);
      const bool cqr_cov = cqr_iv.covers(std::span<const double>(&y, 1));
      cqr_hits += cqr_cov;
      tr.cqr.push_back({t, cqr_iv.dims[0].lo, cqr_iv.dims[0].hi, y, cqr_cov});

      const auto aci_iv = aci_predict_interval(state, cal_scores, pair);
      const bool aci_cov = aci_iv.covers(std::span<const double>(&y, 1));
      aci_hits += aci_cov;
      tr.aci.push_back({t, aci_iv.dims[0].lo, aci_iv.dims[0].hi, y, aci_cov});
      state = aci_update(state, aci_cov);
    }
    tr.cqr_coverage = static_cast<double>(cqr_hits) / config.n_test;
    tr.aci_coverage = static_cast<double>(aci_hits) / config.n_test;
    cqr_sum += tr.cqr_coverage;
    aci_sum += tr.aci_coverage;
    result.trials.push_back(std::move(tr));
  }
  result.mean_cqr_coverage = cqr_sum / config.trials;
  result.mean_aci_coverage = aci_sum / config.trials;
  return result;
}

std::string timeseries_points_to_csv(const TimeseriesBenchResult& result) {
  std::ostringstream out;
  out << "method,trial,t,lo,hi,y,covered\n";
  for (std::size_t trial = 0; trial < result.trials.size(); ++trial) {
    const auto& tr = result.trials[trial];
    auto emit = [&](const char* method, const std::vector<TimeseriesPoint>& ps) {
      for (const auto& p : ps) {
        out << method << ',' << trial << ',' << p.t << ','
            << format_double(p.lo) << ',' << format_double(p.hi) << ','
            << format_double(p.y) << ',' << (p.covered ? 1 : 0) << '\n';
      }
    };
    emit("CQR", tr.cqr);
    emit("ACI", tr.aci);
  }
  return out.str();
}

std::string timeseries_summary_to_csv(const TimeseriesBenchResult& result) {
  std::ostringstream out;
  out << "method,trial,coverage\n";
  for (std::size_t trial = 0; trial < result.trials.size(); ++trial) {
    out << "CQR," << trial << ','
        << format_double(result.trials[trial].cqr_coverage) << '\n';
    out << "ACI," << trial << ','
        << format_double(result.trials[trial].aci_coverage) << '\n';
  }
  out << "CQR,mean," << format_double(result.mean_cqr_coverage) << '\n';
  out << "ACI,mean," << format_double(result.mean_aci_coverage) << '\n';
  return out.str();
}

}  // namespace conformal
