// Command-line harness: calibrate / predict / eval / bench-classification /
// bench-timeseries / gen-data over headerless CSV inputs and JSON artifacts.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "conformal/bench.hpp"
#include "conformal/io.hpp"
#include "conformal/losses.hpp"
#include "conformal/metrics.hpp"

using json = nlohmann::json;
using namespace conformal;
namespace fs = std::filesystem;

namespace {

constexpr int kExitParseError = 2;
constexpr int kExitInputError = 3;
constexpr int kExitStateError = 4;
constexpr int kExitTrainingError = 5;

bool log_enabled() {
  const char* v = std::getenv("CONFORMAL_KIT_LOG");
  return v != nullptr && std::string(v) != "" && std::string(v) != "off";
}

void log(const std::string& msg) {
  if (log_enabled()) std::cerr << "[conformal] " << msg << "\n";
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("bad JSON in " + path + ": " + e.what());
  }
  return j;
}

// flag overrides win over config-file values
template <typename T>
T setting(const json& cfg, const std::string& key, std::optional<T> flag,
          T fallback) {
  if (flag) return *flag;
  if (cfg.contains(key)) return cfg.at(key).get<T>();
  return fallback;
}

std::string require_path(const json& cfg, const std::string& key,
                         std::optional<std::string> flag = std::nullopt) {
  if (flag && !flag->empty()) return *flag;
  if (!cfg.contains(key)) throw InputError("missing required setting: " + key);
  const auto p = cfg.at(key).get<std::string>();
  if (!fs::exists(p)) throw InputError("path does not exist: " + p);
  return p;
}

ScoreConfig score_from_config(const json& cfg, std::optional<std::string> score,
                              std::optional<std::uint64_t> seed) {
  ScoreConfig sc;
  sc.kind = score_kind_from_name(
      setting<std::string>(cfg, "score", score, "THR"));
  sc.raps_penalty = setting<double>(cfg, "raps_penalty", std::nullopt, 1.0);
  sc.raps_kreg = setting<int>(cfg, "raps_kreg", std::nullopt, 0);
  sc.saps_weight = setting<double>(cfg, "saps_weight", std::nullopt, 0.25);
  sc.randomized = setting<bool>(cfg, "randomized", std::nullopt, false);
  sc.rng_seed = setting<std::uint64_t>(cfg, "seed", seed, 0);
  return sc;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path.string());
  out << text;
}

struct CommonFlags {
  std::string config_path;
  std::optional<double> alpha;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;
  std::optional<std::string> score;
  std::optional<std::string> predictor;
  std::optional<double> gamma;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON configuration file");
  cmd->add_option("--alpha", f.alpha, "significance level in (0,1)");
  cmd->add_option("--seed", f.seed, "master RNG seed");
  cmd->add_option("--trials", f.trials, "number of trials");
  cmd->add_option("--out", f.out, "output file or directory");
  cmd->add_option("--score", f.score, "score kind: THR|APS|RAPS|SAPS|Margin");
  cmd->add_option("--predictor", f.predictor,
                  "predictor kind: Split|ClassWise|Cluster|Weighted");
  cmd->add_option("--gamma", f.gamma, "ACI step size");
}

int cmd_calibrate(const CommonFlags& f) {
  const auto cfg = load_config(f.config_path);
  const auto logits = read_csv_matrix(require_path(cfg, "logits"));
  const auto labels = read_csv_labels(require_path(cfg, "labels"));
  if (!logits.empty() && !labels.empty()) {
    log("calibrating on " + std::to_string(logits.size()) + " rows");
  }

  PredictorConfig pc;
  pc.kind = predictor_kind_from_name(
      setting<std::string>(cfg, "predictor", f.predictor, "Split"));
  pc.score = score_from_config(cfg, f.score, f.seed);
  pc.temperature = setting<double>(cfg, "temperature", std::nullopt, 1.0);
  pc.cluster.min_class_count =
      setting<int>(cfg, "cluster_min_class_count", std::nullopt, 20);
  pc.cluster.num_clusters = setting<int>(cfg, "num_clusters", std::nullopt, 0);
  std::vector<double> cal_weights;
  if (pc.kind == PredictorKind::kWeighted) {
    const auto wm = read_csv_matrix(require_path(cfg, "weights"));
    for (const auto& row : wm) cal_weights.push_back(row.at(0));
    if (cal_weights.size() != logits.size()) {
      throw InputError("weights file row count does not match logits");
    }
    pc.weight_fn = [&cal_weights](std::span<const double>, std::size_t i) {
      return cal_weights.at(i);
    };
  }
  const Alpha alpha(setting<double>(cfg, "alpha", f.alpha, 0.1));
  const auto calibrated = calculate_threshold(pc, logits, labels, alpha);

  const auto out_path =
      f.out.value_or(cfg.value("out", std::string("threshold.json")));
  write_text(out_path, threshold_to_json(calibrated).dump(2) + "\n");
  log("wrote threshold artifact to " + out_path);
  return 0;
}

int cmd_predict(const CommonFlags& f) {
  const auto cfg = load_config(f.config_path);
  std::ifstream art(require_path(cfg, "threshold"));
  json j;
  try {
    art >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad threshold artifact: ") + e.what());
  }
  const auto predictor = threshold_from_json(j);
  const auto logits = read_csv_matrix(require_path(cfg, "logits"));
  std::vector<double> weights;
  if (predictor.config.kind == PredictorKind::kWeighted) {
    for (const auto& row : read_csv_matrix(require_path(cfg, "weights"))) {
      weights.push_back(row.at(0));
    }
  }
  const auto sets = predict_with_logits(predictor, logits, weights);

  std::ostringstream out;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    out << i;
    for (int k : sets[i].members) out << ',' << k;
    out << '\n';
  }
  const auto out_path =
      f.out.value_or(cfg.value("out", std::string("predictions.csv")));
  write_text(out_path, out.str());
  log("wrote " + std::to_string(sets.size()) + " prediction sets");
  return 0;
}

std::vector<PredictionSet> read_prediction_sets(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::vector<PredictionSet> sets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    PredictionSet set;
    bool first = true;
    while (std::getline(ss, field, ',')) {
      try {
        const long v = std::stol(field);
        if (first) {
          if (v != static_cast<long>(sets.size())) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": row index out of order");
          }
          first = false;
        } else {
          set.members.insert(static_cast<int>(v));
        }
      } catch (const std::invalid_argument&) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) +
                         ": not an integer: '" + field + "'");
      }
    }
    sets.push_back(std::move(set));
  }
  if (sets.empty()) throw ParseError(path.string() + ": empty file");
  return sets;
}

int cmd_eval(const CommonFlags& f) {
  const auto cfg = load_config(f.config_path);
  const auto sets = read_prediction_sets(require_path(cfg, "predictions"));
  const auto truths = read_csv_labels(require_path(cfg, "truths"));
  const Alpha alpha(setting<double>(cfg, "alpha", f.alpha, 0.1));
  int num_classes = setting<int>(cfg, "num_classes", std::nullopt, 0);
  if (num_classes == 0) {
    for (const auto& s : sets) {
      for (int k : s.members) num_classes = std::max(num_classes, k + 1);
    }
    for (int y : truths) num_classes = std::max(num_classes, y + 1);
  }

  EvaluationReport report;
  report.coverage_rate = coverage_rate(sets, truths);
  report.average_size = average_size(sets);
  report.cov_gap = cov_gap(sets, truths, alpha, num_classes);
  report.n_test = static_cast<long>(sets.size());

  json out = {{"coverage_rate", report.coverage_rate},
              {"average_size", report.average_size},
              {"cov_gap", report.cov_gap},
              {"n_test", report.n_test}};
  std::ostringstream csv;
  csv << "coverage_rate,average_size,cov_gap,n_test\n"
      << format_double(report.coverage_rate) << ','
      << format_double(report.average_size) << ','
      << format_double(report.cov_gap) << ',' << report.n_test << '\n';

  const auto out_path = f.out.value_or(cfg.value("out", std::string("report")));
  write_text(out_path + ".json", out.dump(2) + "\n");
  write_text(out_path + ".csv", csv.str());
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_bench_classification(const CommonFlags& f) {
  const auto cfg = load_config(f.config_path);
  ClassificationBenchConfig bc;
  bc.data.num_classes = setting<int>(cfg, "num_classes", std::nullopt, 10);
  bc.data.class_separation = setting<double>(cfg, "separation", std::nullopt, 2.0);
  bc.data.prior_decay = setting<double>(cfg, "prior_decay", std::nullopt, 1.0);
  bc.data.seed = setting<std::uint64_t>(cfg, "seed", f.seed, 0);
  bc.n_cal = setting<int>(cfg, "n_cal", std::nullopt, 2000);
  bc.n_test = setting<int>(cfg, "n_test", std::nullopt, 2000);
  bc.trials = setting<int>(cfg, "trials", f.trials, 5);
  if (cfg.contains("alphas")) {
    bc.alphas = cfg.at("alphas").get<std::vector<double>>();
  } else if (f.alpha) {
    bc.alphas = {*f.alpha};
  }
  if (f.score) bc.scores = {score_kind_from_name(*f.score)};
  if (f.predictor) bc.predictors = {predictor_kind_from_name(*f.predictor)};
  if (cfg.contains("cal_logits")) {
    bc.cal_logits = read_csv_matrix(require_path(cfg, "cal_logits"));
    bc.cal_labels = read_csv_labels(require_path(cfg, "cal_labels"));
    bc.test_logits = read_csv_matrix(require_path(cfg, "test_logits"));
    bc.test_labels = read_csv_labels(require_path(cfg, "test_labels"));
  }
  for (double a : bc.alphas) Alpha{a};  // validate up front

  log("classification bench: " + std::to_string(bc.trials) + " trials");
  const auto rows = bench_classification(bc);
  const auto out_dir = fs::path(f.out.value_or(cfg.value("out", std::string("."))));
  fs::create_directories(out_dir);
  write_text(out_dir / "classification.csv", classification_rows_to_csv(rows));
  log("wrote " + (out_dir / "classification.csv").string());
  return 0;
}

int cmd_bench_timeseries(const CommonFlags& f) {
  const auto cfg = load_config(f.config_path);
  TimeseriesBenchConfig tc;
  tc.arma.phi = setting<double>(cfg, "phi", std::nullopt, 0.8);
  tc.arma.theta = setting<double>(cfg, "theta", std::nullopt, 0.8);
  tc.arma.innovation_std = setting<double>(cfg, "innovation_std", std::nullopt, 1.0);
  tc.arma.seed = setting<std::uint64_t>(cfg, "seed", f.seed, 0);
  tc.n_train = setting<int>(cfg, "n_train", std::nullopt, 100);
  tc.n_cal = setting<int>(cfg, "n_cal", std::nullopt, 100);
  tc.n_test = setting<int>(cfg, "n_test", std::nullopt, 300);
  tc.alpha = setting<double>(cfg, "alpha", f.alpha, 0.1);
  tc.gamma = setting<double>(cfg, "gamma", f.gamma, 0.03);
  tc.trials = setting<int>(cfg, "trials", f.trials, 5);
  tc.train.lr = setting<double>(cfg, "lr", std::nullopt, 0.01);
  tc.train.epochs = setting<int>(cfg, "epochs", std::nullopt, 800);
  tc.train.batch_size = setting<int>(cfg, "batch_size", std::nullopt, 25);
  Alpha{tc.alpha};

  log("time-series bench: " + std::to_string(tc.trials) + " trials");
  const auto result = bench_timeseries(tc);
  const auto out_dir = fs::path(f.out.value_or(cfg.value("out", std::string("."))));
  fs::create_directories(out_dir);
  write_text(out_dir / "timeseries.csv", timeseries_points_to_csv(result));
  write_text(out_dir / "timeseries_summary.csv",
             timeseries_summary_to_csv(result));
  std::cout << "mean CQR coverage " << format_double(result.mean_cqr_coverage)
            << "\nmean ACI coverage " << format_double(result.mean_aci_coverage)
            << "\n";
  return 0;
}

int cmd_gen_data(const CommonFlags& f) {
  const auto cfg = load_config(f.config_path);
  const auto kind = cfg.value("kind", std::string("timeseries"));
  const auto out_dir = fs::path(f.out.value_or(cfg.value("out", std::string("."))));
  fs::create_directories(out_dir);
  if (kind == "timeseries") {
    ArmaConfig ac;
    ac.phi = setting<double>(cfg, "phi", std::nullopt, 0.8);
    ac.theta = setting<double>(cfg, "theta", std::nullopt, 0.8);
    ac.innovation_std = setting<double>(cfg, "innovation_std", std::nullopt, 1.0);
    ac.seed = setting<std::uint64_t>(cfg, "seed", f.seed, 0);
    ac.t_total = setting<int>(cfg, "t_total", std::nullopt, 500);
    const auto batch = generate_time_series(ac);
    write_csv_matrix(out_dir / "features.csv", batch.inputs);
    std::vector<std::vector<double>> y;
    for (double v : batch.targets) y.push_back({v});
    write_csv_matrix(out_dir / "targets.csv", y);
  } else if (kind == "classification") {
    SyntheticClassificationConfig sc;
    sc.num_classes = setting<int>(cfg, "num_classes", std::nullopt, 10);
    sc.n = setting<int>(cfg, "n", std::nullopt, 1000);
    sc.class_separation = setting<double>(cfg, "separation", std::nullopt, 2.0);
    sc.prior_decay = setting<double>(cfg, "prior_decay", std::nullopt, 1.0);
    sc.seed = setting<std::uint64_t>(cfg, "seed", f.seed, 0);
    const auto batch = generate_classification(sc);
    write_csv_matrix(out_dir / "logits.csv", batch.logits);
    std::vector<std::vector<double>> y;
    for (int v : batch.labels) y.push_back({static_cast<double>(v)});
    write_csv_matrix(out_dir / "labels.csv", y);
  } else {
    throw InputError("gen-data kind must be timeseries or classification");
  }
  log("wrote data to " + out_dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformal prediction toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* calibrate = app.add_subcommand("calibrate", "compute a threshold artifact");
  auto* predict = app.add_subcommand("predict", "emit prediction sets");
  auto* eval = app.add_subcommand("eval", "score predictions against truths");
  auto* bench_cls =
      app.add_subcommand("bench-classification", "score x predictor x alpha sweep");
  auto* bench_ts =
      app.add_subcommand("bench-timeseries", "distribution-shift CQR/ACI run");
  auto* gen = app.add_subcommand("gen-data", "write synthetic datasets");
  for (auto* cmd : {calibrate, predict, eval, bench_cls, bench_ts, gen}) {
    add_common(cmd, flags);
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (calibrate->parsed()) return cmd_calibrate(flags);
    if (predict->parsed()) return cmd_predict(flags);
    if (eval->parsed()) return cmd_eval(flags);
    if (bench_cls->parsed()) return cmd_bench_classification(flags);
    if (bench_ts->parsed()) return cmd_bench_timeseries(flags);
    if (gen->parsed()) return cmd_gen_data(flags);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitParseError;
  } catch (const TrainingError& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kExitTrainingError;
  } catch (const StateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return kExitStateError;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  return 0;
}
