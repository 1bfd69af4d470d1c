#include "conformal/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace conformal {

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  return in;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

std::vector<std::vector<double>> read_csv_matrix(
    const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& field : split_commas(line)) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(field, &pos));
        if (pos != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(lineno) +
                         ": not a number: '" + field + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": inconsistent column count");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path.string() + ": empty file");
  return rows;
}

std::vector<int> read_csv_labels(const std::filesystem::path& path) {
  const auto matrix = read_csv_matrix(path);
  std::vector<int> labels;
  labels.reserve(matrix.size());
  for (std::size_t i = 0; i < matrix.size(); ++i) {
    if (matrix[i].size() != 1) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                       ": labels must be a single column");
    }
    const double v = matrix[i][0];
    if (v != std::floor(v)) {
      throw ParseError(path.string() + ":" + std::to_string(i + 1) +
                       ": label is not an integer");
    }
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

void write_csv_matrix(const std::filesystem::path& path,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path.string());
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << format_double(row[j]);
    }
    out << '\n';
  }
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  // shortest form that round-trips
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::stod(buf) == value) break;
  }
  return buf;
}

std::string score_kind_name(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kThr: return "THR";
    case ScoreKind::kAps: return "APS";
    case ScoreKind::kRaps: return "RAPS";
    case ScoreKind::kSaps: return "SAPS";
    case ScoreKind::kMargin: return "Margin";
  }
  throw InputError("unknown score kind");
}

ScoreKind score_kind_from_name(const std::string& name) {
  if (name == "THR") return ScoreKind::kThr;
  if (name == "APS") return ScoreKind::kAps;
  if (name == "RAPS") return ScoreKind::kRaps;
  if (name == "SAPS") return ScoreKind::kSaps;
  if (name == "Margin") return ScoreKind::kMargin;
  throw InputError("unknown score kind: " + name);
}

std::string predictor_kind_name(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kSplit: return "Split";
    case PredictorKind::kClassWise: return "ClassWise";
    case PredictorKind::kCluster: return "Cluster";
    case PredictorKind::kWeighted: return "Weighted";
  }
  throw InputError("unknown predictor kind");
}

PredictorKind predictor_kind_from_name(const std::string& name) {
  if (name == "Split") return PredictorKind::kSplit;
  if (name == "ClassWise") return PredictorKind::kClassWise;
  if (name == "Cluster") return PredictorKind::kCluster;
  if (name == "Weighted") return PredictorKind::kWeighted;
  throw InputError("unknown predictor kind: " + name);
}

namespace {

nlohmann::json encode_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double decode_value(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw ParseError("bad numeric value in artifact: " + s);
  }
  return j.get<double>();
}

}  // namespace

nlohmann::json threshold_to_json(const CalibratedPredictor& predictor) {
  nlohmann::json j;
  j["alpha"] = predictor.alpha;
  j["num_classes"] = predictor.num_classes;
  j["predictor"] = predictor_kind_name(predictor.config.kind);
  j["temperature"] = predictor.config.temperature;
  const auto& sc = predictor.config.score;
  j["score"] = {{"kind", score_kind_name(sc.kind)},
                {"raps_penalty", sc.raps_penalty},
                {"raps_kreg", sc.raps_kreg},
                {"saps_weight", sc.saps_weight},
                {"randomized", sc.randomized},
                {"rng_seed", sc.rng_seed}};
  const auto& th = predictor.threshold;
  switch (th.kind) {
    case ThresholdKind::kScalar:
      j["threshold"] = {{"kind", "scalar"}, {"value", encode_value(th.scalar)}};
      break;
    case ThresholdKind::kPerClass: {
      nlohmann::json vals = nlohmann::json::array();
      for (double v : th.per_class) vals.push_back(encode_value(v));
      j["threshold"] = {{"kind", "per_class"}, {"values", vals}};
      break;
    }
    case ThresholdKind::kPerCluster: {
      nlohmann::json vals = nlohmann::json::array();
      for (double v : th.per_cluster) vals.push_back(encode_value(v));
      j["threshold"] = {{"kind", "per_cluster"},
                        {"values", vals},
                        {"cluster_of", th.cluster_of}};
      break;
    }
    case ThresholdKind::kWeighted:
      j["threshold"] = {{"kind", "weighted"},
                        {"scores", th.weighted_scores},
                        {"weights", th.weighted_weights}};
      break;
  }
  return j;
}

CalibratedPredictor threshold_from_json(const nlohmann::json& j) {
  CalibratedPredictor p;
  p.alpha = j.at("alpha").get<double>();
  p.num_classes = j.at("num_classes").get<int>();
  p.config.kind = predictor_kind_from_name(j.at("predictor").get<std::string>());
  p.config.temperature = j.at("temperature").get<double>();
  const auto& sc = j.at("score");
  p.config.score.kind = score_kind_from_name(sc.at("kind").get<std::string>());
  p.config.score.raps_penalty = sc.at("raps_penalty").get<double>();
  p.config.score.raps_kreg = sc.at("raps_kreg").get<int>();
  p.config.score.saps_weight = sc.at("saps_weight").get<double>();
  p.config.score.randomized = sc.at("randomized").get<bool>();
  p.config.score.rng_seed = sc.at("rng_seed").get<std::uint64_t>();
  const auto& th = j.at("threshold");
  const auto kind = th.at("kind").get<std::string>();
  if (kind == "scalar") {
    p.threshold.kind = ThresholdKind::kScalar;
    p.threshold.scalar = decode_value(th.at("value"));
  } else if (kind == "per_class") {
    p.threshold.kind = ThresholdKind::kPerClass;
    for (const auto& v : th.at("values")) {
      p.threshold.per_class.push_back(decode_value(v));
    }
  } else if (kind == "per_cluster") {
    p.threshold.kind = ThresholdKind::kPerCluster;
    for (const auto& v : th.at("values")) {
      p.threshold.per_cluster.push_back(decode_value(v));
    }
    p.threshold.cluster_of = th.at("cluster_of").get<std::vector<int>>();
  } else if (kind == "weighted") {
    p.threshold.kind = ThresholdKind::kWeighted;
    p.threshold.weighted_scores = th.at("scores").get<std::vector<double>>();
    p.threshold.weighted_weights = th.at("weights").get<std::vector<double>>();
  } else {
    throw ParseError("unknown threshold kind in artifact: " + kind);
  }
  if ((p.threshold.kind == ThresholdKind::kScalar) !=
          (p.config.kind == PredictorKind::kSplit) ||
      (p.threshold.kind == ThresholdKind::kPerClass) !=
          (p.config.kind == PredictorKind::kClassWise) ||
      (p.threshold.kind == ThresholdKind::kPerCluster) !=
          (p.config.kind == PredictorKind::kCluster) ||
      (p.threshold.kind == ThresholdKind::kWeighted) !=
          (p.config.kind == PredictorKind::kWeighted)) {
    throw ParseError("threshold kind does not match predictor kind");
  }
  return p;
}

nlohmann::json mlp_to_json(const Mlp& model) {
  nlohmann::json j;
  j["input_dim"] = model.spec().input_dim;
  j["hidden_widths"] = model.spec().hidden_widths;
  j["output_dim"] = model.spec().output_dim;
  j["seed"] = model.spec().seed;
  j["parameters"] = model.parameters();
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  MlpSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  spec.output_dim = j.at("output_dim").get<int>();
  spec.seed = j.at("seed").get<std::uint64_t>();
  Mlp model(spec);
  auto params = j.at("parameters").get<std::vector<double>>();
  if (params.size() != model.parameters().size()) {
    throw ParseError("model artifact parameter count mismatch");
  }
  model.parameters() = std::move(params);
  return model;
}

}  // namespace conformal
