#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "conformal/mlp.hpp"
#include "conformal/predictors.hpp"

namespace conformal {

// Malformed input file; message carries path and line number where known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Headerless CSV, one row per item. Labels are a single integer column.
std::vector<std::vector<double>> read_csv_matrix(const std::filesystem::path& path);
std::vector<int> read_csv_labels(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path,
                      const std::vector<std::vector<double>>& rows);

// Shortest round-trippable decimal form; used everywhere a double is printed
// so repeated runs are byte-identical.
std::string format_double(double value);

std::string score_kind_name(ScoreKind kind);
ScoreKind score_kind_from_name(const std::string& name);
std::string predictor_kind_name(PredictorKind kind);
PredictorKind predictor_kind_from_name(const std::string& name);

nlohmann::json threshold_to_json(const CalibratedPredictor& predictor);
CalibratedPredictor threshold_from_json(const nlohmann::json& j);

nlohmann::json mlp_to_json(const Mlp& model);
Mlp mlp_from_json(const nlohmann::json& j);

}  // namespace conformal
