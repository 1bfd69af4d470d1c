#include "conformal/scores.hpp"

#include <algorithm>
#include <cmath>

#include "conformal/rng.hpp"

namespace conformal {

void validate_probability_row(std::span<const double> probs) {
  if (probs.empty()) throw InputError("empty probability row");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InputError("probability entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw InputError("probability row does not sum to 1");
  }
}

int descending_rank(std::span<const double> probs, int label) {
  const double py = probs[label];
  int rank = 1;
  for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
    if (probs[i] > py || (probs[i] == py && i < label)) ++rank;
  }
  return rank;
}

namespace {

void check_label(std::span<const double> probs, int label) {
  if (label < 0 || label >= static_cast<int>(probs.size())) {
    throw InputError("label out of range");
  }
}

double aps_score(std::span<const double> probs, int label, double u) {
  const double py = probs[label];
  double above = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] > py) above += probs[i];
  }
  return above + u * py;
}

}  // namespace

double score_with_u(const ScoreConfig& config, std::span<const double> probs,
                    int label, double u) {
  check_label(probs, label);
  validate_probability_row(probs);
  switch (config.kind) {
    case ScoreKind::kThr:
      return 1.0 - probs[label];
    case ScoreKind::kAps:
      return aps_score(probs, label, u);
    case ScoreKind::kRaps: {
      const int rank = descending_rank(probs, label);
      const double penalty =
          config.raps_penalty * std::max(0, rank - config.raps_kreg);
      return aps_score(probs, label, u) + penalty;
    }
    case ScoreKind::kSaps: {
      const double pmax = *std::max_element(probs.begin(), probs.end());
      const int rank = descending_rank(probs, label);
      if (rank == 1) return u * pmax;
      return pmax + (rank - 2 + u) * config.saps_weight;
    }
    case ScoreKind::kMargin: {
      double other = -kInf;
      for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
        if (i != label) other = std::max(other, probs[i]);
      }
      if (probs.size() == 1) other = 0.0;  // degenerate single-label universe
      return other - probs[label];
    }
  }
  throw InputError("unknown score kind");
}

namespace {

double draw_u(const ScoreConfig& config, std::uint64_t row_index) {
  if (!config.randomized) return 1.0;
  auto g = row_rng(config.rng_seed, row_index);
  return uniform01(g);
}

}  // namespace

double score(const ScoreConfig& config, std::span<const double> probs,
             int label, std::uint64_t row_index) {
  return score_with_u(config, probs, label, draw_u(config, row_index));
}

std::vector<double> score_all(const ScoreConfig& config,
                              std::span<const double> probs,
                              std::uint64_t row_index) {
  validate_probability_row(probs);
  const double u = draw_u(config, row_index);
  std::vector<double> out(probs.size());
  for (int k = 0; k < static_cast<int>(probs.size()); ++k) {
    out[k] = score_with_u(config, probs, k, u);
  }
  return out;
}

std::vector<double> score_batch(const ScoreConfig& config,
                                const std::vector<std::vector<double>>& probs,
                                std::span<const int> labels) {
  if (probs.size() != labels.size()) {
    throw InputError("score_batch: |labels| != number of rows");
  }
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = score(config, probs[i], labels[i], i);
  }
  return out;
}

double score_linear(const ScoreConfig& config, std::span<const double> probs,
                    int label, std::span<double> coeffs) {
  check_label(probs, label);
  if (coeffs.size() != probs.size()) {
    throw InputError("score_linear: coefficient span size mismatch");
  }
  std::fill(coeffs.begin(), coeffs.end(), 0.0);
  switch (config.kind) {
    case ScoreKind::kThr:
      coeffs[label] = -1.0;
      return 1.0;
    case ScoreKind::kAps:
    case ScoreKind::kRaps: {
      const double py = probs[label];
      for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > py) coeffs[i] = 1.0;
      }
      coeffs[label] = 1.0;  // u = 1
      double c = 0.0;
      if (config.kind == ScoreKind::kRaps) {
        const int rank = descending_rank(probs, label);
        c = config.raps_penalty * std::max(0, rank - config.raps_kreg);
      }
      return c;
    }
    case ScoreKind::kSaps: {
      const int argmax = static_cast<int>(
          std::max_element(probs.begin(), probs.end()) - probs.begin());
      const int rank = descending_rank(probs, label);
      coeffs[argmax] = 1.0;
      if (rank == 1) return 0.0;
      return (rank - 1) * config.saps_weight;  // (rank - 2 + 1) * weight
    }
    case ScoreKind::kMargin: {
      int argmax = -1;
      double best = -kInf;
      for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
        if (i != label && probs[i] > best) {
          best = probs[i];
          argmax = i;
        }
      }
      if (argmax >= 0) coeffs[argmax] = 1.0;
      coeffs[label] -= 1.0;
      return 0.0;
    }
  }
  throw InputError("unknown score kind");
}

}  // namespace conformal
