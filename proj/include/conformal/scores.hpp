#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "conformal/core.hpp"

namespace conformal {

enum class ScoreKind { kThr, kAps, kRaps, kSaps, kMargin };

struct ScoreConfig {
  ScoreKind kind = ScoreKind::kThr;
  double raps_penalty = 1.0;   // lambda
  int raps_kreg = 0;
  double saps_weight = 0.25;   // ranking weight
  bool randomized = false;
  std::uint64_t rng_seed = 0;
};

// Throws InputError unless entries are in [0,1] and sum to 1 within 1e-6.
void validate_probability_row(std::span<const double> probs);

// 1-indexed descending rank of probs[label]; ties broken by ascending index.
int descending_rank(std::span<const double> probs, int label);

// Nonconformity score of (probs_row, label) with an explicit randomization
// term u in [0,1]. Deterministic mode corresponds to u = 1.
double score_with_u(const ScoreConfig& config, std::span<const double> probs,
                    int label, double u);

// Score with u drawn from the (seed, row_index) stream when randomized.
double score(const ScoreConfig& config, std::span<const double> probs,
             int label, std::uint64_t row_index = 0);

// Scores of all K labels, sharing a single u per row.
std::vector<double> score_all(const ScoreConfig& config,
                              std::span<const double> probs,
                              std::uint64_t row_index = 0);

// Row-wise scores at the true labels over an n x K probability matrix.
std::vector<double> score_batch(const ScoreConfig& config,
                                const std::vector<std::vector<double>>& probs,
                                std::span<const int> labels);

// Deterministic (u = 1) score expressed as coeffs . probs + constant; fills
// `coeffs` (length K) and returns the constant term. The coefficients are
// locally constant in probs away from ties, which is what a chain rule
// through the score needs.
double score_linear(const ScoreConfig& config, std::span<const double> probs,
                    int label, std::span<double> coeffs);

}  // namespace conformal
