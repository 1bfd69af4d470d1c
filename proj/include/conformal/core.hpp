#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace conformal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Bad caller-supplied data (shapes, ranges, malformed values).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Object used before it reached the required state (e.g. predict before calibrate).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Significance level, 0 < value < 1.
class Alpha {
 public:
  explicit Alpha(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
      throw InputError("alpha must lie in (0, 1), got " + std::to_string(value));
    }
  }
  double value() const { return value_; }

 private:
  double value_;
};

// One prediction set for classification: a subset of {0, ..., K-1}.
struct PredictionSet {
  std::set<int> members;

  bool contains(int label) const { return members.count(label) != 0; }
  std::size_t size() const { return members.size(); }
};

// Per-dimension [lo, hi] bounds; +-inf permitted. `collapsed` marks the
// zero-width interval emitted when an adaptive level exceeds 1.
struct PredictionInterval {
  struct Bounds {
    double lo;
    double hi;
  };
  std::vector<Bounds> dims;
  bool collapsed = false;

  bool covers(std::span<const double> y) const {
    if (y.size() != dims.size()) {
      throw InputError("dimension mismatch in interval coverage check");
    }
    if (collapsed) return false;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      if (y[j] < dims[j].lo || y[j] > dims[j].hi) return false;
    }
    return true;
  }
  double width() const {
    double w = 0.0;
    for (const auto& d : dims) w += d.hi - d.lo;
    return w;
  }
};

// The ceil((n+1)(1-alpha))-th smallest score, or +inf when that index
// exceeds n. Scores must be finite and nonempty.
double conformal_quantile(std::span<const double> scores, const Alpha& alpha);

// Weighted generalization: inf{q : sum_i p_i 1[s_i <= q] >= 1-alpha} with
// p_i = w_i / (sum_j w_j + w_test); the test point holds mass at +inf.
double weighted_conformal_quantile(std::span<const double> scores,
                                   std::span<const double> weights,
                                   double test_weight, const Alpha& alpha);

}  // namespace conformal
