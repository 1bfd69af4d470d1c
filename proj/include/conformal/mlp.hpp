#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "conformal/losses.hpp"

namespace conformal {

// Training loop failure (divergence); carries the epoch index in the message.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MlpSpec {
  int input_dim = 1;
  std::vector<int> hidden_widths = {64, 64};
  int output_dim = 2;
  std::uint64_t seed = 0;
};

// Fully connected ReLU network with a linear output layer. Forward and
// backward are hand-rolled; parameters live in flat per-layer matrices.
class Mlp {
 public:
  explicit Mlp(const MlpSpec& spec);

  std::vector<double> forward(std::span<const double> x) const;
  std::vector<std::vector<double>> forward_batch(
      const std::vector<std::vector<double>>& xs) const;

  // Accumulates parameter gradients for a batch given dL/doutput rows.
  void zero_grad();
  void backward_batch(const std::vector<std::vector<double>>& xs,
                      const std::vector<std::vector<double>>& output_grads);

  const MlpSpec& spec() const { return spec_; }
  std::vector<double>& parameters() { return params_; }
  const std::vector<double>& parameters() const { return params_; }
  const std::vector<double>& gradients() const { return grads_; }

 private:
  struct LayerView {
    std::size_t w_offset;  // rows x cols row-major
    std::size_t b_offset;
    int rows;
    int cols;
  };

  std::vector<double> layer_forward(const LayerView& l,
                                    std::span<const double> in) const;

  MlpSpec spec_;
  std::vector<LayerView> layers_;
  std::vector<double> params_;
  std::vector<double> grads_;
};

struct TrainConfig {
  double lr = 0.01;
  int epochs = 10;
  int batch_size = 32;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct TrainResult {
  std::vector<double> epoch_losses;  // mean batch loss per epoch
};

// Loss over the model outputs of one batch; `indices` are row indices into
// the full dataset so target lookup stays with the caller.
using BatchLossFn = std::function<LossEvaluation(
    const std::vector<std::vector<double>>& outputs,
    std::span<const std::size_t> indices)>;

TrainResult train(Mlp& model, const std::vector<std::vector<double>>& inputs,
                  const BatchLossFn& loss, const TrainConfig& config);

}  // namespace conformal
