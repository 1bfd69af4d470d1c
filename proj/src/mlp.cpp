#include "conformal/mlp.hpp"

#include <cmath>
#include <string>

#include "conformal/rng.hpp"

namespace conformal {

Mlp::Mlp(const MlpSpec& spec) : spec_(spec) {
  if (spec.input_dim < 1 || spec.output_dim < 1) {
    throw InputError("mlp: dimensions must be >= 1");
  }
  for (int w : spec.hidden_widths) {
    if (w < 1) throw InputError("mlp: hidden widths must be >= 1");
  }
  std::vector<int> dims;
  dims.push_back(spec.input_dim);
  dims.insert(dims.end(), spec.hidden_widths.begin(), spec.hidden_widths.end());
  dims.push_back(spec.output_dim);

  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    LayerView v;
    v.rows = dims[l + 1];
    v.cols = dims[l];
    v.w_offset = total;
    total += static_cast<std::size_t>(v.rows) * v.cols;
    v.b_offset = total;
    total += v.rows;
    layers_.push_back(v);
  }
  params_.resize(total);
  grads_.assign(total, 0.0);

  // uniform init scaled by fan-in
  std::mt19937_64 rng(mix64(spec.seed));
  for (const auto& l : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.cols));
    for (int i = 0; i < l.rows * l.cols; ++i) {
      params_[l.w_offset + i] = (2.0 * uniform01(rng) - 1.0) * bound;
    }
    for (int i = 0; i < l.rows; ++i) {
      params_[l.b_offset + i] = (2.0 * uniform01(rng) - 1.0) * bound;
    }
  }
}

std::vector<double> Mlp::layer_forward(const LayerView& l,
                                       std::span<const double> in) const {
  std::vector<double> out(l.rows);
  for (int r = 0; r < l.rows; ++r) {
    double z = params_[l.b_offset + r];
    const double* w = &params_[l.w_offset + static_cast<std::size_t>(r) * l.cols];
    for (int c = 0; c < l.cols; ++c) z += w[c] * in[c];
    out[r] = z;
  }
  return out;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != spec_.input_dim) {
    throw InputError("mlp: input width mismatch");
  }
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = layer_forward(layers_[l], a);
    if (l + 1 < layers_.size()) {
      for (double& v : a) v = std::max(0.0, v);
    }
  }
  return a;
}

std::vector<std::vector<double>> Mlp::forward_batch(
    const std::vector<std::vector<double>>& xs) const {
  std::vector<std::vector<double>> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(forward(x));
  return out;
}

void Mlp::zero_grad() { grads_.assign(grads_.size(), 0.0); }

void Mlp::backward_batch(const std::vector<std::vector<double>>& xs,
                         const std::vector<std::vector<double>>& output_grads) {
  if (xs.size() != output_grads.size()) {
    throw InputError("mlp: backward batch size mismatch");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    // forward with activation caching
    std::vector<std::vector<double>> acts;  // post-activation per layer input
    acts.emplace_back(xs[i].begin(), xs[i].end());
    std::vector<std::vector<double>> pre;  // pre-activation per layer
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      pre.push_back(layer_forward(layers_[l], acts.back()));
      std::vector<double> a = pre.back();
      if (l + 1 < layers_.size()) {
        for (double& v : a) v = std::max(0.0, v);
      }
      acts.push_back(std::move(a));
    }

    std::vector<double> delta = output_grads[i];
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const auto& lv = layers_[l];
      for (int r = 0; r < lv.rows; ++r) {
        grads_[lv.b_offset + r] += delta[r];
        double* gw = &grads_[lv.w_offset + static_cast<std::size_t>(r) * lv.cols];
        for (int c = 0; c < lv.cols; ++c) gw[c] += delta[r] * acts[l][c];
      }
      if (l == 0) break;
      std::vector<double> prev(lv.cols, 0.0);
      for (int r = 0; r < lv.rows; ++r) {
        const double* w =
            &params_[lv.w_offset + static_cast<std::size_t>(r) * lv.cols];
        for (int c = 0; c < lv.cols; ++c) prev[c] += w[c] * delta[r];
      }
      for (int c = 0; c < lv.cols; ++c) {
        if (pre[l - 1][c] <= 0.0) prev[c] = 0.0;  // ReLU mask
      }
      delta = std::move(prev);
    }
  }
}

TrainResult train(Mlp& model, const std::vector<std::vector<double>>& inputs,
                  const BatchLossFn& loss, const TrainConfig& config) {
  if (!(config.lr >= 0.0) || config.epochs < 1 || config.batch_size < 1) {
    throw InputError("train: bad config");
  }
  if (inputs.empty()) throw InputError("train: no data");

  auto& params = model.parameters();
  std::vector<double> m(params.size(), 0.0), v(params.size(), 0.0);
  long step = 0;

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    int num_batches = 0;
    for (std::size_t start = 0; start < inputs.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(inputs.size(), start + config.batch_size);
      std::vector<std::vector<double>> batch;
      std::vector<std::size_t> indices;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(inputs[i]);
        indices.push_back(i);
      }
      const auto outputs = model.forward_batch(batch);
      const auto eval = loss(outputs, indices);
      if (!std::isfinite(eval.value)) {
        throw TrainingError("training diverged at epoch " +
                            std::to_string(epoch));
      }
      epoch_loss += eval.value;
      ++num_batches;

      model.zero_grad();
      model.backward_batch(batch, eval.grad);
      const auto& grads = model.gradients();
      ++step;
      const double bc1 = 1.0 - std::pow(config.adam_beta1, step);
      const double bc2 = 1.0 - std::pow(config.adam_beta2, step);
      for (std::size_t p = 0; p < params.size(); ++p) {
        m[p] = config.adam_beta1 * m[p] + (1.0 - config.adam_beta1) * grads[p];
        v[p] = config.adam_beta2 * v[p] +
               (1.0 - config.adam_beta2) * grads[p] * grads[p];
        params[p] -= config.lr * (m[p] / bc1) /
                     (std::sqrt(v[p] / bc2) + config.adam_eps);
      }
    }
    result.epoch_losses.push_back(epoch_loss / num_batches);
  }
  return result;
}

}  // namespace conformal
