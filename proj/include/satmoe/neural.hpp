// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "satmoe/rng.hpp"

namespace satmoe::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { identity, relu, tanh };

struct Layer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation activation = Activation::identity;
};

/// Activations recorded by a forward pass; consumed by backward.
/// Batches are column-major: one column per sample.
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer
  std::vector<Matrix> activations;  // output of each layer (post-activation)
  const void* owner = nullptr;
  unsigned long version = 0;
};

/// Gradients mirroring an Mlp's parameter layout.
struct Gradients {
  std::vector<Matrix> weight;
  std::vector<Vector> bias;

  void set_zero();
  Gradients& operator+=(const Gradients& other);
  bool all_finite() const;
};

/// Dense feed-forward network: ReLU hidden layers, configurable output head.
class Mlp {
 public:
  Mlp() = default;
  /// sizes = {input, hidden..., output}. Weights are drawn uniform in
  /// +-gain*sqrt(3/fan_in) (gain sqrt(2) for ReLU layers, `head_gain` for the
  /// output layer); biases start at zero.
  Mlp(const std::vector<int>& sizes, Activation head, double head_gain, Rng& rng);
  /// Builds from explicit layers (used by checkpoint loading and tests).
  explicit Mlp(std::vector<Layer> layers);

  int input_size() const;
  int output_size() const;
  const std::vector<Layer>& layers() const { return layers_; }
  std::vector<Layer>& mutable_layers() { ++version_; return layers_; }

  /// Forward on a batch (input_size x B). Throws DimensionError on shape mismatch.
  Matrix forward(const Matrix& input, ForwardCache* cache = nullptr) const;
  Vector forward(const Vector& input) const;

  /// Gradient of a scalar loss w.r.t. every parameter, given dL/d(output).
  /// Optionally returns dL/d(input). Throws std::logic_error on a stale cache.
  Gradients backward(const ForwardCache& cache, const Matrix& output_grad,
                     Matrix* input_grad = nullptr) const;

  Gradients zero_gradients() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

  /// Parameters and gradients as a flat list of matrices in a fixed order
  /// (W0, b0, W1, b1, ...), for optimizers.
  std::vector<Eigen::Map<Matrix>> parameter_views();

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

 private:
  std::vector<Layer> layers_;
  unsigned long version_ = 0;
};

std::vector<Matrix> flatten(const Gradients& g);

/// Adam with bias correction.
struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  /// params[i] -= lr * mhat / (sqrt(vhat) + eps). Moment buffers are created
  /// on first use and must keep the same shapes afterwards. Throws
  /// NumericalError if any gradient is non-finite (parameters untouched).
  void step(std::vector<Eigen::Map<Matrix>> params, const std::vector<Matrix>& grads);

  long steps() const { return t_; }
  AdamConfig& config() { return cfg_; }
  const std::vector<Matrix>& first_moment() const { return m_; }
  const std::vector<Matrix>& second_moment() const { return v_; }

 private:
  AdamConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

/// Checkpoint file: {"format": "satmoe-mlp", "version": 1, "layers": [...]}
/// with row-major weights. See README for the layout.
void save_checkpoint(const nlohmann::json& j, const std::string& file);
nlohmann::json load_checkpoint(const std::string& file);

}  // namespace satmoe::nn
