// SPDX-License-Identifier: Apache-2.0
#include "satmoe/neural.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "satmoe/errors.hpp"

namespace satmoe::nn {

using nlohmann::json;

namespace {

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation parse_activation(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation '" + s + "'");
}

void apply(Activation a, Matrix& z) {
  switch (a) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
  }
}

// dL/dz from dL/da and the post-activation a.
Matrix activation_backward(Activation act, const Matrix& a, const Matrix& grad) {
  switch (act) {
    case Activation::identity: return grad;
    case Activation::relu: return (a.array() > 0.0).select(grad, 0.0);
    case Activation::tanh: return (grad.array() * (1.0 - a.array().square())).matrix();
  }
  return grad;
}

}  // namespace

void Gradients::set_zero() {
  for (auto& w : weight) w.setZero();
  for (auto& b : bias) b.setZero();
}

Gradients& Gradients::operator+=(const Gradients& other) {
  for (std::size_t i = 0; i < weight.size(); ++i) {
    weight[i] += other.weight[i];
    bias[i] += other.bias[i];
  }
  return *this;
}

bool Gradients::all_finite() const {
  for (const auto& w : weight)
    if (!w.allFinite()) return false;
  for (const auto& b : bias)
    if (!b.allFinite()) return false;
  return true;
}

Mlp::Mlp(const std::vector<int>& sizes, Activation head, double head_gain, Rng& rng) {
  if (sizes.size() < 2) throw DimensionError("Mlp: need at least input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    if (in < 1 || out < 1) throw DimensionError("Mlp: layer sizes must be positive");
    const bool last = l + 2 == sizes.size();
    const double gain = last ? head_gain : std::sqrt(2.0);
    const double limit = gain * std::sqrt(3.0 / in);
    Layer layer;
    layer.weight.resize(out, in);
    // Row-major fill order keeps initialization independent of Eigen's storage.
    for (int r = 0; r < out; ++r)
      for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-limit, limit);
    layer.bias = Vector::Zero(out);
    layer.activation = last ? head : Activation::relu;
    layers_.push_back(std::move(layer));
  }
}

Mlp::Mlp(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("Mlp: no layers");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    if (layers_[l].bias.size() != layers_[l].weight.rows())
      throw DimensionError("Mlp: bias length does not match weight rows");
    if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows())
      throw DimensionError("Mlp: layer shapes do not chain");
  }
}

int Mlp::input_size() const { return static_cast<int>(layers_.front().weight.cols()); }
int Mlp::output_size() const { return static_cast<int>(layers_.back().weight.rows()); }

Matrix Mlp::forward(const Matrix& input, ForwardCache* cache) const {
  if (input.rows() != input_size())
    throw DimensionError("Mlp::forward: expected " + std::to_string(input_size()) + " inputs, got " +
                         std::to_string(input.rows()));
  if (cache) {
    cache->inputs.clear();
    cache->activations.clear();
    cache->owner = this;
    cache->version = version_;
  }
  Matrix x = input;
  for (const auto& layer : layers_) {
    Matrix z = layer.weight * x;
    z.colwise() += layer.bias;
    apply(layer.activation, z);
    if (cache) {
      cache->inputs.push_back(std::move(x));
      cache->activations.push_back(z);
    }
    x = std::move(z);
  }
  return x;
}

Vector Mlp::forward(const Vector& input) const {
  Matrix in = input;
  return forward(in).col(0);
}

Gradients Mlp::backward(const ForwardCache& cache, const Matrix& output_grad, Matrix* input_grad) const {
  if (cache.owner != this || cache.version != version_ || cache.inputs.size() != layers_.size())
    throw std::logic_error("Mlp::backward: stale or foreign forward cache");
  if (output_grad.rows() != output_size() || output_grad.cols() != cache.activations.back().cols())
    throw DimensionError("Mlp::backward: output gradient shape mismatch");
  Gradients g;
  g.weight.resize(layers_.size());
  g.bias.resize(layers_.size());
  Matrix grad = output_grad;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    const Matrix dz = activation_backward(layer.activation, cache.activations[l], grad);
    g.weight[l].noalias() = dz * cache.inputs[l].transpose();
    g.bias[l] = dz.rowwise().sum();
    if (l > 0 || input_grad) grad = layer.weight.transpose() * dz;
  }
  if (input_grad) *input_grad = std::move(grad);
  return g;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (const auto& layer : layers_) {
    g.weight.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
    g.bias.push_back(Vector::Zero(layer.bias.size()));
  }
  return g;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.weight.size() + layer.bias.size());
  return n;
}

bool Mlp::all_finite() const {
  for (const auto& layer : layers_)
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  return true;
}

std::vector<Eigen::Map<Matrix>> Mlp::parameter_views() {
  ++version_;
  std::vector<Eigen::Map<Matrix>> views;
  for (auto& layer : layers_) {
    views.emplace_back(layer.weight.data(), layer.weight.rows(), layer.weight.cols());
    views.emplace_back(layer.bias.data(), layer.bias.size(), 1);
  }
  return views;
}

std::vector<Matrix> flatten(const Gradients& g) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < g.weight.size(); ++i) {
    out.push_back(g.weight[i]);
    out.emplace_back(g.bias[i]);
  }
  return out;
}

json Mlp::to_json() const {
  json layers = json::array();
  for (const auto& layer : layers_) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(r, c));
    layers.push_back({{"rows", layer.weight.rows()},
                      {"cols", layer.weight.cols()},
                      {"activation", activation_name(layer.activation)},
                      {"weights", w},
                      {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  }
  return json{{"format", "satmoe-mlp"}, {"version", 1}, {"layers", layers}};
}

Mlp Mlp::from_json(const json& j) {
  if (j.value("format", "") != "satmoe-mlp") throw std::invalid_argument("not a satmoe-mlp checkpoint");
  if (j.value("version", 0) != 1) throw std::invalid_argument("unsupported satmoe-mlp version");
  std::vector<Layer> layers;
  for (const auto& jl : j.at("layers")) {
    const auto rows = jl.at("rows").get<Eigen::Index>();
    const auto cols = jl.at("cols").get<Eigen::Index>();
    const auto w = jl.at("weights").get<std::vector<double>>();
    const auto b = jl.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols || static_cast<Eigen::Index>(b.size()) != rows)
      throw DimensionError("checkpoint layer has inconsistent sizes");
    Layer layer;
    layer.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    layer.bias = Eigen::Map<const Vector>(b.data(), rows);
    layer.activation = parse_activation(jl.at("activation").get<std::string>());
    layers.push_back(std::move(layer));
  }
  return Mlp(std::move(layers));
}

void Adam::step(std::vector<Eigen::Map<Matrix>> params, const std::vector<Matrix>& grads) {
  if (params.size() != grads.size()) throw DimensionError("Adam::step: parameter/gradient count mismatch");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (params[i].rows() != grads[i].rows() || params[i].cols() != grads[i].cols())
      throw DimensionError("Adam::step: parameter/gradient shape mismatch");
    if (!grads[i].allFinite()) throw NumericalError("Adam::step: non-finite gradient in tensor " + std::to_string(i));
  }
  if (m_.empty()) {
    for (const auto& g : grads) {
      m_.push_back(Matrix::Zero(g.rows(), g.cols()));
      v_.push_back(Matrix::Zero(g.rows(), g.cols()));
    }
  } else if (m_.size() != grads.size()) {
    throw DimensionError("Adam::step: parameter set changed between steps");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grads[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() -= cfg_.lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + cfg_.eps);
  }
}

void save_checkpoint(const json& j, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + file + "'");
  out << j.dump() << '\n';
}

json load_checkpoint(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + file + "'");
  json j;
  in >> j;
  return j;
}

}  // namespace satmoe::nn
