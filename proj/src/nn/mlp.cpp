#include "asv/nn/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "asv/types.hpp"

namespace asv::nn {

Mlp::Mlp(std::vector<int> sizes, Activation output) : sizes_(std::move(sizes)), output_(output) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("Mlp layer sizes must be positive");
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l)
    layers.push_back({Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]), Eigen::VectorXd::Zero(sizes_[l + 1])});
}

Mlp Mlp::initialized(std::vector<int> sizes, Activation output, Rng& rng, double final_range) {
  Mlp net(std::move(sizes), output);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const bool last = l + 1 == net.layers.size();
    const double range = last ? final_range : 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    std::uniform_real_distribution<double> dist(-range, range);
    auto& layer = net.layers[l];
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = dist(rng);
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

namespace {

void apply_output(Eigen::MatrixXd& z, Activation act) {
  switch (act) {
    case Activation::identity: break;
    case Activation::relu: z = z.cwiseMax(0.0); break;
    case Activation::tanh: z = z.array().tanh().matrix(); break;
  }
}

}  // namespace

const Eigen::MatrixXd& Mlp::forward(const Eigen::MatrixXd& input) {
  if (input.rows() != input_size()) throw ContractViolation("Mlp::forward: input dimension mismatch");
  inputs_.resize(layers.size());
  inputs_[0] = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd& out = (l + 1 < layers.size()) ? inputs_[l + 1] : output_cache_;
    out.noalias() = layers[l].weight * inputs_[l];
    out.colwise() += layers[l].bias;
    apply_output(out, l + 1 < layers.size() ? Activation::relu : output_);
  }
  return output_cache_;
}

Eigen::MatrixXd Mlp::predict(const Eigen::MatrixXd& input) const {
  if (input.rows() != input_size()) throw ContractViolation("Mlp::predict: input dimension mismatch");
  Eigen::MatrixXd x = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Eigen::MatrixXd z = layers[l].weight * x;
    z.colwise() += layers[l].bias;
    apply_output(z, l + 1 < layers.size() ? Activation::relu : output_);
    x = std::move(z);
  }
  return x;
}

Gradients Mlp::backward(const Eigen::MatrixXd& upstream, bool parameters) const {
  if (inputs_.size() != layers.size()) throw ContractViolation("Mlp::backward called before forward");
  if (upstream.rows() != output_size() || upstream.cols() != output_cache_.cols())
    throw ContractViolation("Mlp::backward: upstream gradient shape mismatch");

  Eigen::MatrixXd delta = upstream;
  switch (output_) {
    case Activation::identity: break;
    case Activation::relu: delta.array() *= (output_cache_.array() > 0).cast<double>(); break;
    case Activation::tanh: delta.array() *= 1.0 - output_cache_.array().square(); break;
  }

  Gradients g;
  if (parameters) {
    g.weight.resize(layers.size());
    g.bias.resize(layers.size());
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    if (parameters) {
      g.weight[l].noalias() = delta * inputs_[l].transpose();
      g.bias[l] = delta.rowwise().sum();
    }
    Eigen::MatrixXd prev;
    prev.noalias() = layers[l].weight.transpose() * delta;
    if (l > 0) prev.array() *= (inputs_[l].array() > 0).cast<double>();
    delta = std::move(prev);
  }
  g.input = std::move(delta);
  return g;
}

Eigen::VectorXd Mlp::parameter_vector() const {
  Eigen::VectorXd out(parameter_count());
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    out.segment(k, l.weight.size()) = l.weight.reshaped();
    k += l.weight.size();
    out.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return out;
}

void Mlp::set_parameter_vector(const Eigen::VectorXd& params) {
  if (static_cast<std::size_t>(params.size()) != parameter_count())
    throw ContractViolation("Mlp::set_parameter_vector: size mismatch");
  Eigen::Index k = 0;
  for (auto& l : layers) {
    l.weight.reshaped() = params.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = params.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

Eigen::VectorXd Mlp::flatten(const Gradients& grads) {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < grads.weight.size(); ++l) n += grads.weight[l].size() + grads.bias[l].size();
  Eigen::VectorXd out(n);
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < grads.weight.size(); ++l) {
    out.segment(k, grads.weight[l].size()) = grads.weight[l].reshaped();
    k += grads.weight[l].size();
    out.segment(k, grads.bias[l].size()) = grads.bias[l];
    k += grads.bias[l].size();
  }
  return out;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.sizes() != online.sizes()) throw ContractViolation("soft_update: topology mismatch");
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    target.layers[l].weight = tau * online.layers[l].weight + (1.0 - tau) * target.layers[l].weight;
    target.layers[l].bias = tau * online.layers[l].bias + (1.0 - tau) * target.layers[l].bias;
  }
}

}  // namespace asv::nn
