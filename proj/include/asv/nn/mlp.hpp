#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "asv/random.hpp"

namespace asv::nn {

enum class Activation : std::uint32_t { identity = 0, relu = 1, tanh = 2 };

struct Layer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
  Eigen::MatrixXd input;  // d loss / d input, one column per sample
};

/// Fully connected network: ReLU on hidden layers, configurable output activation.
/// Batches are column-major: one sample per column.
class Mlp {
 public:
  Mlp() = default;
  /// Zero weights and biases.
  Mlp(std::vector<int> sizes, Activation output);

  /// Hidden layers U(-1/sqrt(fan_in), 1/sqrt(fan_in)); last layer U(-final_range, final_range).
  static Mlp initialized(std::vector<int> sizes, Activation output, Rng& rng,
                         double final_range = 3e-3);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& sizes() const { return sizes_; }
  Activation output_activation() const { return output_; }
  std::size_t parameter_count() const;

  /// Forward pass; caches activations for backward().
  const Eigen::MatrixXd& forward(const Eigen::MatrixXd& input);
  /// Forward pass that leaves the cache alone.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& input) const;

  /// Back-propagates d loss / d output through the last forward() call.
  /// With `parameters = false` only the input gradient is produced.
  Gradients backward(const Eigen::MatrixXd& upstream, bool parameters = true) const;

  Eigen::VectorXd parameter_vector() const;
  void set_parameter_vector(const Eigen::VectorXd& params);
  static Eigen::VectorXd flatten(const Gradients& grads);

  std::vector<Layer> layers;

 private:
  std::vector<int> sizes_;
  Activation output_ = Activation::identity;
  std::vector<Eigen::MatrixXd> inputs_;  // input seen by each layer
  Eigen::MatrixXd output_cache_;
};

/// target <- tau * online + (1 - tau) * target
void soft_update(Mlp& target, const Mlp& online, double tau);

}  // namespace asv::nn
