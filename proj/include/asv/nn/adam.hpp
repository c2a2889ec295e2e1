#pragma once

#include <vector>

#include "asv/nn/mlp.hpp"

namespace asv::nn {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First and second moment estimates, shaped like the network they belong to.
struct AdamState {
  std::vector<Eigen::MatrixXd> m_weight, v_weight;
  std::vector<Eigen::VectorXd> m_bias, v_bias;
  long step = 0;

  static AdamState zeros_like(const Mlp& net);
};

/// One bias-corrected Adam update of `net` along `grads`.
void optimizer_step(Mlp& net, const Gradients& grads, AdamState& state, const AdamHyper& hyper);

}  // namespace asv::nn
