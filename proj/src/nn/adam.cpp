#include "asv/nn/adam.hpp"

#include <cmath>

#include "asv/types.hpp"

namespace asv::nn {

AdamState AdamState::zeros_like(const Mlp& net) {
  AdamState s;
  for (const auto& l : net.layers) {
    s.m_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.v_weight.push_back(Eigen::MatrixXd::Zero(l.weight.rows(), l.weight.cols()));
    s.m_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
    s.v_bias.push_back(Eigen::VectorXd::Zero(l.bias.size()));
  }
  return s;
}

namespace {

template <typename Param, typename Grad, typename Moment>
void adam_update(Param& param, const Grad& grad, Moment& m, Moment& v, const AdamHyper& h,
                 double step_size, double bias2) {
  m = h.beta1 * m + (1.0 - h.beta1) * grad;
  v = h.beta2 * v + (1.0 - h.beta2) * grad.cwiseAbs2();
  param.array() -= step_size * m.array() / ((v.array() / bias2).sqrt() + h.epsilon);
}

}  // namespace

void optimizer_step(Mlp& net, const Gradients& grads, AdamState& state, const AdamHyper& hyper) {
  if (grads.weight.size() != net.layers.size() || state.m_weight.size() != net.layers.size())
    throw ContractViolation("optimizer_step: shape mismatch");
  ++state.step;
  const double bias1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double bias2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  const double step_size = hyper.learning_rate / bias1;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    adam_update(net.layers[l].weight, grads.weight[l], state.m_weight[l], state.v_weight[l], hyper,
                step_size, bias2);
    adam_update(net.layers[l].bias, grads.bias[l], state.m_bias[l], state.v_bias[l], hyper, step_size,
                bias2);
  }
}

}  // namespace asv::nn
