#include "asv/reward.hpp"

#include <cmath>
#include <numbers>

namespace asv {

RewardParams RewardParams::simple() const {
  RewardParams p = *this;
  p.lambda3 = p.lambda4 = p.lambda5 = 0.0;
  return p;
}

void RewardParams::validate() const {
  for (double k : {mu, k1, k2, k3, k4, k5})
    if (!(k > 0)) throw ConfigError("reward constants must be positive");
  for (double l : {lambda1, lambda2, lambda3, lambda4, lambda5})
    if (!(l >= 0)) throw ConfigError("reward weights must be non-negative");
  if (!(e_bound > 0)) throw ConfigError("reward.e_bound must be positive");
}

RewardParams RewardParams::from_config(const KeyValueConfig& cfg) {
  RewardParams p;
  p.mu = cfg.get_double("reward.mu", p.mu);
  p.k1 = cfg.get_double("reward.k1", p.k1);
  p.k2 = cfg.get_double("reward.k2", p.k2);
  p.k3 = cfg.get_double("reward.k3", p.k3);
  p.k4 = cfg.get_double("reward.k4", p.k4);
  p.k5 = cfg.get_double("reward.k5", p.k5);
  p.lambda1 = cfg.get_double("reward.lambda1", p.lambda1);
  p.lambda2 = cfg.get_double("reward.lambda2", p.lambda2);
  p.lambda3 = cfg.get_double("reward.lambda3", p.lambda3);
  p.lambda4 = cfg.get_double("reward.lambda4", p.lambda4);
  p.lambda5 = cfg.get_double("reward.lambda5", p.lambda5);
  p.e_bound = cfg.get_double("reward.e_bound", p.e_bound);
  p.boundary_penalty = cfg.get_double("reward.boundary_penalty", p.boundary_penalty);
  const std::string mode = cfg.get_string("reward.action_variation", "absolute");
  if (mode == "absolute")
    p.variation = ActionVariation::absolute;
  else if (mode == "signed")
    p.variation = ActionVariation::signed_sum;
  else
    throw ConfigError("reward.action_variation must be 'absolute' or 'signed'");
  if (cfg.get_bool("reward.simple", false)) p = p.simple();
  p.validate();
  return p;
}

double position_reward(double e_p, double e_v, const RewardParams& p) {
  return std::exp2(-p.k1 * (p.mu * std::abs(e_v) + 1.0) * e_p) - 1.0;
}

double heading_reward(double psi, double psi_s, const RewardParams& p) {
  const double d = std::abs(angle_diff(psi, psi_s));
  if (d <= 0.5 * std::numbers::pi) return std::exp(-p.k2 * d);
  return -std::exp(p.k2 * (d - std::numbers::pi));
}

double yaw_rate_reward(double w, double w_d, const RewardParams& p) {
  return std::exp(-p.k3 * std::abs(w - w_d)) - 1.0;
}

double action_variation(const ThrustCommand& cmd, const ThrustCommand& prev, ActionVariation mode) {
  const Vector4<double> delta = cmd.f - prev.f;
  return mode == ActionVariation::absolute ? delta.cwiseAbs().sum() : delta.sum();
}

double action_smoothness_reward(const ThrustCommand& cmd, const ThrustCommand& prev,
                                const RewardParams& p) {
  return std::exp(-p.k4 * action_variation(cmd, prev, p.variation)) - 1.0;
}

double energy_reward(const ThrustCommand& cmd, const RewardParams& p) {
  return std::exp(-p.k5 * cmd.f.squaredNorm()) - 1.0;
}

RewardBreakdown total_reward(const VesselState& state, const ReferenceSample& ref, double psi_s,
                             const ThrustCommand& cmd, const ThrustCommand& prev_cmd,
                             const RewardParams& p) {
  RewardBreakdown r;
  r.e_p = std::hypot(state.x() - ref.x, state.y() - ref.y);
  const double e_v = std::hypot(state.u() - ref.u, state.v() - ref.v);
  r.r_p = position_reward(r.e_p, e_v, p);
  r.r_psi = heading_reward(state.psi(), psi_s, p);
  r.r_w = yaw_rate_reward(state.w(), ref.w, p);
  r.r_a = action_smoothness_reward(cmd, prev_cmd, p);
  r.r_e = energy_reward(cmd, p);
  if (r.e_p > p.e_bound) {
    r.out_of_bounds = true;
    r.total = p.boundary_penalty;
  } else {
    r.total = p.lambda1 * r.r_p + p.lambda2 * r.r_psi + p.lambda3 * r.r_w + p.lambda4 * r.r_a +
              p.lambda5 * r.r_e;
  }
  return r;
}

}  // namespace asv
