#pragma once

#include "asv/config.hpp"
#include "asv/trajectory.hpp"
#include "asv/types.hpp"

namespace asv {

/// How consecutive-action variation is accumulated across thrusters.
enum class ActionVariation {
  absolute,  // sum_i |f_i(t) - f_i(t-1)|
  signed_sum // sum_i (f_i(t) - f_i(t-1)), literal form
};

struct RewardParams {
  double mu = 3.0;
  double k1 = 4.0;
  double k2 = 3.0;
  double k3 = 1.0;
  double k4 = 0.033;
  double k5 = 0.017;
  double lambda1 = 1.5;
  double lambda2 = 0.5;
  double lambda3 = 1.0;
  double lambda4 = 0.5;
  double lambda5 = 0.2;
  double e_bound = 1.0;            // m
  double boundary_penalty = -25.0;
  ActionVariation variation = ActionVariation::absolute;

  /// Position and heading terms only (lambda3 = lambda4 = lambda5 = 0).
  RewardParams simple() const;
  void validate() const;
  static RewardParams from_config(const KeyValueConfig& cfg);
};

struct RewardBreakdown {
  double r_p = 0, r_psi = 0, r_w = 0, r_a = 0, r_e = 0;
  double total = 0;
  double e_p = 0;
  bool out_of_bounds = false;
};

/// 2^(-k1 (mu |e_v| + 1) e_p) - 1
double position_reward(double e_p, double e_v, const RewardParams& p);

/// exp(-k2 |d|) for |d| <= pi/2, -exp(k2 (|d| - pi)) beyond, with d the wrapped heading error.
double heading_reward(double psi, double psi_s, const RewardParams& p);

/// exp(-k3 |w - w_d|) - 1
double yaw_rate_reward(double w, double w_d, const RewardParams& p);

double action_variation(const ThrustCommand& cmd, const ThrustCommand& prev, ActionVariation mode);

/// exp(-k4 Delta_a) - 1
double action_smoothness_reward(const ThrustCommand& cmd, const ThrustCommand& prev,
                                const RewardParams& p);

/// exp(-k5 sum f_i^2) - 1
double energy_reward(const ThrustCommand& cmd, const RewardParams& p);

RewardBreakdown total_reward(const VesselState& state, const ReferenceSample& ref, double psi_s,
                             const ThrustCommand& cmd, const ThrustCommand& prev_cmd,
                             const RewardParams& p);

}  // namespace asv
