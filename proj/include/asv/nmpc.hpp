#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asv/environment.hpp"

namespace asv {

struct NmpcConfig {
  int horizon = 20;  // Np
  double dt = 0.1;
  double w_position = 10.0;
  double w_heading = 1.0;
  double w_velocity = 0.5;
  double w_control = 0.05;
  double w_rate = 0.1;
  double f_max = 4.0;
  int max_iterations = 30;
  double tolerance = 1e-6;  // on the projected gradient norm
  double initial_damping = 1e-4;
  int max_backtracks = 12;

  void validate() const;
  static NmpcConfig from_config(const KeyValueConfig& cfg);
};

class NmpcAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Controls are stored 4 x Np, one column per control period.
using ControlSequence = Eigen::Matrix<double, 4, Eigen::Dynamic>;

/// Nominal disturbance-free rollout; returns Np + 1 states starting with `state`.
std::vector<VesselState> predict(const ModelParameters& params, const VesselState& state,
                                 const ControlSequence& controls, double dt);

/// Shooting objective sum_k |e_k|^2_W + |u_k|^2_R + |u_k - u_{k-1}|^2_S over a reference window
/// of Np samples aligned with the predicted states 1..Np.
class NmpcProblem {
 public:
  NmpcProblem(NmpcConfig cfg, ModelParameters params, VesselState initial,
              std::vector<ReferenceSample> window, ThrustCommand previous);

  int decision_size() const { return 4 * cfg_.horizon; }
  int residual_size() const { return 14 * cfg_.horizon; }

  Eigen::VectorXd residual(const ControlSequence& u) const;
  /// Residual with its Jacobian d r / d vec(u).
  Eigen::VectorXd residual(const ControlSequence& u, Eigen::MatrixXd& jacobian) const;
  double cost(const ControlSequence& u) const;
  Eigen::VectorXd gradient(const ControlSequence& u) const;

  const NmpcConfig& config() const { return cfg_; }

 private:
  NmpcConfig cfg_;
  ModelParameters params_;
  VesselState initial_;
  std::vector<ReferenceSample> window_;
  ThrustCommand previous_;
};

struct NmpcSolution {
  ControlSequence controls;
  double initial_cost = 0;
  double cost = 0;
  double gradient_norm = 0;  // projected
  int iterations = 0;
  bool converged = false;
  bool iteration_cap = false;  // warning: stopped at max_iterations
  std::vector<double> cost_history;  // cost after every accepted iterate, starting with the guess
};

/// Box-constrained Gauss-Newton with a clamped backtracking line search.
/// Throws NmpcAbort on non-finite linearizations or model explosion.
NmpcSolution solve(const NmpcProblem& problem, const ControlSequence& guess);

struct NmpcDiagnostics {
  double t = 0;
  int iterations = 0;
  double cost = 0;
  double gradient_norm = 0;
  bool warning = false;
  bool degraded = false;
};

/// Receding-horizon controller with shifted warm starts.
class NmpcController : public Controller {
 public:
  NmpcController(NmpcConfig cfg, ModelParameters params, bool warm_start = true);

  std::string name() const override { return "nmpc"; }
  void reset(const TrackingEnv& env) override;
  ThrustCommand command(const TrackingEnv& env, const VesselState& measured) override;

  bool degraded() const { return degraded_; }
  const std::vector<NmpcDiagnostics>& diagnostics() const { return diagnostics_; }
  const NmpcSolution& last_solution() const { return last_; }

 private:
  NmpcConfig cfg_;
  ModelParameters params_;
  bool warm_start_;
  bool have_previous_ = false;
  bool degraded_ = false;
  ThrustCommand held_;
  NmpcSolution last_;
  std::vector<NmpcDiagnostics> diagnostics_;
};

}  // namespace asv
