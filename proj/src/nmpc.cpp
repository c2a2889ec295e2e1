#include "asv/nmpc.hpp"

#include <cmath>

namespace asv {

namespace {
const Wrench kNoWrench = Wrench::Zero();
}

void NmpcConfig::validate() const {
  if (horizon < 1) throw ConfigError("nmpc.horizon must be >= 1");
  if (!(dt > 0)) throw ConfigError("nmpc dt must be positive");
  if (w_position < 0 || w_heading < 0 || w_velocity < 0 || w_control < 0 || w_rate < 0)
    throw ConfigError("nmpc weights must be >= 0");
  if (!(tolerance > 0)) throw ConfigError("nmpc.tolerance must be positive");
  if (max_iterations < 1) throw ConfigError("nmpc.max_iterations must be >= 1");
  if (!(f_max > 0)) throw ConfigError("f_max must be positive");
  if (!(initial_damping > 0)) throw ConfigError("nmpc.initial_damping must be positive");
}

NmpcConfig NmpcConfig::from_config(const KeyValueConfig& cfg) {
  NmpcConfig n;
  n.horizon = static_cast<int>(cfg.get_int("nmpc.horizon", n.horizon));
  n.dt = cfg.get_double("dt", n.dt);
  n.w_position = cfg.get_double("nmpc.w_position", n.w_position);
  n.w_heading = cfg.get_double("nmpc.w_heading", n.w_heading);
  n.w_velocity = cfg.get_double("nmpc.w_velocity", n.w_velocity);
  n.w_control = cfg.get_double("nmpc.w_control", n.w_control);
  n.w_rate = cfg.get_double("nmpc.w_rate", n.w_rate);
  n.f_max = cfg.get_double("f_max", n.f_max);
  n.max_iterations = static_cast<int>(cfg.get_int("nmpc.max_iterations", n.max_iterations));
  n.tolerance = cfg.get_double("nmpc.tolerance", n.tolerance);
  n.initial_damping = cfg.get_double("nmpc.initial_damping", n.initial_damping);
  n.max_backtracks = static_cast<int>(cfg.get_int("nmpc.max_backtracks", n.max_backtracks));
  n.validate();
  return n;
}

std::vector<VesselState> predict(const ModelParameters& params, const VesselState& state,
                                 const ControlSequence& controls, double dt) {
  std::vector<VesselState> out;
  out.reserve(static_cast<std::size_t>(controls.cols()) + 1);
  out.push_back(state);
  for (Eigen::Index k = 0; k < controls.cols(); ++k)
    out.push_back(step_rk4(params, out.back(), ThrustCommand(controls.col(k)), kNoWrench, dt));
  return out;
}

NmpcProblem::NmpcProblem(NmpcConfig cfg, ModelParameters params, VesselState initial,
                         std::vector<ReferenceSample> window, ThrustCommand previous)
    : cfg_(cfg), params_(params), initial_(initial), window_(std::move(window)), previous_(previous) {
  cfg_.validate();
  if (static_cast<int>(window_.size()) != cfg_.horizon)
    throw ContractViolation("reference window must hold Np samples");
}

namespace {

void stage_residual(const NmpcConfig& c, const VesselState& s, const ReferenceSample& ref,
                    const Eigen::Vector4d& u, const Eigen::Vector4d& u_prev, Eigen::VectorXd& r,
                    Eigen::Index at) {
  const double sp = std::sqrt(c.w_position), sh = std::sqrt(c.w_heading), sv = std::sqrt(c.w_velocity);
  r(at + 0) = sp * (s.x() - ref.x);
  r(at + 1) = sp * (s.y() - ref.y);
  r(at + 2) = sh * angle_diff(s.psi(), ref.psi);
  r(at + 3) = sv * (s.u() - ref.u);
  r(at + 4) = sv * (s.v() - ref.v);
  r(at + 5) = sv * (s.w() - ref.w);
  r.segment<4>(at + 6) = std::sqrt(c.w_control) * u;
  r.segment<4>(at + 10) = std::sqrt(c.w_rate) * (u - u_prev);
}

}  // namespace

Eigen::VectorXd NmpcProblem::residual(const ControlSequence& u) const {
  if (u.cols() != cfg_.horizon) throw ContractViolation("control sequence must have Np columns");
  Eigen::VectorXd r(residual_size());
  VesselState s = initial_;
  Eigen::Vector4d prev = previous_.f;
  for (int k = 0; k < cfg_.horizon; ++k) {
    s = step_rk4(params_, s, ThrustCommand(u.col(k)), kNoWrench, cfg_.dt);
    stage_residual(cfg_, s, window_[static_cast<std::size_t>(k)], u.col(k), prev, r, 14 * k);
    prev = u.col(k);
  }
  return r;
}

Eigen::VectorXd NmpcProblem::residual(const ControlSequence& u, Eigen::MatrixXd& jac) const {
  if (u.cols() != cfg_.horizon) throw ContractViolation("control sequence must have Np columns");
  const int n = decision_size();
  Eigen::VectorXd r(residual_size());
  jac.setZero(residual_size(), n);
  const Eigen::Matrix<double, 6, 1> wq =
      (Eigen::Matrix<double, 6, 1>() << std::sqrt(cfg_.w_position), std::sqrt(cfg_.w_position),
       std::sqrt(cfg_.w_heading), std::sqrt(cfg_.w_velocity), std::sqrt(cfg_.w_velocity),
       std::sqrt(cfg_.w_velocity))
          .finished();
  const double sc = std::sqrt(cfg_.w_control), sr = std::sqrt(cfg_.w_rate);

  Eigen::Matrix<double, 6, Eigen::Dynamic> sens = Eigen::Matrix<double, 6, Eigen::Dynamic>::Zero(6, n);
  VesselState s = initial_;
  Eigen::Vector4d prev = previous_.f;
  for (int k = 0; k < cfg_.horizon; ++k) {
    const int cols = 4 * (k + 1);  // later controls cannot affect this state
    const StepSensitivity<double> step =
        step_rk4_sensitivity(params_, s, ThrustCommand(u.col(k)), kNoWrench, cfg_.dt);
    sens.leftCols(cols - 4) = (step.dq * sens.leftCols(cols - 4)).eval();
    sens.middleCols(4 * k, 4) = step.df;
    s = step.next;
    stage_residual(cfg_, s, window_[static_cast<std::size_t>(k)], u.col(k), prev, r, 14 * k);
    prev = u.col(k);

    jac.block(14 * k, 0, 6, cols) = wq.asDiagonal() * sens.leftCols(cols);
    jac.block<4, 4>(14 * k + 6, 4 * k) = sc * Eigen::Matrix4d::Identity();
    jac.block<4, 4>(14 * k + 10, 4 * k) = sr * Eigen::Matrix4d::Identity();
    if (k > 0) jac.block<4, 4>(14 * k + 10, 4 * (k - 1)) = -sr * Eigen::Matrix4d::Identity();
  }
  if (!jac.allFinite() || !r.allFinite()) throw NmpcAbort("non-finite linearization");
  return r;
}

double NmpcProblem::cost(const ControlSequence& u) const { return residual(u).squaredNorm(); }

Eigen::VectorXd NmpcProblem::gradient(const ControlSequence& u) const {
  Eigen::MatrixXd jac;
  const Eigen::VectorXd r = residual(u, jac);
  return 2.0 * jac.transpose() * r;
}

namespace {

ControlSequence clamp_box(const ControlSequence& u, double f_max) {
  return u.cwiseMax(-f_max).cwiseMin(f_max);
}

Eigen::Map<const Eigen::VectorXd> flat(const ControlSequence& u) { return {u.data(), u.size()}; }

// |r1|^2 - |r0|^2 without cancellation, so descent stays visible near the optimum.
double cost_change(const Eigen::VectorXd& r1, const Eigen::VectorXd& r0) {
  return ((r1 - r0).array() * (r1 + r0).array()).sum();
}

}  // namespace

NmpcSolution solve(const NmpcProblem& problem, const ControlSequence& guess) {
  const NmpcConfig& c = problem.config();
  if (guess.cols() != c.horizon) throw ContractViolation("initial guess must have Np columns");
  const int n = problem.decision_size();

  NmpcSolution sol;
  ControlSequence u = clamp_box(guess, c.f_max);
  Eigen::MatrixXd jac;
  Eigen::VectorXd r;
  try {
    r = problem.residual(u, jac);
  } catch (const ModelExplosion& e) {
    throw NmpcAbort(std::string("prediction diverged: ") + e.what());
  }
  double cost = r.squaredNorm();
  sol.initial_cost = cost;
  sol.cost_history.push_back(cost);
  double damping = c.initial_damping;

  auto projected_gradient = [&](const Eigen::VectorXd& g) {
    ControlSequence stepped = u;
    Eigen::Map<Eigen::VectorXd>(stepped.data(), n) -= g;
    return (flat(u) - flat(clamp_box(stepped, c.f_max))).norm();
  };

  for (;;) {
    const Eigen::VectorXd jtr = jac.transpose() * r;
    sol.gradient_norm = projected_gradient(2.0 * jtr);
    if (sol.gradient_norm < c.tolerance) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= c.max_iterations) {
      sol.iteration_cap = true;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;

    bool accepted = false;
    ControlSequence candidate;
    Eigen::VectorXd candidate_r;
    double change = 0;
    while (!accepted && damping < 1e10) {
      const Eigen::VectorXd delta =
          (jtj + damping * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(-jtr);
      if (!delta.allFinite()) throw NmpcAbort("non-finite Gauss-Newton step");
      double alpha = 1.0;
      for (int b = 0; b <= c.max_backtracks; ++b, alpha *= 0.5) {
        candidate = u;
        Eigen::Map<Eigen::VectorXd>(candidate.data(), n) += alpha * delta;
        candidate = clamp_box(candidate, c.f_max);
        try {
          candidate_r = problem.residual(candidate);
        } catch (const ModelExplosion&) {
          continue;
        }
        change = cost_change(candidate_r, r);
        if (change < 0) {
          accepted = true;
          break;
        }
      }
      if (!accepted) damping *= 10.0;
    }
    if (!accepted) break;  // no descent left at working precision

    damping = std::max(damping / 3.0, 1e-12);
    u = candidate;
    try {
      r = problem.residual(u, jac);
    } catch (const ModelExplosion& e) {
      throw NmpcAbort(std::string("prediction diverged: ") + e.what());
    }
    cost += change;
    sol.cost_history.push_back(cost);
    ++sol.iterations;
  }
  sol.controls = u;
  sol.cost = cost;
  return sol;
}

NmpcController::NmpcController(NmpcConfig cfg, ModelParameters params, bool warm_start)
    : cfg_(cfg), params_(params), warm_start_(warm_start) {
  cfg_.validate();
}

void NmpcController::reset(const TrackingEnv&) {
  have_previous_ = false;
  degraded_ = false;
  held_ = ThrustCommand();
  last_ = NmpcSolution();
  diagnostics_.clear();
}

ThrustCommand NmpcController::command(const TrackingEnv& env, const VesselState& measured) {
  std::vector<ReferenceSample> window;
  window.reserve(static_cast<std::size_t>(cfg_.horizon));
  for (int k = 1; k <= cfg_.horizon; ++k) window.push_back(env.reference_at(env.time() + k * cfg_.dt));

  ControlSequence guess = ControlSequence::Zero(4, cfg_.horizon);
  if (warm_start_ && have_previous_) {
    guess.leftCols(cfg_.horizon - 1) = last_.controls.rightCols(cfg_.horizon - 1);
    guess.col(cfg_.horizon - 1) = last_.controls.col(cfg_.horizon - 1);
  }

  NmpcDiagnostics diag;
  diag.t = env.time();
  try {
    const NmpcProblem problem(cfg_, params_, measured, std::move(window), env.previous_command());
    last_ = solve(problem, guess);
    have_previous_ = true;
    held_ = ThrustCommand(last_.controls.col(0)).saturated(cfg_.f_max);
    diag.iterations = last_.iterations;
    diag.cost = last_.cost;
    diag.gradient_norm = last_.gradient_norm;
    diag.warning = last_.iteration_cap;
  } catch (const NmpcAbort&) {
    degraded_ = true;
    diag.degraded = true;
  }
  diagnostics_.push_back(diag);
  return held_;
}

}  // namespace asv
