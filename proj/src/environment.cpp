#include "asv/environment.hpp"

#include <cmath>
#include <numbers>

namespace asv {

ModelParameters model_parameters_from(const KeyValueConfig& cfg) {
  ModelParameters p;
  p.m11 = cfg.get_double("m11", p.m11);
  p.m22 = cfg.get_double("m22", p.m22);
  p.m33 = cfg.get_double("m33", p.m33);
  p.d11 = cfg.get_double("d11", p.d11);
  p.d22 = cfg.get_double("d22", p.d22);
  p.d33 = cfg.get_double("d33", p.d33);
  p.a = cfg.get_double("a", p.a);
  p.b = cfg.get_double("b", p.b);
  p.f_max = cfg.get_double("f_max", p.f_max);
  p.dt = cfg.get_double("dt", p.dt);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model parameters: ") + e.what());
  }
  return p;
}

int EpisodeConfig::max_steps() const { return static_cast<int>(std::lround(t_max / dt)); }

EpisodeConfig EpisodeConfig::from_config(const KeyValueConfig& cfg) {
  EpisodeConfig e;
  e.dt = cfg.get_double("dt", e.dt);
  e.t_max = cfg.get_double("episode.t_max", e.t_max);
  e.measurement_noise_cov = cfg.get_double("episode.measurement_noise_cov", e.measurement_noise_cov);
  e.init_radius = cfg.get_double("episode.init_radius", e.init_radius);
  e.random_heading = cfg.get_bool("episode.random_heading", e.random_heading);
  e.heading_spread = cfg.get_double("episode.heading_spread_deg", e.heading_spread * 180.0 / std::numbers::pi) *
                     std::numbers::pi / 180.0;
  if (!(e.heading_spread >= 0)) throw ConfigError("episode.heading_spread_deg must be >= 0");
  e.lookahead = cfg.get_double("guidance.lookahead", e.lookahead);
  if (!(e.dt > 0 && e.t_max > 0)) throw ConfigError("episode dt and t_max must be positive");
  if (std::abs(e.t_max / e.dt - std::round(e.t_max / e.dt)) > 1e-9)
    throw ConfigError("episode.t_max must be an integral number of control periods");
  if (e.measurement_noise_cov < 0) throw ConfigError("measurement noise covariance must be >= 0");
  if (!(e.lookahead > 0)) throw ConfigError("guidance.lookahead must be positive");
  return e;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::running: return "running";
    case Termination::time_limit: return "time_limit";
    case Termination::boundary: return "boundary";
    case Termination::model_explosion: return "model_explosion";
  }
  return "unknown";
}

TrackingEnv::TrackingEnv(ModelParameters params, RewardParams reward, EpisodeConfig episode,
                         DisturbanceScenario disturbances)
    : params_(params), reward_(reward), episode_(episode), scenario_(std::move(disturbances)) {
  params_.validate();
}

void TrackingEnv::reset(const TrajectorySpec& trajectory, const VesselState& initial,
                        std::uint64_t disturbance_seed) {
  trajectory_ = trajectory;
  state_ = initial;
  state_.q(2) = wrap_angle(state_.q(2));
  prev_cmd_ = ThrustCommand();
  t_ = 0;
  steps_ = 0;
  const double horizon = std::min(episode_.t_max, trajectory.duration);
  max_steps_ = static_cast<int>(std::floor(horizon / episode_.dt + 1e-9));
  termination_ = Termination::running;
  disturbance_.emplace(scenario_, disturbance_seed);
}

VesselState TrackingEnv::random_initial_state(const TrajectorySpec& trajectory, Rng& rng) const {
  const ReferenceSample ref = sample(trajectory, 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = episode_.init_radius * std::sqrt(unit(rng));
  const double angle = 2.0 * std::numbers::pi * unit(rng);
  double psi = ref.psi;
  if (episode_.random_heading) psi = wrap_angle(ref.psi + episode_.heading_spread * (1.0 - 2.0 * unit(rng)));
  return VesselState(ref.x + r * std::cos(angle), ref.y + r * std::sin(angle), psi);
}

VesselState TrackingEnv::on_reference(const TrajectorySpec& trajectory) {
  const ReferenceSample ref = sample(trajectory, 0.0);
  return VesselState(ref.x, ref.y, ref.psi, ref.u, ref.v, ref.w);
}

ReferenceSample TrackingEnv::reference_at(double t) const {
  const double end = trajectory_.kind == TrajectoryKind::table ? trajectory_.table->rows.back().t
                                                               : trajectory_.duration;
  return sample(trajectory_, std::min(t, end));
}

StepRecord TrackingEnv::step(const ThrustCommand& raw_cmd) {
  if (finished()) throw ContractViolation("TrackingEnv::step after episode end");
  const ThrustCommand cmd = raw_cmd.saturated(params_.f_max);
  const DisturbanceSample dist = disturbance_->step(params_, state_, episode_.dt);

  StepRecord rec;
  rec.cmd = cmd;
  rec.tau_env = dist.total();
  try {
    state_ = step_rk4(params_, state_, cmd, rec.tau_env, episode_.dt);
  } catch (const ModelExplosion&) {
    termination_ = Termination::model_explosion;
    throw;
  }
  ++steps_;
  t_ = steps_ * episode_.dt;

  rec.t = t_;
  rec.state = state_;
  rec.ref = reference_at(t_);
  rec.psi_s = sight_heading(rec.ref, state_.position(), episode_.lookahead);
  rec.reward = total_reward(state_, rec.ref, rec.psi_s, cmd, prev_cmd_, reward_);
  prev_cmd_ = cmd;

  if (rec.reward.out_of_bounds)
    termination_ = Termination::boundary;
  else if (steps_ >= max_steps_)
    termination_ = Termination::time_limit;
  return rec;
}

VesselState add_measurement_noise(const VesselState& s, double cov, GaussianSource& noise) {
  if (cov <= 0) return s;
  const double sd = std::sqrt(cov);
  VesselState out = s;
  for (int i = 0; i < 6; ++i) out.q(i) += sd * noise();
  out.q(2) = wrap_angle(out.q(2));
  return out;
}

double EpisodeLog::mean_position_error() const {
  if (steps.empty()) return 0.0;
  double sum = 0;
  for (const auto& s : steps) sum += s.reward.e_p;
  return sum / static_cast<double>(steps.size());
}

EpisodeLog run_closed_loop(TrackingEnv& env, Controller& controller, const TrajectorySpec& trajectory,
                           const VesselState& initial, std::uint64_t seed, double measurement_noise_cov) {
  env.reset(trajectory, initial, derive_seed(seed, 11));
  controller.reset(env);
  GaussianSource sensor(derive_seed(seed, 12));
  EpisodeLog log;
  log.steps.reserve(static_cast<std::size_t>(env.episode().max_steps()));
  try {
    while (!env.finished()) {
      const VesselState measured = add_measurement_noise(env.state(), measurement_noise_cov, sensor);
      StepRecord rec = env.step(controller.command(env, measured));
      log.total_return += rec.reward.total;
      log.steps.push_back(std::move(rec));
    }
  } catch (const ModelExplosion& e) {
    log.diagnostic = std::string("model explosion at t=") + std::to_string(env.time()) + ": " + e.what();
  }
  log.termination = env.termination();
  return log;
}

}  // namespace asv
