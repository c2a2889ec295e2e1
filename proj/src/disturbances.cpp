#include "asv/disturbances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace asv {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

double wind_attack_angle(const WindModel& wind, const VesselState& state) {
  const double rel = wind.direction - state.psi();
  const double u_rw = state.u() - wind.speed * std::cos(rel);
  const double v_rw = state.v() - wind.speed * std::sin(rel);
  return -std::atan2(v_rw, u_rw);
}

Wrench wind_wrench(const WindModel& wind, const VesselState& state) {
  if (!wind.enabled) return Wrench::Zero();
  const double rel = wind.direction - state.psi();
  const double u_rw = state.u() - wind.speed * std::cos(rel);
  const double v_rw = state.v() - wind.speed * std::sin(rel);
  const double speed_sq = u_rw * u_rw + v_rw * v_rw;
  if (speed_sq == 0.0) return Wrench::Zero();

  const double gamma = -std::atan2(v_rw, u_rw);
  const double q = 0.5 * wind.air_density * speed_sq;
  return q * Wrench(-wind.cx * std::cos(gamma) * wind.frontal_area,
                    wind.cy * std::sin(gamma) * wind.lateral_area,
                    wind.cn * std::sin(2.0 * gamma) * wind.lateral_area * wind.length);
}

namespace {

// Semi-implicit Euler-Maruyama step of x1' = x2, x2' = -w^2 x1 - 2 l w x2 + K n.
void advance_shaping_filter(Eigen::Vector2d& x, double omega, double damping, double gain,
                            double dt, double noise) {
  x(1) += (-omega * omega * x(0) - 2.0 * damping * omega * x(1)) * dt + gain * std::sqrt(dt) * noise;
  x(0) += x(1) * dt;
}

}  // namespace

Wrench wave_step(WaveModel& wave, const VesselState& state, double dt, GaussianSource& noise) {
  if (!(dt > 0)) throw std::invalid_argument("wave_step: dt must be positive");
  // Four draws every step regardless of gains, so streams stay aligned across configurations.
  const double n_force = noise(), n_moment = noise(), n_drift_f = noise(), n_drift_n = noise();
  if (!wave.enabled) return Wrench::Zero();

  const double sqdt = std::sqrt(dt);
  advance_shaping_filter(wave.force_filter, wave.omega_e, wave.damping, wave.gain, dt, n_force);
  advance_shaping_filter(wave.moment_filter, wave.omega_e, wave.damping,
                         wave.gain * wave.moment_scale, dt, n_moment);
  wave.force_drift += wave.drift_sigma * sqdt * n_drift_f;
  wave.moment_drift += wave.drift_sigma * wave.moment_scale * sqdt * n_drift_n;

  const double f_cap = wave.force_cap;
  const double n_cap = wave.force_cap * wave.moment_scale;
  const double force = std::clamp(wave.oscillatory_force() + wave.force_drift, -f_cap, f_cap);
  const double moment = std::clamp(wave.oscillatory_moment() + wave.moment_drift, -n_cap, n_cap);

  const double rel = wave.direction - state.psi();
  return Wrench(force * std::cos(rel), force * std::sin(rel), moment);
}

Vector3<double> current_velocity(const CurrentModel& current, double psi) {
  if (!current.enabled) return Vector3<double>::Zero();
  const double rel = current.direction - psi;
  return Vector3<double>(current.speed * std::cos(rel), current.speed * std::sin(rel), 0.0);
}

Vector3<double> current_step(CurrentModel& current, double psi, double dt, GaussianSource& noise) {
  if (!(dt > 0)) throw std::invalid_argument("current_step: dt must be positive");
  const double n = noise();
  if (!current.enabled) return Vector3<double>::Zero();
  current.speed += -current.mu * current.speed * dt + current.sigma * std::sqrt(dt) * n;
  if (current.clamp) current.speed = std::clamp(current.speed, 0.0, current.cap);
  return current_velocity(current, psi);
}

Wrench current_wrench(const ModelParameters& params, const Vector3<double>& v_c) {
  return (coriolis(params, v_c) + drag_matrix(params)) * v_c;
}

DisturbanceScenario DisturbanceScenario::none() {
  DisturbanceScenario s;
  s.wind.enabled = false;
  s.wave.enabled = false;
  s.current.enabled = false;
  return s;
}

DisturbanceScenario DisturbanceScenario::from_config(const KeyValueConfig& cfg) {
  DisturbanceScenario s;
  const bool all = cfg.get_bool("disturbance.enabled", true);

  s.wind.enabled = all && cfg.get_bool("wind.enabled", true);
  s.wind.speed = cfg.get_double("wind.speed_knots", s.wind.speed / kKnot) * kKnot;
  s.wind.direction = cfg.get_double("wind.direction_deg", 0.0) * kDeg;
  s.wind.air_density = cfg.get_double("wind.air_density", s.wind.air_density);
  s.wind.cx = cfg.get_double("wind.cx", s.wind.cx);
  s.wind.cy = cfg.get_double("wind.cy", s.wind.cy);
  s.wind.cn = cfg.get_double("wind.cn", s.wind.cn);

  s.wave.enabled = all && cfg.get_bool("wave.enabled", true);
  s.wave.force_cap = cfg.get_double("wave.cap_N", s.wave.force_cap);
  s.wave.omega_e = cfg.get_double("wave.omega_e", s.wave.omega_e);
  s.wave.damping = cfg.get_double("wave.lambda", s.wave.damping);
  s.wave.gain = cfg.get_double("wave.gain", s.wave.gain);
  s.wave.drift_sigma = cfg.get_double("wave.drift_sigma", s.wave.drift_sigma);
  s.wave.moment_scale = cfg.get_double("wave.moment_scale", s.wave.moment_scale);
  s.wave.direction = cfg.get_double("wave.direction_deg", 0.0) * kDeg;

  s.current.enabled = all && cfg.get_bool("current.enabled", true);
  s.current.cap = cfg.get_double("current.cap_mps", s.current.cap);
  s.current.mu = cfg.get_double("current.mu", s.current.mu);
  s.current.sigma = cfg.get_double("current.sigma", s.current.sigma);
  s.current.speed = cfg.get_double("current.initial_mps", s.current.speed);
  s.current.direction = cfg.get_double("current.direction_deg", 0.0) * kDeg;
  s.current.clamp = cfg.get_bool("current.clamp", true);

  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));

  if (s.wind.speed < 0) throw ConfigError("wind.speed_knots must be non-negative");
  if (!(s.wave.omega_e > 0 && s.wave.damping > 0 && s.wave.gain >= 0))
    throw ConfigError("wave.omega_e and wave.lambda must be positive, wave.gain non-negative");
  if (!(s.wave.force_cap > 0)) throw ConfigError("wave.cap_N must be positive");
  if (!(s.current.mu > 0)) throw ConfigError("current.mu must be positive");
  if (!(s.current.cap >= 0) || s.current.sigma < 0) throw ConfigError("invalid current parameters");
  return s;
}

DisturbanceState::DisturbanceState(const DisturbanceScenario& scenario)
    : DisturbanceState(scenario, scenario.seed) {}

DisturbanceState::DisturbanceState(const DisturbanceScenario& scenario, std::uint64_t seed)
    : scenario_(scenario), wave_noise_(derive_seed(seed, 1)), current_noise_(derive_seed(seed, 2)) {}

DisturbanceSample DisturbanceState::step(const ModelParameters& params, const VesselState& state,
                                         double dt) {
  DisturbanceSample out;
  out.wind = wind_wrench(scenario_.wind, state);
  out.wave = wave_step(scenario_.wave, state, dt, wave_noise_);
  out.current_velocity = current_step(scenario_.current, state.psi(), dt, current_noise_);
  if (scenario_.current.enabled) out.current = current_wrench(params, out.current_velocity);
  return out;
}

}  // namespace asv
