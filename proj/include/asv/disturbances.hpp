#pragma once

// Environmental disturbances acting on the vessel:
//   tau_env = tau_wind + tau_wave + (C(v_c) + D) v_c

#include <cstdint>

#include "asv/config.hpp"
#include "asv/dynamics.hpp"
#include "asv/random.hpp"

namespace asv {

constexpr double kKnot = 0.514444;  // m/s

struct WindModel {
  bool enabled = true;
  double speed = 4.0 * kKnot;   // V_w, m/s
  double direction = 0.0;       // beta_wind, rad (direction the air moves toward)
  double air_density = 1.225;   // kg/m^3
  double frontal_area = 0.045;  // A_FW, m^2
  double lateral_area = 0.09;   // A_LW, m^2
  double length = 0.9;          // L_OA, m
  double cx = 0.7;
  double cy = 0.7;
  double cn = 0.125;
};

/// Relative-wind angle of attack; 0 for head wind.
double wind_attack_angle(const WindModel& wind, const VesselState& state);

Wrench wind_wrench(const WindModel& wind, const VesselState& state);

/// Two second-order shaping filters (force and moment channel) plus slow drift.
struct WaveModel {
  bool enabled = true;
  double omega_e = 1.2;        // encounter peak frequency, rad/s
  double damping = 0.1;        // lambda_w
  double gain = 0.23;          // K_w
  double drift_sigma = 0.005;  // intensity of the integrated drift noise
  double direction = 0.0;      // beta_wave, rad
  double force_cap = 1.0;      // |F_wave| bound, N
  double moment_scale = 0.2;   // moment channel gain, drift and cap relative to force channel, m

  Eigen::Vector2d force_filter = Eigen::Vector2d::Zero();   // [x_F1, x_F2]
  Eigen::Vector2d moment_filter = Eigen::Vector2d::Zero();  // [x_N1, x_N2]
  double force_drift = 0.0;                                 // d_F
  double moment_drift = 0.0;                                // d_N

  double oscillatory_force() const { return force_filter(1); }
  double oscillatory_moment() const { return moment_filter(1); }
};

/// Advances the wave filters by one Euler-Maruyama step and returns the body wrench.
Wrench wave_step(WaveModel& wave, const VesselState& state, double dt, GaussianSource& noise);

/// Gauss-Markov current speed: V_c_dot + mu_c V_c = w_c.
struct CurrentModel {
  bool enabled = true;
  double mu = 0.05;        // mean-reversion rate, 1/s
  double sigma = 0.03;     // noise intensity
  double direction = 0.0;  // beta_c, rad
  double speed = 0.15;     // V_c state, m/s
  double cap = 0.2;        // V_cap, m/s
  bool clamp = true;       // keep V_c in [0, cap]
};

/// Advances V_c and returns the body-frame current velocity at heading psi.
Vector3<double> current_step(CurrentModel& current, double psi, double dt, GaussianSource& noise);

/// Body-frame current velocity for the present V_c.
Vector3<double> current_velocity(const CurrentModel& current, double psi);

/// Force the current exerts through the vessel's Coriolis and drag operators.
Wrench current_wrench(const ModelParameters& params, const Vector3<double>& v_c);

struct DisturbanceScenario {
  WindModel wind;
  WaveModel wave;
  CurrentModel current;
  std::uint64_t seed = 0;

  static DisturbanceScenario none();
  /// Reads wind.*, wave.*, current.* keys; `disturbance.enabled = false` disables all three.
  static DisturbanceScenario from_config(const KeyValueConfig& cfg);
};

struct DisturbanceSample {
  Wrench wind = Wrench::Zero();
  Wrench wave = Wrench::Zero();
  Wrench current = Wrench::Zero();
  Vector3<double> current_velocity = Vector3<double>::Zero();

  Wrench total() const { return wind + wave + current; }
};

/// Owned per-episode disturbance state; each process draws from its own stream.
class DisturbanceState {
 public:
  explicit DisturbanceState(const DisturbanceScenario& scenario);
  DisturbanceState(const DisturbanceScenario& scenario, std::uint64_t seed);

  /// total_env_wrench: advances every enabled process by dt and sums the contributions.
  DisturbanceSample step(const ModelParameters& params, const VesselState& state, double dt);

  const DisturbanceScenario& scenario() const { return scenario_; }

 private:
  DisturbanceScenario scenario_;
  GaussianSource wave_noise_;
  GaussianSource current_noise_;
};

}  // namespace asv
