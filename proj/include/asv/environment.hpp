#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "asv/config.hpp"
#include "asv/disturbances.hpp"
#include "asv/dynamics.hpp"
#include "asv/reward.hpp"
#include "asv/trajectory.hpp"

namespace asv {

ModelParameters model_parameters_from(const KeyValueConfig& cfg);

struct EpisodeConfig {
  double dt = 0.1;                       // s
  double t_max = 30.0;                   // s
  double measurement_noise_cov = 0.1;    // diagonal covariance of the measured-state noise
  double init_radius = 0.3;              // m, initial position disc around the reference
  bool random_heading = true;            // initial heading drawn around the path tangent
  double heading_spread = 3.141592653589793;  // rad, half-width of that draw
  double lookahead = 0.9;                // LOS lookahead L, m

  int max_steps() const;
  static EpisodeConfig from_config(const KeyValueConfig& cfg);
};

enum class Termination { running, time_limit, boundary, model_explosion };
std::string to_string(Termination t);

/// One simulated control period: everything at the end of the step plus the command held over it.
struct StepRecord {
  double t = 0;
  VesselState state;
  ReferenceSample ref;
  double psi_s = 0;
  ThrustCommand cmd;
  RewardBreakdown reward;
  Wrench tau_env = Wrench::Zero();
};

/// Simulator for one tracking episode: plant, disturbances, reference and reward.
class TrackingEnv {
 public:
  TrackingEnv(ModelParameters params, RewardParams reward, EpisodeConfig episode,
              DisturbanceScenario disturbances);

  void reset(const TrajectorySpec& trajectory, const VesselState& initial, std::uint64_t disturbance_seed);

  /// Start pose in a disc around the reference start, heading random or tangent-aligned.
  VesselState random_initial_state(const TrajectorySpec& trajectory, Rng& rng) const;
  /// Start exactly on the reference at its desired velocity.
  static VesselState on_reference(const TrajectorySpec& trajectory);

  /// Saturates and applies cmd for one control period.
  StepRecord step(const ThrustCommand& cmd);

  double time() const { return t_; }
  int steps_taken() const { return steps_; }
  const VesselState& state() const { return state_; }
  const ThrustCommand& previous_command() const { return prev_cmd_; }
  ReferenceSample reference() const { return sample(trajectory_, t_); }
  ReferenceSample reference_at(double t) const;
  const TrajectorySpec& trajectory() const { return trajectory_; }
  Termination termination() const { return termination_; }
  bool finished() const { return termination_ != Termination::running; }

  const ModelParameters& params() const { return params_; }
  const RewardParams& reward_params() const { return reward_; }
  const EpisodeConfig& episode() const { return episode_; }

 private:
  ModelParameters params_;
  RewardParams reward_;
  EpisodeConfig episode_;
  DisturbanceScenario scenario_;
  std::optional<DisturbanceState> disturbance_;
  TrajectorySpec trajectory_;
  VesselState state_;
  ThrustCommand prev_cmd_;
  double t_ = 0;
  int steps_ = 0;
  int max_steps_ = 0;
  Termination termination_ = Termination::running;
};

/// Adds N(0, cov I6) to a state, re-wrapping the heading.
VesselState add_measurement_noise(const VesselState& s, double cov, GaussianSource& noise);

/// Feedback law driven by (possibly noisy) state measurements.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual void reset(const TrackingEnv& env) = 0;
  virtual ThrustCommand command(const TrackingEnv& env, const VesselState& measured) = 0;
};

struct EpisodeLog {
  std::vector<StepRecord> steps;
  Termination termination = Termination::running;
  double total_return = 0;
  std::string diagnostic;

  double mean_position_error() const;
};

/// Runs one closed-loop episode to termination. measurement_noise_cov = 0 gives exact feedback.
EpisodeLog run_closed_loop(TrackingEnv& env, Controller& controller, const TrajectorySpec& trajectory,
                           const VesselState& initial, std::uint64_t seed,
                           double measurement_noise_cov = 0.0);

}  // namespace asv
