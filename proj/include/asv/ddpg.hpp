#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "asv/environment.hpp"
#include "asv/nn/adam.hpp"
#include "asv/nn/checkpoint.hpp"
#include "asv/nn/mlp.hpp"
#include "asv/nn/ou_noise.hpp"
#include "asv/nn/replay_buffer.hpp"

namespace asv {

constexpr int kRecordSize = 16;
constexpr int kActionSize = 4;

enum class ObservationMode : std::uint32_t { relative = 0, absolute = 1 };

std::string to_string(ObservationMode mode);
ObservationMode observation_mode_from_string(const std::string& name);

struct ObservationConfig {
  int history = 4;  // H: previous records kept besides the current one
  ObservationMode mode = ObservationMode::relative;
  double f_max = 4.0;
  double lookahead = 0.9;

  int size() const { return kRecordSize * (history + 1); }
};

/// One 16-value record.
///   relative: [tangent-frame position error (2), heading error, u, v, w,
///              body-frame error to the reference (2), LOS heading error, u_d, v_d, w_d,
///              previous action / f_max (4)]
///   absolute: [q (6), q_d (6), previous action / f_max (4)]
Eigen::VectorXd observation_record(const ObservationConfig& cfg, const VesselState& measured,
                                   const ReferenceSample& ref, const ThrustCommand& prev_action);

/// Sliding window of records, oldest first, zero-padded at episode start.
class ObservationHistory {
 public:
  explicit ObservationHistory(const ObservationConfig& cfg);

  void reset();
  /// Appends the newest record, drops the oldest and returns the flattened window.
  Eigen::VectorXd push(const Eigen::VectorXd& record);
  Eigen::VectorXd flattened() const;
  const ObservationConfig& config() const { return cfg_; }

 private:
  ObservationConfig cfg_;
  std::deque<Eigen::VectorXd> records_;
};

Eigen::VectorXd make_observation(ObservationHistory& history, const VesselState& measured,
                                 const ReferenceSample& ref, const ThrustCommand& prev_action);

/// Policy output in [-1, 1]^4 with optional exploration noise added before the clamp.
Eigen::Vector4d normalized_action(const nn::Mlp& policy, const Eigen::VectorXd& obs,
                                  const Eigen::VectorXd* exploration = nullptr);
/// tanh output scaled to thrust bounds, exploration (normalized units) added pre-clamp.
ThrustCommand act(const nn::Mlp& policy, const Eigen::VectorXd& obs, double f_max,
                  const Eigen::VectorXd* exploration = nullptr);

class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DdpgConfig {
  std::vector<int> hidden = {300, 300};
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  double tau = 0.005;
  double gamma = 0.99;
  int batch_size = 128;
  std::size_t buffer_capacity = 1000000;
  double final_init_range = 3e-3;
  double ou_theta = 0.2;
  double ou_sigma = 0.15;
  int updates_per_step = 1;
  ObservationConfig observation;

  void validate() const;
  static DdpgConfig from_config(const KeyValueConfig& cfg);
};

struct Losses {
  double critic = 0;
  double actor = 0;
};

/// Actor, critic, their targets and optimizer state. Actions are stored normalized to [-1, 1].
class DdpgAgent {
 public:
  DdpgAgent(const DdpgConfig& cfg, std::uint64_t seed);

  Losses train_step(const nn::Batch& batch);

  const DdpgConfig& config() const { return cfg_; }
  nn::Checkpoint checkpoint() const;

  nn::Mlp actor, critic, actor_target, critic_target;
  nn::AdamState actor_adam, critic_adam;

 private:
  DdpgConfig cfg_;
};

/// Stacks observation rows over action rows.
Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action);

enum class EpisodeMode { train, eval };

/// Randomness and storage used by training-mode episodes.
struct TrainingContext {
  nn::ReplayBuffer* buffer = nullptr;
  nn::OuNoise* exploration = nullptr;
  GaussianSource* exploration_source = nullptr;
  GaussianSource* sensor = nullptr;
  Rng* replay_rng = nullptr;
  double measurement_noise_cov = 0.1;
  long updates = 0;
  Losses last_losses;
};

/// Steps env to termination with the agent's actor. Train mode adds measurement and
/// exploration noise, stores transitions and updates once the buffer holds a batch.
EpisodeLog run_episode(TrackingEnv& env, DdpgAgent& agent, const TrajectorySpec& trajectory,
                       const VesselState& initial, std::uint64_t disturbance_seed, EpisodeMode mode,
                       TrainingContext* ctx = nullptr);

/// Deterministic policy rollout behind the Controller interface.
class DrlController : public Controller {
 public:
  DrlController(nn::Mlp policy, ObservationConfig cfg, std::string label = "drl");
  static DrlController from_checkpoint(const nn::Checkpoint& ckpt, double lookahead);

  std::string name() const override { return label_; }
  void reset(const TrackingEnv& env) override;
  ThrustCommand command(const TrackingEnv& env, const VesselState& measured) override;

 private:
  nn::Mlp policy_;
  ObservationHistory history_;
  std::string label_;
};

struct TrainingConfig {
  int episodes = 3000;
  int moving_window = 50;
  int plateau_window = 200;
  double plateau_tolerance = 0.01;
  int plateau_min_episodes = 1000;
  bool fixed_trajectory = false;  // train on `trajectory` instead of the random sampler
  TrajectorySpec trajectory;
  TrainingRanges ranges;
  DdpgConfig ddpg;
  EpisodeConfig episode;
  RewardParams reward;
  ModelParameters model;
  DisturbanceScenario disturbances = DisturbanceScenario::none();

  void validate() const;
  static TrainingConfig from_config(const KeyValueConfig& cfg);
};

struct EpisodeSummary {
  int episode = 0;
  int steps = 0;
  double total_return = 0;
  double mean_e_p = 0;
  Termination terminated_by = Termination::running;
};

struct TrainingResult {
  std::vector<EpisodeSummary> curve;
  nn::Checkpoint best;   // highest moving-average return seen
  nn::Checkpoint last;
  int best_episode = -1;
  double best_moving_average = 0;
  std::string stop_reason;  // budget | plateau | divergence
  std::string diagnostic;
  long updates = 0;
};

struct TrainingHooks {
  std::function<void(const EpisodeSummary&, double moving_average)> on_episode;
  std::optional<std::filesystem::path> checkpoint_path;  // best checkpoint, rewritten on improvement
};

TrainingResult train(const TrainingConfig& cfg, std::uint64_t seed, const TrainingHooks& hooks = {});

double moving_average(const std::vector<EpisodeSummary>& curve, int window);

void write_learning_curve(const std::filesystem::path& path, const std::vector<EpisodeSummary>& curve);

}  // namespace asv
