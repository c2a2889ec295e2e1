#include "asv/ddpg.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace asv {

std::string to_string(ObservationMode mode) {
  return mode == ObservationMode::relative ? "relative" : "absolute";
}

ObservationMode observation_mode_from_string(const std::string& name) {
  if (name == "relative") return ObservationMode::relative;
  if (name == "absolute") return ObservationMode::absolute;
  throw ConfigError("unknown observation mode '" + name + "'");
}

Eigen::VectorXd observation_record(const ObservationConfig& cfg, const VesselState& measured,
                                   const ReferenceSample& ref, const ThrustCommand& prev_action) {
  Eigen::VectorXd r(kRecordSize);
  if (cfg.mode == ObservationMode::absolute) {
    r.head<6>() = measured.q;
    r.segment<6>(6) = ref.as_state();
  } else {
    const Eigen::Vector2d err = measured.position() - ref.position();
    const Eigen::Rotation2Dd to_tangent(-ref.psi), to_body(-measured.psi());
    const double psi_s = sight_heading(ref, measured.position(), cfg.lookahead);
    r.segment<2>(0) = to_tangent * err;
    r(2) = angle_diff(measured.psi(), ref.psi);
    r.segment<3>(3) = measured.velocity();
    r.segment<2>(6) = to_body * (-err);
    r(8) = angle_diff(psi_s, measured.psi());
    r(9) = ref.u;
    r(10) = ref.v;
    r(11) = ref.w;
  }
  r.tail<4>() = prev_action.f / cfg.f_max;
  return r;
}

ObservationHistory::ObservationHistory(const ObservationConfig& cfg) : cfg_(cfg) {
  if (cfg.history < 0) throw ContractViolation("observation history must be >= 0");
  reset();
}

void ObservationHistory::reset() {
  records_.assign(static_cast<std::size_t>(cfg_.history + 1), Eigen::VectorXd::Zero(kRecordSize));
}

Eigen::VectorXd ObservationHistory::push(const Eigen::VectorXd& record) {
  if (record.size() != kRecordSize) throw ContractViolation("observation record must have 16 values");
  records_.pop_front();
  records_.push_back(record);
  return flattened();
}

Eigen::VectorXd ObservationHistory::flattened() const {
  Eigen::VectorXd out(cfg_.size());
  Eigen::Index k = 0;
  for (const auto& r : records_) {
    out.segment(k, kRecordSize) = r;
    k += kRecordSize;
  }
  return out;
}

Eigen::VectorXd make_observation(ObservationHistory& history, const VesselState& measured,
                                 const ReferenceSample& ref, const ThrustCommand& prev_action) {
  return history.push(observation_record(history.config(), measured, ref, prev_action));
}

Eigen::Vector4d normalized_action(const nn::Mlp& policy, const Eigen::VectorXd& obs,
                                  const Eigen::VectorXd* exploration) {
  if (obs.size() != policy.input_size() || policy.output_size() != kActionSize)
    throw ContractViolation("policy shape does not match observation");
  Eigen::Vector4d a = policy.predict(obs).col(0);
  if (exploration) a += *exploration;
  return a.cwiseMax(-1.0).cwiseMin(1.0);
}

ThrustCommand act(const nn::Mlp& policy, const Eigen::VectorXd& obs, double f_max,
                  const Eigen::VectorXd* exploration) {
  return ThrustCommand(f_max * normalized_action(policy, obs, exploration));
}

void DdpgConfig::validate() const {
  if (hidden.empty()) throw ConfigError("ddpg.hidden must list at least one layer");
  for (int h : hidden)
    if (h < 1) throw ConfigError("ddpg.hidden sizes must be positive");
  if (actor_lr < 0 || critic_lr < 0) throw ConfigError("learning rates must be >= 0");
  if (!(tau > 0 && tau <= 1)) throw ConfigError("ddpg.tau must be in (0, 1]");
  if (!(gamma >= 0 && gamma <= 1)) throw ConfigError("ddpg.gamma must be in [0, 1]");
  if (batch_size < 1) throw ConfigError("ddpg.batch_size must be >= 1");
  if (buffer_capacity < static_cast<std::size_t>(batch_size))
    throw ConfigError("ddpg.buffer_capacity must hold at least one batch");
  if (!(ou_theta > 0 && ou_sigma >= 0)) throw ConfigError("OU theta must be > 0 and sigma >= 0");
  if (updates_per_step < 0) throw ConfigError("ddpg.updates_per_step must be >= 0");
  if (observation.history < 0) throw ConfigError("observation.history must be >= 0");
}

namespace {

std::vector<int> parse_sizes(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find_first_of(",x ", pos);
    if (end == std::string::npos) end = text.size();
    if (end > pos) {
      try {
        out.push_back(std::stoi(text.substr(pos, end - pos)));
      } catch (const std::exception&) {
        throw ConfigError("bad layer list '" + text + "'");
      }
    }
    pos = end + 1;
  }
  return out;
}

}  // namespace

DdpgConfig DdpgConfig::from_config(const KeyValueConfig& cfg) {
  DdpgConfig d;
  if (cfg.has("ddpg.hidden")) d.hidden = parse_sizes(cfg.get_string("ddpg.hidden", ""));
  d.actor_lr = cfg.get_double("ddpg.actor_lr", d.actor_lr);
  d.critic_lr = cfg.get_double("ddpg.critic_lr", d.critic_lr);
  d.tau = cfg.get_double("ddpg.tau", d.tau);
  d.gamma = cfg.get_double("ddpg.gamma", d.gamma);
  d.batch_size = static_cast<int>(cfg.get_int("ddpg.batch_size", d.batch_size));
  d.buffer_capacity = static_cast<std::size_t>(cfg.get_int("ddpg.buffer_capacity", static_cast<long>(d.buffer_capacity)));
  d.final_init_range = cfg.get_double("ddpg.final_init_range", d.final_init_range);
  d.ou_theta = cfg.get_double("ddpg.ou_theta", d.ou_theta);
  d.ou_sigma = cfg.get_double("ddpg.ou_sigma", d.ou_sigma);
  d.updates_per_step = static_cast<int>(cfg.get_int("ddpg.updates_per_step", d.updates_per_step));
  d.observation.history = static_cast<int>(cfg.get_int("observation.history", d.observation.history));
  d.observation.mode = observation_mode_from_string(cfg.get_string("observation.mode", "relative"));
  d.observation.f_max = cfg.get_double("f_max", d.observation.f_max);
  d.observation.lookahead = cfg.get_double("guidance.lookahead", d.observation.lookahead);
  d.validate();
  return d;
}

Eigen::MatrixXd critic_input(const Eigen::MatrixXd& obs, const Eigen::MatrixXd& action) {
  Eigen::MatrixXd x(obs.rows() + action.rows(), obs.cols());
  x.topRows(obs.rows()) = obs;
  x.bottomRows(action.rows()) = action;
  return x;
}

DdpgAgent::DdpgAgent(const DdpgConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const int obs = cfg_.observation.size();
  std::vector<int> actor_sizes{obs}, critic_sizes{obs + kActionSize};
  for (int h : cfg_.hidden) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
  }
  actor_sizes.push_back(kActionSize);
  critic_sizes.push_back(1);
  actor = nn::Mlp::initialized(actor_sizes, nn::Activation::tanh, rng, cfg_.final_init_range);
  critic = nn::Mlp::initialized(critic_sizes, nn::Activation::identity, rng, cfg_.final_init_range);
  actor_target = actor;
  critic_target = critic;
  actor_adam = nn::AdamState::zeros_like(actor);
  critic_adam = nn::AdamState::zeros_like(critic);
}

Losses DdpgAgent::train_step(const nn::Batch& batch) {
  const double n = static_cast<double>(batch.size());
  Losses losses;

  const Eigen::MatrixXd next_action = actor_target.predict(batch.next_observation);
  const Eigen::RowVectorXd q_next =
      critic_target.predict(critic_input(batch.next_observation, next_action)).row(0);
  const Eigen::RowVectorXd y =
      batch.reward.array() + cfg_.gamma * (1.0 - batch.done.array()) * q_next.array();

  const Eigen::RowVectorXd q = critic.forward(critic_input(batch.observation, batch.action)).row(0);
  const Eigen::RowVectorXd td = q - y;
  losses.critic = td.squaredNorm() / n;
  if (!std::isfinite(losses.critic)) throw TrainingDivergence("critic loss is not finite");
  const nn::Gradients critic_grads = critic.backward(2.0 / n * td);
  optimizer_step(critic, critic_grads, critic_adam, {cfg_.critic_lr});

  const Eigen::MatrixXd policy_action = actor.forward(batch.observation);
  const Eigen::MatrixXd q_pi = critic.forward(critic_input(batch.observation, policy_action));
  losses.actor = -q_pi.mean();
  if (!std::isfinite(losses.actor)) throw TrainingDivergence("actor loss is not finite");
  const nn::Gradients dq = critic.backward(Eigen::MatrixXd::Constant(1, q_pi.cols(), -1.0 / n), false);
  const nn::Gradients actor_grads = actor.backward(dq.input.bottomRows(kActionSize));
  optimizer_step(actor, actor_grads, actor_adam, {cfg_.actor_lr});

  nn::soft_update(critic_target, critic, cfg_.tau);
  nn::soft_update(actor_target, actor, cfg_.tau);
  return losses;
}

nn::Checkpoint DdpgAgent::checkpoint() const {
  nn::Checkpoint c;
  c.history = static_cast<std::uint32_t>(cfg_.observation.history);
  c.observation_mode = static_cast<std::uint32_t>(cfg_.observation.mode);
  c.f_max = cfg_.observation.f_max;
  c.networks = {{"actor", actor}, {"critic", critic}, {"actor_target", actor_target},
                {"critic_target", critic_target}};
  return c;
}

EpisodeLog run_episode(TrackingEnv& env, DdpgAgent& agent, const TrajectorySpec& trajectory,
                       const VesselState& initial, std::uint64_t disturbance_seed, EpisodeMode mode,
                       TrainingContext* ctx) {
  const bool training = mode == EpisodeMode::train;
  if (training && !(ctx && ctx->buffer && ctx->exploration && ctx->exploration_source && ctx->sensor &&
                    ctx->replay_rng))
    throw ContractViolation("training episode needs a complete TrainingContext");

  const ObservationConfig& ocfg = agent.config().observation;
  env.reset(trajectory, initial, disturbance_seed);
  ObservationHistory history(ocfg);
  if (training) ctx->exploration->reset();

  auto measure = [&] {
    if (!training) return env.state();
    return add_measurement_noise(env.state(), ctx->measurement_noise_cov, *ctx->sensor);
  };

  EpisodeLog log;
  log.steps.reserve(static_cast<std::size_t>(env.episode().max_steps()));
  Eigen::VectorXd obs = make_observation(history, measure(), env.reference(), env.previous_command());
  try {
    while (!env.finished()) {
      Eigen::Vector4d a;
      if (training)
        a = normalized_action(agent.actor, obs, &ou_sample(*ctx->exploration, *ctx->exploration_source));
      else
        a = normalized_action(agent.actor, obs);
      StepRecord rec = env.step(ThrustCommand(ocfg.f_max * a));
      log.total_return += rec.reward.total;
      Eigen::VectorXd next = make_observation(history, measure(), env.reference(), env.previous_command());
      if (training) {
        const bool done = env.termination() == Termination::boundary;
        ctx->buffer->push(obs, rec.cmd.f / ocfg.f_max, rec.reward.total, next, done);
        const auto batch = static_cast<std::size_t>(agent.config().batch_size);
        if (ctx->buffer->size() >= batch) {
          for (int k = 0; k < agent.config().updates_per_step; ++k) {
            ctx->last_losses = agent.train_step(ctx->buffer->sample(batch, *ctx->replay_rng));
            ++ctx->updates;
          }
        }
      }
      log.steps.push_back(std::move(rec));
      obs = std::move(next);
    }
  } catch (const ModelExplosion& e) {
    log.diagnostic = std::string("model explosion at t=") + std::to_string(env.time()) + ": " + e.what();
  }
  log.termination = env.termination();
  return log;
}

DrlController::DrlController(nn::Mlp policy, ObservationConfig cfg, std::string label)
    : policy_(std::move(policy)), history_(cfg), label_(std::move(label)) {
  if (policy_.input_size() != cfg.size() || policy_.output_size() != kActionSize)
    throw ContractViolation("policy shape does not match observation config");
}

DrlController DrlController::from_checkpoint(const nn::Checkpoint& ckpt, double lookahead) {
  ObservationConfig cfg;
  cfg.history = static_cast<int>(ckpt.history);
  if (ckpt.observation_mode > 1) throw nn::CheckpointError("unknown observation mode in checkpoint");
  cfg.mode = static_cast<ObservationMode>(ckpt.observation_mode);
  cfg.f_max = ckpt.f_max;
  cfg.lookahead = lookahead;
  return DrlController(ckpt.network("actor"), cfg);
}

void DrlController::reset(const TrackingEnv&) { history_.reset(); }

ThrustCommand DrlController::command(const TrackingEnv& env, const VesselState& measured) {
  const Eigen::VectorXd obs = make_observation(history_, measured, env.reference(), env.previous_command());
  return act(policy_, obs, history_.config().f_max);
}

void TrainingConfig::validate() const {
  if (episodes < 0) throw ConfigError("train.episodes must be >= 0");
  if (moving_window < 1 || plateau_window < 1) throw ConfigError("train windows must be >= 1");
  if (plateau_tolerance < 0) throw ConfigError("train.plateau_tolerance must be >= 0");
  if (std::abs(ddpg.observation.f_max - model.f_max) > 0) throw ConfigError("observation f_max differs from model f_max");
  ddpg.validate();
  reward.validate();
  if (fixed_trajectory) trajectory.validate();
}

TrainingConfig TrainingConfig::from_config(const KeyValueConfig& cfg) {
  TrainingConfig t;
  t.episodes = static_cast<int>(cfg.get_int("train.episodes", t.episodes));
  t.moving_window = static_cast<int>(cfg.get_int("train.moving_window", t.moving_window));
  t.plateau_window = static_cast<int>(cfg.get_int("train.plateau_window", t.plateau_window));
  t.plateau_tolerance = cfg.get_double("train.plateau_tolerance", t.plateau_tolerance);
  t.plateau_min_episodes = static_cast<int>(cfg.get_int("train.plateau_min_episodes", t.plateau_min_episodes));
  t.fixed_trajectory = cfg.get_bool("train.fixed_trajectory", t.fixed_trajectory);
  if (t.fixed_trajectory) t.trajectory = TrajectorySpec::from_config(cfg, "train.trajectory");
  t.ranges = TrainingRanges::from_config(cfg);
  t.ddpg = DdpgConfig::from_config(cfg);
  t.episode = EpisodeConfig::from_config(cfg);
  t.reward = RewardParams::from_config(cfg);
  t.model = model_parameters_from(cfg);
  if (cfg.get_bool("train.disturbances", false)) t.disturbances = DisturbanceScenario::from_config(cfg);
  t.validate();
  return t;
}

double moving_average(const std::vector<EpisodeSummary>& curve, int window) {
  if (curve.empty()) return 0.0;
  const std::size_t n = std::min(curve.size(), static_cast<std::size_t>(window));
  double sum = 0;
  for (std::size_t i = curve.size() - n; i < curve.size(); ++i) sum += curve[i].total_return;
  return sum / static_cast<double>(n);
}

TrainingResult train(const TrainingConfig& cfg, std::uint64_t seed, const TrainingHooks& hooks) {
  cfg.validate();
  DdpgAgent agent(cfg.ddpg, derive_seed(seed, 1));
  TrackingEnv env(cfg.model, cfg.reward, cfg.episode, cfg.disturbances);

  Rng trajectory_rng(derive_seed(seed, 2));
  Rng initial_rng(derive_seed(seed, 3));
  GaussianSource exploration_source(derive_seed(seed, 4));
  GaussianSource sensor(derive_seed(seed, 5));
  Rng replay_rng(derive_seed(seed, 6));
  nn::ReplayBuffer buffer(cfg.ddpg.buffer_capacity, cfg.ddpg.observation.size(), kActionSize);
  nn::OuNoise exploration(kActionSize, cfg.ddpg.ou_theta, cfg.ddpg.ou_sigma, cfg.episode.dt);

  TrainingContext ctx;
  ctx.buffer = &buffer;
  ctx.exploration = &exploration;
  ctx.exploration_source = &exploration_source;
  ctx.sensor = &sensor;
  ctx.replay_rng = &replay_rng;
  ctx.measurement_noise_cov = cfg.episode.measurement_noise_cov;

  TrainingResult result;
  result.best = agent.checkpoint();
  result.best_moving_average = -std::numeric_limits<double>::infinity();
  result.stop_reason = "budget";
  std::vector<double> ma_history;

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const TrajectorySpec traj = cfg.fixed_trajectory ? cfg.trajectory : training_sampler(cfg.ranges, trajectory_rng);
    const VesselState initial = env.random_initial_state(traj, initial_rng);
    EpisodeLog log;
    try {
      log = run_episode(env, agent, traj, initial, derive_seed(seed, 1000 + static_cast<std::uint64_t>(ep)),
                        EpisodeMode::train, &ctx);
    } catch (const TrainingDivergence& e) {
      result.stop_reason = "divergence";
      result.diagnostic = "episode " + std::to_string(ep) + ", update " + std::to_string(ctx.updates) + ": " + e.what();
      break;
    }

    EpisodeSummary s;
    s.episode = ep;
    s.steps = static_cast<int>(log.steps.size());
    s.total_return = log.total_return;
    s.mean_e_p = log.mean_position_error();
    s.terminated_by = log.termination;
    result.curve.push_back(s);

    const double ma = moving_average(result.curve, cfg.moving_window);
    ma_history.push_back(ma);
    if (hooks.on_episode) hooks.on_episode(s, ma);

    if (static_cast<int>(result.curve.size()) >= cfg.moving_window && ma > result.best_moving_average) {
      result.best_moving_average = ma;
      result.best_episode = ep;
      result.best = agent.checkpoint();
      if (hooks.checkpoint_path) nn::save_checkpoint(*hooks.checkpoint_path, result.best);
    }

    const int n = static_cast<int>(ma_history.size());
    if (n >= cfg.plateau_min_episodes && n > cfg.plateau_window + cfg.moving_window) {
      const double old = ma_history[static_cast<std::size_t>(n - 1 - cfg.plateau_window)];
      if (std::abs(ma - old) <= cfg.plateau_tolerance * std::abs(old)) {
        result.stop_reason = "plateau";
        break;
      }
    }
  }

  // Short runs never fill the averaging window; fall back to the final policy.
  if (result.best_episode < 0) {
    result.best = agent.checkpoint();
    result.best_moving_average = moving_average(result.curve, cfg.moving_window);
    if (hooks.checkpoint_path) nn::save_checkpoint(*hooks.checkpoint_path, result.best);
  }
  result.last = agent.checkpoint();
  result.updates = ctx.updates;
  return result;
}

void write_learning_curve(const std::filesystem::path& path, const std::vector<EpisodeSummary>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "episode,steps,return,mean_e_p,terminated_by\n" << std::setprecision(17);
  for (const auto& s : curve)
    out << s.episode << ',' << s.steps << ',' << s.total_return << ',' << s.mean_e_p << ','
        << to_string(s.terminated_by) << '\n';
}

}  // namespace asv
