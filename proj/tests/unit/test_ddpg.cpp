#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "asv/ddpg.hpp"
#include "support.hpp"

using namespace asv;
using asv::testing::Gen;

namespace {

DdpgConfig small_config() {
  DdpgConfig c;
  c.hidden = {16, 16};
  c.batch_size = 8;
  c.buffer_capacity = 10000;
  return c;
}

nn::Batch random_batch(Gen& g, int obs_dim, int n) {
  nn::Batch b;
  b.observation = Eigen::MatrixXd(obs_dim, n);
  b.next_observation = Eigen::MatrixXd(obs_dim, n);
  b.action = Eigen::MatrixXd(kActionSize, n);
  b.reward = Eigen::RowVectorXd(n);
  b.done = Eigen::RowVectorXd::Zero(n);
  for (Eigen::Index i = 0; i < b.observation.size(); ++i) b.observation.data()[i] = g.normal();
  for (Eigen::Index i = 0; i < b.next_observation.size(); ++i) b.next_observation.data()[i] = g.normal();
  for (Eigen::Index i = 0; i < b.action.size(); ++i) b.action.data()[i] = g.uniform(-1, 1);
  for (int i = 0; i < n; ++i) b.reward(i) = g.uniform(-2, 1);
  return b;
}

Eigen::VectorXd all_parameters(const DdpgAgent& a) {
  const Eigen::VectorXd p1 = a.actor.parameter_vector(), p2 = a.critic.parameter_vector();
  const Eigen::VectorXd p3 = a.actor_target.parameter_vector(), p4 = a.critic_target.parameter_vector();
  Eigen::VectorXd out(p1.size() + p2.size() + p3.size() + p4.size());
  out << p1, p2, p3, p4;
  return out;
}

class ConstantThrust : public Controller {
 public:
  explicit ConstantThrust(ThrustCommand cmd) : cmd_(cmd) {}
  std::string name() const override { return "constant"; }
  void reset(const TrackingEnv&) override {}
  ThrustCommand command(const TrackingEnv&, const VesselState&) override { return cmd_; }

 private:
  ThrustCommand cmd_;
};

EpisodeConfig quiet_episode(double t_max = 30.0) {
  EpisodeConfig e;
  e.t_max = t_max;
  e.measurement_noise_cov = 0.0;
  return e;
}

}  // namespace

TEST(Observation, ZeroHistoryIsCurrentRecord) {
  ObservationConfig cfg;
  cfg.history = 0;
  ObservationHistory h(cfg);
  ReferenceSample ref;
  ref.x = 1;
  ref.u = 0.3;
  const VesselState s(0.5, 0.2, 0.1, 0.2, 0, 0);
  const Eigen::VectorXd obs = make_observation(h, s, ref, ThrustCommand(1, 2, 3, 4));
  EXPECT_EQ(obs.size(), kRecordSize);
  EXPECT_EQ(obs, observation_record(cfg, s, ref, ThrustCommand(1, 2, 3, 4)));
  EXPECT_TRUE(obs.tail<4>().isApprox(Eigen::Vector4d(0.25, 0.5, 0.75, 1.0)));
}

TEST(Observation, FirstStepPadsOlderSlotsWithZeros) {
  ObservationConfig cfg;
  ObservationHistory h(cfg);
  ReferenceSample ref;
  ref.u = 0.3;
  const Eigen::VectorXd obs = make_observation(h, VesselState(0.1, 0.1, 0.3, 0.2), ref, ThrustCommand(1, 0, 0, 0));
  ASSERT_EQ(obs.size(), 80);
  EXPECT_TRUE(obs.head(64).isZero(0));
  EXPECT_FALSE(obs.tail(16).isZero(0));
}

TEST(Observation, WindowShiftsOldestFirst) {
  ObservationConfig cfg;
  cfg.history = 2;
  ObservationHistory h(cfg);
  for (int k = 1; k <= 4; ++k) h.push(Eigen::VectorXd::Constant(kRecordSize, k));
  const Eigen::VectorXd obs = h.flattened();
  EXPECT_EQ(obs(0), 2.0);
  EXPECT_EQ(obs(16), 3.0);
  EXPECT_EQ(obs(32), 4.0);
  EXPECT_THROW(h.push(Eigen::VectorXd::Zero(3)), ContractViolation);
}

TEST(Observation, RelativeEncodingIsTranslationInvariant) {
  Gen g(61);
  ObservationConfig cfg;
  for (int i = 0; i < 5000; ++i) {
    const VesselState s = g.state(3, 1);
    ReferenceSample ref;
    ref.x = g.uniform(-3, 3);
    ref.y = g.uniform(-3, 3);
    ref.psi = ref.tangent = g.angle();
    ref.u = g.uniform(0, 1);
    ref.w = g.uniform(-0.3, 0.3);
    const ThrustCommand prev = g.thrust();
    const Eigen::VectorXd a = observation_record(cfg, s, ref, prev);
    const double dx = g.uniform(-500, 500), dy = g.uniform(-500, 500);
    VesselState s2 = s;
    s2.q(0) += dx;
    s2.q(1) += dy;
    ReferenceSample ref2 = ref;
    ref2.x += dx;
    ref2.y += dy;
    ASSERT_LT((a - observation_record(cfg, s2, ref2, prev)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Observation, RelativeRecordGeometry) {
  ObservationConfig cfg;
  ReferenceSample ref;
  ref.psi = ref.tangent = std::numbers::pi / 2;  // moving north
  const VesselState s(-0.2, 0.1, std::numbers::pi / 2);  // 0.2 m left of the path, 0.1 m ahead
  const Eigen::VectorXd r = observation_record(cfg, s, ref, ThrustCommand());
  EXPECT_NEAR(r(0), 0.1, 1e-12);   // along-track
  EXPECT_NEAR(r(1), 0.2, 1e-12);   // cross-track, positive to the left
  EXPECT_NEAR(r(2), 0.0, 1e-12);
  EXPECT_NEAR(r(6), -0.1, 1e-12);  // reference is behind the bow
  EXPECT_NEAR(r(7), -0.2, 1e-12);  // and to starboard
}

TEST(Observation, AbsoluteModeCarriesRawStates) {
  ObservationConfig cfg;
  cfg.mode = ObservationMode::absolute;
  ReferenceSample ref;
  ref.x = 4;
  ref.y = 5;
  ref.psi = 0.6;
  ref.u = 0.3;
  const VesselState s(1, 2, 0.3, 0.4, 0.5, 0.6);
  const Eigen::VectorXd r = observation_record(cfg, s, ref, ThrustCommand(4, 4, 4, 4));
  EXPECT_EQ(r.head<6>(), s.q);
  EXPECT_EQ(r.segment<6>(6), ref.as_state());
  EXPECT_TRUE(r.tail<4>().isOnes());
  EXPECT_EQ(observation_mode_from_string("absolute"), ObservationMode::absolute);
  EXPECT_THROW(observation_mode_from_string("polar"), ConfigError);
}

TEST(Act, ZeroPolicyGivesZeroThrust) {
  nn::Mlp zero({80, 8, 4}, nn::Activation::tanh);
  EXPECT_TRUE(act(zero, Eigen::VectorXd::Ones(80), 4.0).f.isZero(0));
}

TEST(Act, ExplorationSaturatesAtBounds) {
  nn::Mlp zero({80, 8, 4}, nn::Activation::tanh);
  const Eigen::VectorXd push = Eigen::Vector4d(1.2, -1.2, 0.5, -0.25);
  const ThrustCommand c = act(zero, Eigen::VectorXd::Zero(80), 4.0, &push);
  EXPECT_TRUE(c.f.isApprox(Eigen::Vector4d(4, -4, 2, -1)));
}

TEST(Act, DeterministicWithoutExploration) {
  DdpgAgent agent(small_config(), 3);
  Gen g(62);
  const Eigen::VectorXd obs = g.vector(80, -1, 1);
  EXPECT_EQ(act(agent.actor, obs, 4.0).f, act(agent.actor, obs, 4.0).f);
  EXPECT_THROW(act(agent.actor, Eigen::VectorXd::Zero(79), 4.0), ContractViolation);
}

TEST(TrainStep, GammaZeroCriticRegressesReward) {
  DdpgConfig cfg = small_config();
  cfg.gamma = 0;
  cfg.hidden = {32, 32};
  DdpgAgent agent(cfg, 4);
  Gen g(63);
  const nn::Batch batch = random_batch(g, cfg.observation.size(), 10);
  Losses l;
  for (int k = 0; k < 3000; ++k) l = agent.train_step(batch);
  const Eigen::RowVectorXd q = agent.critic.predict(critic_input(batch.observation, batch.action)).row(0);
  EXPECT_LT((q - batch.reward).cwiseAbs().maxCoeff(), 0.02);
  EXPECT_LT(l.critic, 1e-4);
}

TEST(TrainStep, TerminalTransitionsIgnoreNextState) {
  DdpgConfig cfg = small_config();
  Gen g(64);
  nn::Batch a = random_batch(g, cfg.observation.size(), 8);
  a.done.setOnes();
  nn::Batch b = a;
  b.next_observation *= -7.0;
  DdpgAgent x(cfg, 5), y(cfg, 5);
  for (int k = 0; k < 5; ++k) {
    x.train_step(a);
    y.train_step(b);
  }
  EXPECT_EQ(all_parameters(x), all_parameters(y));
  // Without the terminal flag the next state matters.
  a.done.setZero();
  b.done.setZero();
  DdpgAgent u(cfg, 5), v(cfg, 5);
  u.train_step(a);
  v.train_step(b);
  EXPECT_NE(u.critic.parameter_vector(), v.critic.parameter_vector());
}

TEST(TrainStep, ZeroLearningRatesIsNullUpdate) {
  DdpgConfig cfg = small_config();
  cfg.actor_lr = 0;
  cfg.critic_lr = 0;
  DdpgAgent agent(cfg, 6);
  const Eigen::VectorXd before = all_parameters(agent);
  Gen g(65);
  const Losses l = agent.train_step(random_batch(g, cfg.observation.size(), 8));
  EXPECT_EQ(all_parameters(agent), before);
  EXPECT_TRUE(std::isfinite(l.critic));
  EXPECT_TRUE(std::isfinite(l.actor));
}

TEST(TrainStep, TargetsAreExponentialMovingAverage) {
  DdpgConfig cfg = small_config();
  cfg.tau = 0.1;
  DdpgAgent agent(cfg, 7);
  Eigen::VectorXd ema_actor = agent.actor_target.parameter_vector();
  Eigen::VectorXd ema_critic = agent.critic_target.parameter_vector();
  Gen g(66);
  for (int k = 0; k < 10; ++k) {
    agent.train_step(random_batch(g, cfg.observation.size(), 8));
    ema_actor = cfg.tau * agent.actor.parameter_vector() + (1 - cfg.tau) * ema_actor;
    ema_critic = cfg.tau * agent.critic.parameter_vector() + (1 - cfg.tau) * ema_critic;
  }
  EXPECT_LT((agent.actor_target.parameter_vector() - ema_actor).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((agent.critic_target.parameter_vector() - ema_critic).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TrainStep, NonFiniteLossIsDivergence) {
  DdpgConfig cfg = small_config();
  DdpgAgent agent(cfg, 8);
  Gen g(67);
  nn::Batch b = random_batch(g, cfg.observation.size(), 8);
  b.reward(0) = 1e200;
  EXPECT_THROW(agent.train_step(b), TrainingDivergence);
}

TEST(TrainStep, ActorStepIncreasesCriticValue) {
  // With a frozen critic a small actor step must not lower mean Q(s, pi(s)).
  DdpgConfig cfg = small_config();
  cfg.critic_lr = 0;
  cfg.actor_lr = 1e-3;
  DdpgAgent agent(cfg, 9);
  Gen g(68);
  const nn::Batch b = random_batch(g, cfg.observation.size(), 32);
  auto value = [&] {
    return agent.critic.predict(critic_input(b.observation, agent.actor.predict(b.observation))).mean();
  };
  const double before = value();
  for (int k = 0; k < 20; ++k) agent.train_step(b);
  EXPECT_GT(value(), before);
}

TEST(Config, ParsesHiddenAndValidates) {
  const auto c = DdpgConfig::from_config(KeyValueConfig::parse("ddpg.hidden = 64,32\nddpg.gamma = 0.9\n"));
  EXPECT_EQ(c.hidden, (std::vector<int>{64, 32}));
  EXPECT_EQ(c.gamma, 0.9);
  EXPECT_THROW(DdpgConfig::from_config(KeyValueConfig::parse("ddpg.tau = 0\n")), ConfigError);
  EXPECT_THROW(DdpgConfig::from_config(KeyValueConfig::parse("ddpg.hidden = a,b\n")), ConfigError);
  EXPECT_THROW(DdpgConfig::from_config(KeyValueConfig::parse("ddpg.batch_size = 10\nddpg.buffer_capacity = 5\n")),
               ConfigError);
}

TEST(Episode, ZeroThrustDriftsOutAndEndsWithPenalty) {
  DdpgConfig cfg = small_config();
  DdpgAgent agent(cfg, 10);
  agent.actor.set_parameter_vector(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(agent.actor.parameter_count())));
  TrackingEnv env(ModelParameters{}, RewardParams{}, quiet_episode(), DisturbanceScenario::none());
  TrajectorySpec line;
  line.kind = TrajectoryKind::line;
  line.speed = 0.3;
  const EpisodeLog log = run_episode(env, agent, line, VesselState(), 1, EpisodeMode::eval);
  EXPECT_EQ(log.termination, Termination::boundary);
  EXPECT_LT(log.steps.size(), 300u);
  EXPECT_EQ(log.steps.back().reward.total, -25.0);
  // 1 m gap opens at 0.3 m/s: the boundary is crossed on the first step past t = 3.33 s.
  EXPECT_EQ(log.steps.size(), 34u);
}

TEST(Episode, MatchedOpenLoopThrustRunsFullEpisode) {
  TrackingEnv env(ModelParameters{}, RewardParams{}, quiet_episode(), DisturbanceScenario::none());
  TrajectorySpec line;
  line.kind = TrajectoryKind::line;
  line.speed = 0.3;
  ConstantThrust ctl(ThrustCommand(0.9, 0.9, 0, 0));  // d11 u / 2 per surge thruster
  const EpisodeLog log = run_closed_loop(env, ctl, line, TrackingEnv::on_reference(line), 1);
  EXPECT_EQ(log.termination, Termination::time_limit);
  EXPECT_EQ(log.steps.size(), 300u);
  EXPECT_LT(log.steps.back().reward.e_p, 1e-9);
}

TEST(Episode, EvalModeIsNoiseFreeAndDoesNotStore) {
  DdpgConfig cfg = small_config();
  DdpgAgent agent(cfg, 11);
  TrackingEnv env(ModelParameters{}, RewardParams{}, quiet_episode(5.0), DisturbanceScenario());
  TrajectorySpec s;
  nn::ReplayBuffer buffer(1000, cfg.observation.size(), kActionSize);
  TrainingContext ctx;
  ctx.buffer = &buffer;
  const EpisodeLog a = run_episode(env, agent, s, TrackingEnv::on_reference(s), 5, EpisodeMode::eval, &ctx);
  const EpisodeLog b = run_episode(env, agent, s, TrackingEnv::on_reference(s), 5, EpisodeMode::eval, &ctx);
  EXPECT_EQ(buffer.size(), 0u);
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    ASSERT_EQ(a.steps[i].state.q, b.steps[i].state.q);
    ASSERT_EQ(a.steps[i].cmd.f, b.steps[i].cmd.f);
  }
}

TEST(Episode, TrainModeNeedsContext) {
  DdpgAgent agent(small_config(), 12);
  TrackingEnv env(ModelParameters{}, RewardParams{}, quiet_episode(), DisturbanceScenario::none());
  EXPECT_THROW(run_episode(env, agent, TrajectorySpec{}, VesselState(), 1, EpisodeMode::train), ContractViolation);
}

TEST(Episode, StoredRewardsMatchRecomputation) {
  DdpgConfig cfg = small_config();
  cfg.batch_size = 16;
  DdpgAgent agent(cfg, 13);
  EpisodeConfig ep = quiet_episode(10.0);
  TrackingEnv env(ModelParameters{}, RewardParams{}, ep, DisturbanceScenario());
  nn::ReplayBuffer buffer(10000, cfg.observation.size(), kActionSize);
  nn::OuNoise ou;
  GaussianSource explore(1), sensor(2);
  Rng replay(3);
  TrainingContext ctx;
  ctx.buffer = &buffer;
  ctx.exploration = &ou;
  ctx.exploration_source = &explore;
  ctx.sensor = &sensor;
  ctx.replay_rng = &replay;
  TrajectorySpec s;
  const EpisodeLog log = run_episode(env, agent, s, TrackingEnv::on_reference(s), 9, EpisodeMode::train, &ctx);
  ASSERT_EQ(buffer.size(), log.steps.size());
  EXPECT_GT(ctx.updates, 0);
  ThrustCommand prev;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const StepRecord& r = log.steps[i];
    const RewardBreakdown again = total_reward(r.state, r.ref, r.psi_s, r.cmd, prev, RewardParams{});
    ASSERT_EQ(buffer.at(i).reward, again.total) << i;
    ASSERT_EQ(buffer.at(i).reward, r.reward.total);
    ASSERT_TRUE(buffer.at(i).action.isApprox(r.cmd.f / 4.0));
    ASSERT_LE(buffer.at(i).action.cwiseAbs().maxCoeff(), 1.0);
    ASSERT_EQ(buffer.at(i).done, r.reward.out_of_bounds);
    prev = r.cmd;
  }
  if (log.termination == Termination::boundary) {
    EXPECT_EQ(log.steps.back().reward.total, -25.0);
  }
}

TEST(Train, ZeroBudgetReturnsInitialPolicy) {
  TrainingConfig cfg;
  cfg.episodes = 0;
  cfg.ddpg = small_config();
  const TrainingResult r = train(cfg, 21);
  EXPECT_TRUE(r.curve.empty());
  const DdpgAgent fresh(cfg.ddpg, derive_seed(21, 1));
  EXPECT_EQ(r.best.network("actor").parameter_vector(), fresh.actor.parameter_vector());
  EXPECT_EQ(r.stop_reason, "budget");
}

TEST(Train, SeededRunsAreIdentical) {
  TrainingConfig cfg;
  cfg.episodes = 6;
  cfg.moving_window = 3;
  cfg.ddpg = small_config();
  cfg.episode.t_max = 5.0;
  auto a = train(cfg, 22), b = train(cfg, 22), c = train(cfg, 23);
  ASSERT_EQ(a.curve.size(), 6u);
  bool differs = false;
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    ASSERT_EQ(a.curve[i].total_return, b.curve[i].total_return);
    ASSERT_EQ(a.curve[i].steps, b.curve[i].steps);
    differs = differs || a.curve[i].total_return != c.curve[i].total_return;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(nn::encode_checkpoint(a.last), nn::encode_checkpoint(b.last));
  EXPECT_GE(a.best_episode, 2);
}

TEST(Train, MovingAverageWindow) {
  std::vector<EpisodeSummary> curve(5);
  for (int i = 0; i < 5; ++i) curve[i].total_return = i;
  EXPECT_DOUBLE_EQ(moving_average(curve, 2), 3.5);
  EXPECT_DOUBLE_EQ(moving_average(curve, 50), 2.0);
  EXPECT_DOUBLE_EQ(moving_average({}, 50), 0.0);
}

TEST(Train, ConfigRejectsMismatchedThrustBound) {
  TrainingConfig cfg;
  cfg.ddpg.observation.f_max = 5.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Controller, CheckpointShapesChecked) {
  DdpgAgent agent(small_config(), 14);
  const auto ctl = DrlController::from_checkpoint(agent.checkpoint(), 0.9);
  EXPECT_EQ(ctl.name(), "drl");
  ObservationConfig other;
  other.history = 2;
  EXPECT_THROW(DrlController(agent.actor, other), ContractViolation);
}
