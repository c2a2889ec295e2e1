#include <cmath>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "asv/trajectory.hpp"
#include "support.hpp"

using namespace asv;
using asv::testing::Gen;

namespace {

TrajectorySpec random_spec(Gen& g) {
  TrajectorySpec s;
  s.kind = static_cast<TrajectoryKind>(g.integer(0, 2));
  s.amplitude = g.uniform(0, 2);
  s.period = g.uniform(3, 12);
  s.speed = g.uniform(0.1, 0.8);
  s.duration = 30;
  s.phase = g.angle();
  s.x0 = g.uniform(-10, 10);
  s.y0 = g.uniform(-10, 10);
  s.heading = g.angle();
  s.radius = g.uniform(1, 5) * (g.integer(0, 1) ? 1 : -1);
  return s;
}

}  // namespace

TEST(Sample, LineAdvancesAlongHeading) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::line;
  s.speed = 0.4;
  s.heading = 0.6;
  s.x0 = 1;
  s.y0 = -2;
  for (double t : {0.0, 1.0, 7.5, 30.0}) {
    const auto r = sample(s, t);
    EXPECT_NEAR(r.x, 1 + 0.4 * t * std::cos(0.6), 1e-12);
    EXPECT_NEAR(r.y, -2 + 0.4 * t * std::sin(0.6), 1e-12);
    EXPECT_DOUBLE_EQ(r.w, 0.0);
    EXPECT_NEAR(r.u, 0.4, 1e-15);
    EXPECT_DOUBLE_EQ(r.v, 0.0);
  }
}

TEST(Sample, SinusoidInflectionFlipsTurnRate) {
  TrajectorySpec s;  // A=1, period 8, speed 0.3: inflection where along = 4 m
  const double t_inflect = 4.0 / 0.3;
  const auto before = sample(s, t_inflect - 0.05);
  const auto at = sample(s, t_inflect);
  const auto after = sample(s, t_inflect + 0.05);
  EXPECT_LT(before.w * after.w, 0.0);
  EXPECT_NEAR(at.w, 0.0, 1e-12);
  EXPECT_LT(std::abs(angle_diff(after.psi, before.psi)), 0.01);
}

TEST(Sample, SinusoidTurnRateMatchesCurvatureOracle) {
  // Curvature of y = A sin(k x): kappa = -A k^2 sin / (1 + (A k cos)^2)^(3/2); w = kappa * path speed.
  TrajectorySpec s;
  s.amplitude = 1.3;
  s.period = 6.0;
  s.speed = 0.35;
  const double k = 2 * std::numbers::pi / s.period;
  for (double t = 0; t <= 30; t += 0.7) {
    const double x = s.speed * t;
    const double slope = s.amplitude * k * std::cos(k * x);
    const double kappa = -s.amplitude * k * k * std::sin(k * x) / std::pow(1 + slope * slope, 1.5);
    const double path_speed = s.speed * std::sqrt(1 + slope * slope);
    const auto r = sample(s, t);
    ASSERT_NEAR(r.w, kappa * path_speed, 1e-12);
    ASSERT_NEAR(r.u, path_speed, 1e-12);
    ASSERT_NEAR(r.psi, std::atan(slope), 1e-12);
  }
}

TEST(Sample, FiniteDifferenceVelocityAgrees) {
  Gen g(31);
  const double h = 1e-3;
  for (int trial = 0; trial < 200; ++trial) {
    const TrajectorySpec s = random_spec(g);
    const double t = g.uniform(h, s.duration - h);
    const auto r = sample(s, t);
    const auto a = sample(s, t - h), b = sample(s, t + h);
    const Eigen::Vector2d fd((b.x - a.x) / (2 * h), (b.y - a.y) / (2 * h));
    const Eigen::Vector2d body(r.u, r.v);
    const Eigen::Vector2d inertial = Eigen::Rotation2Dd(r.psi) * body;
    ASSERT_LT((fd - inertial).cwiseAbs().maxCoeff(), 1e-3) << to_string(s.kind);
    const double fd_w = angle_diff(b.psi, a.psi) / (2 * h);
    ASSERT_NEAR(fd_w, r.w, 1e-3) << to_string(s.kind);
  }
}

TEST(Sample, ContinuousInTime) {
  Gen g(32);
  for (int trial = 0; trial < 1000; ++trial) {
    const TrajectorySpec s = random_spec(g);
    const double t = g.uniform(0, s.duration - 1e-6);
    const auto a = sample(s, t), b = sample(s, t + 1e-6);
    const double dist = std::hypot(b.x - a.x, b.y - a.y);
    ASSERT_LE(dist, 1e-6 * (a.u + 1e-3) * 1.01);
  }
}

TEST(Sample, HeadingWrappedAndFinite) {
  Gen g(33);
  for (int trial = 0; trial < 2000; ++trial) {
    const TrajectorySpec s = random_spec(g);
    const auto r = sample(s, g.uniform(0, s.duration));
    ASSERT_GT(r.psi, -std::numbers::pi);
    ASSERT_LE(r.psi, std::numbers::pi);
    ASSERT_TRUE(r.as_state().allFinite());
  }
}

TEST(Sample, OutOfRangeThrows) {
  TrajectorySpec s;
  EXPECT_THROW(sample(s, -0.1), DomainError);
  EXPECT_THROW(sample(s, s.duration + 0.1), DomainError);
}

TEST(Sample, CCurveHasConstantTurnRate) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::c_curve;
  s.radius = 2.5;
  s.speed = 0.5;
  for (double t = 0; t <= 30; t += 1.3) {
    const auto r = sample(s, t);
    ASSERT_NEAR(r.w, 0.2, 1e-12);
    ASSERT_NEAR(std::hypot(r.x, r.y - 2.5), 2.5, 1e-12);
  }
}

TEST(Spec, ValidationRejectsBadValues) {
  TrajectorySpec s;
  s.speed = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = TrajectorySpec{};
  s.amplitude = -1;
  EXPECT_THROW(s.validate(), ConfigError);
  s = TrajectorySpec{};
  s.duration = 0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Spec, FromConfigPrefix) {
  const auto cfg = KeyValueConfig::parse("t.kind = line\nt.speed = 0.25\nt.heading_deg = 90\n");
  const auto s = TrajectorySpec::from_config(cfg, "t");
  EXPECT_EQ(s.kind, TrajectoryKind::line);
  EXPECT_DOUBLE_EQ(s.speed, 0.25);
  EXPECT_NEAR(s.heading, std::numbers::pi / 2, 1e-15);
  EXPECT_THROW(TrajectorySpec::from_config(KeyValueConfig::parse("trajectory.kind = spiral\n")), ConfigError);
}

TEST(Table, InterpolatesBetweenRows) {
  const auto dir = asv::testing::scratch_dir("table");
  const auto path = dir / "ref.csv";
  std::ofstream(path) << "t,x_d,y_d,psi_d,u_d,v_d,w_d\n0,0,0,0,0.2,0,0\n1,0.2,0,0,0.4,0,0.1\n";
  TrajectorySpec s;
  s.kind = TrajectoryKind::table;
  s.table = std::make_shared<ReferenceTable>(ReferenceTable::load_csv(path));
  const auto r = sample(s, 0.5);
  EXPECT_NEAR(r.x, 0.1, 1e-15);
  EXPECT_NEAR(r.u, 0.3, 1e-15);
  EXPECT_NEAR(r.w, 0.05, 1e-15);
  EXPECT_THROW(sample(s, 1.5), DomainError);
}

TEST(SightHeading, OnStraightPathEqualsTangent) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::line;
  s.heading = 0.8;
  const auto r = sample(s, 5);
  EXPECT_NEAR(angle_diff(sight_heading(s, 5, r.position(), 0.9), 0.8), 0.0, 1e-12);
}

TEST(SightHeading, LeftOffsetByLookaheadIsFortyFiveDegrees) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::line;
  s.heading = 0.3;
  const double L = 0.9;
  const auto r = sample(s, 4);
  const Eigen::Vector2d left(-std::sin(0.3), std::cos(0.3));
  const double psi_s = sight_heading(s, 4, r.position() + L * left, L);
  EXPECT_NEAR(angle_diff(psi_s, 0.3 - std::numbers::pi / 4), 0.0, 1e-12);
}

TEST(SightHeading, LongLookaheadApproachesTangent) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::line;
  s.heading = -1.0;
  const auto r = sample(s, 2);
  const Eigen::Vector2d off = r.position() + Eigen::Vector2d(3, -4);
  EXPECT_LT(std::abs(angle_diff(sight_heading(s, 2, off, 1e9), -1.0)), 1e-8);
}

TEST(SightHeading, DegenerateFallsBackToTangent) {
  ReferenceSample r;
  r.tangent = 1.1;
  const Eigen::Vector2d at_sight = r.position() + 0.9 * Eigen::Vector2d(std::cos(1.1), std::sin(1.1));
  EXPECT_NEAR(sight_heading(r, at_sight, 0.9), 1.1, 1e-12);
  EXPECT_THROW(sight_heading(r, Eigen::Vector2d::Zero(), 0.0), std::invalid_argument);
}

TEST(SightHeading, ZeroCrossTrackOnAnyPath) {
  Gen g(34);
  for (int trial = 0; trial < 5000; ++trial) {
    const TrajectorySpec s = random_spec(g);
    const double t = g.uniform(0, s.duration);
    const auto r = sample(s, t);
    ASSERT_LT(std::abs(angle_diff(sight_heading(r, r.position(), g.uniform(0.1, 3)), r.tangent)), 1e-9);
  }
}

TEST(SightHeading, TranslationInvariant) {
  Gen g(35);
  for (int trial = 0; trial < 5000; ++trial) {
    TrajectorySpec s = random_spec(g);
    const double t = g.uniform(0, s.duration);
    const Eigen::Vector2d pos(g.uniform(-20, 20), g.uniform(-20, 20));
    const Eigen::Vector2d shift(g.uniform(-100, 100), g.uniform(-100, 100));
    const double L = g.uniform(0.2, 2);
    const double a = sight_heading(s, t, pos, L);
    s.x0 += shift.x();
    s.y0 += shift.y();
    const double b = sight_heading(s, t, pos + shift, L);
    ASSERT_LT(std::abs(angle_diff(a, b)), 1e-9);
  }
}

TEST(Sampler, DeterministicUnderSeed) {
  TrainingRanges ranges;
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    const auto x = training_sampler(ranges, a), y = training_sampler(ranges, b);
    ASSERT_EQ(x.amplitude, y.amplitude);
    ASSERT_EQ(x.period, y.period);
    ASSERT_EQ(x.speed, y.speed);
  }
}

TEST(Sampler, DrawsStayInRange) {
  TrainingRanges ranges;
  Rng rng(6);
  for (int i = 0; i < 10000; ++i) {
    const auto s = training_sampler(ranges, rng);
    ASSERT_EQ(s.kind, TrajectoryKind::sinusoid);
    ASSERT_GE(s.amplitude, 0.5);
    ASSERT_LE(s.amplitude, 2.0);
    ASSERT_GE(s.period, 4.0);
    ASSERT_LE(s.period, 12.0);
    ASSERT_GE(s.speed, 0.2);
    ASSERT_LE(s.speed, 0.5);
  }
}

TEST(Sampler, CollapsedRangeIsConstant) {
  TrainingRanges ranges;
  ranges.amplitude_min = ranges.amplitude_max = 1.0;
  ranges.period_min = ranges.period_max = 8.0;
  ranges.speed_min = ranges.speed_max = 0.3;
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const auto s = training_sampler(ranges, rng);
    ASSERT_EQ(s.amplitude, 1.0);
    ASSERT_EQ(s.period, 8.0);
    ASSERT_EQ(s.speed, 0.3);
  }
}

TEST(Sampler, ConfigRejectsInvertedRange) {
  EXPECT_THROW(TrainingRanges::from_config(KeyValueConfig::parse("train.speed_min = 0.6\n")), ConfigError);
}
