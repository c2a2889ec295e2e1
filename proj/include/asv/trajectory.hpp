#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "asv/config.hpp"
#include "asv/random.hpp"
#include "asv/types.hpp"

namespace asv {

enum class TrajectoryKind { sinusoid, line, c_curve, table };

std::string to_string(TrajectoryKind kind);
TrajectoryKind trajectory_kind_from_string(const std::string& name);

/// Desired state q_d at one instant; velocities are body-frame.
struct ReferenceSample {
  double t = 0;
  double x = 0, y = 0;
  double psi = 0;      // path tangent heading
  double u = 0, v = 0;
  double w = 0;        // tangent-angle rate
  double tangent = 0;  // direction of travel

  Eigen::Vector2d position() const { return {x, y}; }
  Vector6<double> as_state() const {
    Vector6<double> q;
    q << x, y, psi, u, v, w;
    return q;
  }
};

/// Timestamped reference rows, linearly interpolated between samples.
struct ReferenceTable {
  std::vector<ReferenceSample> rows;

  /// CSV with header `t,x_d,y_d,psi_d,u_d,v_d,w_d`.
  static ReferenceTable load_csv(const std::filesystem::path& path);
  ReferenceSample at(double t) const;
};

/// Parametric reference path.
///   sinusoid: x = x0 + s t along `heading`, lateral offset A sin(2 pi along / period + phase)
///   line:     straight at speed s along `heading`
///   c_curve:  constant-curvature arc of `radius`, turning left for radius > 0
struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::sinusoid;
  double amplitude = 1.0;  // m
  double period = 8.0;     // spatial period, m
  double speed = 0.3;      // m/s (along-axis speed for sinusoid, path speed otherwise)
  double duration = 30.0;  // s
  double phase = 0.0;      // rad
  double x0 = 0.0, y0 = 0.0;
  double heading = 0.0;    // rad, axis of the sinusoid/line, initial tangent of the arc
  double radius = 3.0;     // m, c_curve only
  std::shared_ptr<const ReferenceTable> table;

  void validate() const;
  static TrajectorySpec from_config(const KeyValueConfig& cfg, const std::string& prefix = "trajectory");
};

/// Reference state at time t; throws DomainError outside [0, duration].
ReferenceSample sample(const TrajectorySpec& spec, double t);

/// Line-of-sight heading toward the point L ahead of the reference along its tangent.
double sight_heading(const ReferenceSample& ref, const Eigen::Vector2d& position, double lookahead);
double sight_heading(const TrajectorySpec& spec, double t, const Eigen::Vector2d& position,
                     double lookahead);

struct TrainingRanges {
  double amplitude_min = 0.5, amplitude_max = 2.0;
  double period_min = 4.0, period_max = 12.0;
  double speed_min = 0.2, speed_max = 0.5;
  double duration = 30.0;
  bool random_axis = false;  // draw the sinusoid axis heading uniformly

  static TrainingRanges from_config(const KeyValueConfig& cfg);
};

/// Draws a random sinusoid from the configured ranges.
TrajectorySpec training_sampler(const TrainingRanges& ranges, Rng& rng);

}  // namespace asv
