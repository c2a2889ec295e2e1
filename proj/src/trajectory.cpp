#include "asv/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace asv {

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::sinusoid: return "sinusoid";
    case TrajectoryKind::line: return "line";
    case TrajectoryKind::c_curve: return "c_curve";
    case TrajectoryKind::table: return "table";
  }
  return "unknown";
}

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "sinusoid") return TrajectoryKind::sinusoid;
  if (name == "line") return TrajectoryKind::line;
  if (name == "c_curve") return TrajectoryKind::c_curve;
  if (name == "table") return TrajectoryKind::table;
  throw ConfigError("unknown trajectory kind: " + name);
}

ReferenceTable ReferenceTable::load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open reference CSV: " + path.string());
  ReferenceTable table;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    ReferenceSample s;
    if (!(row >> s.t >> s.x >> s.y >> s.psi >> s.u >> s.v >> s.w))
      throw ConfigError("malformed reference row in " + path.string() + ": " + line);
    s.psi = wrap_angle(s.psi);
    s.tangent = s.psi;
    if (!table.rows.empty() && !(s.t > table.rows.back().t))
      throw ConfigError("reference rows must have strictly increasing t");
    table.rows.push_back(s);
  }
  if (table.rows.size() < 2) throw ConfigError("reference CSV needs at least two rows");
  return table;
}

ReferenceSample ReferenceTable::at(double t) const {
  if (t < rows.front().t || t > rows.back().t)
    throw DomainError("reference time outside table range");
  auto hi = std::lower_bound(rows.begin(), rows.end(), t,
                             [](const ReferenceSample& r, double value) { return r.t < value; });
  if (hi == rows.begin()) return rows.front();
  auto lo = std::prev(hi);
  const double a = (t - lo->t) / (hi->t - lo->t);
  ReferenceSample s;
  s.t = t;
  s.x = lo->x + a * (hi->x - lo->x);
  s.y = lo->y + a * (hi->y - lo->y);
  s.psi = wrap_angle(lo->psi + a * angle_diff(hi->psi, lo->psi));
  s.u = lo->u + a * (hi->u - lo->u);
  s.v = lo->v + a * (hi->v - lo->v);
  s.w = lo->w + a * (hi->w - lo->w);
  s.tangent = s.psi;
  return s;
}

void TrajectorySpec::validate() const {
  if (kind == TrajectoryKind::table) {
    if (!table || table->rows.size() < 2) throw ConfigError("table trajectory has no rows");
    return;
  }
  if (!(duration > 0)) throw ConfigError("trajectory duration must be positive");
  if (!(speed > 0)) throw ConfigError("trajectory speed must be positive");
  if (!(amplitude >= 0)) throw ConfigError("trajectory amplitude must be non-negative");
  if (kind == TrajectoryKind::sinusoid && !(period > 0))
    throw ConfigError("sinusoid period must be positive");
  if (kind == TrajectoryKind::c_curve && radius == 0.0)
    throw ConfigError("c_curve radius must be non-zero");
}

TrajectorySpec TrajectorySpec::from_config(const KeyValueConfig& cfg, const std::string& prefix) {
  TrajectorySpec s;
  const auto key = [&](const char* name) { return prefix + "." + name; };
  s.kind = trajectory_kind_from_string(cfg.get_string(key("kind"), "sinusoid"));
  s.amplitude = cfg.get_double(key("amplitude"), s.amplitude);
  s.period = cfg.get_double(key("period"), s.period);
  s.speed = cfg.get_double(key("speed"), s.speed);
  s.duration = cfg.get_double(key("duration"), s.duration);
  s.phase = cfg.get_double(key("phase"), s.phase);
  s.x0 = cfg.get_double(key("x0"), s.x0);
  s.y0 = cfg.get_double(key("y0"), s.y0);
  s.heading = cfg.get_double(key("heading_deg"), 0.0) * std::numbers::pi / 180.0;
  s.radius = cfg.get_double(key("radius"), s.radius);
  if (s.kind == TrajectoryKind::table) {
    auto path = cfg.raw(key("csv"));
    if (!path) throw ConfigError(key("csv") + " is required for table trajectories");
    auto table = std::make_shared<ReferenceTable>(ReferenceTable::load_csv(*path));
    s.duration = table->rows.back().t;
    s.table = std::move(table);
  }
  s.validate();
  return s;
}

namespace {

// Builds a sample from inertial position, velocity and acceleration of the path point.
ReferenceSample from_kinematics(double t, const Eigen::Vector2d& pos, const Eigen::Vector2d& vel,
                                const Eigen::Vector2d& acc) {
  ReferenceSample s;
  s.t = t;
  s.x = pos.x();
  s.y = pos.y();
  const double speed_sq = vel.squaredNorm();
  s.tangent = wrap_angle(std::atan2(vel.y(), vel.x()));
  s.psi = s.tangent;
  s.u = std::sqrt(speed_sq);
  s.v = 0.0;
  s.w = speed_sq > 0 ? (vel.x() * acc.y() - vel.y() * acc.x()) / speed_sq : 0.0;
  return s;
}

}  // namespace

ReferenceSample sample(const TrajectorySpec& spec, double t) {
  if (spec.kind == TrajectoryKind::table) return spec.table->at(t);
  if (!(t >= 0.0 && t <= spec.duration)) throw DomainError("trajectory time outside [0, duration]");

  const Eigen::Vector2d origin(spec.x0, spec.y0);
  const Eigen::Rotation2Dd axis(spec.heading);

  switch (spec.kind) {
    case TrajectoryKind::sinusoid: {
      const double k = 2.0 * std::numbers::pi / spec.period;
      const double along = spec.speed * t;
      const double arg = k * along + spec.phase;
      const Eigen::Vector2d pos(along, spec.amplitude * std::sin(arg));
      const Eigen::Vector2d vel(spec.speed, spec.amplitude * k * spec.speed * std::cos(arg));
      const Eigen::Vector2d acc(0.0, -spec.amplitude * k * k * spec.speed * spec.speed * std::sin(arg));
      return from_kinematics(t, origin + axis * pos, axis * vel, axis * acc);
    }
    case TrajectoryKind::line: {
      const Eigen::Vector2d dir = axis * Eigen::Vector2d::UnitX();
      return from_kinematics(t, origin + spec.speed * t * dir, spec.speed * dir, Eigen::Vector2d::Zero());
    }
    case TrajectoryKind::c_curve: {
      const double tangent = spec.heading + spec.speed * t / spec.radius;
      const Eigen::Vector2d left(-std::sin(spec.heading), std::cos(spec.heading));
      const Eigen::Vector2d center = origin + spec.radius * left;
      const Eigen::Vector2d radial(std::sin(tangent), -std::cos(tangent));
      const Eigen::Vector2d dir(std::cos(tangent), std::sin(tangent));
      const double w = spec.speed / spec.radius;
      const Eigen::Vector2d acc = spec.speed * w * Eigen::Vector2d(-std::sin(tangent), std::cos(tangent));
      return from_kinematics(t, center + spec.radius * radial, spec.speed * dir, acc);
    }
    case TrajectoryKind::table: break;
  }
  throw DomainError("unsupported trajectory kind");
}

double sight_heading(const ReferenceSample& ref, const Eigen::Vector2d& position, double lookahead) {
  if (!(lookahead > 0)) throw std::invalid_argument("sight_heading: lookahead must be positive");
  const Eigen::Vector2d sight =
      ref.position() + lookahead * Eigen::Vector2d(std::cos(ref.tangent), std::sin(ref.tangent));
  const Eigen::Vector2d los = sight - position;
  // Degenerate geometry: standing on the sight point, steer along the tangent.
  if (los.squaredNorm() < 1e-24) return wrap_angle(ref.tangent);
  return wrap_angle(std::atan2(los.y(), los.x()));
}

double sight_heading(const TrajectorySpec& spec, double t, const Eigen::Vector2d& position,
                     double lookahead) {
  return sight_heading(sample(spec, t), position, lookahead);
}

TrainingRanges TrainingRanges::from_config(const KeyValueConfig& cfg) {
  TrainingRanges r;
  r.amplitude_min = cfg.get_double("train.amplitude_min", r.amplitude_min);
  r.amplitude_max = cfg.get_double("train.amplitude_max", r.amplitude_max);
  r.period_min = cfg.get_double("train.period_min", r.period_min);
  r.period_max = cfg.get_double("train.period_max", r.period_max);
  r.speed_min = cfg.get_double("train.speed_min", r.speed_min);
  r.speed_max = cfg.get_double("train.speed_max", r.speed_max);
  r.duration = cfg.get_double("train.t_max", r.duration);
  r.random_axis = cfg.get_bool("train.random_axis", r.random_axis);
  if (r.amplitude_min > r.amplitude_max || r.period_min > r.period_max || r.speed_min > r.speed_max)
    throw ConfigError("training range minimum exceeds maximum");
  if (!(r.period_min > 0 && r.speed_min > 0 && r.amplitude_min >= 0))
    throw ConfigError("training ranges must be positive");
  return r;
}

namespace {

double draw(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

TrajectorySpec training_sampler(const TrainingRanges& ranges, Rng& rng) {
  TrajectorySpec s;
  s.kind = TrajectoryKind::sinusoid;
  s.amplitude = draw(rng, ranges.amplitude_min, ranges.amplitude_max);
  s.period = draw(rng, ranges.period_min, ranges.period_max);
  s.speed = draw(rng, ranges.speed_min, ranges.speed_max);
  s.duration = ranges.duration;
  if (ranges.random_axis) s.heading = draw(rng, -std::numbers::pi, std::numbers::pi);
  return s;
}

}  // namespace asv
