#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace asv {

template <typename Scalar> using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vector4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar> using Vector6 = Eigen::Matrix<Scalar, 6, 1>;
template <typename Scalar> using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Matrix6 = Eigen::Matrix<Scalar, 6, 6>;

/// Body-frame force/torque [tau_u, tau_v, tau_w].
template <typename Scalar> using BodyWrench = Vector3<Scalar>;

/// Raised when the integrated state stops being finite.
class ModelExplosion : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a function (time out of range, empty trace).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a precondition (dimension mismatch, undersized buffer).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  constexpr Scalar two_pi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar wrapped = std::remainder(angle, two_pi);
  if (wrapped <= -std::numbers::pi_v<Scalar>) wrapped += two_pi;
  return wrapped;
}

/// Wrapped difference a - b in (-pi, pi].
template <typename Scalar>
Scalar angle_diff(Scalar a, Scalar b) {
  return wrap_angle(a - b);
}

/// Planar state q = [x, y, psi, u, v, w].
template <typename Scalar>
struct VesselStateT {
  Vector6<Scalar> q = Vector6<Scalar>::Zero();

  VesselStateT() = default;
  explicit VesselStateT(const Vector6<Scalar>& vec) : q(vec) {}
  VesselStateT(Scalar x, Scalar y, Scalar psi, Scalar u = 0, Scalar v = 0, Scalar w = 0) {
    q << x, y, psi, u, v, w;
  }

  Scalar x() const { return q(0); }
  Scalar y() const { return q(1); }
  Scalar psi() const { return q(2); }
  Scalar u() const { return q(3); }
  Scalar v() const { return q(4); }
  Scalar w() const { return q(5); }

  auto pose() { return q.template head<3>(); }
  auto pose() const { return q.template head<3>(); }
  auto velocity() { return q.template tail<3>(); }
  auto velocity() const { return q.template tail<3>(); }
  auto position() const { return q.template head<2>(); }

  bool finite() const { return q.allFinite(); }
};

/// Thruster forces [f1 left, f2 right, f3 anterior, f4 rear] in newtons.
template <typename Scalar>
struct ThrustCommandT {
  Vector4<Scalar> f = Vector4<Scalar>::Zero();

  ThrustCommandT() = default;
  explicit ThrustCommandT(const Vector4<Scalar>& forces) : f(forces) {}
  ThrustCommandT(Scalar f1, Scalar f2, Scalar f3, Scalar f4) { f << f1, f2, f3, f4; }

  ThrustCommandT saturated(Scalar f_max) const {
    return ThrustCommandT(f.cwiseMax(-f_max).cwiseMin(f_max));
  }
  bool within(Scalar f_max) const { return (f.array().abs() <= f_max).all(); }
};

using VesselState = VesselStateT<double>;
using ThrustCommand = ThrustCommandT<double>;
using Wrench = BodyWrench<double>;

}  // namespace asv
