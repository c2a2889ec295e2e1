#pragma once

// 3-DOF surge/sway/yaw vessel model:
//   eta_dot = T(psi) v
//   v_dot   = M^-1 (tau + tau_env) - M^-1 (C(v) + D) v
// with diagonal M and D and the four-thruster allocation tau = B f.

#include <stdexcept>

#include "asv/types.hpp"

namespace asv {

template <typename Scalar>
struct ModelParametersT {
  Scalar m11 = 12.0;   // kg
  Scalar m22 = 24.0;   // kg
  Scalar m33 = 1.5;    // kg m^2
  Scalar d11 = 6.0;    // kg/s
  Scalar d22 = 8.0;    // kg/s
  Scalar d33 = 1.35;   // kg m^2/s
  Scalar a = 0.45;     // transverse thruster separation, m
  Scalar b = 0.90;     // longitudinal thruster separation, m
  Scalar f_max = 4.0;  // per-thruster saturation, N
  Scalar dt = 0.1;     // control period, s

  void validate() const {
    if (!(m11 > 0 && m22 > 0 && m33 > 0 && d11 > 0 && d22 > 0 && d33 > 0))
      throw std::invalid_argument("mass and drag entries must be strictly positive");
    if (!(a > 0 && b > 0)) throw std::invalid_argument("thruster separations must be positive");
    if (!(f_max > 0)) throw std::invalid_argument("f_max must be positive");
    if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  }
};

using ModelParameters = ModelParametersT<double>;

/// Body-to-inertial transform: planar rotation by psi, identity on the yaw channel.
template <typename Scalar>
Matrix3<Scalar> rotation_to_inertial(Scalar psi) {
  const Scalar c = std::cos(psi), s = std::sin(psi);
  Matrix3<Scalar> T;
  // clang-format off
  T << c, -s, 0,
       s,  c, 0,
       0,  0, 1;
  // clang-format on
  return T;
}

template <typename Scalar>
Matrix3<Scalar> mass_matrix(const ModelParametersT<Scalar>& p) {
  return Vector3<Scalar>(p.m11, p.m22, p.m33).asDiagonal();
}

template <typename Scalar>
Matrix3<Scalar> drag_matrix(const ModelParametersT<Scalar>& p) {
  return Vector3<Scalar>(p.d11, p.d22, p.d33).asDiagonal();
}

/// Coriolis/centripetal matrix for a diagonal mass matrix. Skew-symmetric by construction.
template <typename Scalar>
Matrix3<Scalar> coriolis(const ModelParametersT<Scalar>& p, const Vector3<Scalar>& vel) {
  const Scalar mu = p.m11 * vel(0);
  const Scalar mv = p.m22 * vel(1);
  Matrix3<Scalar> C;
  // clang-format off
  C <<   0,   0, -mv,
         0,   0,  mu,
        mv, -mu,   0;
  // clang-format on
  return C;
}

/// Thruster allocation matrix B (3x4).
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 4> allocation_matrix(const ModelParametersT<Scalar>& p) {
  Eigen::Matrix<Scalar, 3, 4> B;
  // clang-format off
  B << 1,          1,          0,          0,
       0,          0,          1,          1,
       p.a / 2,   -p.a / 2,    p.b / 2,   -p.b / 2;
  // clang-format on
  return B;
}

template <typename Scalar>
BodyWrench<Scalar> allocate(const ModelParametersT<Scalar>& p, const ThrustCommandT<Scalar>& cmd) {
  return allocation_matrix(p) * cmd.f;
}

/// q_dot for a raw state vector; intermediate RK stages carry an unwrapped heading.
template <typename Scalar>
Vector6<Scalar> state_derivative(const ModelParametersT<Scalar>& p, const Vector6<Scalar>& q,
                                 const ThrustCommandT<Scalar>& cmd,
                                 const BodyWrench<Scalar>& tau_env) {
  const Vector3<Scalar> vel = q.template tail<3>();
  const BodyWrench<Scalar> tau = allocate(p, cmd) + tau_env;
  const Vector3<Scalar> rhs = tau - (coriolis(p, vel) + drag_matrix(p)) * vel;

  Vector6<Scalar> dq;
  dq.template head<3>() = rotation_to_inertial(q(2)) * vel;
  dq.template tail<3>() = rhs.cwiseQuotient(Vector3<Scalar>(p.m11, p.m22, p.m33));
  if (!dq.allFinite()) throw ModelExplosion("state derivative is not finite");
  return dq;
}

template <typename Scalar>
Vector6<Scalar> state_derivative(const ModelParametersT<Scalar>& p, const VesselStateT<Scalar>& s,
                                 const ThrustCommandT<Scalar>& cmd,
                                 const BodyWrench<Scalar>& tau_env) {
  return state_derivative(p, s.q, cmd, tau_env);
}

/// Classical RK4 with cmd and tau_env held over the step; heading re-wrapped.
template <typename Scalar>
VesselStateT<Scalar> step_rk4(const ModelParametersT<Scalar>& p, const VesselStateT<Scalar>& s,
                              const ThrustCommandT<Scalar>& cmd, const BodyWrench<Scalar>& tau_env,
                              Scalar dt) {
  if (!(dt > 0)) throw std::invalid_argument("step_rk4: dt must be positive");
  const Vector6<Scalar>& q = s.q;
  const Vector6<Scalar> k1 = state_derivative(p, q, cmd, tau_env);
  const Vector6<Scalar> k2 = state_derivative<Scalar>(p, q + dt / 2 * k1, cmd, tau_env);
  const Vector6<Scalar> k3 = state_derivative<Scalar>(p, q + dt / 2 * k2, cmd, tau_env);
  const Vector6<Scalar> k4 = state_derivative<Scalar>(p, q + dt * k3, cmd, tau_env);

  VesselStateT<Scalar> next(q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
  next.q(2) = wrap_angle(next.q(2));
  if (!next.finite()) throw ModelExplosion("integrated state is not finite");
  return next;
}

template <typename Scalar>
Scalar kinetic_energy(const ModelParametersT<Scalar>& p, const VesselStateT<Scalar>& s) {
  return Scalar(0.5) * (p.m11 * s.u() * s.u() + p.m22 * s.v() * s.v() + p.m33 * s.w() * s.w());
}

template <typename Scalar>
struct StateJacobians {
  Matrix6<Scalar> A;                  // d q_dot / d q
  Eigen::Matrix<Scalar, 6, 4> B;      // d q_dot / d f
};

/// Analytic Jacobians of state_derivative (tau_env treated as constant).
template <typename Scalar>
StateJacobians<Scalar> state_jacobians(const ModelParametersT<Scalar>& p, const Vector6<Scalar>& q) {
  const Scalar c = std::cos(q(2)), s = std::sin(q(2));
  const Scalar u = q(3), v = q(4), w = q(5);

  StateJacobians<Scalar> J;
  J.A.setZero();
  J.A(0, 2) = -s * u - c * v;
  J.A(0, 3) = c;
  J.A(0, 4) = -s;
  J.A(1, 2) = c * u - s * v;
  J.A(1, 3) = s;
  J.A(1, 4) = c;
  J.A(2, 5) = 1;

  // u_dot = (tau_u + m22 v w - d11 u) / m11
  J.A(3, 3) = -p.d11 / p.m11;
  J.A(3, 4) = p.m22 * w / p.m11;
  J.A(3, 5) = p.m22 * v / p.m11;
  // v_dot = (tau_v - m11 u w - d22 v) / m22
  J.A(4, 3) = -p.m11 * w / p.m22;
  J.A(4, 4) = -p.d22 / p.m22;
  J.A(4, 5) = -p.m11 * u / p.m22;
  // w_dot = (tau_w - (m22 - m11) u v - d33 w) / m33
  J.A(5, 3) = -(p.m22 - p.m11) * v / p.m33;
  J.A(5, 4) = -(p.m22 - p.m11) * u / p.m33;
  J.A(5, 5) = -p.d33 / p.m33;

  J.B.setZero();
  J.B.template bottomRows<3>() =
      Vector3<Scalar>(1 / p.m11, 1 / p.m22, 1 / p.m33).asDiagonal() * allocation_matrix(p);
  return J;
}

template <typename Scalar>
struct StepSensitivity {
  VesselStateT<Scalar> next;
  Matrix6<Scalar> dq;                 // d next / d q
  Eigen::Matrix<Scalar, 6, 4> df;     // d next / d f
};

/// RK4 step together with its exact discrete derivatives.
template <typename Scalar>
StepSensitivity<Scalar> step_rk4_sensitivity(const ModelParametersT<Scalar>& p,
                                              const VesselStateT<Scalar>& s,
                                              const ThrustCommandT<Scalar>& cmd,
                                              const BodyWrench<Scalar>& tau_env, Scalar dt) {
  using M64 = Eigen::Matrix<Scalar, 6, 4>;
  const Matrix6<Scalar> I = Matrix6<Scalar>::Identity();
  const Vector6<Scalar>& q = s.q;

  const Vector6<Scalar> k1 = state_derivative(p, q, cmd, tau_env);
  const auto J1 = state_jacobians(p, q);
  const Matrix6<Scalar> K1q = J1.A;
  const M64 K1f = J1.B;

  const Vector6<Scalar> q2 = q + dt / 2 * k1;
  const Vector6<Scalar> k2 = state_derivative(p, q2, cmd, tau_env);
  const auto J2 = state_jacobians(p, q2);
  const Matrix6<Scalar> K2q = J2.A * (I + dt / 2 * K1q);
  const M64 K2f = J2.A * (dt / 2 * K1f) + J2.B;

  const Vector6<Scalar> q3 = q + dt / 2 * k2;
  const Vector6<Scalar> k3 = state_derivative(p, q3, cmd, tau_env);
  const auto J3 = state_jacobians(p, q3);
  const Matrix6<Scalar> K3q = J3.A * (I + dt / 2 * K2q);
  const M64 K3f = J3.A * (dt / 2 * K2f) + J3.B;

  const Vector6<Scalar> q4 = q + dt * k3;
  const Vector6<Scalar> k4 = state_derivative(p, q4, cmd, tau_env);
  const auto J4 = state_jacobians(p, q4);
  const Matrix6<Scalar> K4q = J4.A * (I + dt * K3q);
  const M64 K4f = J4.A * (dt * K3f) + J4.B;

  StepSensitivity<Scalar> out;
  out.next = VesselStateT<Scalar>(q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
  out.next.q(2) = wrap_angle(out.next.q(2));
  if (!out.next.finite()) throw ModelExplosion("integrated state is not finite");
  out.dq = I + dt / 6 * (K1q + 2 * K2q + 2 * K3q + K4q);
  out.df = dt / 6 * (K1f + 2 * K2f + 2 * K3f + K4f);
  return out;
}

}  // namespace asv
