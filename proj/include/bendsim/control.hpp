#pragma once

#include "bendsim/types.hpp"

namespace bendsim {

template <typename S>
struct Gains {
  S kp = S(4);
  S kd = S(1.4);
  S ki = S(0);
  S i_max = S(3);   // per-axis clamp on the integral state, newton seconds
  S u_max = S(2.6487);
};

template <typename S>
struct ControlCommand {
  Vec3<S> u = Vec3<S>::Zero();
  Vec3<S> f_hat_o = Vec3<S>::Zero();
  bool saturated = false;
};

namespace detail {

// scale the whole vector so direction is preserved at the limit
template <typename S>
void saturate(ControlCommand<S>& cmd, S u_max) {
  const S n = cmd.u.norm();
  if (n > u_max) {
    cmd.u *= u_max / n;
    cmd.saturated = true;
  }
}

}  // namespace detail

// u = kp e + kd e_dot + m g z + m a_d - f_hat, the learned force replaces
// integral action entirely
template <typename S>
ControlCommand<S> adaptive_control(const Gains<S>& gains, S m, const Vec3<S>& e,
                                   const Vec3<S>& e_dot, const Vec3<S>& a_d,
                                   const Vec3<S>& f_hat_o) {
  ControlCommand<S> cmd;
  cmd.f_hat_o = f_hat_o;
  cmd.u = gains.kp * e + gains.kd * e_dot + m * S(kGravity) * world_up<S>() + m * a_d - f_hat_o;
  detail::saturate(cmd, gains.u_max);
  return cmd;
}

// baseline: same feedback plus a clamped integral, no force estimate;
// integral is owned by the caller and advanced here
template <typename S>
ControlCommand<S> pid_control(const Gains<S>& gains, S m, const Vec3<S>& e,
                              const Vec3<S>& e_dot, const Vec3<S>& a_d,
                              Vec3<S>& integral, S dt) {
  integral += e * dt;
  integral = integral.cwiseMax(-gains.i_max).cwiseMin(gains.i_max);
  ControlCommand<S> cmd;
  cmd.u = gains.kp * e + gains.kd * e_dot + gains.ki * integral +
          m * S(kGravity) * world_up<S>() + m * a_d;
  detail::saturate(cmd, gains.u_max);
  return cmd;
}

// 1/2 m |e_dot|^2 + 1/2 kp |e|^2, the tracking part of the storage function
template <typename S>
S lyapunov_position(S m, S kp, const Vec3<S>& e, const Vec3<S>& e_dot) {
  return S(0.5) * m * e_dot.squaredNorm() + S(0.5) * kp * e.squaredNorm();
}

}  // namespace bendsim
