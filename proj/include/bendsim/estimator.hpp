#pragma once

#include <cmath>

#include "bendsim/errors.hpp"
#include "bendsim/features.hpp"
#include "bendsim/types.hpp"

namespace bendsim {

inline constexpr double kCovarianceFloor = 1e-10;
inline constexpr double kCovarianceCeiling = 1e9;

template <typename S>
struct EstimatorState {
  MatX<S> W_hat;  // (4n+1) x 3, columns per force axis in the estimation frame
  MatX<S> P;      // (4n+1) x (4n+1)
  S lambda = S(0);
  FeatureKind kind = FeatureKind::PlanePolynomial;
  int order = 3;

  static EstimatorState zero_init(FeatureKind kind, int order, S p0, S lambda) {
    EstimatorState st;
    const int d = feature_length(order);
    st.W_hat = MatX<S>::Zero(d, 3);
    st.P = p0 * MatX<S>::Identity(d, d);
    st.lambda = lambda;
    st.kind = kind;
    st.order = order;
    return st;
  }
};

// f_o = m a + m g z - u: the external force that must have acted given the
// measured acceleration and the command actually applied over the interval
template <typename S>
Vec3<S> observe_force(S m, const Vec3<S>& a_meas, const Vec3<S>& u_applied) {
  return m * a_meas + m * S(kGravity) * world_up<S>() - u_applied;
}

// One sampled least-squares update. The forgetting factor acts per unit time,
// discounting old data by exp(-lambda dt) per step, so lambda keeps the units
// of the continuous formulation.
template <typename S>
EstimatorState<S> rls_step(const EstimatorState<S>& state, const VecX<S>& phi,
                           const Vec3<S>& f_frame, S dt) {
  EstimatorState<S> next = state;
  const Eigen::Matrix<S, 1, 3> eps = f_frame.transpose() - phi.transpose() * state.W_hat;
  const S decay = std::exp(-state.lambda * dt);
  const VecX<S> p_phi = state.P * phi;
  const S gain_denom = decay + phi.dot(p_phi);
  const VecX<S> gain = p_phi / gain_denom;
  next.W_hat.noalias() += gain * eps;
  next.P.noalias() -= gain * p_phi.transpose();
  next.P /= decay;
  next.P = S(0.5) * (next.P + next.P.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatX<S>> eig(next.P);
  if (eig.eigenvalues().minCoeff() < S(kCovarianceFloor)) {
    const VecX<S> floored = eig.eigenvalues().cwiseMax(S(kCovarianceFloor));
    next.P = eig.eigenvectors() * floored.asDiagonal() * eig.eigenvectors().transpose();
  }
  if (next.P.cwiseAbs().maxCoeff() > S(kCovarianceCeiling))
    throw CovarianceBlowup("covariance exploded, excitation insufficient for the forgetting factor");
  return next;
}

template <typename S>
Vec3<S> predict_force(const EstimatorState<S>& state, const VecX<S>& phi,
                      const Mat3<S>& frame) {
  return frame * (state.W_hat.transpose() * phi);
}

// tr(W~' P^-1 W~) with W~ = W* - W_hat; the weight-error part of the
// composite storage function
template <typename S>
S lyapunov_weights(const EstimatorState<S>& state, const MatX<S>& W_true) {
  const MatX<S> W_err = W_true - state.W_hat;
  const MatX<S> solved = state.P.ldlt().solve(W_err);
  return (W_err.transpose() * solved).trace();
}

}  // namespace bendsim
