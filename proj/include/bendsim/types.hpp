#pragma once

#include <Eigen/Dense>

namespace bendsim {

template <typename S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec2 = Eigen::Matrix<S, 2, 1>;
template <typename S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S> using VecX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S> using MatX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kGravity = 9.81;

template <typename S>
Vec3<S> world_up() { return Vec3<S>::UnitZ(); }

template <typename S>
struct TrajectoryPoint {
  Vec3<S> p_d = Vec3<S>::Zero();
  Vec3<S> v_d = Vec3<S>::Zero();
  Vec3<S> a_d = Vec3<S>::Zero();
};

}  // namespace bendsim
