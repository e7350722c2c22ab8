#pragma once

#include <optional>

#include <Eigen/Dense>

#include "bendsim/types.hpp"

namespace bendsim {

struct RodSpec {
  double L0 = 1.2;            // curve length, meters
  double r0 = 1.05;           // endpoint distance of the unloaded shape
  int N = 16;                 // rigid segments
  Eigen::VectorXd k_b;        // N-1 joint stiffnesses, N m/rad
  Eigen::VectorXd m_s;        // N segment masses, kg
  double damping = 0.05;      // viscous coefficient on endpoint rate, N s/m

  double total_mass() const { return m_s.sum(); }
  double segment_length() const { return L0 / N; }

  // two stiffness/mass zones, deliberately inhomogeneous
  static RodSpec two_zone_default();
};

// Equilibrium shape: absolute in-plane segment angles against the plane
// x axis, plus the solve context needed to evaluate reactions and energy.
struct RodConfig {
  Eigen::VectorXd theta;              // N
  Eigen::Vector2d mu;                 // endpoint constraint multipliers
  Mat3<double> frame;                 // plane frame columns x_P, y_P, z_P
  Vec3<double> p1;                    // world anchor of vertex 0
  Eigen::Vector2d chord;              // p2 - p1 in plane coords (xi, eta)
  int iterations = 0;
};

struct RodReaction {
  Vec3<double> f1 = Vec3<double>::Zero();  // force by the rod on vehicle 1
  Vec3<double> f2 = Vec3<double>::Zero();
  double energy = 0.0;                     // elastic + gravitational, joules
};

// signed uniform turning angle of the unloaded shape; negative, so the
// natural bow sags below the chord
double natural_turn(const RodSpec& spec);

// Constrained energy minimization. Warm start reuses the previous shape and,
// when the current displacement is too close to vertical to define a plane,
// the previous plane frame.
RodConfig solve_equilibrium(const RodSpec& spec, const Vec3<double>& p1,
                            const Vec3<double>& p2,
                            const RodConfig* warm_start = nullptr);

// f_i = -dE*/dp_i from the constraint multipliers, world frame
RodReaction endpoint_reactions(const RodSpec& spec, const RodConfig& config);

// adds the viscous term along the endpoint relative velocity d(p2-p1)/dt
RodReaction endpoint_reactions(const RodSpec& spec, const RodConfig& config,
                               const Vec3<double>& r_rate);

// total energy of a configuration, gravity referenced to world z = 0
double rod_energy(const RodSpec& spec, const RodConfig& config);

// Owns the warm-start cache; one instance per simulated rod.
class RodSolver {
 public:
  explicit RodSolver(RodSpec spec) : spec_(std::move(spec)) {}

  const RodSpec& spec() const { return spec_; }

  // warm-started solve; retries cold before giving up
  const RodConfig& solve(const Vec3<double>& p1, const Vec3<double>& p2);

  void reset() { warm_.reset(); }

 private:
  RodSpec spec_;
  std::optional<RodConfig> warm_;
};

}  // namespace bendsim
