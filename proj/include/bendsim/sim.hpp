#pragma once

#include <array>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bendsim/control.hpp"
#include "bendsim/estimator.hpp"
#include "bendsim/rod.hpp"
#include "bendsim/trajectory.hpp"
#include "bendsim/types.hpp"

namespace bendsim {

enum class Method { PidLow, PidHigh, AdaptivePhi, AdaptivePhib };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::PidLow: return "pid-low";
    case Method::PidHigh: return "pid-high";
    case Method::AdaptivePhi: return "adaptive-phi";
    case Method::AdaptivePhib: return "adaptive-phib";
  }
  return "?";
}

std::optional<Method> parse_method(const std::string& name);

enum class TruthKind { Elastica, SyntheticLinear };

struct VehicleState {
  Vec3<double> p = Vec3<double>::Zero();
  Vec3<double> v = Vec3<double>::Zero();
  Vec3<double> a_true = Vec3<double>::Zero();
  double m = 0.135;
};

// The controller-facing boundary of the physics: endpoint forces only, no
// shape or constitutive information crosses it.
class GroundTruth {
 public:
  virtual ~GroundTruth() = default;
  virtual std::pair<Vec3<double>, Vec3<double>> forces(const Vec3<double>& p1,
                                                       const Vec3<double>& v1,
                                                       const Vec3<double>& p2,
                                                       const Vec3<double>& v2) = 0;
  // per-vehicle weight matrix of the synthetic truth; nullptr when the force
  // has no linear-in-features form
  virtual const Eigen::MatrixXd* true_weights(int /*vehicle*/) const { return nullptr; }
  // energy of the last solved configuration, NaN when meaningless
  virtual double last_energy() const { return std::numeric_limits<double>::quiet_NaN(); }
  // drop warm-start state between trials; learning state, if any, stays
  virtual void reset_transients() {}
};

std::unique_ptr<GroundTruth> make_elastica_truth(const RodSpec& spec);
std::unique_ptr<GroundTruth> make_synthetic_truth(FeatureKind kind, int order,
                                                  double frobenius_norm, unsigned seed);

struct World {
  std::array<VehicleState, 2> vehicles;
  std::array<Vec3<double>, 2> u{Vec3<double>::Zero(), Vec3<double>::Zero()};
  GroundTruth* truth = nullptr;  // not owned; null means free flight
};

// one semi-implicit Euler substep under the held commands; returns the
// coupling forces applied during the substep
std::pair<Vec3<double>, Vec3<double>> step(World& world, double dt);

struct SimConfig {
  double dt_physics = 0.001;
  double dt_control = 0.01;
  double duration = 40.0;
  double sigma_a = 0.05;      // accelerometer noise fed to the observer only
  unsigned seed = 1;
  int trials = 10;
  double mass = 0.135;

  double kp = 4.0;
  double kd = 1.4;
  double ki_low = 0.3;
  double ki_high = 0.6;       // kept at exactly twice ki_low in shipped configs
  double i_max = 3.0;
  double u_max = 2.0 * 0.135 * kGravity;
  double command_jump_limit = 2.5;  // newtons per control tick

  Method method = Method::AdaptivePhib;
  FeatureKind feature_kind = FeatureKind::PhysicalInsight;
  int feature_order = 3;
  double p0 = 1.0;
  double lambda = 0.0;
  // 1: observer pairs the previous tick's command with the acceleration of
  // the last physics substep. 0: force sampled at the current state directly.
  int observer_delay = 1;
  int snapshot_every = 100;   // control ticks between estimator snapshots

  bool thrust_filter = false;
  double thrust_tau = 0.03;

  TruthKind truth = TruthKind::Elastica;
  double w_true_scale = 0.1;  // Frobenius norm of each synthetic weight matrix

  RodSpec rod = RodSpec::two_zone_default();
  ScenarioSpec scenario;

  int substeps() const { return static_cast<int>(dt_control / dt_physics + 0.5); }
  Gains<double> gains_for(Method m) const;
};

struct StepRecord {
  double t = 0.0;
  std::array<Vec3<double>, 2> p, p_d, e, u, f_o, f_hat, eps, f_true_sample;
  double V_p = 0.0;                                          // both vehicles
  double V_W = std::numeric_limits<double>::quiet_NaN();     // synthetic truth only
  double w_err = std::numeric_limits<double>::quiet_NaN();   // max ||W_hat - W*||_F
  double rod_energy = std::numeric_limits<double>::quiet_NaN();
};

struct EstimatorSnapshot {
  double t = 0.0;
  std::array<Eigen::MatrixXd, 2> W_hat;
  std::array<Eigen::MatrixXd, 2> P;
};

struct WindowCrossing {
  int window = 0;
  int endpoint = 0;
  double t = 0.0, y = 0.0, z = 0.0;
  bool pass = false;
};

struct TrialReport {
  Method method = Method::AdaptivePhib;
  int trial = 0;
  std::vector<StepRecord> steps;
  std::vector<EstimatorSnapshot> snapshots;
  std::vector<WindowCrossing> crossings;
  double mean_error = 0.0;  // of the per-step average endpoint error
  double std_error = 0.0;
  double hold_mean = std::numeric_limits<double>::quiet_NaN();
  double hold_std = std::numeric_limits<double>::quiet_NaN();
  double max_command_jump = 0.0;
  bool saturated = false;
  bool diverged = false;
  bool task_success = true;
};

struct BatchReport {
  Method method = Method::AdaptivePhib;
  std::vector<TrialReport> trials;
};

using EstimatorPair = std::array<EstimatorState<double>, 2>;

EstimatorPair fresh_estimators(const SimConfig& cfg);

// one scenario execution; the returned estimator pair carries learning into
// the next trial
std::pair<TrialReport, EstimatorPair> run_trial(const SimConfig& cfg, int trial_index,
                                                EstimatorPair estimators,
                                                GroundTruth& truth);

BatchReport run_batch(const SimConfig& cfg);

// V^p + V^W per control tick; throws UnavailableGroundTruth when the report
// was not produced against a synthetic linear truth
std::vector<double> lyapunov_trace(const TrialReport& report);

}  // namespace bendsim
