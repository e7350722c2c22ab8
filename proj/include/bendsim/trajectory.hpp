#pragma once

#include <utility>
#include <vector>

#include "bendsim/types.hpp"

namespace bendsim {

enum class ScenarioKind { VaryingDistance, WindowPass, DualWindow, Custom, Validation };

using TrajectoryPair = std::pair<TrajectoryPoint<double>, TrajectoryPoint<double>>;

// additive sine on one position axis of one endpoint
struct ExcitationComponent {
  int endpoint = 0;        // 0 or 1
  int axis = 0;            // 0 x, 1 y, 2 z
  double amplitude = 0.0;  // meters
  double frequency = 0.5;  // Hz
  double phase = 0.0;      // radians
};

struct Exp1Params {
  double speed_x = 0.25;
  double z0 = 1.0;
  double dist_mean = 0.6;     // endpoint distance oscillates mean +- amp
  double dist_amp = 0.2;
  double dist_period = 8.0;
  double wobble_amp = 0.05;   // per-endpoint height oscillation
  double wobble_period_1 = 5.0;
  double wobble_period_2 = 3.5;
};

struct Exp2Params {
  double x0 = -8.75;
  double speed_x = 0.25;
  double z_start = 0.8;
  double z_peak = 1.8;
  double z_pass = 0.7;
  double dist_pass = 0.6;
  double dist_recover = 1.05;
  double hold_begin = 39.0;   // references frozen on [hold_begin, hold_end]
  double hold_end = 49.0;
  double window_x = 0.0;
  double window_half_width = 0.345;
  double window_z_min = 0.20;
  double window_z_max = 1.00;
  double hold_measure_begin = 40.0;  // error STD window inside the hold
  double hold_measure_end = 48.0;
};

struct Exp3Params {
  double phase1_end = 60.0;   // persistent-excitation flight
  double z0 = 1.5;
  double dist_min = 0.4;
  double dist_max = 1.0;
  double dist_period = 10.0;  // divides phase1_end so the handoff starts wide
  double speed_x = 0.3;       // traverse speed, phase 2
  double z_pass = 0.7;
  double dist_pass = 0.6;
  double window1_x = 4.0;
  double window2_x = 8.0;     // crossed lengthwise after the re-orientation
  double window_half_width = 0.345;
  double window_z_min = 0.20;
  double window_z_max = 1.00;
  double dist_final = 1.05;
  double z_final = 0.4;
};

// static hover of both endpoints; excitation components go on top
struct CustomParams {
  Vec3<double> center = Vec3<double>(0.0, 0.0, 1.0);
  double distance = 0.8;
  double yaw = 1.5707963267948966;  // r direction in the horizontal plane
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::VaryingDistance;
  double duration = 40.0;
  Exp1Params exp1;
  Exp2Params exp2;
  Exp3Params exp3;
  CustomParams custom;
  std::vector<ExcitationComponent> excitation;
};

// vertical aperture in the plane x = x_center, for post-hoc clearance checks
struct WindowSpec {
  double x_center = 0.0;
  double half_width_y = 0.345;
  double z_min = 0.20;
  double z_max = 1.00;
};

TrajectoryPair exp1_varying_distance(double t, const Exp1Params& params);

// five phases: climb, descend, forward pass through the window, 10 s static
// hold, recovery and landing; throws PhaseOutOfRange past the duration
TrajectoryPair exp2_window_pass(double t, const Exp2Params& params,
                                double duration);

// rich excitation sweep (distance, elevation, full-circle yaw), then a
// dual-window traverse with a mid-course re-orientation, then recovery
TrajectoryPair exp3_dual_window(double t, const Exp3Params& params,
                                double duration);

TrajectoryPair custom_hover(double t, const CustomParams& params);

// two-tone distance and in-plane inclination sweep used by the synthetic
// linear-force validation runs
TrajectoryPair validation_reference(double t);

TrajectoryPair superimpose_excitation(const TrajectoryPair& base, double t,
                                      const std::vector<ExcitationComponent>& components);

TrajectoryPair evaluate_scenario(const ScenarioSpec& spec, double t);

std::vector<WindowSpec> scenario_windows(const ScenarioSpec& spec);

// sweeps the reference at sample_dt and throws DistanceBoundViolation when
// the commanded endpoint distance leaves [0.1, L0 - 0.05]
void check_distance_bounds(const ScenarioSpec& spec, double L0,
                           double sample_dt = 0.01);

}  // namespace bendsim
