#include "bendsim/trajectory.hpp"

#include <cmath>
#include <string>

#include "bendsim/errors.hpp"

namespace bendsim {
namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// value with first and second time derivatives, so every reference channel
// carries exact rates through products, roots, and blends
struct Jet {
  double v = 0.0, d = 0.0, dd = 0.0;
};

Jet jconst(double c) { return {c, 0.0, 0.0}; }

Jet operator+(const Jet& a, const Jet& b) { return {a.v + b.v, a.d + b.d, a.dd + b.dd}; }
Jet operator-(const Jet& a, const Jet& b) { return {a.v - b.v, a.d - b.d, a.dd - b.dd}; }
Jet operator*(double c, const Jet& a) { return {c * a.v, c * a.d, c * a.dd}; }
Jet operator+(double c, const Jet& a) { return {c + a.v, a.d, a.dd}; }

Jet operator*(const Jet& a, const Jet& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d, a.dd * b.v + 2.0 * a.d * b.d + a.v * b.dd};
}

Jet jsin(double amp, double omega, double phase, double t) {
  const double s = std::sin(omega * t + phase), c = std::cos(omega * t + phase);
  return {amp * s, amp * omega * c, -amp * omega * omega * s};
}

Jet jcos(double amp, double omega, double phase, double t) {
  const double s = std::sin(omega * t + phase), c = std::cos(omega * t + phase);
  return {amp * c, -amp * omega * s, -amp * omega * omega * c};
}

Jet jsin_of(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {s, c * a.d, -s * a.d * a.d + c * a.dd};
}

Jet jcos_of(const Jet& a) {
  const double s = std::sin(a.v), c = std::cos(a.v);
  return {c, -s * a.d, -c * a.d * a.d - s * a.dd};
}

Jet jsqrt(const Jet& a) {
  const double r = std::sqrt(a.v);
  const double d = a.d / (2.0 * r);
  return {r, d, a.dd / (2.0 * r) - a.d * a.d / (4.0 * r * r * r)};
}

// quintic ramp 0 -> 1 over [t0, t1]
Jet jsmooth(double t, double t0, double t1) {
  if (t <= t0) return jconst(0.0);
  if (t >= t1) return jconst(1.0);
  const double w = t1 - t0, u = (t - t0) / w;
  const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  const double sp = 30.0 * u * u * (1.0 - u) * (1.0 - u);
  const double spp = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u);
  return {s, sp / w, spp / (w * w)};
}

// a + (b - a) * smooth
Jet jblend(const Jet& a, const Jet& b, const Jet& s) { return a + s * (b - a); }

struct EndpointJets {
  Jet x1, y1, z1, x2, y2, z2;
};

TrajectoryPair to_pair(const EndpointJets& e) {
  TrajectoryPair out;
  out.first.p_d = Vec3<double>(e.x1.v, e.y1.v, e.z1.v);
  out.first.v_d = Vec3<double>(e.x1.d, e.y1.d, e.z1.d);
  out.first.a_d = Vec3<double>(e.x1.dd, e.y1.dd, e.z1.dd);
  out.second.p_d = Vec3<double>(e.x2.v, e.y2.v, e.z2.v);
  out.second.v_d = Vec3<double>(e.x2.d, e.y2.d, e.z2.d);
  out.second.a_d = Vec3<double>(e.x2.dd, e.y2.dd, e.z2.dd);
  return out;
}

// constant speed, then a quintic fade to rest over [stop0, stop0 + 2]
Jet fading_advance(double t, double x0, double speed, double stop0) {
  const double xs = x0 + speed * stop0;
  if (t < stop0) return {x0 + speed * t, speed, 0.0};
  if (t >= stop0 + 2.0) return jconst(xs + speed);
  const double u = (t - stop0) / 2.0;
  const double s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
  const double integral = u * u * u * u * ((u - 3.0) * u + 2.5);
  const double sp = 30.0 * u * u * (1.0 - u) * (1.0 - u);
  return {xs + speed * 2.0 * (u - integral), speed * (1.0 - s), -speed * sp / 2.0};
}

}  // namespace

TrajectoryPair exp1_varying_distance(double t, const Exp1Params& pp) {
  const Jet dist = pp.dist_mean + jcos(pp.dist_amp, kTwoPi / pp.dist_period, 0.0, t);
  const Jet z1 = pp.z0 + jsin(pp.wobble_amp, kTwoPi / pp.wobble_period_1, 0.0, t);
  const Jet z2 = pp.z0 + jsin(pp.wobble_amp, kTwoPi / pp.wobble_period_2, 0.0, t);
  const Jet dh = z2 - z1;
  const Jet dy = jsqrt(dist * dist - dh * dh);
  EndpointJets e;
  e.x1 = e.x2 = Jet{pp.speed_x * t, pp.speed_x, 0.0};
  e.y1 = -0.5 * dy;
  e.y2 = 0.5 * dy;
  e.z1 = z1;
  e.z2 = z2;
  return to_pair(e);
}

TrajectoryPair exp2_window_pass(double t, const Exp2Params& pp, double duration) {
  if (t < 0.0 || t > duration)
    throw PhaseOutOfRange("t = " + std::to_string(t) + " outside [0, " +
                          std::to_string(duration) + "]");
  const Jet x = fading_advance(t, pp.x0, pp.speed_x, pp.hold_begin - 2.0);
  const Jet z = jconst(pp.z_start) + (pp.z_peak - pp.z_start) * jsmooth(t, 2.0, 16.0) -
                (pp.z_peak - pp.z_pass) * jsmooth(t, 18.0, 28.0) +
                0.2 * jsmooth(t, pp.hold_end + 1.0, pp.hold_end + 5.0) -
                0.55 * jsmooth(t, pp.hold_end + 6.0, duration - 0.5);
  const Jet d_free = 0.85 + jsin(0.25, kTwoPi / 9.0, 0.0, t);
  Jet d = jblend(d_free, jconst(pp.dist_pass), jsmooth(t, 15.0, 17.0));
  d = jblend(d, jconst(pp.dist_recover), jsmooth(t, pp.hold_end, pp.hold_end + 5.0));
  const Jet env = jconst(1.0) - jsmooth(t, 15.0, 17.0);
  const Jet w1 = env * jsin(0.05, kTwoPi / 5.0, 0.0, t);
  const Jet w2 = env * jsin(0.05, kTwoPi / 3.5, 0.0, t);
  const Jet dh = w2 - w1;
  const Jet dy = jsqrt(d * d - dh * dh);
  EndpointJets e;
  e.x1 = e.x2 = x;
  e.y1 = -0.5 * dy;
  e.y2 = 0.5 * dy;
  e.z1 = z + w1;
  e.z2 = z + w2;
  return to_pair(e);
}

TrajectoryPair exp3_dual_window(double t, const Exp3Params& pp, double duration) {
  if (t < 0.0 || t > duration)
    throw PhaseOutOfRange("t = " + std::to_string(t) + " outside [0, " +
                          std::to_string(duration) + "]");
  const double t1 = pp.phase1_end;
  const double mid = 0.5 * (pp.dist_min + pp.dist_max);
  const double amp = 0.5 * (pp.dist_max - pp.dist_min);

  // phase A: distance sweep, full-circle yaw, elevation and center wobble
  const Jet dA = mid + jcos(amp, kTwoPi / pp.dist_period, 0.0, t);
  const Jet yawA = Jet{kTwoPi * t / t1, kTwoPi / t1, 0.0};
  const Jet elevA = jsin(0.1, kTwoPi / 7.0, 0.0, t);
  const Jet cxA = jsin(2.0, kTwoPi / 30.0, 0.0, t);
  const Jet cyA = jsin(0.1, kTwoPi / 6.0, 0.0, t);
  const Jet czA = pp.z0 + jsin(0.1, kTwoPi / 5.5, 0.0, t);
  const Jet ce = jcos_of(elevA), se = jsin_of(elevA);
  const Jet rxA = dA * ce * jcos_of(yawA);
  const Jet ryA = dA * ce * jsin_of(yawA);
  const Jet rzA = dA * se;

  // phase B: straight traverse along x, window distance, late re-orientation
  const double t0 = t1 + 4.0;
  const double stop0 = t0 + (pp.window2_x + 2.2) / pp.speed_x;
  const Jet xB = fading_advance(t - t0, 0.0, pp.speed_x, stop0 - t0);
  const double reorient0 =
      t0 + 0.5 * (pp.window1_x + pp.window2_x) / pp.speed_x - 3.0;
  const Jet yawB = 0.5 * M_PI * (jconst(1.0) - jsmooth(t, reorient0, reorient0 + 6.0));
  const Jet dB = jblend(jconst(pp.dist_pass), jconst(pp.dist_final),
                        jsmooth(t, stop0 + 4.0, stop0 + 14.0));
  const Jet zB = jblend(jconst(pp.z_pass), jconst(pp.z_final),
                        jsmooth(t, stop0 + 4.0, stop0 + 12.0));
  const Jet rxB = dB * jcos_of(yawB);
  const Jet ryB = dB * jsin_of(yawB);

  const Jet s = jsmooth(t, t1, t0);
  const Jet cx = jblend(cxA, xB, s);
  const Jet cy = jblend(cyA, jconst(0.0), s);
  const Jet cz = jblend(czA, zB, s);
  const Jet rx = jblend(rxA, rxB, s);
  const Jet ry = jblend(ryA, ryB, s);
  const Jet rz = jblend(rzA, jconst(0.0), s);

  EndpointJets e;
  e.x1 = cx - 0.5 * rx;
  e.y1 = cy - 0.5 * ry;
  e.z1 = cz - 0.5 * rz;
  e.x2 = cx + 0.5 * rx;
  e.y2 = cy + 0.5 * ry;
  e.z2 = cz + 0.5 * rz;
  return to_pair(e);
}

TrajectoryPair custom_hover(double /*t*/, const CustomParams& pp) {
  const Vec3<double> half =
      0.5 * pp.distance * Vec3<double>(std::cos(pp.yaw), std::sin(pp.yaw), 0.0);
  TrajectoryPair out;
  out.first.p_d = pp.center - half;
  out.second.p_d = pp.center + half;
  return out;
}

TrajectoryPair validation_reference(double t) {
  const Jet d = 0.625 + jsin(0.34, kTwoPi * 0.11, 0.0, t) + jsin(0.16, kTwoPi * 0.29, 1.2, t);
  const Jet incl = jsin(0.80, kTwoPi * 0.17, 0.4, t) + jsin(0.50, kTwoPi * 0.41, 0.9, t);
  const Jet ry = d * jcos_of(incl);
  const Jet rz = d * jsin_of(incl);
  EndpointJets e;
  e.x1 = e.x2 = jconst(0.0);
  e.y1 = -0.5 * ry;
  e.z1 = 1.5 + (-0.5 * rz);
  e.y2 = 0.5 * ry;
  e.z2 = 1.5 + 0.5 * rz;
  return to_pair(e);
}

TrajectoryPair superimpose_excitation(const TrajectoryPair& base, double t,
                                      const std::vector<ExcitationComponent>& components) {
  TrajectoryPair out = base;
  for (const auto& c : components) {
    TrajectoryPoint<double>& pt = c.endpoint == 0 ? out.first : out.second;
    const double omega = kTwoPi * c.frequency;
    pt.p_d[c.axis] += c.amplitude * std::sin(omega * t + c.phase);
    pt.v_d[c.axis] += c.amplitude * omega * std::cos(omega * t + c.phase);
    pt.a_d[c.axis] -= c.amplitude * omega * omega * std::sin(omega * t + c.phase);
  }
  return out;
}

TrajectoryPair evaluate_scenario(const ScenarioSpec& spec, double t) {
  TrajectoryPair base;
  switch (spec.kind) {
    case ScenarioKind::VaryingDistance:
      base = exp1_varying_distance(t, spec.exp1);
      break;
    case ScenarioKind::WindowPass:
      base = exp2_window_pass(t, spec.exp2, spec.duration);
      break;
    case ScenarioKind::DualWindow:
      base = exp3_dual_window(t, spec.exp3, spec.duration);
      break;
    case ScenarioKind::Custom:
      base = custom_hover(t, spec.custom);
      break;
    case ScenarioKind::Validation:
      base = validation_reference(t);
      break;
  }
  if (spec.excitation.empty()) return base;
  return superimpose_excitation(base, t, spec.excitation);
}

std::vector<WindowSpec> scenario_windows(const ScenarioSpec& spec) {
  if (spec.kind == ScenarioKind::WindowPass) {
    const auto& p = spec.exp2;
    return {{p.window_x, p.window_half_width, p.window_z_min, p.window_z_max}};
  }
  if (spec.kind == ScenarioKind::DualWindow) {
    const auto& p = spec.exp3;
    return {{p.window1_x, p.window_half_width, p.window_z_min, p.window_z_max},
            {p.window2_x, p.window_half_width, p.window_z_min, p.window_z_max}};
  }
  return {};
}

void check_distance_bounds(const ScenarioSpec& spec, double L0, double sample_dt) {
  const double hi = L0 - 0.05;
  for (double t = 0.0; t <= spec.duration + 1e-9; t += sample_dt) {
    const TrajectoryPair pair = evaluate_scenario(spec, std::min(t, spec.duration));
    const double dist = (pair.second.p_d - pair.first.p_d).norm();
    if (dist < 0.1 || dist > hi)
      throw DistanceBoundViolation("commanded endpoint distance " + std::to_string(dist) +
                                   " at t = " + std::to_string(t) + " outside [0.1, " +
                                   std::to_string(hi) + "]");
  }
}

}  // namespace bendsim
