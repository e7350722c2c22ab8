#include "bendsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bendsim/errors.hpp"
#include "bendsim/features.hpp"
#include "bendsim/geom.hpp"

namespace bendsim {
namespace {

// standard normal built on raw mt19937 words, so logs do not depend on the
// standard library's distribution implementation
class Gaussian {
 public:
  explicit Gaussian(unsigned seed) : gen_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  Vec3<double> vec3() {
    Vec3<double> out;
    out.x() = (*this)();
    out.y() = (*this)();
    out.z() = (*this)();
    return out;
  }

 private:
  double uniform() { return (static_cast<double>(gen_()) + 0.5) / 4294967296.0; }

  std::mt19937 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

class ElasticaTruth final : public GroundTruth {
 public:
  explicit ElasticaTruth(const RodSpec& spec) : solver_(spec) {}

  std::pair<Vec3<double>, Vec3<double>> forces(const Vec3<double>& p1,
                                               const Vec3<double>& v1,
                                               const Vec3<double>& p2,
                                               const Vec3<double>& v2) override {
    const RodConfig& cfg = solver_.solve(p1, p2);
    const RodReaction reaction = endpoint_reactions(solver_.spec(), cfg, v2 - v1);
    energy_ = reaction.energy;
    return {reaction.f1, reaction.f2};
  }

  double last_energy() const override { return energy_; }

  void reset_transients() override { solver_.reset(); }

 private:
  RodSolver solver_;
  double energy_ = std::numeric_limits<double>::quiet_NaN();
};

class SyntheticLinearTruth final : public GroundTruth {
 public:
  SyntheticLinearTruth(FeatureKind kind, int order, double frobenius_norm,
                       unsigned seed)
      : kind_(kind), order_(order) {
    Gaussian g(seed);
    for (auto& W : W_) {
      W.resize(feature_length(order), 3);
      for (Eigen::Index r = 0; r < W.rows(); ++r)
        for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = g();
      W *= frobenius_norm / W.norm();
    }
  }

  std::pair<Vec3<double>, Vec3<double>> forces(const Vec3<double>& p1,
                                               const Vec3<double>& v1,
                                               const Vec3<double>& p2,
                                               const Vec3<double>& v2) override {
    const Vec3<double> r = p2 - p1, rd = v2 - v1;
    Mat3<double> R;
    Eigen::VectorXd phi;
    if (kind_ == FeatureKind::PlanePolynomial) {
      R = plane_frame<double>(r).rotation;
      phi = features_plane<double>(project_to_plane<double>({R, true}, r),
                                   project_to_plane<double>({R, true}, rd), order_);
    } else {
      const DisplacementFrame<double> df = displacement_frame(p1, p2);
      R = df.rotation;
      const double dist = r.norm();
      phi = features_physical<double>(dist, r.dot(rd) / dist, df.alpha, order_);
    }
    return {R * (W_[0].transpose() * phi), R * (W_[1].transpose() * phi)};
  }

  const Eigen::MatrixXd* true_weights(int vehicle) const override {
    return &W_[vehicle];
  }

 private:
  FeatureKind kind_;
  int order_;
  std::array<Eigen::MatrixXd, 2> W_;
};

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / xs.size();
}

double std_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  const double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / xs.size());
}

FeatureKind method_kind(Method m) {
  return m == Method::AdaptivePhi ? FeatureKind::PlanePolynomial
                                  : FeatureKind::PhysicalInsight;
}

void detect_crossings(TrialReport& report, const std::vector<WindowSpec>& windows) {
  for (size_t wi = 0; wi < windows.size(); ++wi) {
    const WindowSpec& w = windows[wi];
    for (int i = 0; i < 2; ++i) {
      for (size_t k = 1; k < report.steps.size(); ++k) {
        const Vec3<double>&a = report.steps[k - 1].p[i], &b = report.steps[k].p[i];
        const double fa = a.x() - w.x_center, fb = b.x() - w.x_center;
        if (fa == 0.0 || fa * fb >= 0.0) continue;
        const double s = fa / (fa - fb);
        WindowCrossing c;
        c.window = static_cast<int>(wi);
        c.endpoint = i;
        c.t = report.steps[k - 1].t + s * (report.steps[k].t - report.steps[k - 1].t);
        c.y = a.y() + s * (b.y() - a.y());
        c.z = a.z() + s * (b.z() - a.z());
        c.pass = std::abs(c.y) <= w.half_width_y && c.z >= w.z_min && c.z <= w.z_max;
        report.crossings.push_back(c);
      }
    }
  }
  if (windows.empty()) return;
  bool ok = !report.diverged;
  for (size_t wi = 0; wi < windows.size() && ok; ++wi)
    for (int i = 0; i < 2 && ok; ++i) {
      bool crossed = false;
      for (const auto& c : report.crossings)
        if (c.window == static_cast<int>(wi) && c.endpoint == i) {
          crossed = true;
          if (!c.pass) ok = false;
        }
      ok = ok && crossed;
    }
  report.task_success = ok;
}

}  // namespace

std::optional<Method> parse_method(const std::string& name) {
  for (Method m : {Method::PidLow, Method::PidHigh, Method::AdaptivePhi,
                   Method::AdaptivePhib})
    if (name == method_name(m)) return m;
  return std::nullopt;
}

Gains<double> SimConfig::gains_for(Method m) const {
  Gains<double> g;
  g.kp = kp;
  g.kd = kd;
  g.i_max = i_max;
  g.u_max = u_max;
  g.ki = m == Method::PidLow ? ki_low : (m == Method::PidHigh ? ki_high : 0.0);
  return g;
}

std::unique_ptr<GroundTruth> make_elastica_truth(const RodSpec& spec) {
  return std::make_unique<ElasticaTruth>(spec);
}

std::unique_ptr<GroundTruth> make_synthetic_truth(FeatureKind kind, int order,
                                                  double frobenius_norm,
                                                  unsigned seed) {
  return std::make_unique<SyntheticLinearTruth>(kind, order, frobenius_norm, seed);
}

std::pair<Vec3<double>, Vec3<double>> step(World& world, double dt) {
  std::pair<Vec3<double>, Vec3<double>> f{Vec3<double>::Zero(), Vec3<double>::Zero()};
  auto& v = world.vehicles;
  if (world.truth) f = world.truth->forces(v[0].p, v[0].v, v[1].p, v[1].v);
  for (int i = 0; i < 2; ++i) {
    const Vec3<double>& fi = i == 0 ? f.first : f.second;
    const Vec3<double> acc =
        (world.u[i] + fi) / v[i].m - kGravity * world_up<double>();
    v[i].a_true = acc;
    v[i].v += dt * acc;
    v[i].p += dt * v[i].v;
    if (v[i].p.norm() > 100.0 || v[i].v.norm() > 50.0)
      throw DivergenceDetected("vehicle " + std::to_string(i + 1) + " left the arena");
  }
  return f;
}

EstimatorPair fresh_estimators(const SimConfig& cfg) {
  auto one = EstimatorState<double>::zero_init(cfg.feature_kind, cfg.feature_order,
                                               cfg.p0, cfg.lambda);
  return {one, one};
}

std::pair<TrialReport, EstimatorPair> run_trial(const SimConfig& cfg, int trial_index,
                                                EstimatorPair estimators,
                                                GroundTruth& truth) {
  TrialReport report;
  report.method = cfg.method;
  report.trial = trial_index;

  const bool adaptive =
      cfg.method == Method::AdaptivePhi || cfg.method == Method::AdaptivePhib;
  const int nticks = static_cast<int>(cfg.duration / cfg.dt_control + 0.5);
  const int nsub = cfg.substeps();
  const Gains<double> gains = cfg.gains_for(cfg.method);
  Gaussian noise(cfg.seed + static_cast<unsigned>(trial_index));

  const TrajectoryPair ref0 = evaluate_scenario(cfg.scenario, 0.0);
  World world;
  world.truth = &truth;
  world.vehicles[0].p = ref0.first.p_d;
  world.vehicles[0].v = ref0.first.v_d;
  world.vehicles[1].p = ref0.second.p_d;
  world.vehicles[1].v = ref0.second.v_d;
  for (auto& v : world.vehicles) v.m = cfg.mass;

  const Vec3<double> hover = cfg.mass * kGravity * world_up<double>();
  std::array<Vec3<double>, 2> u_applied{hover + cfg.mass * ref0.first.a_d,
                                        hover + cfg.mass * ref0.second.a_d};
  std::array<Vec3<double>, 2> u_prev_cmd = u_applied;
  std::array<Vec3<double>, 2> last_sub_u = u_applied;
  std::array<Vec3<double>, 2> last_sub_f{Vec3<double>::Zero(), Vec3<double>::Zero()};
  std::array<Vec3<double>, 2> last_sub_a{Vec3<double>::Zero(), Vec3<double>::Zero()};
  std::array<Vec3<double>, 2> integral{Vec3<double>::Zero(), Vec3<double>::Zero()};

  // solve the truth once at the initial state so the first record row reports
  // the strip energy instead of a not-yet-computed sentinel
  truth.forces(world.vehicles[0].p, world.vehicles[0].v, world.vehicles[1].p,
               world.vehicles[1].v);

  Mat3<double> last_plane = Mat3<double>::Identity();
  bool have_plane = false;
  const int order = estimators[0].order;
  report.steps.reserve(nticks);

  for (int k = 0; k < nticks; ++k) {
    const double t = k * cfg.dt_control;
    const TrajectoryPair refs = evaluate_scenario(cfg.scenario, t);
    StepRecord rec;
    rec.t = t;

    Eigen::VectorXd phi;
    Mat3<double> R_feat = Mat3<double>::Identity();
    std::pair<Vec3<double>, Vec3<double>> f_now{Vec3<double>::Zero(),
                                                Vec3<double>::Zero()};
    if (adaptive) {
      const Vec3<double> r = world.vehicles[1].p - world.vehicles[0].p;
      const Vec3<double> rd = world.vehicles[1].v - world.vehicles[0].v;
      try {
        last_plane = plane_frame<double>(r).rotation;
        have_plane = true;
      } catch (const DegenerateDisplacement&) {
        if (!have_plane) throw;
      }
      if (estimators[0].kind == FeatureKind::PlanePolynomial) {
        R_feat = last_plane;
        phi = features_plane<double>(R_feat.transpose() * r,
                                     R_feat.transpose() * rd, order);
      } else {
        const DisplacementFrame<double> df = displacement_frame<double>(
            world.vehicles[0].p, world.vehicles[1].p, {last_plane, true});
        R_feat = df.rotation;
        const double dist = r.norm();
        phi = features_physical<double>(dist, r.dot(rd) / dist, df.alpha, order);
      }
      if (cfg.observer_delay == 0)
        f_now = truth.forces(world.vehicles[0].p, world.vehicles[0].v,
                             world.vehicles[1].p, world.vehicles[1].v);
    }

    double V_p = 0.0, V_W = 0.0, w_err = 0.0;
    bool have_W = true;
    std::array<ControlCommand<double>, 2> cmds;
    for (int i = 0; i < 2; ++i) {
      const TrajectoryPoint<double>& ref = i == 0 ? refs.first : refs.second;
      const VehicleState& veh = world.vehicles[i];
      const Vec3<double> e = ref.p_d - veh.p;
      const Vec3<double> e_dot = ref.v_d - veh.v;

      if (adaptive) {
        Vec3<double> f_o = Vec3<double>::Zero();
        bool have_sample = false;
        if (cfg.observer_delay == 0) {
          f_o = i == 0 ? f_now.first : f_now.second;
          rec.f_true_sample[i] = f_o;
          have_sample = true;
        } else if (k > 0) {
          const Vec3<double> a_meas =
              last_sub_a[i] + cfg.sigma_a * noise.vec3();
          f_o = observe_force(cfg.mass, a_meas, last_sub_u[i]);
          rec.f_true_sample[i] = last_sub_f[i];
          have_sample = true;
        }
        rec.f_o[i] = f_o;
        if (have_sample) {
          const Vec3<double> f_frame = R_feat.transpose() * f_o;
          rec.eps[i] = f_frame - estimators[i].W_hat.transpose() * phi;
          estimators[i] = rls_step(estimators[i], phi, f_frame, cfg.dt_control);
        }
        const Vec3<double> f_hat = predict_force(estimators[i], phi, R_feat);
        cmds[i] = adaptive_control(gains, cfg.mass, e, e_dot, ref.a_d, f_hat);
      } else {
        cmds[i] = pid_control(gains, cfg.mass, e, e_dot, ref.a_d, integral[i],
                              cfg.dt_control);
      }

      rec.p[i] = veh.p;
      rec.p_d[i] = ref.p_d;
      rec.e[i] = e;
      rec.u[i] = cmds[i].u;
      rec.f_hat[i] = cmds[i].f_hat_o;
      report.saturated = report.saturated || cmds[i].saturated;
      report.max_command_jump =
          std::max(report.max_command_jump, (cmds[i].u - u_prev_cmd[i]).norm());
      u_prev_cmd[i] = cmds[i].u;

      V_p += lyapunov_position(cfg.mass, gains.kp, e, e_dot);
      const Eigen::MatrixXd* W_true = truth.true_weights(i);
      if (adaptive && W_true) {
        V_W += lyapunov_weights(estimators[i], *W_true);
        w_err = std::max(w_err, (*W_true - estimators[i].W_hat).norm());
      } else {
        have_W = false;
      }
    }
    rec.V_p = V_p;
    if (have_W) {
      rec.V_W = V_W;
      rec.w_err = w_err;
    }
    rec.rod_energy = truth.last_energy();
    report.steps.push_back(std::move(rec));

    if (adaptive && cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0) {
      EstimatorSnapshot snap;
      snap.t = t;
      for (int i = 0; i < 2; ++i) {
        snap.W_hat[i] = estimators[i].W_hat;
        snap.P[i] = estimators[i].P;
      }
      report.snapshots.push_back(std::move(snap));
    }

    try {
      for (int s = 0; s < nsub; ++s) {
        for (int i = 0; i < 2; ++i) {
          if (cfg.thrust_filter) {
            const double a = std::exp(-cfg.dt_physics / cfg.thrust_tau);
            u_applied[i] = cmds[i].u + a * (u_applied[i] - cmds[i].u);
          } else {
            u_applied[i] = cmds[i].u;
          }
          world.u[i] = u_applied[i];
        }
        last_sub_u = u_applied;
        const auto f = step(world, cfg.dt_physics);
        last_sub_f[0] = f.first;
        last_sub_f[1] = f.second;
        last_sub_a[0] = world.vehicles[0].a_true;
        last_sub_a[1] = world.vehicles[1].a_true;
      }
    } catch (const DivergenceDetected&) {
      report.diverged = true;
      report.task_success = false;
      break;
    }
  }

  std::vector<double> errs, hold_errs;
  errs.reserve(report.steps.size());
  const bool window_pass = cfg.scenario.kind == ScenarioKind::WindowPass;
  for (const auto& s : report.steps) {
    const double err = 0.5 * (s.e[0].norm() + s.e[1].norm());
    errs.push_back(err);
    if (window_pass && s.t >= cfg.scenario.exp2.hold_measure_begin &&
        s.t <= cfg.scenario.exp2.hold_measure_end)
      hold_errs.push_back(err);
  }
  report.mean_error = mean_of(errs);
  report.std_error = std_of(errs);
  if (!hold_errs.empty()) {
    report.hold_mean = mean_of(hold_errs);
    report.hold_std = std_of(hold_errs);
  }
  if (!report.diverged) detect_crossings(report, scenario_windows(cfg.scenario));

  return {std::move(report), std::move(estimators)};
}

BatchReport run_batch(const SimConfig& cfg) {
  SimConfig c = cfg;
  const bool adaptive =
      c.method == Method::AdaptivePhi || c.method == Method::AdaptivePhib;
  if (adaptive) c.feature_kind = method_kind(c.method);

  std::unique_ptr<GroundTruth> truth =
      c.truth == TruthKind::Elastica
          ? make_elastica_truth(c.rod)
          : make_synthetic_truth(c.feature_kind, c.feature_order, c.w_true_scale,
                                 c.seed);

  BatchReport out;
  out.method = c.method;
  EstimatorPair est = fresh_estimators(c);
  for (int tr = 0; tr < c.trials; ++tr) {
    truth->reset_transients();
    auto [rep, carried] = run_trial(c, tr, std::move(est), *truth);
    est = std::move(carried);
    out.trials.push_back(std::move(rep));
  }
  return out;
}

std::vector<double> lyapunov_trace(const TrialReport& report) {
  std::vector<double> out;
  out.reserve(report.steps.size());
  for (const auto& s : report.steps) {
    if (std::isnan(s.V_W))
      throw UnavailableGroundTruth(
          "weight-error storage term needs the synthetic linear truth");
    out.push_back(s.V_p + s.V_W);
  }
  return out;
}

}  // namespace bendsim
