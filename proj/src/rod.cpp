#include "bendsim/rod.hpp"

#include <cmath>

#include "bendsim/errors.hpp"
#include "bendsim/geom.hpp"

namespace bendsim {
namespace {

constexpr double kGradTol = 1e-9;
constexpr double kConstraintTol = 1e-12;
constexpr int kMaxIterations = 200;

double chord_of_turn(int N, double seg, double d) {
  if (std::abs(d) < 1e-12) return seg * N;
  return seg * std::sin(N * d / 2.0) / std::sin(d / 2.0);
}

// uniform turning angle whose chain chord equals target, bisection on the
// monotone branch (0, 2 pi / N)
double turn_for_chord(int N, double seg, double target) {
  double lo = 0.0, hi = 2.0 * M_PI / N - 1e-9;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chord_of_turn(N, seg, mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct Ctx {
  const RodSpec& spec;
  double seg;
  double delta0;
  Eigen::Vector2d d;  // imposed chord, plane coords
};

// E = bending + gravity over segment midpoint heights above base_eta
double energy_plane(const Ctx& c, const Eigen::VectorXd& th, double base_eta) {
  const int N = c.spec.N;
  double eb = 0.0;
  for (int j = 0; j + 1 < N; ++j) {
    const double t = th[j + 1] - th[j] - c.delta0;
    eb += 0.5 * c.spec.k_b[j] * t * t;
  }
  double eg = 0.0, cum = 0.0;
  for (int k = 0; k < N; ++k) {
    const double s = std::sin(th[k]);
    eg += c.spec.m_s[k] * (base_eta + c.seg * cum + 0.5 * c.seg * s);
    cum += s;
  }
  return eb + kGravity * eg;
}

// also fills w with the effective weight factor per segment,
// dE_g/dth_k = g seg cos(th_k) w_k with w_k = m_k/2 + sum of masses beyond k
void grad_energy(const Ctx& c, const Eigen::VectorXd& th, Eigen::VectorXd& g,
                 Eigen::VectorXd& w) {
  const int N = c.spec.N;
  g.setZero(N);
  for (int j = 0; j + 1 < N; ++j) {
    const double t = c.spec.k_b[j] * (th[j + 1] - th[j] - c.delta0);
    g[j] -= t;
    g[j + 1] += t;
  }
  w.resize(N);
  double run = 0.0;
  for (int k = N - 1; k >= 0; --k) {
    w[k] = 0.5 * c.spec.m_s[k] + run;
    run += c.spec.m_s[k];
  }
  for (int k = 0; k < N; ++k) g[k] += kGravity * c.seg * std::cos(th[k]) * w[k];
}

Eigen::MatrixXd hess_energy(const Ctx& c, const Eigen::VectorXd& th,
                            const Eigen::VectorXd& w) {
  const int N = c.spec.N;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(N, N);
  for (int j = 0; j + 1 < N; ++j) {
    const double k = c.spec.k_b[j];
    H(j, j) += k;
    H(j + 1, j + 1) += k;
    H(j, j + 1) -= k;
    H(j + 1, j) -= k;
  }
  for (int k = 0; k < N; ++k) H(k, k) += -kGravity * c.seg * std::sin(th[k]) * w[k];
  return H;
}

Eigen::Vector2d constraint(const Ctx& c, const Eigen::VectorXd& th) {
  double sx = 0.0, sy = 0.0;
  for (int k = 0; k < c.spec.N; ++k) {
    sx += std::cos(th[k]);
    sy += std::sin(th[k]);
  }
  return Eigen::Vector2d(c.seg * sx - c.d[0], c.seg * sy - c.d[1]);
}

Eigen::Matrix<double, 2, Eigen::Dynamic> constraint_jac(const Ctx& c,
                                                        const Eigen::VectorXd& th) {
  Eigen::Matrix<double, 2, Eigen::Dynamic> J(2, c.spec.N);
  for (int k = 0; k < c.spec.N; ++k) {
    J(0, k) = -c.seg * std::sin(th[k]);
    J(1, k) = c.seg * std::cos(th[k]);
  }
  return J;
}

// uniform-turn chain matching the chord, bowed to the natural side
Eigen::VectorXd init_theta(const Ctx& c) {
  const int N = c.spec.N;
  double dist = c.d.norm();
  dist = std::min(dist, c.spec.L0 * (1.0 - 1e-9));
  const double dl = -turn_for_chord(N, c.seg, dist);
  const double phi = std::atan2(c.d[1], c.d[0]);
  Eigen::VectorXd th(N);
  for (int j = 0; j < N; ++j) th[j] = phi + dl * (j - (N - 1) / 2.0);
  return th;
}

Eigen::Vector2d ls_multipliers(const Eigen::Matrix<double, 2, Eigen::Dynamic>& J,
                               const Eigen::VectorXd& g) {
  const Eigen::MatrixXd Jt = J.transpose();
  return Jt.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-g);
}

struct Residual {
  Eigen::VectorXd R, g, w;
  Eigen::Matrix<double, 2, Eigen::Dynamic> J;
  Eigen::Vector2d C;
};

Residual kkt_residual(const Ctx& c, const Eigen::VectorXd& th,
                      const Eigen::Vector2d& mu) {
  Residual r;
  grad_energy(c, th, r.g, r.w);
  r.J = constraint_jac(c, th);
  r.C = constraint(c, th);
  r.R.resize(c.spec.N + 2);
  r.R.head(c.spec.N) = r.g + r.J.transpose() * mu;
  r.R.tail(2) = r.C;
  return r;
}

}  // namespace

RodSpec RodSpec::two_zone_default() {
  RodSpec s;
  s.k_b.setZero(15);
  s.k_b.head(8).setConstant(4.2);
  s.k_b.tail(7).setConstant(3.0);
  s.m_s.setZero(16);
  s.m_s.head(8).setConstant(0.055 * 0.6 / 8);
  s.m_s.tail(8).setConstant(0.055 * 0.4 / 8);
  return s;
}

double natural_turn(const RodSpec& spec) {
  return -turn_for_chord(spec.N, spec.segment_length(), spec.r0);
}

RodConfig solve_equilibrium(const RodSpec& spec, const Vec3<double>& p1,
                            const Vec3<double>& p2, const RodConfig* warm_start) {
  const Vec3<double> r = p2 - p1;
  const double dist = r.norm();
  if (dist <= kGeomEps) throw CoincidentEndpoints("rod endpoints coincide");
  if (dist >= spec.L0 - kGeomEps)
    throw TautRod("endpoint distance " + std::to_string(dist) +
                  " leaves no slack against curve length " + std::to_string(spec.L0));

  Mat3<double> frame;
  try {
    frame = plane_frame<double>(r).rotation;
  } catch (const DegenerateDisplacement&) {
    if (!warm_start) throw;
    frame = warm_start->frame;
  }

  Ctx c{spec, spec.segment_length(), natural_turn(spec),
        Eigen::Vector2d(r.dot(frame.col(0)), r.dot(frame.col(2)))};

  RodConfig out;
  out.frame = frame;
  out.p1 = p1;
  out.chord = c.d;

  const int N = spec.N;
  Eigen::VectorXd th = warm_start ? warm_start->theta : init_theta(c);
  Eigen::Vector2d mu = warm_start ? warm_start->mu : Eigen::Vector2d::Zero();

  Residual res = kkt_residual(c, th, mu);
  for (int it = 0; it < kMaxIterations; ++it) {
    const Eigen::Matrix2d JJt = res.J * res.J.transpose();
    const Eigen::VectorXd gproj =
        res.g - res.J.transpose() * JJt.fullPivLu().solve(res.J * res.g);
    if (gproj.norm() <= kGradTol && res.C.norm() <= kConstraintTol) {
      out.theta = th;
      out.mu = ls_multipliers(res.J, res.g);
      out.iterations = it;
      return out;
    }

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N + 2, N + 2);
    K.topLeftCorner(N, N) = hess_energy(c, th, res.w);
    for (int k = 0; k < N; ++k)
      K(k, k) += -c.seg * (mu[0] * std::cos(th[k]) + mu[1] * std::sin(th[k]));
    K.topRightCorner(N, 2) = res.J.transpose();
    K.bottomLeftCorner(2, N) = res.J;

    bool took = false;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    if (lu.isInvertible()) {
      const Eigen::VectorXd step = lu.solve(-res.R);
      if (step.allFinite()) {
        const double r0n = res.R.norm();
        double alpha = 1.0;
        for (int bt = 0; bt < 40; ++bt) {
          const Eigen::VectorXd th_t = th + alpha * step.head(N);
          const Eigen::Vector2d mu_t = mu + alpha * step.tail(2);
          Residual rt = kkt_residual(c, th_t, mu_t);
          if (rt.R.norm() < (1.0 - 1e-4 * alpha) * r0n) {
            th = th_t;
            mu = mu_t;
            res = std::move(rt);
            took = true;
            break;
          }
          alpha *= 0.5;
        }
      }
    }
    if (!took) {
      // gradient descent on the augmented Lagrangian, then refresh the
      // multipliers by least squares
      const double beta = 10.0 * std::max(1.0, mu.norm());
      const Eigen::VectorXd ga =
          res.g + res.J.transpose() * (mu + beta * res.C);
      const double e0 =
          energy_plane(c, th, 0.0) + mu.dot(res.C) + 0.5 * beta * res.C.squaredNorm();
      double alpha = 1e-2;
      for (int bt = 0; bt < 40; ++bt) {
        const Eigen::VectorXd th_t = th - alpha * ga;
        const Eigen::Vector2d ct = constraint(c, th_t);
        const double et =
            energy_plane(c, th_t, 0.0) + mu.dot(ct) + 0.5 * beta * ct.squaredNorm();
        if (et < e0) break;
        alpha *= 0.5;
      }
      th -= alpha * ga;
      Eigen::VectorXd g, w;
      grad_energy(c, th, g, w);
      const auto J = constraint_jac(c, th);
      mu = ls_multipliers(J, g);
      res = kkt_residual(c, th, mu);
    }
  }
  throw NoConvergence("rod equilibrium iteration cap hit, chord (" +
                      std::to_string(c.d[0]) + ", " + std::to_string(c.d[1]) + ")");
}

RodReaction endpoint_reactions(const RodSpec& spec, const RodConfig& config) {
  RodReaction out;
  const Eigen::Vector2d f2 = config.mu;
  const Eigen::Vector2d f1(-config.mu[0],
                           -config.mu[1] - spec.total_mass() * kGravity);
  const Vec3<double> xp = config.frame.col(0), zp = config.frame.col(2);
  out.f1 = xp * f1[0] + zp * f1[1];
  out.f2 = xp * f2[0] + zp * f2[1];
  out.energy = rod_energy(spec, config);
  return out;
}

RodReaction endpoint_reactions(const RodSpec& spec, const RodConfig& config,
                               const Vec3<double>& r_rate) {
  RodReaction out = endpoint_reactions(spec, config);
  out.f1 += spec.damping * r_rate;
  out.f2 -= spec.damping * r_rate;
  return out;
}

double rod_energy(const RodSpec& spec, const RodConfig& config) {
  Ctx c{spec, spec.segment_length(), natural_turn(spec), config.chord};
  return energy_plane(c, config.theta, config.p1.z());
}

const RodConfig& RodSolver::solve(const Vec3<double>& p1, const Vec3<double>& p2) {
  try {
    warm_ = solve_equilibrium(spec_, p1, p2, warm_ ? &*warm_ : nullptr);
  } catch (const NoConvergence&) {
    warm_ = solve_equilibrium(spec_, p1, p2, nullptr);
  }
  return *warm_;
}

}  // namespace bendsim
