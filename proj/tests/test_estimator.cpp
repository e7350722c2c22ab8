#include <cmath>
#include <random>

#include <doctest.h>

#include "bendsim/estimator.hpp"

using namespace bendsim;

namespace {

EstimatorState<double> tiny_state(double p0) {
  EstimatorState<double> st;
  st.W_hat = Eigen::MatrixXd::Zero(2, 3);
  st.P = p0 * Eigen::MatrixXd::Identity(2, 2);
  st.lambda = 0.0;
  return st;
}

}  // namespace

TEST_CASE("observer recovers nothing at an exact hover") {
  const double m = 0.135;
  const Vec3<double> u = m * kGravity * world_up<double>();
  CHECK(observe_force<double>(m, Vec3<double>::Zero(), u).norm() < 1e-15);
}

TEST_CASE("observer attributes unexplained acceleration to an external force") {
  const double m = 0.135;
  const Vec3<double> u = m * kGravity * world_up<double>();
  const Vec3<double> f = observe_force<double>(m, Vec3<double>(1.0, 0.0, 0.0), u);
  CHECK((f - Vec3<double>(0.135, 0.0, 0.0)).norm() < 1e-12);
}

TEST_CASE("recursive estimate matches batch least squares") {
  std::mt19937 gen(17);
  std::normal_distribution<double> noise(0.0, 0.01);
  const Eigen::Vector2d w_true(2.0, -1.0);

  EstimatorState<double> st = tiny_state(1e8);
  const int n = 500;
  Eigen::MatrixXd big_phi(n, 2);
  Eigen::VectorXd big_f(n);
  for (int k = 0; k < n; ++k) {
    const double x = std::sin(0.13 * k) + 0.3 * std::cos(0.41 * k);
    VecX<double> phi(2);
    phi << x, 1.0;
    const double f = w_true.dot(phi) + noise(gen);
    big_phi.row(k) = phi.transpose();
    big_f[k] = f;
    st = rls_step<double>(st, phi, Vec3<double>(f, 0.0, 0.0), 0.01);
  }
  const Eigen::Vector2d w_batch = big_phi.colPivHouseholderQr().solve(big_f);
  CHECK((st.W_hat.col(0) - w_batch).norm() < 1e-3);
  CHECK(st.W_hat.col(1).norm() < 1e-12);
  CHECK(st.W_hat.col(2).norm() < 1e-12);
}

TEST_CASE("consistent sample leaves the weights alone but tightens confidence") {
  EstimatorState<double> st = tiny_state(1.0);
  st.W_hat << 0.5, -0.2, 0.0, 1.5, 0.3, -0.7;
  VecX<double> phi(2);
  phi << 0.8, 1.0;
  const Vec3<double> f = st.W_hat.transpose() * phi;
  const auto before = st.P;
  const auto next = rls_step<double>(st, phi, f, 0.01);
  CHECK((next.W_hat - st.W_hat).norm() < 1e-15);
  CHECK(phi.dot(next.P * phi) < phi.dot(before * phi));
}

TEST_CASE("repeated identical samples only collapse the sampled direction") {
  EstimatorState<double> st = tiny_state(1.0);
  VecX<double> phi(2);
  phi << 1.0, 0.0;
  for (int k = 0; k < 100; ++k)
    st = rls_step<double>(st, phi, Vec3<double>(0.3, 0.0, 0.0), 0.01);
  CHECK(st.P(0, 0) < 0.011);
  CHECK(st.P(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(st.P(0, 1)) < 1e-15);
}

TEST_CASE("weight-error storage contracts by the exact update identity") {
  std::mt19937 gen(23);
  std::normal_distribution<double> g(0.0, 1.0);
  for (double lambda : {0.0, 0.4}) {
    EstimatorState<double> st;
    const int d = 7;
    st.W_hat = Eigen::MatrixXd::NullaryExpr(d, 3, [&] { return g(gen); });
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(d, d, [&] { return g(gen); });
    st.P = a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
    st.lambda = lambda;
    const Eigen::MatrixXd w_true = Eigen::MatrixXd::NullaryExpr(d, 3, [&] { return g(gen); });

    const double dt = 0.01;
    const double decay = std::exp(-lambda * dt);
    VecX<double> phi = VecX<double>::NullaryExpr(d, [&] { return g(gen); });
    const Vec3<double> f = w_true.transpose() * phi;

    const double v0 = lyapunov_weights(st, w_true);
    const Vec3<double> eps = f - st.W_hat.transpose() * phi;
    const double s = decay + phi.dot(st.P * phi);
    const double predicted = decay * (v0 - eps.squaredNorm() / s);

    const auto next = rls_step<double>(st, phi, f, dt);
    const double v1 = lyapunov_weights(next, w_true);
    CHECK(std::abs(v1 - predicted) <= 1e-12 * std::max(1.0, std::abs(predicted)));
    if (lambda == 0.0) CHECK(v1 <= v0 + 1e-12);
  }
}

TEST_CASE("prediction rotates the learned force back to world axes") {
  EstimatorState<double> st = tiny_state(1.0);
  st.W_hat << 1.0, 0.0, 0.5, 0.0, 2.0, 0.0;
  VecX<double> phi(2);
  phi << 0.5, 1.0;
  Mat3<double> frame;
  frame << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Vec3<double> in_frame = st.W_hat.transpose() * phi;
  const Vec3<double> world = predict_force(st, phi, frame);
  CHECK((world - frame * in_frame).norm() < 1e-15);
}

TEST_CASE("covariance stays symmetric positive definite under load") {
  std::mt19937 gen(5);
  std::normal_distribution<double> g(0.0, 1.0);
  EstimatorState<double> st =
      EstimatorState<double>::zero_init(FeatureKind::PhysicalInsight, 2, 100.0, 0.1);
  const int d = feature_length(2);
  for (int k = 0; k < 2000; ++k) {
    VecX<double> phi = VecX<double>::NullaryExpr(d, [&] { return g(gen); });
    st = rls_step<double>(st, phi, Vec3<double>(g(gen), g(gen), g(gen)), 0.01);
    CHECK((st.P - st.P.transpose()).norm() < 1e-12);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(st.P);
  CHECK(eig.eigenvalues().minCoeff() >= kCovarianceFloor * 0.999);
}

TEST_CASE("unexcited forgetting blows the covariance up in a detectable way") {
  EstimatorState<double> st = tiny_state(1e8);
  st.lambda = 50.0;
  VecX<double> phi(2);
  phi << 0.0, 0.0;  // no information at all
  bool thrown = false;
  try {
    for (int k = 0; k < 2000; ++k)
      st = rls_step<double>(st, phi, Vec3<double>::Zero(), 0.01);
  } catch (const CovarianceBlowup&) {
    thrown = true;
  }
  CHECK(thrown);
}
