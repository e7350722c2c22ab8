#include <cmath>

#include <doctest.h>

#include "bendsim/features.hpp"
#include "bendsim/geom.hpp"
#include "bendsim/trajectory.hpp"

using namespace bendsim;

namespace {

void check_vector(const VecX<double>& got, const std::vector<double>& want,
                  double tol = 1e-12) {
  REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
  for (Eigen::Index i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(tol).scale(1.0));
}

}  // namespace

TEST_CASE("feature vector length") {
  CHECK(feature_length(1) == 5);
  CHECK(feature_length(2) == 9);
  CHECK(feature_length(3) == 13);
}

TEST_CASE("plane polynomial features, quadratic order") {
  const VecX<double> phi = features_plane<double>(Vec3<double>(2.0, 0.0, 1.0),
                                                  Vec3<double>::Zero(), 2);
  check_vector(phi, {4.0, 2.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0});
}

TEST_CASE("plane polynomial features carry the rate block") {
  const VecX<double> phi = features_plane<double>(Vec3<double>(-0.5, 0.0, 0.1),
                                                  Vec3<double>(0.2, 0.0, -0.3), 1);
  check_vector(phi, {-0.5, 0.1, 0.2, -0.3, 1.0});
}

TEST_CASE("physical features at a quarter-turn elevation") {
  const VecX<double> phi = features_physical<double>(1.0, 0.0, 0.5 * M_PI, 1);
  check_vector(phi, {1.0, 0.0, 0.0, 1.0, 1.0});
}

TEST_CASE("physical features at the origin of all inputs") {
  const VecX<double> phi = features_physical<double>(0.0, 0.0, 0.0, 2);
  check_vector(phi, {0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0});
}

TEST_CASE("powers descend from highest to linear") {
  const VecX<double> phi = features_physical<double>(2.0, 3.0, 0.0, 3);
  // [r^3 r^2 r, rd^3 rd^2 rd, cos blocks, sin blocks, 1]
  CHECK(phi[0] == doctest::Approx(8.0));
  CHECK(phi[1] == doctest::Approx(4.0));
  CHECK(phi[2] == doctest::Approx(2.0));
  CHECK(phi[3] == doctest::Approx(27.0));
  CHECK(phi[4] == doctest::Approx(9.0));
  CHECK(phi[5] == doctest::Approx(3.0));
  CHECK(phi[12] == doctest::Approx(1.0));
}

TEST_CASE("harmonic block uses multiples of the elevation") {
  const double a = 0.37;
  const VecX<double> phi = features_physical<double>(1.0, 0.0, a, 3);
  CHECK(phi[6] == doctest::Approx(std::cos(3.0 * a)).epsilon(1e-12));
  CHECK(phi[7] == doctest::Approx(std::cos(2.0 * a)).epsilon(1e-12));
  CHECK(phi[8] == doctest::Approx(std::cos(a)).epsilon(1e-12));
  CHECK(phi[9] == doctest::Approx(std::sin(3.0 * a)).epsilon(1e-12));
  CHECK(phi[10] == doctest::Approx(std::sin(2.0 * a)).epsilon(1e-12));
  CHECK(phi[11] == doctest::Approx(std::sin(a)).epsilon(1e-12));
}

TEST_CASE("a constant feature window is not exciting") {
  const VecX<double> phi = features_physical<double>(0.8, 0.0, -0.2, 2);
  std::vector<VecX<double>> window(40, phi);
  CHECK(excitation_metric(window) < 1e-12);
  CHECK(excitation_metric<double>({}) == 0.0);
}

TEST_CASE("a single-tone separation sweep cannot excite the quadratic features") {
  // with r = m + a cos(wt) the samples satisfy r^2 - 2 m r + rd^2 / w^2 +
  // (m^2 - a^2) = 0 identically, so the Gram of [r^2, r, rd^2, rd, ..., 1]
  // has an exact null direction no matter how long the window runs
  Exp1Params params;
  std::vector<VecX<double>> window;
  for (int k = 1; k <= 400; ++k) {
    const double t = 0.1 * k;
    const TrajectoryPair refs = exp1_varying_distance(t, params);
    const Vec3<double> r = refs.second.p_d - refs.first.p_d;
    const Vec3<double> rd = refs.second.v_d - refs.first.v_d;
    const auto df = displacement_frame<double>(refs.first.p_d, refs.second.p_d);
    window.push_back(
        features_physical<double>(r.norm(), r.dot(rd) / r.norm(), df.alpha, 2));
  }
  CHECK(excitation_metric(window) < 1e-10);

  const double m = params.dist_mean, a = params.dist_amp;
  const double w = 2.0 * M_PI / params.dist_period;
  VecX<double> conic = VecX<double>::Zero(feature_length(2));
  conic[0] = 1.0;
  conic[1] = -2.0 * m;
  conic[2] = 1.0 / (w * w);
  conic[8] = m * m - a * a;
  conic.normalize();
  for (const VecX<double>& phi : window) CHECK(std::abs(conic.dot(phi)) < 1e-10);
}
