#include <cmath>
#include <random>

#include <doctest.h>

#include "bendsim/geom.hpp"

using namespace bendsim;

namespace {

bool near(const Vec3<double>& a, const Vec3<double>& b, double tol = 1e-12) {
  return (a - b).norm() <= tol;
}

}  // namespace

TEST_CASE("plane frame of a lateral displacement") {
  const auto f = plane_frame<double>(Vec3<double>(0.0, 1.0, 0.0));
  CHECK(f.valid);
  CHECK(near(f.rotation.col(0), Vec3<double>(0.0, -1.0, 0.0)));
  CHECK(near(f.rotation.col(1), Vec3<double>(1.0, 0.0, 0.0)));
  CHECK(near(f.rotation.col(2), Vec3<double>(0.0, 0.0, 1.0)));
}

TEST_CASE("plane frame of a forward displacement") {
  const auto f = plane_frame<double>(Vec3<double>(1.0, 0.0, 0.0));
  CHECK(near(f.rotation.col(0), Vec3<double>(-1.0, 0.0, 0.0)));
  CHECK(near(f.rotation.col(1), Vec3<double>(0.0, -1.0, 0.0)));
  CHECK(near(f.rotation.col(2), Vec3<double>(0.0, 0.0, 1.0)));
}

TEST_CASE("displacement always has a negative chord coordinate") {
  for (double yaw : {0.0, 0.7, 2.0, 3.1, 4.5, 6.0}) {
    for (double h : {-0.4, 0.0, 0.4}) {
      const Vec3<double> r(std::cos(yaw), std::sin(yaw), h);
      const auto f = plane_frame<double>(r);
      CHECK(r.dot(f.rotation.col(0)) < 0.0);
      CHECK(std::abs(r.dot(f.rotation.col(1))) < 1e-12);
    }
  }
}

TEST_CASE("plane frame is a proper rotation") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Vec3<double> r(uni(gen), uni(gen), 0.8 * uni(gen));
    if (r.head<2>().norm() < 1e-3) continue;
    const Mat3<double> R = plane_frame<double>(r).rotation;
    CHECK((R.transpose() * R - Mat3<double>::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(near(R.col(2), world_up<double>()));
  }
}

TEST_CASE("near-vertical displacement leaves the plane undefined") {
  CHECK_THROWS_AS(plane_frame<double>(Vec3<double>(0.0, 0.0, 1.0)),
                  DegenerateDisplacement);
  CHECK_THROWS_AS(plane_frame<double>(Vec3<double>(1e-9, 0.0, 0.5)),
                  DegenerateDisplacement);
  CHECK_THROWS_AS(plane_frame<double>(Vec3<double>::Zero()), DegenerateDisplacement);
}

TEST_CASE("projection maps the displacement into the x-z plane") {
  const Vec3<double> r(0.3, -0.5, 0.2);
  const auto f = plane_frame<double>(r);
  const Vec3<double> rp = project_to_plane(f, r);
  CHECK(std::abs(rp.y()) < 1e-12);
  CHECK(rp.x() < 0.0);
  CHECK(rp.z() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(rp.norm() == doctest::Approx(r.norm()).epsilon(1e-12));
}

TEST_CASE("elevation angle of level, lifted, and dropped displacements") {
  const Vec3<double> p1(0.0, 0.0, 1.0);
  CHECK(displacement_frame<double>(p1, p1 + Vec3<double>(1.0, 0.0, 0.0)).alpha ==
        doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(displacement_frame<double>(p1, p1 + Vec3<double>(1.0, 0.0, -1.0)).alpha ==
        doctest::Approx(-0.75 * M_PI).epsilon(1e-12));
  CHECK(displacement_frame<double>(p1, p1 + Vec3<double>(1.0, 0.0, 1.0)).alpha ==
        doctest::Approx(0.75 * M_PI).epsilon(1e-12));
}

TEST_CASE("held plane frame admits a vertical displacement") {
  const auto pf = plane_frame<double>(Vec3<double>(1.0, 0.0, 0.0));
  const auto df = displacement_frame<double>(Vec3<double>::Zero(),
                                             Vec3<double>(0.0, 0.0, 1.0), pf);
  CHECK(df.alpha == doctest::Approx(0.5 * M_PI).epsilon(1e-12));
  CHECK(near(df.rotation.col(0), Vec3<double>(0.0, 0.0, 1.0)));
  CHECK(near(df.rotation.col(1), pf.rotation.col(1)));
}

TEST_CASE("displacement frame is orthonormal with x along the displacement") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Vec3<double> p1(uni(gen), uni(gen), 1.0 + 0.3 * uni(gen));
    Vec3<double> r(uni(gen), uni(gen), 0.8 * uni(gen));
    if (r.head<2>().norm() < 1e-3 || r.norm() < 1e-3) continue;
    const auto df = displacement_frame<double>(p1, p1 + r);
    const Mat3<double>& R = df.rotation;
    CHECK((R.transpose() * R - Mat3<double>::Identity()).norm() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(near(R.col(0), r.normalized()));
    CHECK(near(df.origin, p1));
    // alpha reproduces the displacement direction in the plane frame
    const auto pf = plane_frame<double>(r);
    const Vec3<double> rp = project_to_plane(pf, r);
    CHECK(df.alpha == doctest::Approx(std::atan2(rp.z(), rp.x())).epsilon(1e-12));
  }
}

TEST_CASE("coincident endpoints rejected") {
  const Vec3<double> p(0.2, 0.4, 1.0);
  const auto pf = plane_frame<double>(Vec3<double>(1.0, 0.0, 0.0));
  CHECK_THROWS_AS(displacement_frame<double>(p, p, pf), CoincidentEndpoints);
}
