#pragma once

#include <cmath>

#include "bendsim/errors.hpp"
#include "bendsim/types.hpp"

namespace bendsim {

inline constexpr double kGeomEps = 1e-6;

// Bending-plane frame: y normal to the vertical plane through r, z the world
// vertical, x completing the right-handed triple. x ends up anti-parallel to
// the horizontal projection of r, so r expressed in this frame always has a
// negative first component.
template <typename S>
struct PlaneFrame {
  Mat3<S> rotation = Mat3<S>::Identity();
  bool valid = false;
};

// Frame aligned with the displacement itself: x along r, shared plane normal,
// z completing the triple; alpha is the signed elevation of r measured in the
// plane frame.
template <typename S>
struct DisplacementFrame {
  Mat3<S> rotation = Mat3<S>::Identity();
  Vec3<S> origin = Vec3<S>::Zero();
  S alpha = S(0);
};

template <typename S>
PlaneFrame<S> plane_frame(const Vec3<S>& r) {
  const Vec3<S> z = world_up<S>();
  Vec3<S> n = r.cross(z);
  const S nn = n.norm();
  if (!(nn > S(kGeomEps)))
    throw DegenerateDisplacement("displacement nearly vertical, plane normal undefined");
  n /= nn;
  PlaneFrame<S> f;
  f.rotation.col(0) = n.cross(z);
  f.rotation.col(1) = n;
  f.rotation.col(2) = z;
  f.valid = true;
  return f;
}

template <typename S>
Vec3<S> project_to_plane(const PlaneFrame<S>& frame, const Vec3<S>& v) {
  return frame.rotation.transpose() * v;
}

// variant with a caller-supplied plane frame, for hysteresis across
// near-vertical displacements
template <typename S>
DisplacementFrame<S> displacement_frame(const Vec3<S>& p1, const Vec3<S>& p2,
                                        const PlaneFrame<S>& pf) {
  const Vec3<S> r = p2 - p1;
  const S rn = r.norm();
  if (!(rn > S(kGeomEps)))
    throw CoincidentEndpoints("endpoints coincide, displacement direction undefined");
  const Vec3<S> xr = r / rn;
  const Vec3<S> yp = pf.rotation.col(1);
  // quarter-turn of xr about yp toward the plane-frame x axis; the yp(yp.xr)
  // term vanishes analytically but keeps the triple orthonormal under rounding
  const Vec3<S> zr = yp * yp.dot(xr) - yp.cross(xr);
  DisplacementFrame<S> f;
  f.rotation.col(0) = xr;
  f.rotation.col(1) = yp;
  f.rotation.col(2) = zr;
  f.origin = p1;
  f.alpha = std::atan2(r.dot(pf.rotation.col(2)), r.dot(pf.rotation.col(0)));
  return f;
}

template <typename S>
DisplacementFrame<S> displacement_frame(const Vec3<S>& p1, const Vec3<S>& p2) {
  return displacement_frame(p1, p2, plane_frame<S>(p2 - p1));
}

}  // namespace bendsim
