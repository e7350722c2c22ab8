#pragma once

#include <cmath>
#include <vector>

#include "bendsim/types.hpp"

namespace bendsim {

enum class FeatureKind { PlanePolynomial, PhysicalInsight };

constexpr int feature_length(int order) { return 4 * order + 1; }

namespace detail {

// writes x^n, x^(n-1), ..., x into out starting at offset
template <typename S>
void descending_powers(S x, int n, VecX<S>& out, int offset) {
  S acc = x;
  for (int k = 1; k <= n; ++k) {
    out[offset + n - k] = acc;
    acc *= x;
  }
}

}  // namespace detail

// [r_x^n..r_x, r_z^n..r_z, rd_x^n..rd_x, rd_z^n..rd_z, 1]; inputs are
// plane-frame projections, the y components are zero by construction
template <typename S>
VecX<S> features_plane(const Vec3<S>& r_p, const Vec3<S>& rdot_p, int n) {
  VecX<S> phi(feature_length(n));
  detail::descending_powers(r_p.x(), n, phi, 0);
  detail::descending_powers(r_p.z(), n, phi, n);
  detail::descending_powers(rdot_p.x(), n, phi, 2 * n);
  detail::descending_powers(rdot_p.z(), n, phi, 3 * n);
  phi[4 * n] = S(1);
  return phi;
}

// [r^n..r, rd^n..rd, cos(n a)..cos(a), sin(n a)..sin(a), 1]
template <typename S>
VecX<S> features_physical(S r_mag, S rdot_mag, S alpha, int n) {
  VecX<S> phi(feature_length(n));
  detail::descending_powers(r_mag, n, phi, 0);
  detail::descending_powers(rdot_mag, n, phi, n);
  for (int k = 1; k <= n; ++k) {
    phi[2 * n + n - k] = std::cos(S(k) * alpha);
    phi[3 * n + n - k] = std::sin(S(k) * alpha);
  }
  phi[4 * n] = S(1);
  return phi;
}

// min eigenvalue of the window's feature Gram matrix, normalized by window
// length; strictly positive iff the window is persistently exciting
template <typename S>
S excitation_metric(const std::vector<VecX<S>>& window) {
  if (window.empty()) return S(0);
  const Eigen::Index d = window.front().size();
  MatX<S> gram = MatX<S>::Zero(d, d);
  for (const VecX<S>& phi : window) gram.noalias() += phi * phi.transpose();
  gram /= S(window.size());
  Eigen::SelfAdjointEigenSolver<MatX<S>> eig(gram, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

}  // namespace bendsim
