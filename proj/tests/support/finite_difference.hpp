#pragma once

#include "minsphere/energy.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace minsphere::fd {

/// Random field tangent to the map at every vertex.
inline Eigen::MatrixXd random_tangent(const SphereMap& map, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd v(map.vertex_count(), map.target_dim() + 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = normal(rng);
  for (int i = 0; i < map.vertex_count(); ++i) {
    const Eigen::RowVectorXd f = map.values().row(i);
    v.row(i) -= v.row(i).dot(f) * f;
  }
  return v / v.norm();
}

/// Point t along the retraction curve normalize(f + t v).
inline SphereMap along(const SphereMap& map, const Eigen::MatrixXd& v, double t) {
  return SphereMap::from_raw(map.mesh_ptr(), map.values() + t * v);
}

/// Relative error between <grad E, v> and a central difference of E along the
/// retraction curve, whose velocity at t = 0 is v.
inline double gradient_fd_error(const SphereMap& map, double alpha, std::uint64_t seed, double h = 1e-5) {
  const Eigen::MatrixXd v = random_tangent(map, seed);
  const double analytic = (alpha_energy_euclidean_gradient(map, alpha).array() * v.array()).sum();
  const double numeric =
      (alpha_energy(along(map, v, h), alpha) - alpha_energy(along(map, v, -h), alpha)) / (2.0 * h);
  return std::abs(analytic - numeric) / std::max(std::abs(analytic), 1e-12);
}

/// Relative error between H v and a central difference of the gradient along the same curve.
inline double hessian_fd_error(const SphereMap& map, double alpha, std::uint64_t seed, double h = 1e-5) {
  const Eigen::MatrixXd v = random_tangent(map, seed);
  const Eigen::MatrixXd analytic = alpha_energy_hessian_product(map, alpha, v);
  const Eigen::MatrixXd numeric = (alpha_energy_euclidean_gradient(along(map, v, h), alpha) -
                                   alpha_energy_euclidean_gradient(along(map, v, -h), alpha)) /
                                  (2.0 * h);
  return (analytic - numeric).norm() / std::max(analytic.norm(), 1e-12);
}

}  // namespace minsphere::fd
