#pragma once

#include "minsphere/sphere_mesh.hpp"

#include <Eigen/Core>

#include <functional>

namespace minsphere {

/// Piecewise-linear map from the triangulated sphere into S^n, stored as one
/// unit (n+1)-vector per vertex (row i belongs to vertex i).
class SphereMap {
 public:
  SphereMap(MeshPtr mesh, Eigen::MatrixXd values);

  /// Normalises every row of `raw` before constructing the map.
  static SphereMap from_raw(MeshPtr mesh, Eigen::MatrixXd raw);
  /// Samples `fn` at every vertex and normalises the results.
  static SphereMap sample(MeshPtr mesh, int n,
                          const std::function<Eigen::VectorXd(const Eigen::Vector3d&)>& fn);

  const SphereMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  int target_dim() const { return static_cast<int>(values_.cols()) - 1; }
  int vertex_count() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::VectorXd value(int i) const { return values_.row(i).transpose(); }

 private:
  MeshPtr mesh_;
  Eigen::MatrixXd values_;
};

/// Per-vertex vectors orthogonal to the map values.
class TangentField {
 public:
  TangentField(const SphereMap& base, Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }

 private:
  Eigen::MatrixXd values_;
};

inline constexpr double kUnitNormTolerance = 1e-10;

/// Unit-round |df|^2 on each face: sum over coordinates of f^T K_T f divided by
/// the spherical face area.
Eigen::VectorXd energy_densities(const SphereMap& map);

/// (1/2) integral of |df|^2. Conformally invariant, so convention free.
double dirichlet_energy(const SphereMap& map);

/// (1/2) integral of (1 + |df|^2)^alpha dA - 1/2 in the area-one metric.
double alpha_energy(const SphereMap& map, double alpha);

/// Gradient of alpha_energy with respect to the vertex values, unprojected.
Eigen::MatrixXd alpha_energy_euclidean_gradient(const SphereMap& map, double alpha);

/// Gradient of alpha_energy followed by pointwise projection to T S^n.
TangentField alpha_energy_gradient(const SphereMap& map, double alpha);

/// Product of the unconstrained Hessian of alpha_energy with a per-vertex field.
Eigen::MatrixXd alpha_energy_hessian_product(const SphereMap& map, double alpha,
                                             const Eigen::MatrixXd& direction);

/// [alpha (1+t)^(alpha-1) t - (1+t)^alpha + 1] / (alpha - 1), with the limit
/// t - log(1+t) at alpha = 1.
double psi_alpha(double t, double alpha);

/// Integral of X psi_alpha(|df|^2) dA over the domain, area-one convention.
Eigen::Vector3d center_of_mass(const SphereMap& map, double alpha);
/// |center_of_mass| / psi_alpha(mean |df|^2), both in the area-one convention.
double relative_center_of_mass(const SphereMap& map, double alpha);

/// Conformal dilation of S^2 with hyperbolic parameter t toward +axis.
Eigen::Vector3d dilate(const Eigen::Vector3d& p, const Eigen::Vector3d& axis, double t);

/// Composition of dilations about e_x, then e_y, then e_z.
Eigen::Vector3d dilate_xyz(const Eigen::Vector3d& p, const Eigen::Vector3d& t);

struct RecenterResult {
  SphereMap map;
  Eigen::Vector3d parameters;  ///< dilation parameters (x, y, z)
  double center_of_mass_norm = 0.0;
  int iterations = 0;
};

inline constexpr double kRecenterTolerance = 1e-8;

/// Precomposes with a dilation chosen by Newton iteration so that the
/// center of mass vanishes. The source map is resampled by linear interpolation.
RecenterResult recenter(const SphereMap& map, double alpha, int max_iterations = 50);

/// Linear interpolation of `map` at domain_map(v) for every vertex v, normalised.
SphereMap resample(const SphereMap& map,
                   const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& domain_map);

/// Totally geodesic inclusion S^2 -> S^n into the first three coordinates.
SphereMap equator_map(MeshPtr mesh, int n);
/// Equator precomposed with a dilation toward +axis.
SphereMap dilated_equator_map(MeshPtr mesh, int n, const Eigen::Vector3d& axis, double t);
SphereMap constant_map(MeshPtr mesh, int n);
/// Smooth random map given by normalised random polynomials of degree <= 2.
SphereMap random_smooth_map(MeshPtr mesh, int n, std::uint64_t seed, double amplitude = 1.0);
/// Degree-one map into the first three coordinates: the identity plus a random
/// polynomial perturbation of degree <= 2, normalised.
SphereMap perturbed_equator_map(MeshPtr mesh, int n, std::uint64_t seed, double amplitude);
/// Applies an orthogonal matrix to the target values.
SphereMap rotate_target(const SphereMap& map, const Eigen::MatrixXd& rotation);

/// Truncated axisymmetric alpha-energy
/// pi * integral over [-U, U] of [1 + (cosh(u) c(u))^2]^alpha sech^2(u) du.
double axisymmetric_alpha_energy(const std::function<double(double)>& speed, double alpha,
                                 double half_width);
/// pi * integral over [-U, U] of c(u)^(2 alpha) cosh(u)^(2 (alpha - 1)) du,
/// a lower bound of the truncated energy.
double axisymmetric_lower_bound(const std::function<double(double)>& speed, double alpha,
                                double half_width);

/// Adaptive Gauss-Kronrod quadrature on [a, b]; throws NumericError when the
/// error estimate stays above the requested relative tolerance.
double integrate(const std::function<double(double)>& fn, double a, double b,
                 double relative_tolerance = 1e-12);

}  // namespace minsphere
