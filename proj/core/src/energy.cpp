#include "minsphere/energy.hpp"

#include "minsphere/errors.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace minsphere {

SphereMap::SphereMap(MeshPtr mesh, Eigen::MatrixXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw PreconditionError("SphereMap: null mesh");
  if (values_.rows() != mesh_->vertex_count()) {
    throw PreconditionError("SphereMap: one value per vertex required");
  }
  if (values_.cols() < 3) throw PreconditionError("SphereMap: target dimension must be at least 2");
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    if (!(std::abs(values_.row(i).norm() - 1.0) <= kUnitNormTolerance)) {
      throw InvariantError("SphereMap: value at vertex " + std::to_string(i) + " is not a unit vector");
    }
  }
}

SphereMap SphereMap::from_raw(MeshPtr mesh, Eigen::MatrixXd raw) {
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double norm = raw.row(i).norm();
    if (!(norm > 1e-14)) {
      throw NumericError("SphereMap::from_raw: zero vector at vertex " + std::to_string(i));
    }
    raw.row(i) /= norm;
  }
  return SphereMap(std::move(mesh), std::move(raw));
}

SphereMap SphereMap::sample(MeshPtr mesh, int n,
                            const std::function<Eigen::VectorXd(const Eigen::Vector3d&)>& fn) {
  if (!mesh) throw PreconditionError("SphereMap::sample: null mesh");
  Eigen::MatrixXd raw(mesh->vertex_count(), n + 1);
  for (int i = 0; i < mesh->vertex_count(); ++i) {
    const Eigen::VectorXd v = fn(mesh->vertex(i));
    if (v.size() != n + 1) throw PreconditionError("SphereMap::sample: wrong value dimension");
    raw.row(i) = v.transpose();
  }
  return from_raw(std::move(mesh), std::move(raw));
}

TangentField::TangentField(const SphereMap& base, Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() != base.values().rows() || values_.cols() != base.values().cols()) {
    throw PreconditionError("TangentField: shape does not match the map");
  }
  for (Eigen::Index i = 0; i < values_.rows(); ++i) {
    const double dot = values_.row(i).dot(base.values().row(i));
    if (!(std::abs(dot) <= kUnitNormTolerance * std::max(1.0, values_.row(i).norm()))) {
      throw InvariantError("TangentField: vector at vertex " + std::to_string(i) + " is not tangent");
    }
  }
}

namespace {

Eigen::Matrix<double, 3, Eigen::Dynamic> face_values(const SphereMap& map, int f) {
  const auto& faces = map.mesh().faces();
  Eigen::Matrix<double, 3, Eigen::Dynamic> out(3, map.values().cols());
  for (int i = 0; i < 3; ++i) out.row(i) = map.values().row(faces(f, i));
  return out;
}

Eigen::Matrix<double, 3, Eigen::Dynamic> face_rows(const Eigen::MatrixXd& field, const SphereMesh& mesh,
                                                   int f) {
  Eigen::Matrix<double, 3, Eigen::Dynamic> out(3, field.cols());
  for (int i = 0; i < 3; ++i) out.row(i) = field.row(mesh.faces()(f, i));
  return out;
}

// K F through edge differences; constant fields map to exactly zero.
Eigen::MatrixXd stiffness_apply(const Eigen::Matrix3d& k, const Eigen::Matrix<double, 3, Eigen::Dynamic>& f) {
  Eigen::MatrixXd out(3, f.cols());
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int l = (i + 2) % 3;
    out.row(i) = k(i, j) * (f.row(j) - f.row(i)) + k(i, l) * (f.row(l) - f.row(i));
  }
  return out;
}

// tr(F^T K F) = sum over edges of -K_ij |F_i - F_j|^2.
double stiffness_form(const Eigen::Matrix3d& k, const Eigen::Matrix<double, 3, Eigen::Dynamic>& f) {
  return -k(0, 1) * (f.row(0) - f.row(1)).squaredNorm() - k(1, 2) * (f.row(1) - f.row(2)).squaredNorm() -
         k(0, 2) * (f.row(0) - f.row(2)).squaredNorm();
}

void check_alpha(double alpha, const char* where) {
  if (!(alpha >= 1.0) || !std::isfinite(alpha)) {
    throw PreconditionError(std::string(where) + ": alpha must be finite and at least 1");
  }
}

Eigen::MatrixXd project(const SphereMap& map, Eigen::MatrixXd field) {
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    field.row(i) -= field.row(i).dot(map.values().row(i)) * map.values().row(i);
  }
  return field;
}

}  // namespace

Eigen::VectorXd energy_densities(const SphereMap& map) {
  const SphereMesh& mesh = map.mesh();
  Eigen::VectorXd e(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto ft = face_values(map, f);
    const ElementGeometry& g = mesh.element(f);
    e[f] = stiffness_form(g.stiffness, ft) / g.area;
  }
  return e;
}

double dirichlet_energy(const SphereMap& map) {
  const SphereMesh& mesh = map.mesh();
  double total = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const auto ft = face_values(map, f);
    total += stiffness_form(mesh.element(f).stiffness, ft);
  }
  return 0.5 * total;
}

double alpha_energy(const SphereMap& map, double alpha) {
  check_alpha(alpha, "alpha_energy");
  const SphereMesh& mesh = map.mesh();
  const double s = 1.0 / mesh.unit_round_area();
  const Eigen::VectorXd e = energy_densities(map);
  double total = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const double area = s * mesh.element(f).area;
    // (1 + x)^alpha - 1, summed against areas that add up to one.
    total += area * (alpha == 1.0 ? e[f] / s : std::expm1(alpha * std::log1p(e[f] / s)));
  }
  return 0.5 * total;
}

Eigen::MatrixXd alpha_energy_euclidean_gradient(const SphereMap& map, double alpha) {
  check_alpha(alpha, "alpha_energy_gradient");
  const SphereMesh& mesh = map.mesh();
  const double s = 1.0 / mesh.unit_round_area();
  const Eigen::VectorXd e = energy_densities(map);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(map.values().rows(), map.values().cols());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const double w = alpha == 1.0 ? 1.0 : alpha * std::pow(1.0 + e[f] / s, alpha - 1.0);
    const Eigen::MatrixXd local = w * stiffness_apply(mesh.element(f).stiffness, face_values(map, f));
    for (int i = 0; i < 3; ++i) grad.row(mesh.faces()(f, i)) += local.row(i);
  }
  return grad;
}

TangentField alpha_energy_gradient(const SphereMap& map, double alpha) {
  return TangentField(map, project(map, alpha_energy_euclidean_gradient(map, alpha)));
}

Eigen::MatrixXd alpha_energy_hessian_product(const SphereMap& map, double alpha,
                                             const Eigen::MatrixXd& direction) {
  check_alpha(alpha, "alpha_energy_hessian_product");
  if (direction.rows() != map.values().rows() || direction.cols() != map.values().cols()) {
    throw PreconditionError("alpha_energy_hessian_product: shape mismatch");
  }
  const SphereMesh& mesh = map.mesh();
  const double s = 1.0 / mesh.unit_round_area();
  const Eigen::VectorXd e = energy_densities(map);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(direction.rows(), direction.cols());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const ElementGeometry& g = mesh.element(f);
    const auto ft = face_values(map, f);
    const auto vt = face_rows(direction, mesh, f);
    const double base = 1.0 + e[f] / s;
    const double w = alpha == 1.0 ? 1.0 : alpha * std::pow(base, alpha - 1.0);
    const Eigen::MatrixXd kf = stiffness_apply(g.stiffness, ft);
    Eigen::MatrixXd local = w * stiffness_apply(g.stiffness, vt);
    if (alpha != 1.0) {
      const double curvature = 2.0 * alpha * (alpha - 1.0) * std::pow(base, alpha - 2.0) / (s * g.area);
      local += curvature * (kf.array() * vt.array()).sum() * kf;
    }
    for (int i = 0; i < 3; ++i) out.row(mesh.faces()(f, i)) += local.row(i);
  }
  return out;
}

double psi_alpha(double t, double alpha) {
  if (!(t >= 0.0)) throw PreconditionError("psi_alpha: t must be nonnegative");
  check_alpha(alpha, "psi_alpha");
  const double eps = alpha - 1.0;
  const double log1pt = std::log1p(t);
  if (eps == 0.0) return t - log1pt;
  if (eps < 1e-6) {
    // Series in eps of expm1(eps L) / eps.
    return t * std::exp(eps * log1pt) - log1pt * (1.0 + eps * log1pt / 2.0 + eps * eps * log1pt * log1pt / 6.0);
  }
  return t * std::exp(eps * log1pt) - std::expm1(eps * log1pt) / eps;
}

Eigen::Vector3d center_of_mass(const SphereMap& map, double alpha) {
  check_alpha(alpha, "center_of_mass");
  const SphereMesh& mesh = map.mesh();
  const double s = 1.0 / mesh.unit_round_area();
  const Eigen::VectorXd e = energy_densities(map);
  Eigen::Vector3d com = Eigen::Vector3d::Zero();
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::Vector3d centroid = (mesh.vertex(mesh.faces()(f, 0)) + mesh.vertex(mesh.faces()(f, 1)) +
                                      mesh.vertex(mesh.faces()(f, 2)))
                                         .normalized();
    com += s * mesh.element(f).area * psi_alpha(std::max(0.0, e[f] / s), alpha) * centroid;
  }
  return com;
}

double relative_center_of_mass(const SphereMap& map, double alpha) {
  // With unit total area the mean of |df|^2 is twice the Dirichlet energy.
  const double reference = psi_alpha(2.0 * dirichlet_energy(map), alpha);
  if (!(reference > 0.0)) throw DegeneracyError("relative_center_of_mass: map is constant");
  return center_of_mass(map, alpha).norm() / reference;
}

Eigen::Vector3d dilate(const Eigen::Vector3d& p, const Eigen::Vector3d& axis, double t) {
  const Eigen::Vector3d a = axis.normalized();
  const double h = p.dot(a);
  const double th = std::tanh(t);
  const double h_new = (h + th) / (1.0 + h * th);
  const Eigen::Vector3d perp = (p - h * a) / (std::cosh(t) + h * std::sinh(t));
  return (h_new * a + perp).normalized();
}

Eigen::Vector3d dilate_xyz(const Eigen::Vector3d& p, const Eigen::Vector3d& t) {
  Eigen::Vector3d q = dilate(p, Eigen::Vector3d::UnitX(), t.x());
  q = dilate(q, Eigen::Vector3d::UnitY(), t.y());
  return dilate(q, Eigen::Vector3d::UnitZ(), t.z());
}

SphereMap resample(const SphereMap& map,
                   const std::function<Eigen::Vector3d(const Eigen::Vector3d&)>& domain_map) {
  const SphereMesh& mesh = map.mesh();
  const MeshLocator locator(map.mesh_ptr());
  Eigen::MatrixXd raw(map.values().rows(), map.values().cols());
  int hint = 0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto loc = locator.locate(domain_map(mesh.vertex(v)), hint);
    hint = loc.face;
    Eigen::RowVectorXd value = Eigen::RowVectorXd::Zero(raw.cols());
    for (int i = 0; i < 3; ++i) value += loc.barycentric[i] * map.values().row(mesh.faces()(loc.face, i));
    raw.row(v) = value;
  }
  return SphereMap::from_raw(map.mesh_ptr(), std::move(raw));
}

RecenterResult recenter(const SphereMap& map, double alpha, int max_iterations) {
  if (dirichlet_energy(map) < 1e-12) throw PreconditionError("recenter: map is constant");
  Eigen::Vector3d params = Eigen::Vector3d::Zero();
  Eigen::Vector3d com = center_of_mass(map, alpha);
  if (com.norm() <= kRecenterTolerance) return {map, params, com.norm(), 0};

  auto evaluate = [&](const Eigen::Vector3d& t) {
    return center_of_mass(resample(map, [&](const Eigen::Vector3d& p) { return dilate_xyz(p, t); }), alpha);
  };
  constexpr double kStep = 1e-6;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    Eigen::Matrix3d jac;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d dt = Eigen::Vector3d::Zero();
      dt[k] = kStep;
      jac.col(k) = (evaluate(params + dt) - evaluate(params - dt)) / (2.0 * kStep);
    }
    const Eigen::Vector3d delta = jac.fullPivLu().solve(-com);
    if (!delta.allFinite()) throw ConvergenceError("recenter: singular Jacobian", com.norm());
    double scale = 1.0;
    Eigen::Vector3d trial_com;
    for (int halving = 0; halving < 12; ++halving) {
      trial_com = evaluate(params + scale * delta);
      if (trial_com.norm() < com.norm()) break;
      scale *= 0.5;
    }
    params += scale * delta;
    com = trial_com;
    if (com.norm() <= kRecenterTolerance) {
      SphereMap out = resample(map, [&](const Eigen::Vector3d& p) { return dilate_xyz(p, params); });
      return {std::move(out), params, com.norm(), iter};
    }
  }
  throw ConvergenceError("recenter: Newton iteration did not converge", com.norm());
}

SphereMap equator_map(MeshPtr mesh, int n) {
  if (n < 2) throw PreconditionError("equator_map: n must be at least 2");
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(mesh->vertex_count(), n + 1);
  values.leftCols(3) = mesh->vertices();
  return SphereMap(std::move(mesh), std::move(values));
}

SphereMap dilated_equator_map(MeshPtr mesh, int n, const Eigen::Vector3d& axis, double t) {
  return SphereMap::sample(std::move(mesh), n, [&](const Eigen::Vector3d& p) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
    v.head<3>() = dilate(p, axis, t);
    return v;
  });
}

SphereMap constant_map(MeshPtr mesh, int n) {
  Eigen::MatrixXd values = Eigen::MatrixXd::Zero(mesh->vertex_count(), n + 1);
  values.col(n).setOnes();
  return SphereMap(std::move(mesh), std::move(values));
}

SphereMap random_smooth_map(MeshPtr mesh, int n, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const int m = n + 1;
  Eigen::VectorXd offset(m);
  Eigen::MatrixXd linear(m, 3);
  std::vector<Eigen::Matrix3d> quadratic(m);
  for (int c = 0; c < m; ++c) {
    offset[c] = normal(rng);
    for (int k = 0; k < 3; ++k) linear(c, k) = normal(rng);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) quadratic[c](a, b) = normal(rng);
  }
  offset.normalize();
  return SphereMap::sample(std::move(mesh), n, [&](const Eigen::Vector3d& p) {
    Eigen::VectorXd v(m);
    for (int c = 0; c < m; ++c) {
      v[c] = offset[c] + amplitude * (linear.row(c).dot(p) + 0.5 * p.dot(quadratic[c] * p));
    }
    return v;
  });
}

SphereMap perturbed_equator_map(MeshPtr mesh, int n, std::uint64_t seed, double amplitude) {
  if (n < 2) throw PreconditionError("perturbed_equator_map: n must be at least 2");
  if (!(amplitude >= 0.0 && amplitude < 0.5)) {
    throw PreconditionError("perturbed_equator_map: amplitude must lie in [0, 0.5)");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::Matrix3d linear;
  std::array<Eigen::Matrix3d, 3> quadratic;
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < 3; ++k) linear(c, k) = normal(rng);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) quadratic[c](a, b) = normal(rng);
  }
  // Scale so the perturbation is at most `amplitude` on the unit sphere.
  const double bound = linear.norm() + 0.5 * (quadratic[0].norm() + quadratic[1].norm() + quadratic[2].norm());
  const double scale = amplitude / bound;
  return SphereMap::sample(std::move(mesh), n, [&](const Eigen::Vector3d& p) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
    for (int c = 0; c < 3; ++c) v[c] = p[c] + scale * (linear.row(c).dot(p) + 0.5 * p.dot(quadratic[c] * p));
    return v;
  });
}

SphereMap rotate_target(const SphereMap& map, const Eigen::MatrixXd& rotation) {
  const int m = map.target_dim() + 1;
  if (rotation.rows() != m || rotation.cols() != m) {
    throw PreconditionError("rotate_target: rotation has the wrong size");
  }
  return SphereMap::from_raw(map.mesh_ptr(), map.values() * rotation.transpose());
}

double integrate(const std::function<double(double)>& fn, double a, double b,
                 double relative_tolerance) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      fn, a, b, 20, relative_tolerance, &error, &l1);
  if (!std::isfinite(value) || error > 10.0 * relative_tolerance * l1 + 1e-300) {
    throw NumericError("integrate: quadrature did not converge (error estimate " +
                       std::to_string(error) + ")");
  }
  return value;
}

namespace {

// Integrates over unit-length pieces so exponential growth stays resolved.
double piecewise_integral(const std::function<double(double)>& fn, double half_width) {
  if (!(half_width > 0.0)) throw PreconditionError("axisymmetric energy: U must be positive");
  const int pieces = static_cast<int>(std::ceil(2.0 * half_width));
  const double h = 2.0 * half_width / pieces;
  double total = 0.0;
  for (int k = 0; k < pieces; ++k) {
    total += integrate(fn, -half_width + k * h, -half_width + (k + 1) * h);
  }
  return total;
}

}  // namespace

double axisymmetric_alpha_energy(const std::function<double(double)>& speed, double alpha,
                                 double half_width) {
  check_alpha(alpha, "axisymmetric_alpha_energy");
  const double value = std::numbers::pi * piecewise_integral(
                                              [&](double u) {
                                                const double c = speed(u);
                                                if (c < 0.0) {
                                                  throw PreconditionError(
                                                      "axisymmetric_alpha_energy: negative speed");
                                                }
                                                const double sech = 1.0 / std::cosh(u);
                                                const double stretch = std::cosh(u) * c;
                                                return std::pow(1.0 + stretch * stretch, alpha) * sech * sech;
                                              },
                                              half_width);
  if (!std::isfinite(value)) throw NumericError("axisymmetric_alpha_energy: overflow");
  return value;
}

double axisymmetric_lower_bound(const std::function<double(double)>& speed, double alpha,
                                double half_width) {
  check_alpha(alpha, "axisymmetric_lower_bound");
  return std::numbers::pi * piecewise_integral(
                                [&](double u) {
                                  return std::pow(speed(u), 2.0 * alpha) *
                                         std::pow(std::cosh(u), 2.0 * (alpha - 1.0));
                                },
                                half_width);
}

}  // namespace minsphere
