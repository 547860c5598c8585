#include "minsphere/covers.hpp"

#include "minsphere/eigensolver.hpp"
#include "minsphere/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace minsphere {

Eigen::Vector3d to_sphere(const ExtComplex& z) {
  if (z.infinite) return Eigen::Vector3d::UnitZ();
  const double r2 = std::norm(z.value);
  if (r2 <= 1.0) {
    return Eigen::Vector3d(2.0 * z.value.real(), 2.0 * z.value.imag(), r2 - 1.0) / (r2 + 1.0);
  }
  const Complex w = 1.0 / z.value;
  const double s2 = std::norm(w);
  return Eigen::Vector3d(2.0 * w.real(), -2.0 * w.imag(), 1.0 - s2) / (1.0 + s2);
}

ExtComplex from_sphere(const Eigen::Vector3d& p) {
  const Eigen::Vector3d q = p.normalized();
  if (q.z() <= 0.0) return Complex(q.x(), q.y()) / (1.0 - q.z());
  const Complex conj(q.x(), -q.y());
  if (std::norm(conj) == 0.0) return ExtComplex::infinity();
  return (1.0 + q.z()) / conj;
}

double chordal_distance(const ExtComplex& a, const ExtComplex& b) {
  return (to_sphere(a) - to_sphere(b)).norm();
}

Mobius::Mobius(const Eigen::Matrix2cd& m) : m_(m) {
  if (std::abs(m.determinant()) < 1e-300) throw PreconditionError("Mobius: singular matrix");
}

Mobius Mobius::to_standard(const ExtComplex& z1, const ExtComplex& z2, const ExtComplex& z3) {
  Eigen::Matrix2cd m;
  if (z1.infinite) {
    m << 0.0, z3.value - z2.value, 1.0, -z2.value;
  } else if (z2.infinite) {
    m << 1.0, -z1.value, 0.0, z3.value - z1.value;
  } else if (z3.infinite) {
    m << 1.0, -z1.value, 1.0, -z2.value;
  } else {
    m << z3.value - z2.value, -z1.value * (z3.value - z2.value), z3.value - z1.value,
        -z2.value * (z3.value - z1.value);
  }
  if (std::abs(m.determinant()) < 1e-14 * m.cwiseAbs2().sum()) {
    throw DegeneracyError("Mobius::to_standard: points are not distinct");
  }
  return Mobius(m);
}

Mobius Mobius::from_points(const ExtComplex& z1, const ExtComplex& z2, const ExtComplex& z3,
                           const ExtComplex& w1, const ExtComplex& w2, const ExtComplex& w3) {
  return to_standard(w1, w2, w3).inverse() * to_standard(z1, z2, z3);
}

ExtComplex Mobius::operator()(const ExtComplex& z) const {
  const Complex a = m_(0, 0), b = m_(0, 1), c = m_(1, 0), d = m_(1, 1);
  if (z.infinite) {
    if (c == Complex(0.0)) return ExtComplex::infinity();
    return a / c;
  }
  const Complex den = c * z.value + d;
  if (den == Complex(0.0)) return ExtComplex::infinity();
  return (a * z.value + b) / den;
}

Mobius Mobius::inverse() const {
  Eigen::Matrix2cd inv;
  inv << m_(1, 1), -m_(0, 1), -m_(1, 0), m_(0, 0);
  return Mobius(inv);
}

RationalMap::RationalMap(std::vector<ExtComplex> zeros, std::vector<ExtComplex> poles, Complex scale)
    : zeros_(std::move(zeros)), poles_(std::move(poles)), scale_(scale) {
  if (zeros_.empty()) throw PreconditionError("RationalMap: degree must be at least 1");
  if (zeros_.size() != poles_.size()) throw InvariantError("RationalMap: need as many zeros as poles");
  if (scale_ == Complex(0.0) || !std::isfinite(std::abs(scale_))) {
    throw InvariantError("RationalMap: scale must be finite and nonzero");
  }
  for (const auto& p : zeros_) {
    for (const auto& q : poles_) {
      if ((p.infinite && q.infinite) || (!p.infinite && !q.infinite && p.value == q.value)) {
        throw InvariantError("RationalMap: a zero coincides with a pole");
      }
    }
  }
}

RationalMap RationalMap::identity() { return RationalMap({Complex(0.0)}, {ExtComplex::infinity()}, 1.0); }

RationalMap RationalMap::power(int d) {
  if (d < 1) throw PreconditionError("RationalMap::power: degree must be at least 1");
  return RationalMap(std::vector<ExtComplex>(d, Complex(0.0)), std::vector<ExtComplex>(d, ExtComplex::infinity()),
                     1.0);
}

RationalMap RationalMap::random(int d, std::uint64_t seed) {
  if (d < 1) throw PreconditionError("RationalMap::random: degree must be at least 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (;;) {
    std::vector<ExtComplex> zeros, poles;
    for (int i = 0; i < d; ++i) zeros.emplace_back(Complex(normal(rng), normal(rng)));
    for (int i = 0; i < d; ++i) poles.emplace_back(Complex(normal(rng), normal(rng)));
    bool separated = true;
    for (const auto& p : zeros)
      for (const auto& q : poles) separated = separated && chordal_distance(p, q) >= 0.1;
    const Complex scale(normal(rng), normal(rng));
    if (separated && std::abs(scale) > 0.1) return RationalMap(zeros, poles, scale);
  }
}

namespace {

Eigen::VectorXcd poly_from_roots(const std::vector<ExtComplex>& roots) {
  Eigen::VectorXcd p = Eigen::VectorXcd::Ones(1);
  for (const auto& r : roots) {
    if (r.infinite) continue;
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(p.size() + 1);
    next.tail(p.size()) += p;
    next.head(p.size()) -= r.value * p;
    p = next;
  }
  return p;
}

Eigen::VectorXcd derivative(const Eigen::VectorXcd& p) {
  if (p.size() <= 1) return Eigen::VectorXcd::Zero(1);
  Eigen::VectorXcd d(p.size() - 1);
  for (Eigen::Index i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
  return d;
}

Eigen::VectorXcd multiply(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Eigen::VectorXcd subtract(Eigen::VectorXcd a, Eigen::VectorXcd b) {
  const Eigen::Index n = std::max(a.size(), b.size());
  a.conservativeResizeLike(Eigen::VectorXcd::Zero(n));
  b.conservativeResizeLike(Eigen::VectorXcd::Zero(n));
  return a - b;
}

int count_finite(const std::vector<ExtComplex>& v) {
  return static_cast<int>(std::count_if(v.begin(), v.end(), [](const ExtComplex& z) { return !z.infinite; }));
}

}  // namespace

Eigen::VectorXcd RationalMap::numerator() const { return poly_from_roots(zeros_); }
Eigen::VectorXcd RationalMap::denominator() const { return poly_from_roots(poles_); }

ExtComplex RationalMap::evaluate(const ExtComplex& z) const {
  if (z.infinite) {
    const int nz = count_finite(zeros_);
    const int np = count_finite(poles_);
    if (nz > np) return ExtComplex::infinity();
    if (nz < np) return Complex(0.0);
    return scale_;
  }
  Complex num = scale_;
  Complex den = 1.0;
  for (const auto& p : zeros_)
    if (!p.infinite) num *= z.value - p.value;
  for (const auto& q : poles_)
    if (!q.infinite) den *= z.value - q.value;
  if (den == Complex(0.0)) {
    if (num == Complex(0.0)) throw InvariantError("RationalMap::evaluate: 0/0");
    return ExtComplex::infinity();
  }
  const Complex value = num / den;
  if (!std::isfinite(std::abs(value))) return ExtComplex::infinity();
  return value;
}

ExtComplex evaluate(const RationalMap& g, const ExtComplex& z) { return g.evaluate(z); }

HolDimensions hol_space_dimension(int d) {
  if (d < 1) throw PreconditionError("hol_space_dimension: d must be at least 1");
  return {2 * d + 1, 4 * d + 2};
}

std::vector<BranchPoint> branch_points(const RationalMap& g) {
  const int d = g.degree();
  const Eigen::VectorXcd p = g.numerator();
  const Eigen::VectorXcd q = g.denominator();
  Eigen::VectorXcd w = subtract(multiply(derivative(p), q), multiply(p, derivative(q)));
  const double scale = w.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw NumericError("branch_points: derivative vanishes identically");
  Eigen::Index degree = w.size() - 1;
  while (degree > 0 && std::abs(w[degree]) <= 1e-13 * scale) --degree;

  std::vector<BranchPoint> out;
  if (degree > 0) {
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
    for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < degree; ++i) companion(i, degree - 1) = -w[i] / w[degree];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
    if (solver.info() != Eigen::Success) throw NumericError("branch_points: root finding failed");
    std::vector<Complex> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + degree);
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
      if (used[i]) continue;
      Complex sum = roots[i];
      int count = 1;
      used[i] = true;
      for (std::size_t j = i + 1; j < roots.size(); ++j) {
        if (!used[j] && std::abs(roots[j] - roots[i]) <= 1e-4 * (1.0 + std::abs(roots[i]))) {
          used[j] = true;
          sum += roots[j];
          ++count;
        }
      }
      out.push_back({ExtComplex(sum / static_cast<double>(count)), count});
    }
  }
  const int at_infinity = 2 * d - 2 - static_cast<int>(degree);
  if (at_infinity < 0) throw NumericError("branch_points: inconsistent derivative degree");
  if (at_infinity > 0) out.push_back({ExtComplex::infinity(), at_infinity});
  int total = 0;
  for (const auto& b : out) total += b.multiplicity;
  if (total != 2 * d - 2) throw NumericError("branch_points: multiplicities do not add up to 2d - 2");
  return out;
}

SphereEmbedding equator_embedding(int n) {
  if (n < 2) throw PreconditionError("equator_embedding: n must be at least 2");
  return [n](const Eigen::Vector3d& p) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 1);
    v.head<3>() = p;
    return v;
  };
}

SphereMap compose_cover(MeshPtr mesh, const SphereEmbedding& h, int n, const RationalMap& g,
                        const ComposeOptions& options) {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  if (options.snap_branch_point && g.degree() > 1) {
    const auto branches = branch_points(g);
    const auto it = std::find_if(branches.begin(), branches.end(), [](const BranchPoint& b) { return !b.point.infinite; });
    if (it != branches.end()) {
      const Eigen::Vector3d target = to_sphere(it->point);
      int nearest = 0;
      double best = -2.0;
      for (int v = 0; v < mesh->vertex_count(); ++v) {
        const double c = mesh->vertex(v).dot(target);
        if (c > best) {
          best = c;
          nearest = v;
        }
      }
      rotation = Eigen::Quaterniond::FromTwoVectors(mesh->vertex(nearest), target).toRotationMatrix();
    }
  }
  return SphereMap::sample(std::move(mesh), n, [&](const Eigen::Vector3d& p) {
    const Eigen::VectorXd value = h(to_sphere(g.evaluate(from_sphere(rotation * p))));
    if (value.size() != n + 1) throw PreconditionError("compose_cover: embedding has the wrong dimension");
    return value;
  });
}

DoubleCoverNormalization normalize_double_cover(const RationalMap& g) {
  if (g.degree() != 2) throw PreconditionError("normalize_double_cover: degree must be 2");
  const auto branches = branch_points(g);
  if (branches.size() != 2) throw DegeneracyError("normalize_double_cover: branch points coincide");
  const ExtComplex b1 = branches[0].point;
  const ExtComplex b2 = branches[1].point;
  if (chordal_distance(b1, b2) < 1e-8) throw DegeneracyError("normalize_double_cover: branch points coincide");

  Eigen::Matrix2cd tm;
  if (b2.infinite) {
    tm << 1.0, -b1.value, 0.0, 1.0;
  } else if (b1.infinite) {
    tm << 0.0, 1.0, 1.0, -b2.value;
  } else {
    tm << 1.0, -b1.value, 1.0, -b2.value;
  }
  DoubleCoverNormalization out;
  out.t = Mobius(tm);
  const ExtComplex one_preimage = out.t.inverse()(Complex(1.0));
  const Mobius s_inverse = Mobius::from_points(Complex(0.0), ExtComplex::infinity(), Complex(1.0), g(b1), g(b2),
                                               g(one_preimage));
  out.s = s_inverse.inverse();

  // Deterministic spiral of sample points over the sphere.
  constexpr int kSamples = 20;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < kSamples; ++k) {
    const double zc = 1.0 - (2.0 * k + 1.0) / kSamples;
    const double r = std::sqrt(1.0 - zc * zc);
    const ExtComplex z = from_sphere(Eigen::Vector3d(r * std::cos(golden * k), r * std::sin(golden * k), zc));
    const ExtComplex tz = out.t(z);
    const ExtComplex squared = tz.infinite ? ExtComplex::infinity() : ExtComplex(tz.value * tz.value);
    out.residual = std::max(out.residual, chordal_distance(g(z), s_inverse(squared)));
  }
  if (!(out.residual <= 1e-8)) {
    throw NumericError("normalize_double_cover: residual " + std::to_string(out.residual) + " above 1e-8");
  }
  return out;
}

namespace {

Eigen::Matrix3d image_stiffness(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                                double twice_area) {
  const Eigen::VectorXd p[3] = {a, b, c};
  Eigen::Matrix3d k = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int l = (i + 2) % 3;
    const double half_cot = 0.5 * (p[j] - p[i]).dot(p[l] - p[i]) / twice_area;
    k(j, l) -= half_cot;
    k(l, j) -= half_cot;
    k(j, j) += half_cot;
    k(l, l) += half_cot;
  }
  return k;
}

}  // namespace

InducedSpectrum induced_metric_spectrum(const SphereMap& f, double eps_reg, int k) {
  if (!(eps_reg > 0.0 && eps_reg < 1.0)) throw PreconditionError("induced_metric_spectrum: eps_reg must lie in (0, 1)");
  const SphereMesh& mesh = f.mesh();
  const int nf = mesh.face_count();
  std::vector<double> image_area(nf);
  double image_total = 0.0;
  double domain_total = 0.0;
  for (int t = 0; t < nf; ++t) {
    const Eigen::VectorXd a = f.value(mesh.faces()(t, 0));
    const Eigen::VectorXd e1 = f.value(mesh.faces()(t, 1)) - a;
    const Eigen::VectorXd e2 = f.value(mesh.faces()(t, 2)) - a;
    image_area[t] = 0.5 * std::sqrt(std::max(0.0, e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2)));
    image_total += image_area[t];
    domain_total += mesh.element(t).flat_area;
  }
  const double mean_factor = image_total / domain_total;
  const double floor_factor = eps_reg * mean_factor;

  InducedSpectrum out;
  std::vector<Eigen::Triplet<double>> ks, ms;
  ks.reserve(9 * nf);
  ms.reserve(9 * nf);
  for (int t = 0; t < nf; ++t) {
    const ElementGeometry& g = mesh.element(t);
    Eigen::Matrix3d stiffness;
    double area;
    if (image_area[t] < floor_factor * g.flat_area) {
      ++out.floored_elements;
      stiffness = g.stiffness;
      area = floor_factor * g.flat_area;
    } else {
      stiffness = image_stiffness(f.value(mesh.faces()(t, 0)), f.value(mesh.faces()(t, 1)),
                                  f.value(mesh.faces()(t, 2)), 2.0 * image_area[t]);
      area = image_area[t];
    }
    out.area += area;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        ks.emplace_back(mesh.faces()(t, i), mesh.faces()(t, j), stiffness(i, j));
        ms.emplace_back(mesh.faces()(t, i), mesh.faces()(t, j), area / 12.0 * (i == j ? 2.0 : 1.0));
      }
  }
  SparseMatrix kmat(mesh.vertex_count(), mesh.vertex_count());
  SparseMatrix mmat(mesh.vertex_count(), mesh.vertex_count());
  kmat.setFromTriplets(ks.begin(), ks.end());
  mmat.setFromTriplets(ms.begin(), ms.end());

  EigenOptions options;
  options.count = k;
  options.shift = -1.0;
  options.guard_vectors = std::max(12, k);
  const EigenResult result = smallest_eigenpairs(kmat, mmat, options);
  if (!result.converged) {
    throw ConvergenceError("induced_metric_spectrum: eigensolver did not converge", result.max_residual);
  }
  out.eigenvalues = result.values;
  out.lambda1 = result.values.size() > 1 ? result.values[1] : 0.0;
  out.floored_fraction = static_cast<double>(out.floored_elements) / nf;
  out.degeneracy_warning = out.floored_fraction > 0.01;
  return out;
}

double induced_metric_lambda1(const SphereMap& f, double eps_reg) {
  return induced_metric_spectrum(f, eps_reg).lambda1;
}

int double_cover_normal_index(const SphereMap& f, int n, double eps_reg, double margin) {
  if (n < 3) throw PreconditionError("double_cover_normal_index: n must be at least 3");
  const InducedSpectrum spectrum = induced_metric_spectrum(f, eps_reg, 12);
  int below = 0;
  for (double lambda : spectrum.eigenvalues) {
    if (lambda < 2.0 - margin) ++below;
  }
  return below * (n - 2);
}

namespace {

nlohmann::json point_json(const ExtComplex& z) {
  if (z.infinite) return "inf";
  return nlohmann::json::array({z.value.real(), z.value.imag()});
}

ExtComplex point_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return ExtComplex::infinity();
    throw ConfigError("rational map: points are [re, im] pairs or \"inf\"");
  }
  if (j.is_number()) return ExtComplex(j.get<double>());
  if (!j.is_array() || j.size() != 2) throw ConfigError("rational map: points are [re, im] pairs or \"inf\"");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

nlohmann::json to_json(const RationalMap& g) {
  nlohmann::json zeros = nlohmann::json::array();
  nlohmann::json poles = nlohmann::json::array();
  for (const auto& z : g.zeros()) zeros.push_back(point_json(z));
  for (const auto& p : g.poles()) poles.push_back(point_json(p));
  return {{"zeros", zeros}, {"poles", poles}, {"scale_re", g.scale().real()}, {"scale_im", g.scale().imag()}};
}

RationalMap rational_map_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("zeros") || !j.contains("poles")) {
    throw ConfigError("rational map: fields 'zeros' and 'poles' are required");
  }
  std::vector<ExtComplex> zeros, poles;
  for (const auto& z : j.at("zeros")) zeros.push_back(point_from_json(z));
  for (const auto& p : j.at("poles")) poles.push_back(point_from_json(p));
  const Complex scale(j.value("scale_re", 1.0), j.value("scale_im", 0.0));
  try {
    return RationalMap(std::move(zeros), std::move(poles), scale);
  } catch (const Error& e) {
    throw ConfigError(std::string("rational map: ") + e.what());
  }
}

}  // namespace minsphere
