#include "minsphere/spectrum.hpp"

#include "minsphere/eigensolver.hpp"
#include "minsphere/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>

namespace minsphere {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

double unit_round_scale(const SphereMesh& mesh) { return 1.0 / mesh.unit_round_area(); }

// Orthonormal basis of the complement of span(columns of `span`) in R^m.
Eigen::MatrixXd complement(const Eigen::MatrixXd& span, int m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(span);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  return q.rightCols(m - span.cols());
}

SparseMatrix frame_operator(const Eigen::MatrixXd& frames, int vertices, int m, int r) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(vertices) * m * r);
  for (int i = 0; i < vertices; ++i)
    for (int c = 0; c < m; ++c)
      for (int j = 0; j < r; ++j) t.emplace_back(i * m + c, i * r + j, frames(c, i * r + j));
  SparseMatrix b(vertices * m, vertices * r);
  b.setFromTriplets(t.begin(), t.end());
  return b;
}

SparseMatrix kron_identity(const SparseMatrix& a, int m) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * m);
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      for (int c = 0; c < m; ++c) t.emplace_back(it.row() * m + c, it.col() * m + c, it.value());
  SparseMatrix out(a.rows() * m, a.cols() * m);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

SecondVariationPencil reduce(const SphereMap& map, const SparseMatrix& hessian,
                             const Eigen::VectorXd& constraint, Eigen::MatrixXd frames, int r) {
  const int v = map.vertex_count();
  const int m = map.target_dim() + 1;
  SparseMatrix corrected = hessian;
  {
    Triplets diag;
    for (int i = 0; i < v; ++i)
      for (int c = 0; c < m; ++c) diag.emplace_back(i * m + c, i * m + c, -constraint[i]);
    SparseMatrix d(v * m, v * m);
    d.setFromTriplets(diag.begin(), diag.end());
    corrected += d;
  }
  const SparseMatrix b = frame_operator(frames, v, m, r);
  const FemPencil pencil = assemble_pencil(map.mesh().with_convention(AreaConvention::UnitRound));

  SecondVariationPencil out;
  out.hessian = SparseMatrix(b.transpose() * corrected * b);
  out.mass = SparseMatrix(b.transpose() * kron_identity(pencil.mass, m) * b);
  // Symmetrise away rounding so symmetric solvers see an exactly symmetric pencil.
  out.hessian = SparseMatrix(0.5 * (out.hessian + SparseMatrix(out.hessian.transpose())));
  out.mass = SparseMatrix(0.5 * (out.mass + SparseMatrix(out.mass.transpose())));
  out.frames = std::move(frames);
  out.fiber_dim = r;
  // The Euclidean Hessian is positive semidefinite for alpha >= 1 and the
  // consistent mass dominates a quarter of the lumped mass.
  double worst = 0.0;
  for (int i = 0; i < v; ++i) worst = std::max(worst, constraint[i] / map.mesh().lumped_mass()[i]);
  out.lower_bound = -4.0 * worst;
  return out;
}

Eigen::VectorXd constraint_multipliers(const SphereMap& map, double alpha) {
  const Eigen::MatrixXd grad = alpha_energy_euclidean_gradient(map, alpha);
  return (grad.array() * map.values().array()).rowwise().sum();
}

}  // namespace

SparseMatrix alpha_energy_hessian(const SphereMap& map, double alpha) {
  if (!(alpha >= 1.0)) throw PreconditionError("alpha_energy_hessian: alpha must be at least 1");
  const SphereMesh& mesh = map.mesh();
  const int m = map.target_dim() + 1;
  const double s = unit_round_scale(mesh);
  const Eigen::VectorXd e = energy_densities(map);
  Triplets t;
  t.reserve(static_cast<std::size_t>(mesh.face_count()) * 9 * m * (alpha == 1.0 ? 1 : 1 + m));
  for (int f = 0; f < mesh.face_count(); ++f) {
    const ElementGeometry& g = mesh.element(f);
    const double base = 1.0 + e[f] / s;
    const double w = alpha == 1.0 ? 1.0 : alpha * std::pow(base, alpha - 1.0);
    int idx[3];
    for (int i = 0; i < 3; ++i) idx[i] = mesh.faces()(f, i);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < m; ++c) t.emplace_back(idx[i] * m + c, idx[j] * m + c, w * g.stiffness(i, j));
    if (alpha != 1.0) {
      Eigen::MatrixXd ft(3, m);
      for (int i = 0; i < 3; ++i) ft.row(i) = map.values().row(idx[i]);
      const Eigen::MatrixXd kf = g.stiffness * ft;
      const double curvature = 2.0 * alpha * (alpha - 1.0) * std::pow(base, alpha - 2.0) / (s * g.area);
      for (int i = 0; i < 3; ++i)
        for (int a = 0; a < m; ++a)
          for (int j = 0; j < 3; ++j)
            for (int b = 0; b < m; ++b)
              t.emplace_back(idx[i] * m + a, idx[j] * m + b, curvature * kf(i, a) * kf(j, b));
    }
  }
  const int size = map.vertex_count() * m;
  SparseMatrix h(size, size);
  h.setFromTriplets(t.begin(), t.end());
  return h;
}

SecondVariationPencil assemble_second_variation(const SphereMap& map, double alpha) {
  const int v = map.vertex_count();
  const int m = map.target_dim() + 1;
  const int r = m - 1;
  Eigen::MatrixXd frames(m, v * r);
  for (int i = 0; i < v; ++i) frames.middleCols(i * r, r) = complement(map.value(i), m);
  return reduce(map, alpha_energy_hessian(map, alpha), constraint_multipliers(map, alpha), std::move(frames),
                r);
}

SecondVariationPencil normal_second_variation(const SphereMap& map) {
  const SphereMesh& mesh = map.mesh();
  const int v = map.vertex_count();
  const int m = map.target_dim() + 1;
  if (m < 4) throw PreconditionError("normal_second_variation: target dimension must be at least 3");
  const int r = m - 3;

  // Immersion check: conformal factor of every element against the mean.
  std::vector<Eigen::MatrixXd> planes(v, Eigen::MatrixXd::Zero(m, m));
  std::vector<double> factor(mesh.face_count());
  double mean_factor = 0.0;
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Eigen::VectorXd a = map.value(mesh.faces()(f, 0));
    const Eigen::VectorXd e1 = map.value(mesh.faces()(f, 1)) - a;
    const Eigen::VectorXd e2 = map.value(mesh.faces()(f, 2)) - a;
    const double gram = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
    const double image_area = 0.5 * std::sqrt(std::max(0.0, gram));
    factor[f] = image_area / mesh.element(f).flat_area;
    mean_factor += factor[f] / mesh.face_count();
    if (image_area <= 0.0) continue;
    const Eigen::VectorXd u1 = e1.normalized();
    const Eigen::VectorXd u2 = (e2 - e2.dot(u1) * u1).normalized();
    const Eigen::MatrixXd proj = image_area * (u1 * u1.transpose() + u2 * u2.transpose());
    for (int i = 0; i < 3; ++i) planes[mesh.faces()(f, i)] += proj;
  }
  if (!(mean_factor > 1e-12)) throw DegeneracyError("normal_second_variation: the map has no area");
  std::vector<int> degenerate;
  for (int f = 0; f < mesh.face_count(); ++f) {
    if (factor[f] < 1e-3 * mean_factor) degenerate.push_back(f);
  }
  if (!degenerate.empty()) {
    std::string list;
    for (std::size_t k = 0; k < std::min<std::size_t>(degenerate.size(), 10); ++k) {
      list += (k ? "," : "") + std::to_string(degenerate[k]);
    }
    throw DegeneracyError("normal_second_variation: " + std::to_string(degenerate.size()) +
                          " non-immersed elements (first: " + list + ")");
  }

  Eigen::MatrixXd frames(m, v * r);
  for (int i = 0; i < v; ++i) {
    const Eigen::VectorXd fi = map.value(i);
    const Eigen::MatrixXd perp = Eigen::MatrixXd::Identity(m, m) - fi * fi.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(perp * planes[i] * perp);
    Eigen::MatrixXd span(m, 3);
    span.col(0) = fi;
    span.col(1) = eig.eigenvectors().col(m - 1);
    span.col(2) = eig.eigenvectors().col(m - 2);
    frames.middleCols(i * r, r) = complement(span, m);
  }
  return reduce(map, alpha_energy_hessian(map, 1.0), constraint_multipliers(map, 1.0), std::move(frames), r);
}

Eigen::VectorXd apply(const SecondVariationPencil& pencil, const Eigen::VectorXd& x) {
  if (x.size() != pencil.hessian.cols()) throw PreconditionError("apply: dimension mismatch");
  return pencil.hessian * x;
}

SpectrumReport classify(const Eigen::VectorXd& eigenvalues, double tau) {
  if (!(tau > 0.0)) throw PreconditionError("classify: tau must be positive");
  SpectrumReport report;
  report.eigenvalues = eigenvalues;
  report.tau = tau;
  report.k = static_cast<int>(eigenvalues.size());
  for (double lambda : eigenvalues) {
    if (lambda < -tau) ++report.index;
    else if (std::abs(lambda) <= tau) ++report.nullity;
  }
  return report;
}

SpectrumReport morse_index_nullity(const SecondVariationPencil& pencil, int k, double tau) {
  if (k < 1) throw PreconditionError("morse_index_nullity: k must be positive");
  EigenOptions options;
  options.count = k;
  options.shift = pencil.lower_bound - 1.0;
  options.guard_vectors = std::max(12, k);
  options.tolerance = 1e-8;
  options.max_iterations = 3000;
  const EigenResult result = smallest_eigenpairs(pencil.hessian, pencil.mass, options);
  SpectrumReport report = classify(result.values, tau);
  report.k = k;
  report.converged = result.converged;
  report.max_residual = result.max_residual;
  return report;
}

TauCalibration calibrate_tau(int level) {
  static std::mutex mutex;
  static std::map<int, TauCalibration> cache;
  {
    std::lock_guard<std::mutex> lock(mutex);
    const auto it = cache.find(level);
    if (it != cache.end()) return it->second;
  }
  constexpr int kNullDimension = 12;  // 3 (n - 2) + 6 at n = 4
  const SphereMap equator = equator_map(make_icosphere(level), 4);
  const SecondVariationPencil pencil = assemble_second_variation(equator, 1.0);
  const SpectrumReport spectrum = morse_index_nullity(pencil, 24, 1.0);
  std::vector<double> magnitudes(spectrum.eigenvalues.size());
  for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) magnitudes[i] = std::abs(spectrum.eigenvalues[i]);
  std::sort(magnitudes.begin(), magnitudes.end());
  TauCalibration out;
  out.null_edge = magnitudes[kNullDimension - 1];
  out.gap_edge = magnitudes[kNullDimension];
  out.tau = std::sqrt(out.null_edge * out.gap_edge);
  out.eigenvalues = spectrum.eigenvalues;
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(level, out);
  return out;
}

namespace {

void weighted_schrodinger(const SphereMesh& mesh, const Eigen::VectorXd& potential,
                          const Eigen::VectorXd& weight, SparseMatrix& a, SparseMatrix& b) {
  Triplets ta;
  Triplets tb;
  ta.reserve(9 * mesh.face_count());
  tb.reserve(9 * mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    const ElementGeometry& g = mesh.element(f);
    int idx[3];
    Eigen::Vector3d p[3];
    for (int i = 0; i < 3; ++i) {
      idx[i] = mesh.faces()(f, i);
      p[i] = mesh.vertex(idx[i]);
    }
    const Eigen::Vector3d normal = (p[1] - p[0]).cross(p[2] - p[0]).normalized();
    Eigen::Vector3d grad[3];
    for (int i = 0; i < 3; ++i) grad[i] = normal.cross(p[(i + 2) % 3] - p[(i + 1) % 3]) / (2.0 * g.flat_area);
    Eigen::Vector3d grad_weight = Eigen::Vector3d::Zero();
    double mean_weight = 0.0;
    for (int k = 0; k < 3; ++k) {
      grad_weight += weight[idx[k]] * grad[k];
      mean_weight += weight[idx[k]] / 3.0;
    }
    // Exact integrals of products of three hat functions.
    auto triple = [&](int i, int j, int k) {
      if (i == j && j == k) return g.area / 10.0;
      if (i == j || j == k || i == k) return g.area / 30.0;
      return g.area / 60.0;
    };
    for (int i = 0; i < 3; ++i) {      // test function
      for (int j = 0; j < 3; ++j) {    // trial function
        double mass = 0.0;
        double potential_term = 0.0;
        for (int k = 0; k < 3; ++k) {
          mass += weight[idx[k]] * triple(i, j, k);
          potential_term += potential[idx[k]] * weight[idx[k]] * triple(i, j, k);
        }
        const double stiffness =
            g.stiffness(i, j) * mean_weight + g.flat_area / 3.0 * grad[j].dot(grad_weight);
        ta.emplace_back(idx[i], idx[j], stiffness - potential_term);
        tb.emplace_back(idx[i], idx[j], mass);
      }
    }
  }
  a.resize(mesh.vertex_count(), mesh.vertex_count());
  b.resize(mesh.vertex_count(), mesh.vertex_count());
  a.setFromTriplets(ta.begin(), ta.end());
  b.setFromTriplets(tb.begin(), tb.end());
}

}  // namespace

double scaling_invariance_check(const SphereMesh& mesh, const Eigen::VectorXd& potential,
                                const Eigen::VectorXd& weight, int k) {
  if (potential.size() != mesh.vertex_count() || weight.size() != mesh.vertex_count()) {
    throw PreconditionError("scaling_invariance_check: one value per vertex required");
  }
  if (!(weight.minCoeff() > 0.0)) throw PreconditionError("scaling_invariance_check: weight must be positive");
  SparseMatrix a0, b0, a1, b1;
  weighted_schrodinger(mesh, potential, Eigen::VectorXd::Ones(mesh.vertex_count()), a0, b0);
  weighted_schrodinger(mesh, potential, weight, a1, b1);
  EigenOptions options;
  options.count = k;
  options.shift = -potential.cwiseAbs().maxCoeff() - 1.0;
  options.guard_vectors = std::max(12, k);
  options.tolerance = 1e-10;
  const EigenResult plain = smallest_eigenvalues_nonsymmetric(a0, b0, options);
  const EigenResult weighted = smallest_eigenvalues_nonsymmetric(a1, b1, options);
  if (!plain.converged || !weighted.converged) {
    throw ConvergenceError("scaling_invariance_check: eigensolver did not converge",
                           std::max(plain.max_residual, weighted.max_residual));
  }
  double worst = 0.0;
  for (int i = 0; i < k; ++i) {
    worst = std::max(worst, std::abs(weighted.values[i] - plain.values[i]) / std::max(std::abs(plain.values[i]), 1.0));
  }
  return worst;
}

Eigen::VectorXd smooth_random_weight(const SphereMesh& mesh, std::uint64_t seed, double lo, double hi) {
  if (!(lo > 0.0 && hi > lo)) throw PreconditionError("smooth_random_weight: need 0 < lo < hi");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::Vector3d linear;
  Eigen::Matrix3d quadratic;
  for (int i = 0; i < 3; ++i) linear[i] = normal(rng);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) quadratic(i, j) = normal(rng);
  Eigen::VectorXd g(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Eigen::Vector3d p = mesh.vertex(v);
    g[v] = linear.dot(p) + 0.5 * p.dot(quadratic * p);
  }
  g.array() -= 0.5 * (g.maxCoeff() + g.minCoeff());
  g /= std::max(g.cwiseAbs().maxCoeff(), 1e-300);
  const double mid = 0.5 * (std::log(lo) + std::log(hi));
  const double half = 0.5 * (std::log(hi) - std::log(lo));
  return (mid + half * g.array()).exp().matrix();
}

CutoffProfile::CutoffProfile(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw PreconditionError("cutoff_profile: epsilon must lie in (0, 1)");
}

double CutoffProfile::operator()(double r) const {
  if (r <= epsilon_ * epsilon_) return 0.0;
  if (r >= epsilon_) return 1.0;
  return 2.0 - std::log(r) / std::log(epsilon_);
}

double CutoffProfile::derivative(double r) const {
  if (r <= epsilon_ * epsilon_ || r >= epsilon_) return 0.0;
  return -1.0 / (r * std::log(epsilon_));
}

CutoffProfile cutoff_profile(double epsilon) { return CutoffProfile(epsilon); }

double cutoff_dirichlet_energy(double epsilon) {
  const CutoffProfile phi(epsilon);
  // Integrate r phi'(r)^2 dr in the variable s = log r, where dr = r ds.
  const double integral = integrate(
      [&](double s) {
        const double r = std::exp(s);
        const double d = phi.derivative(r);
        return r * r * d * d;
      },
      2.0 * std::log(epsilon), std::log(epsilon));
  return 2.0 * std::numbers::pi * integral;
}

double index_energy_diagnostic(const std::vector<IndexEnergySample>& samples) {
  if (samples.empty()) throw PreconditionError("index_energy_diagnostic: no samples");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (!(s.energy > 0.0)) throw PreconditionError("index_energy_diagnostic: energy must be positive");
    best = std::min(best, (s.index + 1) / s.energy);
  }
  return best;
}

void write_spectrum_csv(const SpectrumReport& report, std::ostream& out) {
  out.precision(17);
  out << "rank,eigenvalue,classification\n";
  for (Eigen::Index i = 0; i < report.eigenvalues.size(); ++i) {
    const double lambda = report.eigenvalues[i];
    const char* kind = lambda < -report.tau ? "negative" : (std::abs(lambda) <= report.tau ? "null" : "positive");
    out << i << ',' << lambda << ',' << kind << '\n';
  }
}

nlohmann::json to_json(const SpectrumReport& report) {
  return {{"eigenvalues", std::vector<double>(report.eigenvalues.data(),
                                              report.eigenvalues.data() + report.eigenvalues.size())},
          {"index", report.index},
          {"nullity", report.nullity},
          {"tau", report.tau},
          {"k", report.k},
          {"converged", report.converged},
          {"max_residual", report.max_residual}};
}

}  // namespace minsphere
