#include "minsphere/flow.hpp"

#include "minsphere/sphere_mesh.hpp"

#include <Eigen/SparseCholesky>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <unordered_map>

namespace minsphere {

void FlowConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw PreconditionError(std::string("FlowConfig: ") + what);
  };
  require(alpha >= 1.0 && std::isfinite(alpha), "alpha must be at least 1");
  require(max_iterations > 0, "max_iterations must be positive");
  require(grad_tol > 0.0, "grad_tol must be positive");
  require(grad_floor >= 0.0, "grad_floor must be nonnegative");
  require(armijo_c1 > 0.0 && armijo_c1 < 0.5, "armijo_c1 must lie in (0, 0.5)");
  require(step_init > 0.0, "step_init must be positive");
  require(step_shrink > 0.0 && step_shrink < 1.0, "step_shrink must lie in (0, 1)");
  require(min_step > 0.0 && min_step < step_init, "min_step must lie in (0, step_init)");
}

double CriticalRecord::epsilon1() const {
  double worst = 0.0;
  for (const auto& s : pseudogradient_log) {
    if (s.differential_norm > 0.0) worst = std::max(worst, s.direction_norm / s.differential_norm);
  }
  return worst;
}

double CriticalRecord::epsilon2() const {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& s : pseudogradient_log) {
    if (s.differential_norm > 0.0) {
      worst = std::min(worst, s.pairing / (s.differential_norm * s.differential_norm));
    }
  }
  return pseudogradient_log.empty() ? 0.0 : worst;
}

TangentField project_tangent(const SphereMap& map, const Eigen::MatrixXd& field) {
  if (field.rows() != map.values().rows() || field.cols() != map.values().cols()) {
    throw PreconditionError("project_tangent: shape mismatch");
  }
  Eigen::MatrixXd out = field;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i) -= out.row(i).dot(map.values().row(i)) * map.values().row(i);
  }
  return TangentField(map, std::move(out));
}

double dual_norm(const SphereMesh& mesh, const Eigen::MatrixXd& field) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < field.rows(); ++i) {
    total += field.row(i).squaredNorm() / mesh.lumped_mass()[i];
  }
  return std::sqrt(total);
}

namespace {

Eigen::MatrixXd retract(const Eigen::MatrixXd& values) {
  return values.rowwise().normalized();
}

CriticalRecord make_record(const SphereMap& map, const FlowConfig& config) {
  CriticalRecord record(map);
  record.alpha = config.alpha;
  return record;
}

void finish_record(CriticalRecord& record) {
  record.energy = dirichlet_energy(record.map);
  record.alpha_energy = alpha_energy(record.map, record.alpha);
  record.center_of_mass_drift = center_of_mass(record.map, record.alpha).norm();
  record.center_of_mass_norm = record.center_of_mass_drift;
}

}  // namespace

CriticalRecord descend(const SphereMap& start, const FlowConfig& config) {
  config.validate();
  const SphereMesh& mesh = start.mesh();
  const MeshPtr mesh_ptr = start.mesh_ptr();

  Eigen::SimplicialLDLT<SparseMatrix> preconditioner;
  SparseMatrix metric;
  if (config.preconditioned) {
    const FemPencil pencil = assemble_pencil(mesh.with_convention(AreaConvention::UnitRound));
    metric = pencil.stiffness + pencil.mass;
    preconditioner.compute(metric);
    if (preconditioner.info() != Eigen::Success) {
      throw NumericError("descend: factorisation of the preconditioner failed");
    }
  }

  CriticalRecord record = make_record(start, config);
  Eigen::MatrixXd values = start.values();
  double energy = alpha_energy(start, config.alpha);
  double step = config.step_init;

  for (int iter = 0;; ++iter) {
    const SphereMap current(mesh_ptr, values);
    const Eigen::MatrixXd grad = alpha_energy_euclidean_gradient(current, config.alpha);
    const Eigen::MatrixXd tangent = project_tangent(current, grad).values();
    const double gnorm = dual_norm(mesh, tangent);
    const double full = dual_norm(mesh, grad);
    if (iter == 0) record.initial_grad_norm = gnorm;
    record.grad_norm = gnorm;
    record.full_grad_norm = full;
    record.iterations = iter;
    record.map = current;

    if (gnorm <= std::max(config.grad_tol * full, config.grad_floor)) {
      record.converged = true;
      break;
    }
    if (iter >= config.max_iterations) break;

    Eigen::MatrixXd direction;
    PseudogradientSample sample;
    if (config.preconditioned) {
      const Eigen::MatrixXd solved = preconditioner.solve(tangent);
      sample.differential_norm = std::sqrt(std::max(0.0, (tangent.array() * solved.array()).sum()));
      direction = -project_tangent(current, solved).values();
      sample.direction_norm = std::sqrt(std::max(0.0, (direction.array() * (metric * direction).array()).sum()));
    } else {
      direction = -(tangent.array().colwise() / mesh.lumped_mass().array()).matrix();
      sample.differential_norm = gnorm;
      sample.direction_norm =
          std::sqrt((direction.array().square().colwise() * mesh.lumped_mass().array()).sum());
    }
    const double slope = (tangent.array() * direction.array()).sum();
    sample.pairing = -slope;
    record.pseudogradient_log.push_back(sample);
    if (!(slope < 0.0)) {
      throw StagnationError("descend: search direction is not a descent direction", record);
    }

    step = std::min(config.step_init, 4.0 * step);
    for (;;) {
      Eigen::MatrixXd trial = retract(values + step * direction);
      const double trial_energy = alpha_energy(SphereMap(mesh_ptr, trial), config.alpha);
      if (trial_energy < energy && trial_energy <= energy + config.armijo_c1 * step * slope) {
        values = std::move(trial);
        energy = trial_energy;
        break;
      }
      step *= config.step_shrink;
      if (step < config.min_step) {
        finish_record(record);
        throw StagnationError("descend: line search failed to decrease the energy", record);
      }
    }
    record.telemetry.push_back({iter + 1, energy, gnorm, step});
  }
  finish_record(record);
  return record;
}

ContinuationResult continue_in_alpha(const CriticalRecord& record, const std::vector<double>& schedule,
                                     const FlowConfig& config) {
  ContinuationResult result;
  if (schedule.empty()) return result;
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] < schedule[k - 1])) {
      throw PreconditionError("continue_in_alpha: schedule must be strictly decreasing");
    }
  }
  SphereMap current = record.map;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    FlowConfig stage = config;
    stage.alpha = schedule[k];
    try {
      CriticalRecord rec = descend(current, stage);
      if (!rec.converged) {
        result.failed_stage = static_cast<int>(k);
        result.failure = "descent did not converge within max_iterations";
        result.records.push_back(std::move(rec));
        break;
      }
      if (rec.energy > 1e-10) {
        const RecenterResult centered = recenter(rec.map, stage.alpha);
        rec.recentered_map = centered.map;
        rec.recentering_parameters = centered.parameters;
        rec.center_of_mass_norm = centered.center_of_mass_norm;
      }
      current = rec.map;
      result.records.push_back(std::move(rec));
    } catch (const StagnationError& e) {
      result.failed_stage = static_cast<int>(k);
      result.failure = e.what();
      result.records.push_back(e.record());
      break;
    } catch (const ConvergenceError& e) {
      result.failed_stage = static_cast<int>(k);
      result.failure = e.what();
      break;
    }
  }
  if (!result.records.empty()) result.final_harmonic_residual = harmonic_residual(result.records.back().map);
  return result;
}

double harmonic_residual(const SphereMap& map) {
  return dual_norm(map.mesh(), project_tangent(map, alpha_energy_euclidean_gradient(map, 1.0)).values());
}

namespace {

// Uniform grid over face centroids for ball queries.
class CentroidGrid {
 public:
  CentroidGrid(const std::vector<Eigen::Vector3d>& points, double cell) : points_(points), cell_(cell) {
    for (int i = 0; i < static_cast<int>(points.size()); ++i) cells_[key(cell_of(points[i]))].push_back(i);
  }

  template <typename Fn>
  void for_each_near(const Eigen::Vector3d& p, Fn&& fn) const {
    const Eigen::Vector3i c = cell_of(p);
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(key(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == cells_.end()) continue;
          for (int i : it->second) fn(i);
        }
  }

 private:
  Eigen::Vector3i cell_of(const Eigen::Vector3d& p) const {
    return (p / cell_).array().floor().cast<int>();
  }
  static std::int64_t key(const Eigen::Vector3i& c) {
    return (static_cast<std::int64_t>(c.x() + 4096) << 26) ^ (static_cast<std::int64_t>(c.y() + 4096) << 13) ^
           static_cast<std::int64_t>(c.z() + 4096);
  }
  const std::vector<Eigen::Vector3d>& points_;
  double cell_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

}  // namespace

std::vector<Concentration> detect_concentration(const SphereMap& map, double epsilon, double radius) {
  constexpr double kHalfPi = 1.5707963267948966;
  if (!(radius > 0.0 && radius < kHalfPi)) {
    throw PreconditionError("detect_concentration: radius must lie in (0, pi/2)");
  }
  const SphereMesh& mesh = map.mesh();
  std::vector<Eigen::Vector3d> centroids(mesh.face_count());
  std::vector<double> energy(mesh.face_count());
  for (int f = 0; f < mesh.face_count(); ++f) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    Eigen::Matrix<double, 3, Eigen::Dynamic> ft(3, map.values().cols());
    for (int i = 0; i < 3; ++i) {
      c += mesh.vertex(mesh.faces()(f, i));
      ft.row(i) = map.values().row(mesh.faces()(f, i));
    }
    centroids[f] = c.normalized();
    energy[f] = 0.5 * (ft.transpose() * mesh.element(f).stiffness * ft).trace();
  }
  const double chord = 2.0 * std::sin(radius / 2.0);
  const double cos_radius = std::cos(radius);
  const CentroidGrid grid(centroids, chord);

  const SphereMesh candidates = build_icosphere(std::min(mesh.subdivision_level(), 5));
  std::vector<Concentration> balls;
  balls.reserve(candidates.vertex_count());
  for (int v = 0; v < candidates.vertex_count(); ++v) {
    const Eigen::Vector3d center = candidates.vertex(v);
    double total = 0.0;
    grid.for_each_near(center, [&](int f) {
      if (centroids[f].dot(center) >= cos_radius) total += energy[f];
    });
    if (total > epsilon) balls.push_back({center, total});
  }
  std::stable_sort(balls.begin(), balls.end(),
                   [](const Concentration& a, const Concentration& b) { return a.local_energy > b.local_energy; });
  std::vector<Concentration> chosen;
  const double cos_separation = std::cos(std::min(2.0 * radius, std::numbers::pi));
  for (const auto& ball : balls) {
    const bool disjoint = std::all_of(chosen.begin(), chosen.end(), [&](const Concentration& c) {
      return c.center.dot(ball.center) <= cos_separation;
    });
    if (disjoint) chosen.push_back(ball);
  }
  return chosen;
}

void write_telemetry_csv(const CriticalRecord& record, std::ostream& out) {
  out.precision(17);
  out << "iteration,alpha_energy,grad_norm,step\n";
  for (const auto& row : record.telemetry) {
    out << row.iteration << ',' << row.alpha_energy << ',' << row.grad_norm << ',' << row.step << '\n';
  }
}

nlohmann::json to_json(const CriticalRecord& record) {
  nlohmann::json j = {{"alpha", record.alpha},
                      {"energy", record.energy},
                      {"alpha_energy", record.alpha_energy},
                      {"grad_norm", record.grad_norm},
                      {"initial_grad_norm", record.initial_grad_norm},
                      {"iterations", record.iterations},
                      {"converged", record.converged},
                      {"center_of_mass_drift", record.center_of_mass_drift},
                      {"center_of_mass_norm", record.center_of_mass_norm},
                      {"recentered", record.recentered_map.has_value()},
                      {"epsilon1", record.epsilon1()},
                      {"epsilon2", record.epsilon2()},
                      {"vertex_count", record.map.vertex_count()},
                      {"target_dim", record.map.target_dim()}};
  if (record.recentered_map) {
    j["recentering_parameters"] = {record.recentering_parameters.x(), record.recentering_parameters.y(),
                                   record.recentering_parameters.z()};
  }
  return j;
}

}  // namespace minsphere
