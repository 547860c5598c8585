#pragma once

#include "minsphere/energy.hpp"
#include "minsphere/errors.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace minsphere {

struct FlowConfig {
  double alpha = 1.1;
  int max_iterations = 2000;
  /// Stop when the projected gradient is this fraction of the full gradient.
  double grad_tol = 1e-6;
  /// Absolute floor on the projected gradient norm (needed near constant maps).
  double grad_floor = 1e-10;
  double armijo_c1 = 1e-4;
  double step_init = 1.0;
  double step_shrink = 0.5;
  double min_step = 1e-14;
  /// Solve (K + M) d = -grad per coordinate for the search direction.
  bool preconditioned = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Norms of the search direction X and of dF, and the pairing dF(X), per step.
struct PseudogradientSample {
  double direction_norm = 0.0;
  double differential_norm = 0.0;
  double pairing = 0.0;
};

struct TelemetryRow {
  int iteration = 0;
  double alpha_energy = 0.0;
  double grad_norm = 0.0;
  double step = 0.0;
};

struct CriticalRecord {
  explicit CriticalRecord(SphereMap m) : map(std::move(m)) {}

  SphereMap map;  ///< the map the descent stopped at
  double alpha = 1.0;
  double energy = 0.0;
  double alpha_energy = 0.0;
  double grad_norm = 0.0;
  double initial_grad_norm = 0.0;
  double full_grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  /// |center of mass| of `map`.
  double center_of_mass_drift = 0.0;
  /// |center of mass| after recentering (equal to the drift when not recentered).
  double center_of_mass_norm = 0.0;
  /// `map` precomposed with the normalising dilation, when recentering ran.
  std::optional<SphereMap> recentered_map;
  Eigen::Vector3d recentering_parameters = Eigen::Vector3d::Zero();
  std::vector<PseudogradientSample> pseudogradient_log;
  std::vector<TelemetryRow> telemetry;

  /// Largest ||X|| / ||dF|| over the log.
  double epsilon1() const;
  /// Smallest dF(X) / ||dF||^2 over the log.
  double epsilon2() const;
};

/// Line search could not decrease the energy; carries the state reached.
class StagnationError : public ConvergenceError {
 public:
  StagnationError(const std::string& what, CriticalRecord record)
      : ConvergenceError(what, record.grad_norm), record_(std::move(record)) {}
  const CriticalRecord& record() const { return record_; }

 private:
  CriticalRecord record_;
};

/// Pointwise V_i - <V_i, f_i> f_i.
TangentField project_tangent(const SphereMap& map, const Eigen::MatrixXd& field);

/// Norm sqrt(sum |g_i|^2 / m_i) dual to the lumped mass.
double dual_norm(const SphereMesh& mesh, const Eigen::MatrixXd& field);

/// Armijo descent for the alpha-energy with renormalisation retraction.
CriticalRecord descend(const SphereMap& start, const FlowConfig& config);

struct ContinuationResult {
  std::vector<CriticalRecord> records;
  /// Index into the schedule of the first stage that failed, if any.
  std::optional<int> failed_stage;
  std::string failure;
  double final_harmonic_residual = 0.0;
};

/// Warm-started descent along a decreasing alpha schedule; every converged
/// stage is recentered so its center of mass vanishes.
ContinuationResult continue_in_alpha(const CriticalRecord& record, const std::vector<double>& schedule,
                                     const FlowConfig& config);

/// Dual norm of the tangential part of K f, the discrete tension field.
double harmonic_residual(const SphereMap& map);

struct Concentration {
  Eigen::Vector3d center;
  double local_energy = 0.0;
};

/// Greedy disjoint geodesic balls of the given radius whose Dirichlet energy
/// exceeds epsilon, largest first.
std::vector<Concentration> detect_concentration(const SphereMap& map, double epsilon, double radius);

void write_telemetry_csv(const CriticalRecord& record, std::ostream& out);
nlohmann::json to_json(const CriticalRecord& record);

}  // namespace minsphere
