#pragma once

#include "minsphere/energy.hpp"
#include "minsphere/sphere_mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace minsphere {

/// Second variation restricted to a per-vertex subspace of R^(n+1), written in
/// per-vertex orthonormal frames: hessian v = lambda mass v.
struct SecondVariationPencil {
  SparseMatrix hessian;
  SparseMatrix mass;
  /// Frame at vertex i occupies columns [i*fiber_dim, (i+1)*fiber_dim) of `frames`.
  Eigen::MatrixXd frames;
  int fiber_dim = 0;
  /// Every eigenvalue of the pencil is at least this value.
  double lower_bound = 0.0;
};

/// Unconstrained Hessian of alpha_energy on R^(V (n+1)), vertex-major layout.
SparseMatrix alpha_energy_hessian(const SphereMap& map, double alpha);

/// Hessian on the tangent space of (S^n)^V, including the constraint
/// correction -<grad_i, f_i> per vertex, with the tangential mass matrix.
SecondVariationPencil assemble_second_variation(const SphereMap& map, double alpha);

/// Dirichlet second variation restricted to fields normal to f and to the
/// image tangent plane. Throws DegeneracyError on non-immersed elements.
SecondVariationPencil normal_second_variation(const SphereMap& map);

/// Applies the reduced Hessian to reduced coordinates.
Eigen::VectorXd apply(const SecondVariationPencil& pencil, const Eigen::VectorXd& x);

struct SpectrumReport {
  Eigen::VectorXd eigenvalues;  ///< ascending
  int index = 0;                ///< count of lambda < -tau
  int nullity = 0;              ///< count of |lambda| <= tau
  double tau = 0.0;
  int k = 0;
  bool converged = false;
  double max_residual = 0.0;
};

SpectrumReport morse_index_nullity(const SecondVariationPencil& pencil, int k, double tau);

/// Reclassifies already computed eigenvalues with a different threshold.
SpectrumReport classify(const Eigen::VectorXd& eigenvalues, double tau);

struct TauCalibration {
  double tau = 0.0;
  double null_edge = 0.0;  ///< largest |lambda| expected to vanish in the continuum
  double gap_edge = 0.0;   ///< smallest |lambda| expected to stay away from zero
  Eigen::VectorXd eigenvalues;
};

/// Nullity threshold for a mesh level: geometric mean of the 12th and 13th
/// smallest |lambda| of the Dirichlet second variation of the equator in S^4,
/// whose continuum null space is 12-dimensional. Cached per level.
TauCalibration calibrate_tau(int level);

/// Smallest eigenvalues of (K - phi M, M) and of the same operator tested
/// against mu^2-weighted functions; returns max |difference| / max(|lambda|, 1).
double scaling_invariance_check(const SphereMesh& mesh, const Eigen::VectorXd& potential,
                                const Eigen::VectorXd& weight, int k = 10);

/// Positive smooth weight exp(random quadratic) scaled into [lo, hi].
Eigen::VectorXd smooth_random_weight(const SphereMesh& mesh, std::uint64_t seed, double lo = 0.5,
                                     double hi = 2.0);

/// Radial cutoff: 0 for r <= eps^2, 2 - log r / log eps between, 1 for r >= eps.
class CutoffProfile {
 public:
  explicit CutoffProfile(double epsilon);
  double epsilon() const { return epsilon_; }
  double operator()(double r) const;
  double derivative(double r) const;

 private:
  double epsilon_;
};

CutoffProfile cutoff_profile(double epsilon);

/// Flat Dirichlet energy 2 pi * integral of r (phi')^2 dr, by quadrature.
double cutoff_dirichlet_energy(double epsilon);

struct IndexEnergySample {
  int index = 0;
  double energy = 0.0;
};

/// min over samples of (index + 1) / energy.
double index_energy_diagnostic(const std::vector<IndexEnergySample>& samples);

void write_spectrum_csv(const SpectrumReport& report, std::ostream& out);
nlohmann::json to_json(const SpectrumReport& report);

}  // namespace minsphere
