#include "minsphere/energy.hpp"
#include "minsphere/errors.hpp"
#include "minsphere/spectrum.hpp"

#include "jacobi_oracle.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace minsphere;
using minsphere::oracle::analytic_jacobi_counts;
using minsphere::oracle::JacobiCounts;

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST(Spectrum, AnalyticOracleCounts) {
  for (int n = 3; n <= 6; ++n) {
    const JacobiCounts c = analytic_jacobi_counts(n);
    EXPECT_EQ(c.index, n - 2);
    EXPECT_EQ(c.nullity, 3 * (n - 2) + 6);
  }
}

TEST(Spectrum, TauCalibrationSeparatesClusters) {
  const TauCalibration cal = calibrate_tau(3);
  EXPECT_LT(cal.null_edge, 0.05);
  EXPECT_GT(cal.gap_edge, 1.5);
  EXPECT_GT(cal.tau, cal.null_edge);
  EXPECT_LT(cal.tau, cal.gap_edge);
  EXPECT_EQ(calibrate_tau(3).tau, cal.tau);
}

TEST(Spectrum, EquatorIndexAndNullity) {
  const MeshPtr mesh = make_icosphere(3);
  const double tau = calibrate_tau(3).tau;
  for (int n = 3; n <= 4; ++n) {
    const JacobiCounts oracle = analytic_jacobi_counts(n);
    const SpectrumReport r = morse_index_nullity(assemble_second_variation(equator_map(mesh, n), 1.0),
                                                 oracle.index + oracle.nullity + 6, tau);
    ASSERT_TRUE(r.converged);
    EXPECT_EQ(r.index, oracle.index) << n;
    EXPECT_EQ(r.nullity, oracle.nullity) << n;
    EXPECT_NEAR(r.eigenvalues[0], -2.0, 0.1);
  }
}

TEST(Spectrum, NormalPencilOfEquator) {
  const MeshPtr mesh = make_icosphere(3);
  const SpectrumReport r = morse_index_nullity(normal_second_variation(equator_map(mesh, 4)), 12, calibrate_tau(3).tau);
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.index, 2);
  EXPECT_EQ(r.nullity, 6);
}

TEST(Spectrum, ConstantMapHasNullityN) {
  // At a constant map the second variation is the Laplacian on each tangent coordinate.
  const MeshPtr mesh = make_icosphere(3);
  const SecondVariationPencil pencil = assemble_second_variation(constant_map(mesh, 3), 1.0);
  const SpectrumReport r = morse_index_nullity(pencil, 8, 1e-6);
  ASSERT_TRUE(r.converged);
  EXPECT_EQ(r.index, 0);
  EXPECT_EQ(r.nullity, 3);
  EXPECT_NEAR(r.eigenvalues[3], 2.0, 0.05);
  EXPECT_THROW(normal_second_variation(constant_map(mesh, 3)), DegeneracyError);
}

TEST(Spectrum, ApplyIsSymmetricAndBounded) {
  const MeshPtr mesh = make_icosphere(2);
  const SecondVariationPencil pencil = assemble_second_variation(random_smooth_map(mesh, 3, 5, 0.5), 1.2);
  const int dim = static_cast<int>(pencil.hessian.rows());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::VectorXd x(dim), y(dim);
  for (int i = 0; i < dim; ++i) {
    x[i] = normal(rng);
    y[i] = normal(rng);
  }
  EXPECT_NEAR(x.dot(apply(pencil, y)), y.dot(apply(pencil, x)), 1e-9 * std::abs(x.dot(apply(pencil, y))));
  const SpectrumReport r = morse_index_nullity(pencil, 4, 1e-3);
  EXPECT_GE(r.eigenvalues[0], pencil.lower_bound);
}

TEST(Spectrum, ClassifyCountsByThreshold) {
  Eigen::VectorXd values(6);
  values << -2.0, -0.5, -1e-3, 1e-3, 0.5, 2.0;
  const SpectrumReport r = classify(values, 0.01);
  EXPECT_EQ(r.index, 2);
  EXPECT_EQ(r.nullity, 2);
  const SpectrumReport wide = classify(values, 1.0);
  EXPECT_EQ(wide.index, 1);
  EXPECT_EQ(wide.nullity, 4);
}

TEST(Spectrum, UnitWeightHasNoDiscrepancy) {
  const MeshPtr mesh_ptr = make_icosphere(3);
    const SphereMesh& mesh = *mesh_ptr;
  Eigen::VectorXd potential(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) potential[v] = 2.0 + mesh.vertex(v).z();
  EXPECT_LT(scaling_invariance_check(mesh, potential, Eigen::VectorXd::Ones(mesh.vertex_count())), 1e-12);
}

TEST(Spectrum, WeightedDiscrepancyShrinksWithRefinement) {
  double previous = 1.0;
  for (int level = 2; level <= 4; ++level) {
    const MeshPtr mesh_ptr = make_icosphere(level);
    const SphereMesh& mesh = *mesh_ptr;
    Eigen::VectorXd potential(mesh.vertex_count());
    for (int v = 0; v < mesh.vertex_count(); ++v) potential[v] = 2.0 + mesh.vertex(v).z();
    const double d = scaling_invariance_check(mesh, potential, smooth_random_weight(mesh, 3));
    EXPECT_LT(d, previous) << level;
    previous = d;
  }
  EXPECT_LT(previous, 0.05);
}

TEST(Spectrum, SmoothWeightRange) {
  const MeshPtr mesh_ptr = make_icosphere(2);
    const SphereMesh& mesh = *mesh_ptr;
  const Eigen::VectorXd w = smooth_random_weight(mesh, 4, 0.5, 2.0);
  EXPECT_NEAR(w.minCoeff(), 0.5, 1e-12);
  EXPECT_NEAR(w.maxCoeff(), 2.0, 1e-12);
  EXPECT_THROW(smooth_random_weight(mesh, 4, 2.0, 1.0), PreconditionError);
}

TEST(Cutoff, ProfileEndpoints) {
  const CutoffProfile phi = cutoff_profile(0.1);
  EXPECT_DOUBLE_EQ(phi(0.01), 0.0);
  EXPECT_DOUBLE_EQ(phi(0.1), 1.0);
  EXPECT_DOUBLE_EQ(phi(0.001), 0.0);
  EXPECT_DOUBLE_EQ(phi(0.5), 1.0);
  EXPECT_NEAR(phi(std::pow(0.1, 1.5)), 0.5, 1e-14);
  const double h = 1e-7;
  EXPECT_NEAR(phi.derivative(0.03), (phi(0.03 + h) - phi(0.03 - h)) / (2 * h), 1e-6);
  EXPECT_THROW(cutoff_profile(1.0), PreconditionError);
}

TEST(Cutoff, DirichletEnergyClosedForm) {
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    EXPECT_NEAR(cutoff_dirichlet_energy(eps), -2.0 * kPi / std::log(eps), 1e-10);
  }
}

TEST(IndexEnergy, Diagnostic) {
  EXPECT_DOUBLE_EQ(index_energy_diagnostic({{2, 4.0 * kPi}, {4, 8.0 * kPi}}), 5.0 / (8.0 * kPi));
  EXPECT_THROW(index_energy_diagnostic({}), PreconditionError);
}

TEST(Spectrum, CsvAndJson) {
  Eigen::VectorXd values(3);
  values << -2.0, 0.0, 3.0;
  const SpectrumReport r = classify(values, 0.1);
  std::ostringstream out;
  write_spectrum_csv(r, out);
  EXPECT_NE(out.str().find("negative"), std::string::npos);
  EXPECT_NE(out.str().find("null"), std::string::npos);
  const nlohmann::json j = to_json(r);
  EXPECT_EQ(j.at("index").get<int>(), 1);
  EXPECT_EQ(j.at("eigenvalues").size(), 3u);
}
