#include "minsphere/energy.hpp"
#include "minsphere/errors.hpp"
#include "minsphere/flow.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace minsphere;

namespace {

constexpr double kPi = std::numbers::pi;

const MeshPtr& level3() {
  static const MeshPtr mesh = make_icosphere(3);
  return mesh;
}

FlowConfig loose(double alpha) {
  FlowConfig config;
  config.alpha = alpha;
  config.grad_tol = 2e-2;
  config.max_iterations = 500;
  return config;
}

}  // namespace

TEST(Flow, ConfigValidation) {
  FlowConfig config;
  EXPECT_NO_THROW(config.validate());
  config.grad_tol = -1.0;
  EXPECT_THROW(config.validate(), PreconditionError);
  config = FlowConfig{};
  config.alpha = 0.9;
  EXPECT_THROW(config.validate(), PreconditionError);
  config = FlowConfig{};
  config.step_shrink = 1.0;
  EXPECT_THROW(config.validate(), PreconditionError);
}

TEST(Flow, ProjectionRemovesNormalPart) {
  const SphereMap f = random_smooth_map(level3(), 3, 1);
  const TangentField t = project_tangent(f, f.values() + Eigen::MatrixXd::Ones(f.vertex_count(), 4));
  for (int i = 0; i < f.vertex_count(); ++i) EXPECT_NEAR(t.values().row(i).dot(f.values().row(i)), 0.0, 1e-14);
  EXPECT_LT(project_tangent(f, f.values()).values().norm(), 1e-13);
}

TEST(Flow, DualNormScales) {
  const SphereMesh& mesh = *level3();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(mesh.vertex_count(), 3);
  EXPECT_EQ(dual_norm(mesh, g), 0.0);
  g.col(0) = mesh.lumped_mass();
  // sum m_i^2 / m_i = total lumped mass.
  EXPECT_NEAR(dual_norm(mesh, g), std::sqrt(4.0 * kPi), 1e-10);
  EXPECT_NEAR(dual_norm(mesh, 3.0 * g), 3.0 * dual_norm(mesh, g), 1e-12);
}

TEST(Flow, DegreeOneStartConvergesToEnergyFourPi) {
  const SphereMap start = perturbed_equator_map(level3(), 4, 5, 0.25);
  const CriticalRecord record = descend(start, loose(1.05));
  ASSERT_TRUE(record.converged);
  EXPECT_LT(record.alpha_energy, alpha_energy(start, 1.05));
  EXPECT_NEAR(record.energy / (4.0 * kPi), 1.0, 0.02);
  EXPECT_EQ(record.map.values().rightCols(2).norm(), 0.0);
  for (std::size_t i = 1; i < record.telemetry.size(); ++i) {
    EXPECT_LT(record.telemetry[i].alpha_energy, record.telemetry[i - 1].alpha_energy);
  }
}

TEST(Flow, PseudogradientConstantsArePositive) {
  const CriticalRecord record = descend(perturbed_equator_map(level3(), 3, 6, 0.25), loose(1.1));
  ASSERT_FALSE(record.pseudogradient_log.empty());
  EXPECT_GT(record.epsilon2(), 0.0);
  EXPECT_TRUE(std::isfinite(record.epsilon1()));
  for (const auto& s : record.pseudogradient_log) EXPECT_GT(s.pairing, 0.0);
}

TEST(Flow, UnpreconditionedDescentAlsoDecreases) {
  FlowConfig config = loose(1.1);
  config.preconditioned = false;
  config.max_iterations = 30;
  const SphereMap start = perturbed_equator_map(level3(), 3, 7, 0.25);
  const CriticalRecord record = descend(start, config);
  EXPECT_LT(record.alpha_energy, alpha_energy(start, 1.1));
}

TEST(Flow, ConstantMapIsImmediatelyCritical) {
  const CriticalRecord record = descend(constant_map(level3(), 3), loose(1.1));
  EXPECT_TRUE(record.converged);
  EXPECT_EQ(record.iterations, 0);
}

TEST(Flow, ContinuationRecentersEveryStage) {
  FlowConfig config = loose(1.1);
  const CriticalRecord start(perturbed_equator_map(level3(), 3, 8, 0.2));
  const ContinuationResult result = continue_in_alpha(start, {1.1, 1.05}, config);
  ASSERT_FALSE(result.failed_stage.has_value()) << result.failure;
  ASSERT_EQ(result.records.size(), 2u);
  for (const auto& rec : result.records) {
    ASSERT_TRUE(rec.recentered_map.has_value());
    EXPECT_LE(rec.center_of_mass_norm, kRecenterTolerance);
    EXPECT_LT(relative_center_of_mass(*rec.recentered_map, rec.alpha), 1e-4);
  }
  EXPECT_LT(result.final_harmonic_residual, 0.2);
  EXPECT_THROW(continue_in_alpha(start, {1.05, 1.1}, config), PreconditionError);
}

TEST(Flow, HarmonicResidualSeparatesCriticalMaps) {
  const double equator = harmonic_residual(equator_map(level3(), 3));
  const double random = harmonic_residual(random_smooth_map(level3(), 3, 3));
  EXPECT_LT(equator, 0.1);
  EXPECT_GT(random, 10.0 * equator);
}

TEST(Flow, NoConcentrationOnEquator) {
  const auto found = detect_concentration(equator_map(make_icosphere(4), 3), 0.5 * 4.0 * kPi, 0.3);
  EXPECT_TRUE(found.empty());
}

TEST(Flow, DilatedEquatorConcentratesOnce) {
  const Eigen::Vector3d axis(0.0, 0.0, 1.0);
  const auto found = detect_concentration(dilated_equator_map(make_icosphere(5), 3, axis, 3.0), 2.0 * kPi, 0.3);
  ASSERT_EQ(found.size(), 1u);
  // Dilating toward +axis stretches the neighbourhood of -axis over the target.
  EXPECT_LT(found[0].center.dot(axis), -0.9);
  EXPECT_GT(found[0].local_energy, 0.8 * 4.0 * kPi);
}

TEST(Flow, TelemetryCsvAndJson) {
  FlowConfig config = loose(1.1);
  config.max_iterations = 5;
  const CriticalRecord record = descend(perturbed_equator_map(level3(), 3, 9, 0.25), config);
  std::ostringstream out;
  write_telemetry_csv(record, out);
  const std::string csv = out.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), record.telemetry.size() + 1);
  const nlohmann::json j = to_json(record);
  EXPECT_EQ(j.at("iterations").get<int>(), record.iterations);
}
