// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any fails.
#include "minsphere/covers.hpp"
#include "minsphere/curvature.hpp"
#include "minsphere/energy.hpp"
#include "minsphere/errors.hpp"
#include "minsphere/flow.hpp"
#include "minsphere/spectrum.hpp"
#include "minsphere/sphere_mesh.hpp"
#include "minsphere/topology.hpp"

#include "finite_difference.hpp"
#include "jacobi_oracle.hpp"

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace minsphere;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> body;
};

// Coefficients of prod_{i=1..m} (1 - q^(N-m+i)) / (1 - q^i) by polynomial
// multiplication and exact division, independent of the library recurrence.
std::vector<std::uint64_t> q_binomial_by_division(int m, int N) {
  std::vector<long long> num{1};
  auto mul = [](const std::vector<long long>& p, int e) {
    std::vector<long long> out(p.size() + e, 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
      out[i] += p[i];
      out[i + e] -= p[i];
    }
    return out;
  };
  for (int i = 1; i <= m; ++i) num = mul(num, N - m + i);
  for (int i = 1; i <= m; ++i) {
    // Divide by (1 - q^i): c_k = a_k + c_(k-i).
    std::vector<long long> quotient(num.size() - i, 0);
    for (std::size_t k = 0; k < quotient.size(); ++k) {
      quotient[k] = num[k] + (k >= static_cast<std::size_t>(i) ? quotient[k - i] : 0);
    }
    num = quotient;
  }
  return {num.begin(), num.end()};
}

Outcome check_census() {
  std::ostringstream d;
  bool ok = true;
  for (int N = 5; N <= 9; ++N) {
    const SchubertCensus c = schubert_cell_counts(3, N);
    const bool match = c.counts == q_binomial_by_division(3, N);
    const bool total = c.total() == binomial(N, 3);
    ok = ok && match && total && c.palindromic();
    d << "N=" << N << (match && total && c.palindromic() ? " ok " : " mismatch ");
  }
  return {ok, d.str()};
}

Outcome check_equator_index() {
  const int level = 4;
  const MeshPtr mesh = make_icosphere(level);
  const double tau = calibrate_tau(level).tau;
  std::ostringstream d;
  d << "tau=" << tau;
  bool ok = true;
  for (int n = 4; n <= 6; ++n) {
    const oracle::JacobiCounts expected = oracle::analytic_jacobi_counts(n);
    ok = ok && expected.index == n - 2 && expected.nullity == 3 * (n - 2) + 6;
    const SpectrumReport r = morse_index_nullity(assemble_second_variation(equator_map(mesh, n), 1.0),
                                                 expected.index + expected.nullity + 6, tau);
    const double leading = r.eigenvalues[0];
    const bool pass = r.converged && r.index == expected.index && r.nullity == expected.nullity &&
                      std::abs(leading + 2.0) <= 0.05 * 2.0;
    ok = ok && pass;
    d << " | n=" << n << " index=" << r.index << " nullity=" << r.nullity << " lambda0=" << leading;
  }
  return {ok, d.str()};
}

Outcome check_double_covers() {
  const int n = 4;
  const MeshPtr mesh = make_icosphere(4);
  std::ostringstream d;
  const SphereMap f2 = compose_cover(mesh, equator_embedding(n), n, RationalMap::power(2));
  const double lambda2 = induced_metric_lambda1(f2, 1e-3);
  const int index2 = double_cover_normal_index(f2, n);
  const double energy2 = dirichlet_energy(f2);
  const SphereMap f3 = compose_cover(mesh, equator_embedding(n), n, RationalMap::power(3));
  const double lambda3 = induced_metric_lambda1(f3, 1e-3);
  const bool ok = lambda2 <= 1.05 && index2 >= 2 * (n - 2) && std::abs(energy2 / (8.0 * kPi) - 1.0) <= 0.01 &&
                  lambda3 <= 2.0 / 3.0 * 1.05;
  d << "z^2: lambda1=" << lambda2 << " normal_index=" << index2 << " E/8pi=" << energy2 / (8.0 * kPi)
    << " | z^3: lambda1=" << lambda3;
  return {ok, d.str()};
}

Outcome check_cutoff_energy() {
  std::ostringstream d;
  bool ok = true;
  for (const double eps : {0.2, 0.1, 0.05}) {
    const double expected = -2.0 * kPi / std::log(eps);
    const double rel = std::abs(cutoff_dirichlet_energy(eps) / expected - 1.0);
    ok = ok && rel <= 5e-3;
    d << "eps=" << eps << " rel=" << rel << ' ';
  }
  return {ok, d.str()};
}

Outcome check_center_of_mass() {
  const MeshPtr mesh = make_icosphere(4);
  FlowConfig config;
  config.grad_tol = 1e-6;
  config.max_iterations = 2000;
  std::ostringstream d;
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    config.seed = seed;
    const SphereMap start = perturbed_equator_map(mesh, 4, seed, 0.2);
    const ContinuationResult result = continue_in_alpha(CriticalRecord(start), {1.2, 1.1, 1.05}, config);
    if (result.failed_stage || result.records.empty()) {
      ok = false;
      d << "seed=" << seed << " failed: " << result.failure << ' ';
      continue;
    }
    const CriticalRecord& rec = result.records.back();
    const SphereMap& centered = rec.recentered_map ? *rec.recentered_map : rec.map;
    const double rel = relative_center_of_mass(centered, 1.05);
    ok = ok && rec.converged && rec.alpha == 1.05 && rec.energy > 1.0 && rel <= 1e-4;
    d << "seed=" << seed << " rel=" << rel << ' ';
  }
  return {ok, d.str()};
}

Outcome check_psi_limit() {
  double sup = 0.0;
  bool monotone = true;
  double previous = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = 100.0 * i / 1000.0;
    const double reference = t - std::log1p(t);
    sup = std::max(sup, std::abs(psi_alpha(t, 1.0001) - reference));
    const double value = psi_alpha(t, 1.0001);
    monotone = monotone && value > previous && psi_alpha(t, 1.0) >= 0.0;
    previous = value;
  }
  const bool zero = psi_alpha(0.0, 1.0001) == 0.0 && psi_alpha(0.0, 1.0) == 0.0 && psi_alpha(0.0, 2.0) == 0.0;
  std::ostringstream d;
  d << "sup=" << sup << " (bound 1e-2) psi(0)=0:" << (zero ? "yes" : "no") << " monotone:" << (monotone ? "yes" : "no");
  return {sup <= 1e-2 && zero && monotone, d.str()};
}

Outcome check_consistency() {
  const MeshPtr mesh = make_icosphere(3);
  double worst_gradient = 0.0, worst_hessian = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SphereMap f = random_smooth_map(mesh, 3, seed);
    const double alpha = 1.0 + 0.05 * static_cast<double>(seed);
    worst_gradient = std::max(worst_gradient, fd::gradient_fd_error(f, alpha, seed + 100));
    worst_hessian = std::max(worst_hessian, fd::hessian_fd_error(f, alpha, seed + 200));
    FlowConfig config;
    config.alpha = alpha;
    config.max_iterations = 200;
    config.seed = seed;
    try {
      const CriticalRecord rec = descend(f, config);
      for (std::size_t i = 1; i < rec.telemetry.size(); ++i) {
        monotone = monotone && rec.telemetry[i].alpha_energy <= rec.telemetry[i - 1].alpha_energy;
      }
    } catch (const StagnationError& e) {
      const auto& t = e.record().telemetry;
      for (std::size_t i = 1; i < t.size(); ++i) monotone = monotone && t[i].alpha_energy <= t[i - 1].alpha_energy;
    }
  }
  std::ostringstream d;
  d << "gradient=" << worst_gradient << " hessian=" << worst_hessian << " monotone:" << (monotone ? "yes" : "no");
  return {worst_gradient <= 1e-5 && worst_hessian <= 1e-4 && monotone, d.str()};
}

Outcome check_bubble() {
  const MeshPtr mesh = make_icosphere(7);
  const Eigen::Vector3d axis(0.0, 0.0, 1.0);
  std::ostringstream d;
  // The family t = 0..5; only the most concentrated member is tested for the quantum.
  const auto none = detect_concentration(dilated_equator_map(mesh, 3, axis, 0.0), 1.0, 0.2);
  const auto found = detect_concentration(dilated_equator_map(mesh, 3, axis, 5.0), 1.0, 0.2);
  d << "t=0 detections=" << none.size() << " t=5 detections=" << found.size();
  if (found.size() != 1) return {false, d.str()};
  const double fraction = found[0].local_energy / (4.0 * kPi);
  d << " local/4pi=" << fraction;
  return {fraction >= 0.9, d.str()};
}

Outcome check_morse_engine() {
  std::ostringstream d;
  bool d_squared = false;
  try {
    build_complex({{"a", 0, OrbitLabel::A}, {"b", 1, OrbitLabel::A}, {"c", 2, OrbitLabel::A}},
                  {{"c", "b", 1}, {"b", "a", 1}});
  } catch (const InvariantError&) {
    d_squared = true;
  }
  const bool torus = homology_z2(torus_height_complex()) == std::vector<int>{1, 2, 1};
  bool desk = true;
  bool split = true;
  for (int n = 4; n <= 8; ++n) {
    const SchubertCensus p3 = schubert_cell_counts(3, n + 1);
    for (const bool excluded : {false, true}) {
      const MorseComplexZ2 c = desk_model(n, excluded);
      const std::vector<int> betti = homology_z2(c);
      for (int k = 0; k <= 2 * n - 5; ++k) {
        const std::uint64_t got = k < static_cast<int>(betti.size()) ? betti[k] : 0;
        desk = desk && got == p3.at(k - n + 2);
      }
      const ActionSplit s = split_by_action(c, n);
      split = split && s.verified && s.counts_satisfied;
    }
  }
  d << "d^2 enforced:" << d_squared << " torus:" << torus << " desk n=4..8:" << desk << " split:" << split;
  return {d_squared && torus && desk && split, d.str()};
}

Outcome check_pinching() {
  const double delta = 0.5;
  const CurvatureOperator r = random_pinched_operator(4, delta, 2024);
  const PinchReport report = verify_pinch_implication(r, delta, 100000, 2024);
  const CurvatureOperator unit = CurvatureOperator::constant(4, 1.0);
  std::mt19937_64 rng(7);
  double worst = unit.symmetry_defect();
  for (int s = 0; s < 1000; ++s) {
    const Eigen::MatrixXd frame = random_orthonormal_frame(4, 4, rng);
    worst = std::max(worst, std::abs(unit.sectional(frame.col(0), frame.col(1)) - 1.0));
    const Eigen::VectorXcd z = frame.col(0).cast<Complex>() + Complex(0.0, 1.0) * frame.col(1);
    const Eigen::VectorXcd w = frame.col(2).cast<Complex>() + Complex(0.0, 0.3) * frame.col(3);
    worst = std::max(worst, std::abs(complex_sectional_curvature(unit, make_plane(z, w)) - 1.0));
  }
  std::ostringstream d;
  d << "hypothesis:" << report.hypothesis_satisfied << " samples=" << report.samples
    << " violations=" << report.violations << " worst_margin=" << report.worst_margin
    << " constant_defect=" << worst;
  return {report.hypothesis_satisfied && report.samples == 100000 && report.violations == 0 && worst <= 1e-10,
          d.str()};
}

// Composite Simpson rule, used as an independent quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

Outcome check_axisymmetric() {
  const double alpha = 1.2;
  const auto one = [](double) { return 1.0; };
  std::ostringstream d;
  bool ok = true;
  double previous = 0.0;
  double first = 0.0;
  double last = 0.0;
  for (const double u : {5.0, 10.0, 20.0, 40.0}) {
    const double e = axisymmetric_alpha_energy(one, alpha, u);
    const double lower = axisymmetric_lower_bound(one, alpha, u);
    const double oracle = kPi * simpson([&](double x) { return std::pow(std::cosh(x), 2.0 * (alpha - 1.0)); },
                                        -u, u, 20000);
    ok = ok && e > previous && e >= lower && std::abs(lower / oracle - 1.0) <= 1e-6;
    d << "U=" << u << " E=" << e << " E/bound=" << e / oracle << ' ';
    if (first == 0.0) first = e;
    previous = e;
    last = e;
  }
  // The bound grows like exp(2(alpha - 1)U), so no fixed constant caps the sequence.
  ok = ok && last > 1e3 * first;
  return {ok, d.str()};
}

Outcome check_refinement() {
  std::ostringstream d;
  bool ok = true;
  double previous = 1.0;
  for (int level = 3; level <= 5; ++level) {
    const MeshPtr mesh = make_icosphere(level);
    Eigen::VectorXd potential(mesh->vertex_count());
    for (int v = 0; v < mesh->vertex_count(); ++v) potential[v] = 2.0 + mesh->vertex(v).z();
    const double discrepancy = scaling_invariance_check(*mesh, potential, smooth_random_weight(*mesh, 3));
    ok = ok && discrepancy < previous;
    previous = discrepancy;
    d << "level " << level << ": " << discrepancy << ' ';
  }
  return {ok && previous <= 0.05, d.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "schubert census", 1.0, check_census},
      {2, "equator index and nullity", 600.0, check_equator_index},
      {3, "branched cover bounds", 900.0, check_double_covers},
      {4, "cutoff energy", 1.0, check_cutoff_energy},
      {5, "center of mass", 600.0, check_center_of_mass},
      {6, "psi limit", 1.0, check_psi_limit},
      {7, "derivative consistency", 300.0, check_consistency},
      {8, "bubble quantum", 300.0, check_bubble},
      {9, "morse engine", 1.0, check_morse_engine},
      {10, "pinching", 60.0, check_pinching},
      {11, "axisymmetric divergence", 1.0, check_axisymmetric},
      {12, "weighted pencil refinement", 600.0, check_refinement},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_budget = seconds <= c.budget_seconds;
    const bool passed = outcome.passed && in_budget;
    if (!passed) ++failures;
    std::printf("%s [%d] %s: %s (%.2f s, budget %.0f s%s)\n", passed ? "PASS" : "FAIL", c.id, c.name.c_str(),
                outcome.detail.c_str(), seconds, c.budget_seconds, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
