#include "minsphere/experiment.hpp"

#include "minsphere/covers.hpp"
#include "minsphere/curvature.hpp"
#include "minsphere/energy.hpp"
#include "minsphere/errors.hpp"
#include "minsphere/flow.hpp"
#include "minsphere/spectrum.hpp"
#include "minsphere/sphere_mesh.hpp"
#include "minsphere/topology.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace minsphere {

using nlohmann::json;

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"census", "flow", "spectrum", "covers", "pinch", "morse"};
  return kinds;
}

int configured_threads() {
  const char* value = std::getenv("MINSPHERE_THREADS");
  if (value == nullptr || *value == '\0') return 0;
  char* end = nullptr;
  const long threads = std::strtol(value, &end, 10);
  if (*end != '\0' || threads < 1 || threads > 1024) {
    throw ConfigError("MINSPHERE_THREADS must be a positive integer");
  }
  return static_cast<int>(threads);
}

namespace {

class Validator {
 public:
  explicit Validator(const json& doc) : doc_(doc) {}

  void error(const std::string& field, const std::string& message) { errors_.push_back(field + ": " + message); }
  std::vector<std::string> take() { return std::move(errors_); }

  /// Integer field within [lo, hi]; absent is fine unless required.
  void integer(const json& obj, const std::string& prefix, const std::string& key, long long lo, long long hi,
               bool required = false) {
    const std::string field = prefix + key;
    if (!obj.contains(key)) {
      if (required) error(field, "required field is missing");
      return;
    }
    const json& v = obj.at(key);
    if (!v.is_number_integer()) {
      error(field, "must be an integer");
      return;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) error(field, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }

  void number(const json& obj, const std::string& prefix, const std::string& key, double lo, double hi,
              bool open_lo = false, bool required = false) {
    const std::string field = prefix + key;
    if (!obj.contains(key)) {
      if (required) error(field, "required field is missing");
      return;
    }
    const json& v = obj.at(key);
    if (!v.is_number()) {
      error(field, "must be a number");
      return;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x) || (open_lo ? x <= lo : x < lo) || x > hi) {
      std::ostringstream range;
      range << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
      error(field, "must lie in " + range.str());
    }
  }

  void boolean(const json& obj, const std::string& prefix, const std::string& key) {
    if (obj.contains(key) && !obj.at(key).is_boolean()) error(prefix + key, "must be true or false");
  }

  const json& doc() const { return doc_; }

 private:
  const json& doc_;
  std::vector<std::string> errors_;
};

int field_or(const json& obj, const char* key, int fallback) {
  return obj.contains(key) && obj.at(key).is_number_integer() ? obj.at(key).get<int>() : fallback;
}

void validate_kind(Validator& v, const std::string& kind, const json& params) {
  const json& doc = v.doc();
  const int n = field_or(doc, "n", 4);
  const std::string p = "params.";
  if (kind == "census") {
    v.integer(params, p, "m", 1, 39);
    if (params.contains("N")) {
      if (!params.at("N").is_array() || params.at("N").empty()) {
        v.error("params.N", "must be a non-empty array of integers");
      } else {
        const int m = field_or(params, "m", 3);
        for (const auto& x : params.at("N")) {
          if (!x.is_number_integer() || x.get<int>() <= m || x.get<int>() > 40) {
            v.error("params.N", "entries must be integers with m < N <= 40");
            break;
          }
        }
      }
    }
  } else if (kind == "flow") {
    if (!doc.contains("alpha_schedule")) {
      v.error("alpha_schedule", "required field is missing for kind 'flow'");
    } else if (!doc.at("alpha_schedule").is_array() || doc.at("alpha_schedule").empty()) {
      v.error("alpha_schedule", "must be a non-empty array of numbers");
    } else {
      double previous = std::numeric_limits<double>::infinity();
      for (const auto& a : doc.at("alpha_schedule")) {
        if (!a.is_number() || !(a.get<double>() > 1.0) || !(a.get<double>() < previous)) {
          v.error("alpha_schedule", "entries must be numbers above 1, strictly decreasing");
          break;
        }
        previous = a.get<double>();
      }
    }
    if (params.contains("start")) {
      const json& s = params.at("start");
      if (!s.is_string() || (s != "random" && s != "equator" && s != "perturbed_equator")) {
        v.error("params.start", "must be \"random\", \"equator\" or \"perturbed_equator\"");
      }
    }
    v.number(params, p, "amplitude", 0.0, 10.0, true);
  } else if (kind == "spectrum") {
    if (n < 3) v.error("n", "kind 'spectrum' needs n >= 3");
    if (params.contains("map") && params.at("map") != "equator") v.error("params.map", "only \"equator\" is supported");
    v.number(params, p, "alpha", 1.0, 10.0);
    v.integer(params, p, "k", 1, 400);
  } else if (kind == "covers") {
    if (n < 3) v.error("n", "kind 'covers' needs n >= 3");
    v.integer(params, p, "power", 1, 12);
    if (params.contains("rational_map")) {
      try {
        (void)rational_map_from_json(params.at("rational_map"));
      } catch (const Error& e) {
        v.error("params.rational_map", e.what());
      } catch (const json::exception& e) {
        v.error("params.rational_map", e.what());
      }
    }
    v.number(params, p, "eps_reg", 0.0, 0.5, true);
  } else if (kind == "pinch") {
    v.number(params, p, "delta", 0.0, 0.8, true);
    if (params.contains("delta") && params.at("delta").is_number() && params.at("delta").get<double>() >= 0.8) {
      v.error("params.delta", "must be below 0.8");
    }
    v.integer(params, p, "samples", 1, 100'000'000);
    v.integer(params, p, "operators", 1, 1000);
    v.integer(params, p, "dimension", 4, 12);
  } else if (kind == "morse") {
    v.boolean(params, p, "desk_model");
    v.boolean(params, p, "excluded_orbits");
    v.boolean(params, p, "split");
    const bool desk = params.value("desk_model", false);
    if (params.contains("complex")) {
      if (desk) v.error("params.complex", "give either 'complex' or 'desk_model', not both");
      try {
        (void)complex_from_json(params.at("complex"));
      } catch (const Error& e) {
        v.error("params.complex", e.what());
      }
    } else if (!desk) {
      v.error("params.complex", "required unless params.desk_model is true");
    }
    if ((desk || params.value("split", false)) && n < 4) v.error("n", "desk model and split need n >= 4");
  }
}

}  // namespace

std::vector<std::string> validate_config(const json& document) {
  Validator v(document);
  if (!document.is_object()) {
    v.error("<root>", "configuration must be a JSON object");
    return v.take();
  }
  static const std::vector<std::string> known = {"kind",       "level",     "n",        "seed",  "alpha_schedule",
                                                 "tolerances", "output_dir", "write_obj", "params"};
  for (const auto& [key, value] : document.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) v.error(key, "unknown field");
  }
  std::string kind;
  if (!document.contains("kind")) {
    v.error("kind", "required field is missing");
  } else if (!document.at("kind").is_string()) {
    v.error("kind", "must be a string");
  } else {
    kind = document.at("kind").get<std::string>();
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
      v.error("kind", "must be one of census, flow, spectrum, covers, pinch, morse");
      kind.clear();
    }
  }
  v.integer(document, "", "level", 0, kMaxMeshLevel);
  v.integer(document, "", "n", 2, 64);
  if (document.contains("seed")) {
    const json& seed = document.at("seed");
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
      v.error("seed", "must be a non-negative integer");
    }
  }
  if (document.contains("output_dir") && !document.at("output_dir").is_string()) {
    v.error("output_dir", "must be a string");
  }
  v.boolean(document, "", "write_obj");
  if (document.contains("tolerances")) {
    const json& t = document.at("tolerances");
    if (!t.is_object()) {
      v.error("tolerances", "must be an object");
    } else {
      v.number(t, "tolerances.", "grad_tol", 0.0, 1.0, true);
      v.number(t, "tolerances.", "grad_floor", 0.0, 1.0);
      v.integer(t, "tolerances.", "max_iterations", 1, 10'000'000);
    }
  }
  json params = json::object();
  if (document.contains("params")) {
    if (!document.at("params").is_object()) {
      v.error("params", "must be an object");
    } else {
      params = document.at("params");
    }
  }
  if (!kind.empty()) validate_kind(v, kind, params);
  return v.take();
}

ExperimentConfig config_from_json(const json& document) {
  const auto errors = validate_config(document);
  if (!errors.empty()) {
    std::string message = "invalid configuration:";
    for (const auto& e : errors) message += "\n  " + e;
    throw ConfigError(message);
  }
  ExperimentConfig c;
  c.kind = document.at("kind").get<std::string>();
  c.level = document.value("level", c.level);
  c.n = document.value("n", c.n);
  c.seed = document.value("seed", c.seed);
  if (document.contains("alpha_schedule")) c.alpha_schedule = document.at("alpha_schedule").get<std::vector<double>>();
  if (document.contains("tolerances")) {
    const json& t = document.at("tolerances");
    c.grad_tol = t.value("grad_tol", c.grad_tol);
    c.grad_floor = t.value("grad_floor", c.grad_floor);
    c.max_iterations = t.value("max_iterations", c.max_iterations);
  }
  c.output_dir = document.value("output_dir", c.output_dir);
  c.write_obj = document.value("write_obj", c.write_obj);
  if (document.contains("params")) c.params = document.at("params");
  return c;
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const std::size_t line_start = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const std::size_t column = line_start == std::string::npos ? upto : upto - line_start - 1;
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + e.what());
  }
}

namespace {

/// Collects named pass/fail checks with the claim each one tests.
class Checks {
 public:
  void add(const std::string& name, const std::string& claim, bool passed, double value, double bound) {
    items_.push_back({{"name", name}, {"claim", claim}, {"passed", passed}, {"value", value}, {"bound", bound}});
    all_ = all_ && passed;
  }
  void add(const std::string& name, const std::string& claim, bool passed) {
    items_.push_back({{"name", name}, {"claim", claim}, {"passed", passed}});
    all_ = all_ && passed;
  }
  bool all() const { return all_; }
  const json& items() const { return items_; }

 private:
  json items_ = json::array();
  bool all_ = true;
};

struct Outputs {
  json report = json::object();
  std::ostringstream spectra;
  std::ostringstream telemetry;
  Checks checks;
  MeshPtr mesh;
  std::optional<SphereMap> image;
};

void write_image_obj(const SphereMap& map, std::ostream& out) {
  out << std::setprecision(17);
  for (int i = 0; i < map.vertex_count(); ++i) {
    out << "v " << map.values()(i, 0) << ' ' << map.values()(i, 1) << ' ' << map.values()(i, 2) << '\n';
  }
  const auto& faces = map.mesh().faces();
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    out << "f " << faces(f, 0) + 1 << ' ' << faces(f, 1) + 1 << ' ' << faces(f, 2) + 1 << '\n';
  }
}

void write_eigenvalues(std::ostream& out, const std::string& label, const Eigen::VectorXd& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) out << label << ',' << i << ',' << values[i] << '\n';
}

void run_census(const ExperimentConfig& c, Outputs& o) {
  const int m = c.params.value("m", 3);
  std::vector<int> sizes = {5, 6, 7, 8, 9};
  if (c.params.contains("N")) sizes = c.params.at("N").get<std::vector<int>>();
  json entries = json::array();
  o.spectra << "N,k,count\n";
  for (int N : sizes) {
    const SchubertCensus census = schubert_cell_counts(m, N);
    const auto oracle = gaussian_binomial(m, N);
    const bool match = census.counts == oracle;
    const bool total = census.total() == binomial(N, m);
    json entry = to_json(census);
    entry["oracle_match"] = match;
    entry["total_matches_binomial"] = total;
    entries.push_back(entry);
    const std::string tag = "G(" + std::to_string(m) + "," + std::to_string(N) + ")";
    o.checks.add("census_oracle_" + tag, "cell counts equal the q-binomial coefficients", match);
    o.checks.add("census_total_" + tag, "cell counts sum to the binomial coefficient", total);
    o.checks.add("census_palindromic_" + tag, "cell counts are palindromic", census.palindromic());
    for (std::size_t k = 0; k < census.counts.size(); ++k) o.spectra << N << ',' << k << ',' << census.counts[k] << '\n';
  }
  o.report["census"] = entries;
  o.telemetry << "N,k,count\n";
}

void run_flow(const ExperimentConfig& c, Outputs& o) {
  o.mesh = make_icosphere(c.level);
  const std::string start = c.params.value("start", std::string("random"));
  const double amplitude = c.params.value("amplitude", start == "perturbed_equator" ? 0.1 : 1.0);
  SphereMap initial = start == "equator"             ? equator_map(o.mesh, c.n)
                      : start == "perturbed_equator" ? perturbed_equator_map(o.mesh, c.n, c.seed, amplitude)
                                                     : random_smooth_map(o.mesh, c.n, c.seed, amplitude);
  FlowConfig flow;
  flow.grad_tol = c.grad_tol;
  flow.grad_floor = c.grad_floor;
  flow.max_iterations = c.max_iterations;
  flow.seed = c.seed;
  const ContinuationResult result = continue_in_alpha(CriticalRecord(initial), c.alpha_schedule, flow);

  json stages = json::array();
  o.telemetry << "alpha,iteration,alpha_energy,grad_norm,step\n";
  o.telemetry << std::setprecision(17);
  for (const auto& rec : result.records) {
    json stage = to_json(rec);
    const SphereMap& centered = rec.recentered_map ? *rec.recentered_map : rec.map;
    const bool nonconstant = rec.energy > 1e-10;
    const double relative = nonconstant ? relative_center_of_mass(centered, rec.alpha) : 0.0;
    stage["relative_center_of_mass"] = relative;
    stages.push_back(stage);

    bool monotone = true;
    for (std::size_t i = 1; i < rec.telemetry.size(); ++i) {
      monotone = monotone && rec.telemetry[i].alpha_energy <= rec.telemetry[i - 1].alpha_energy;
    }
    std::ostringstream label;
    label << "alpha=" << rec.alpha;
    o.checks.add("flow_converged_" + label.str(), "descent reaches the gradient tolerance", rec.converged);
    o.checks.add("flow_monotone_" + label.str(), "energy decreases along every accepted step", monotone);
    if (rec.converged && nonconstant) {
      o.checks.add("center_of_mass_" + label.str(), "recentered critical points have vanishing center of mass",
                   relative <= 1e-4, relative, 1e-4);
    }
    for (const auto& row : rec.telemetry) {
      o.telemetry << rec.alpha << ',' << row.iteration << ',' << row.alpha_energy << ',' << row.grad_norm << ','
                  << row.step << '\n';
    }
  }
  o.report["stages"] = stages;
  o.report["harmonic_residual"] = result.final_harmonic_residual;
  o.report["start"] = start;
  if (result.failed_stage) {
    o.report["failed_stage"] = *result.failed_stage;
    o.report["failure"] = result.failure;
    o.checks.add("continuation_complete", "every stage of the alpha schedule converges", false);
  }
  if (!result.records.empty()) o.image = result.records.back().map;
  o.spectra << "label,i,eigenvalue\n";
}

void run_spectrum(const ExperimentConfig& c, Outputs& o) {
  o.mesh = make_icosphere(c.level);
  const double alpha = c.params.value("alpha", 1.0);
  const SphereMap equator = equator_map(o.mesh, c.n);
  const TauCalibration calibration = calibrate_tau(c.level);
  const int expected_index = c.n - 2;
  const int expected_nullity = 3 * (c.n - 2) + 6;
  const int k = c.params.value("k", expected_index + expected_nullity + 6);
  const SpectrumReport full = morse_index_nullity(assemble_second_variation(equator, alpha), k, calibration.tau);

  o.report["spectrum"] = to_json(full);
  o.report["index"] = full.index;
  o.report["nullity"] = full.nullity;
  o.report["tau"] = calibration.tau;
  o.report["tau_null_edge"] = calibration.null_edge;
  o.report["tau_gap_edge"] = calibration.gap_edge;
  o.report["alpha"] = alpha;
  o.report["energy"] = dirichlet_energy(equator);
  o.checks.add("solver_converged", "eigensolver residuals meet tolerance", full.converged, full.max_residual, 1e-8);
  if (alpha == 1.0) {
    o.checks.add("index", "the totally geodesic sphere has Morse index n - 2", full.index == expected_index,
                 full.index, expected_index);
    o.checks.add("nullity", "the nullity cluster of the equator has size 3(n - 2) + 6",
                 full.nullity == expected_nullity, full.nullity, expected_nullity);
    const double leading = full.eigenvalues.size() > 0 ? full.eigenvalues[0] : 0.0;
    o.checks.add("leading_eigenvalue", "the leading negative eigenvalue is -2 in induced normalization",
                 std::abs(leading + 2.0) <= 0.1, leading, -2.0);
  }
  o.spectra << "label,i,eigenvalue\n" << std::setprecision(17);
  write_eigenvalues(o.spectra, "second_variation", full.eigenvalues);
  o.telemetry << "label,i,eigenvalue\n" << std::setprecision(17);
  write_eigenvalues(o.telemetry, "calibration", calibration.eigenvalues);
  o.image = equator;
}

void run_covers(const ExperimentConfig& c, Outputs& o) {
  o.mesh = make_icosphere(c.level);
  const RationalMap g = c.params.contains("rational_map") ? rational_map_from_json(c.params.at("rational_map"))
                                                          : RationalMap::power(c.params.value("power", 2));
  const double eps_reg = c.params.value("eps_reg", 1e-3);
  const int d = g.degree();
  const SphereMap f = compose_cover(o.mesh, equator_embedding(c.n), c.n, g);
  const double energy = dirichlet_energy(f);
  const InducedSpectrum spectrum = induced_metric_spectrum(f, eps_reg, 12);

  json branches = json::array();
  for (const auto& b : branch_points(g)) {
    branches.push_back({{"point", b.point.infinite ? json("inf") : json::array({b.point.value.real(), b.point.value.imag()})},
                        {"multiplicity", b.multiplicity}});
  }
  const HolDimensions dims = hol_space_dimension(d);
  o.report["rational_map"] = to_json(g);
  o.report["degree"] = d;
  o.report["branch_points"] = branches;
  o.report["hol_complex_dimension"] = dims.complex_dim;
  o.report["energy"] = energy;
  o.report["lambda1"] = spectrum.lambda1;
  o.report["induced_area"] = spectrum.area;
  o.report["floored_elements"] = spectrum.floored_elements;
  o.report["floored_fraction"] = spectrum.floored_fraction;
  o.report["degeneracy_warning"] = spectrum.degeneracy_warning;

  const double energy_target = 4.0 * std::numbers::pi * d;
  o.checks.add("energy", "the cover has energy 4 pi d", std::abs(energy / energy_target - 1.0) <= 0.01, energy,
               energy_target);
  const double lambda_bound = 1.05 * 2.0 / d;
  o.checks.add("lambda1", "first nonzero eigenvalue of the pulled-back metric is at most 2 / d",
               spectrum.lambda1 <= lambda_bound, spectrum.lambda1, lambda_bound);
  if (d == 2) {
    const DoubleCoverNormalization normal_form = normalize_double_cover(g);
    o.report["normalization_residual"] = normal_form.residual;
    const int index = double_cover_normal_index(f, c.n, eps_reg);
    o.report["normal_index"] = index;
    o.checks.add("normal_index", "double covers have normal index at least 2(n - 2)", index >= 2 * (c.n - 2), index,
                 2 * (c.n - 2));
  }
  o.spectra << "label,i,eigenvalue\n" << std::setprecision(17);
  write_eigenvalues(o.spectra, "induced_laplacian", spectrum.eigenvalues);
  o.telemetry << "label,i,eigenvalue\n";
  o.image = f;
}

void run_pinch(const ExperimentConfig& c, Outputs& o) {
  const double delta = c.params.value("delta", 0.5);
  const long samples = c.params.value("samples", 100000L);
  const int operators = c.params.value("operators", 1);
  const int dimension = c.params.value("dimension", 4);
  json reports = json::array();
  long violations = 0;
  for (int i = 0; i < operators; ++i) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
    const CurvatureOperator r = random_pinched_operator(dimension, delta, seed);
    const PinchReport report = verify_pinch_implication(r, delta, samples, seed);
    violations += report.violations;
    reports.push_back(to_json(report));
    o.checks.add("pinch_hypothesis_" + std::to_string(i), "sampled operator satisfies the pinching hypothesis",
                 report.hypothesis_satisfied);
  }
  const PinchBounds bounds = pinch_bounds(delta);
  o.report["operators"] = reports;
  o.report["bounds"] = {bounds.lower, bounds.upper};
  o.report["violations"] = violations;
  o.checks.add("pinch_violations", "half-isotropic curvatures stay within the pinching bounds", violations == 0,
               static_cast<double>(violations), 0.0);

  // Constant curvature: every complex plane has curvature 1.
  const CurvatureOperator unit = CurvatureOperator::constant(dimension, 1.0);
  std::mt19937_64 rng(c.seed);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Eigen::MatrixXd frame = random_orthonormal_frame(dimension, 4, rng);
    const Eigen::VectorXcd z = frame.col(0).cast<std::complex<double>>() + Complex(0, 1) * frame.col(1);
    const Eigen::VectorXcd w = frame.col(2).cast<std::complex<double>>() + Complex(0, 0.5) * frame.col(3);
    worst = std::max(worst, std::abs(complex_sectional_curvature(unit, make_plane(z, w)) - 1.0));
  }
  o.report["constant_curvature_defect"] = worst;
  o.checks.add("constant_curvature", "space forms have constant complex sectional curvature", worst <= 1e-10, worst,
               1e-10);
  o.spectra << "label,i,eigenvalue\n";
  o.telemetry << "label,i,eigenvalue\n";
}

void run_morse(const ExperimentConfig& c, Outputs& o) {
  const bool desk = c.params.value("desk_model", false);
  const MorseComplexZ2 complex =
      desk ? desk_model(c.n, c.params.value("excluded_orbits", false)) : complex_from_json(c.params.at("complex"));
  const std::vector<int> betti = homology_z2(complex);
  o.report["complex"] = to_json(complex);
  o.report["betti"] = betti;
  o.report["euler_characteristic"] = complex.euler_characteristic();
  if (desk) {
    const SchubertCensus census = schubert_cell_counts(3, c.n + 1);
    bool match = true;
    for (int k = c.n - 2; k <= 2 * c.n - 5; ++k) {
      const int b = k < static_cast<int>(betti.size()) ? betti[k] : 0;
      match = match && static_cast<std::uint64_t>(b) == census.at(k - c.n + 2);
    }
    o.checks.add("desk_model_betti", "desk model homology equals the shifted Grassmannian cell counts", match);
  }
  if (desk || c.params.value("split", false)) {
    const ActionSplit split = split_by_action(complex, c.n);
    json rows = json::object();
    for (const auto& [lambda, row] : split.counts) {
      rows[std::to_string(lambda)] = {{"a_count", row.a_count}, {"predicted", row.predicted}, {"satisfied", row.satisfied}};
    }
    o.report["split"] = {{"verified", split.verified},
                         {"counts", rows},
                         {"a_generators", split.a_subcomplex.euler_characteristic()},
                         {"b_betti", homology_z2(split.b_quotient)}};
    o.checks.add("a_closure", "the boundary maps A-generators into A-generators", split.verified);
    o.checks.add("a_counts", "A-generator counts meet the predicted minimum counts", split.counts_satisfied);
  }
  o.spectra << "degree,betti\n";
  for (std::size_t k = 0; k < betti.size(); ++k) o.spectra << k << ',' << betti[k] << '\n';
  o.telemetry << "degree,generators\n";
  for (int k = 0; k <= complex.top_degree(); ++k) o.telemetry << k << ',' << complex.count(k) << '\n';
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

}  // namespace

RunResult run(const ExperimentConfig& config) {
  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + config.output_dir + "': " + ec.message());

  const int threads = configured_threads();
  if (threads > 0) Eigen::setNbThreads(threads);

  Outputs o;
  RunResult result;
  try {
    if (config.kind == "census") run_census(config, o);
    else if (config.kind == "flow") run_flow(config, o);
    else if (config.kind == "spectrum") run_spectrum(config, o);
    else if (config.kind == "covers") run_covers(config, o);
    else if (config.kind == "pinch") run_pinch(config, o);
    else if (config.kind == "morse") run_morse(config, o);
    else throw ConfigError("kind: unknown experiment kind '" + config.kind + "'");
    result.exit_code = o.checks.all() ? kExitPass : kExitNumericFailure;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    o.report["error"] = std::string(e.what());
    result.exit_code = kExitNumericFailure;
  }

  json& report = o.report;
  report["kind"] = config.kind;
  report["level"] = config.level;
  report["n"] = config.n;
  report["seed"] = config.seed;
  report["checks"] = o.checks.items();
  report["passed"] = result.exit_code == kExitPass;
  report["exit_code"] = result.exit_code;
  report["timestamp"] = utc_timestamp();
  if (o.mesh) report["mesh"] = mesh_summary(*o.mesh);

  write_file(dir / "report.json", report.dump(2) + "\n");
  write_file(dir / "spectra.csv", o.spectra.str());
  write_file(dir / "telemetry.csv", o.telemetry.str());
  if (config.write_obj && o.mesh) {
    std::ofstream mesh_out(dir / "mesh.obj");
    write_obj(*o.mesh, mesh_out);
    if (o.image) {
      std::ofstream image_out(dir / "image.obj");
      write_image_obj(*o.image, image_out);
    }
  }
  result.report = std::move(report);
  return result;
}

}  // namespace minsphere
