#include "minsphere/topology.hpp"

#include "minsphere/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <ostream>
#include <set>
#include <unordered_map>

namespace minsphere {

namespace {

constexpr std::uint64_t kEnumerationLimit = 50'000'000;
constexpr int kMaxN = 40;

void check_range(int m, int N, const char* where) {
  if (m < 1 || m >= N) throw PreconditionError(std::string(where) + ": need 1 <= m < N");
  if (N > kMaxN) throw ResourceError(std::string(where) + ": N above 40 overflows the integer coefficients");
}

void enumerate(int parts_left, int max_part, int sum, std::vector<std::uint64_t>& counts) {
  ++counts[sum];
  if (parts_left == 0) return;
  for (int part = 1; part <= max_part; ++part) enumerate(parts_left - 1, part, sum + part, counts);
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (int i = 0; i < k; ++i) c = c * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
  return c;
}

std::uint64_t SchubertCensus::total() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

bool SchubertCensus::palindromic() const { return std::equal(counts.begin(), counts.end(), counts.rbegin()); }

std::uint64_t SchubertCensus::at(int k) const {
  if (k < 0 || k >= static_cast<int>(counts.size())) return 0;
  return counts[k];
}

SchubertCensus schubert_cell_counts(int m, int N) {
  check_range(m, N, "schubert_cell_counts");
  if (binomial(N, m) > kEnumerationLimit) {
    throw ResourceError("schubert_cell_counts: more than 5e7 cells to enumerate");
  }
  SchubertCensus census;
  census.m = m;
  census.N = N;
  census.counts.assign(m * (N - m) + 1, 0);
  // Partitions as nonincreasing sequences of positive parts; each prefix is a partition.
  enumerate(m, N - m, 0, census.counts);
  return census;
}

std::vector<std::uint64_t> gaussian_binomial(int m, int N) {
  check_range(m, N, "gaussian_binomial");
  // table[j] holds [n choose j]_q for the current n.
  std::vector<std::vector<std::uint64_t>> table(m + 1);
  table[0] = {1};
  for (int n = 1; n <= N; ++n) {
    for (int j = std::min(n, m); j >= 1; --j) {
      if (j == n) {
        table[j] = {1};
        continue;
      }
      const auto& lower = table[j - 1];
      const auto& same = table[j];
      std::vector<std::uint64_t> next(static_cast<std::size_t>(j * (n - j) + 1), 0);
      for (std::size_t i = 0; i < lower.size(); ++i) next[i] += lower[i];
      for (std::size_t i = 0; i < same.size(); ++i) next[i + j] += same[i];
      table[j] = std::move(next);
    }
  }
  return table[m];
}

std::map<int, std::uint64_t> predicted_minimum_counts(int n) {
  if (n < 4) throw PreconditionError("predicted_minimum_counts: n must be at least 4");
  const SchubertCensus census = schubert_cell_counts(3, n + 1);
  std::map<int, std::uint64_t> out;
  for (int lambda = n - 2; lambda <= 2 * n - 5; ++lambda) out[lambda] = census.at(lambda - n + 2);
  return out;
}

void write_census_csv(const SchubertCensus& census, std::ostream& out) {
  out << "k,count\n";
  for (std::size_t k = 0; k < census.counts.size(); ++k) out << k << ',' << census.counts[k] << '\n';
}

int MorseComplexZ2::count(int degree) const {
  if (degree < 0 || degree > top_degree()) return 0;
  return static_cast<int>(generators[degree].size());
}

int MorseComplexZ2::euler_characteristic() const {
  int chi = 0;
  for (int d = 0; d <= top_degree(); ++d) chi += (d % 2 == 0 ? 1 : -1) * count(d);
  return chi;
}

int rank_z2(MatrixZ2 matrix) {
  int rank = 0;
  const std::size_t rows = matrix.size();
  const std::size_t cols = rows == 0 ? 0 : matrix[0].size();
  for (std::size_t c = 0; c < cols && rank < static_cast<int>(rows); ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && matrix[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(matrix[pivot], matrix[rank]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r != static_cast<std::size_t>(rank) && matrix[r][c]) {
        for (std::size_t k = c; k < cols; ++k) matrix[r][k] ^= matrix[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

namespace {

MatrixZ2 zero_matrix(int rows, int cols) {
  return MatrixZ2(static_cast<std::size_t>(rows), std::vector<std::uint8_t>(static_cast<std::size_t>(cols), 0));
}

void check_square_zero(const MorseComplexZ2& c) {
  for (int d = 2; d <= c.top_degree(); ++d) {
    const MatrixZ2& outer = c.boundaries[d - 1];
    const MatrixZ2& inner = c.boundaries[d];
    for (int i = 0; i < c.count(d - 2); ++i) {
      for (int j = 0; j < c.count(d); ++j) {
        std::uint8_t sum = 0;
        for (int k = 0; k < c.count(d - 1); ++k) sum ^= outer[i][k] & inner[k][j];
        if (sum) {
          throw InvariantError("build_complex: d o d != 0 from degree " + std::to_string(d) + " to degree " +
                               std::to_string(d - 2));
        }
      }
    }
  }
}

MorseComplexZ2 empty_complex(int top) {
  MorseComplexZ2 c;
  c.generators.resize(top + 1);
  c.boundaries.resize(top + 1);
  return c;
}

/// Restriction of the complex to the generators accepted by keep; the boundary
/// is the corresponding block of the original boundary matrices.
MorseComplexZ2 restrict_to(const MorseComplexZ2& complex, const std::function<bool(const Generator&)>& keep) {
  MorseComplexZ2 out = empty_complex(std::max(complex.top_degree(), 0));
  std::vector<std::vector<int>> kept(complex.generators.size());
  for (int d = 0; d <= complex.top_degree(); ++d) {
    for (int i = 0; i < complex.count(d); ++i) {
      if (keep(complex.generators[d][i])) {
        kept[d].push_back(i);
        out.generators[d].push_back(complex.generators[d][i]);
      }
    }
  }
  for (int d = 1; d <= complex.top_degree(); ++d) {
    out.boundaries[d] = zero_matrix(out.count(d - 1), out.count(d));
    for (std::size_t r = 0; r < kept[d - 1].size(); ++r)
      for (std::size_t c = 0; c < kept[d].size(); ++c)
        out.boundaries[d][r][c] = complex.boundaries[d][kept[d - 1][r]][kept[d][c]];
  }
  return out;
}

}  // namespace

MorseComplexZ2 build_complex(const std::vector<Generator>& generators, const std::vector<Trajectory>& trajectories) {
  int top = 0;
  for (const auto& g : generators) {
    if (g.degree < 0) throw PreconditionError("build_complex: negative degree for '" + g.id + "'");
    top = std::max(top, g.degree);
  }
  MorseComplexZ2 complex = empty_complex(top);
  std::unordered_map<std::string, std::pair<int, int>> where;
  for (const auto& g : generators) {
    if (!where.emplace(g.id, std::make_pair(g.degree, complex.count(g.degree))).second) {
      throw PreconditionError("build_complex: duplicate generator id '" + g.id + "'");
    }
    complex.generators[g.degree].push_back(g);
  }
  for (int d = 1; d <= top; ++d) complex.boundaries[d] = zero_matrix(complex.count(d - 1), complex.count(d));
  for (const auto& t : trajectories) {
    const auto from = where.find(t.from);
    const auto to = where.find(t.to);
    if (from == where.end() || to == where.end()) {
      throw PreconditionError("build_complex: trajectory " + t.from + " -> " + t.to + " names an unknown generator");
    }
    if (from->second.first != to->second.first + 1) {
      throw PreconditionError("build_complex: trajectory " + t.from + " -> " + t.to +
                              " does not lower the degree by one");
    }
    const std::uint8_t parity = static_cast<std::uint8_t>(((t.count % 2) + 2) % 2);
    complex.boundaries[from->second.first][to->second.second][from->second.second] ^= parity;
  }
  check_square_zero(complex);
  return complex;
}

std::vector<int> homology_z2(const MorseComplexZ2& complex) {
  const int top = complex.top_degree();
  std::vector<int> ranks(top + 2, 0);
  for (int d = 1; d <= top; ++d) ranks[d] = rank_z2(complex.boundaries[d]);
  std::vector<int> betti(top + 1);
  int chi = 0;
  for (int d = 0; d <= top; ++d) {
    betti[d] = complex.count(d) - ranks[d] - ranks[d + 1];
    chi += (d % 2 == 0 ? 1 : -1) * betti[d];
  }
  if (chi != complex.euler_characteristic()) throw InvariantError("homology_z2: Euler characteristic mismatch");
  return betti;
}

MorseComplexZ2 sphere_height_complex() {
  return build_complex({{"min", 0, OrbitLabel::A}, {"max", 2, OrbitLabel::A}}, {});
}

MorseComplexZ2 torus_height_complex() {
  return build_complex({{"min", 0, OrbitLabel::A},
                        {"saddle_low", 1, OrbitLabel::A},
                        {"saddle_high", 1, OrbitLabel::A},
                        {"max", 2, OrbitLabel::A}},
                       {{"saddle_low", "min", 2},
                        {"saddle_high", "min", 2},
                        {"max", "saddle_low", 2},
                        {"max", "saddle_high", 2}});
}

MorseComplexZ2 desk_model(int n, bool excluded_orbits) {
  if (n < 4) throw PreconditionError("desk_model: n must be at least 4");
  const SchubertCensus census = schubert_cell_counts(3, n + 1);
  std::vector<Generator> generators;
  std::vector<Trajectory> trajectories;
  for (int k = 0; k <= n - 3; ++k) {
    for (std::uint64_t j = 0; j < census.at(k); ++j) {
      generators.push_back({"A" + std::to_string(k) + "_" + std::to_string(j), n - 2 + k, OrbitLabel::A});
    }
  }
  if (excluded_orbits) {
    const int low = 2 * n - 4;
    generators.push_back({"A_extra_low", low, OrbitLabel::A});
    generators.push_back({"A_extra_high", low + 1, OrbitLabel::A});
    generators.push_back({"B_low", low, OrbitLabel::B});
    generators.push_back({"B_high", low + 1, OrbitLabel::B});
    trajectories.push_back({"A_extra_high", "A_extra_low", 1});
    trajectories.push_back({"B_high", "B_low", 3});
    // B may bound into A: only A -> B is excluded.
    trajectories.push_back({"B_high", "A_extra_low", 1});
  }
  return build_complex(generators, trajectories);
}

ActionSplit split_by_action(const MorseComplexZ2& complex, int n) {
  for (int d = 1; d <= complex.top_degree(); ++d) {
    for (int c = 0; c < complex.count(d); ++c) {
      if (complex.generators[d][c].label != OrbitLabel::A) continue;
      for (int r = 0; r < complex.count(d - 1); ++r) {
        if (complex.boundaries[d][r][c] && complex.generators[d - 1][r].label == OrbitLabel::B) {
          throw InvariantError("split_by_action: A-generator '" + complex.generators[d][c].id +
                               "' bounds onto B-generator '" + complex.generators[d - 1][r].id + "'");
        }
      }
    }
  }
  ActionSplit out;
  out.a_subcomplex = restrict_to(complex, [](const Generator& g) { return g.label == OrbitLabel::A; });
  out.b_quotient = restrict_to(complex, [](const Generator& g) { return g.label == OrbitLabel::B; });
  check_square_zero(out.a_subcomplex);
  check_square_zero(out.b_quotient);
  out.verified = true;
  out.counts_satisfied = true;
  for (const auto& [lambda, predicted] : predicted_minimum_counts(n)) {
    CountComparison row;
    row.a_count = out.a_subcomplex.count(lambda);
    row.predicted = predicted;
    row.satisfied = static_cast<std::uint64_t>(row.a_count) >= predicted;
    out.counts_satisfied = out.counts_satisfied && row.satisfied;
    out.counts[lambda] = row;
  }
  return out;
}

nlohmann::json to_json(const SchubertCensus& census) {
  return {{"m", census.m},
          {"N", census.N},
          {"counts", census.counts},
          {"total", census.total()},
          {"palindromic", census.palindromic()}};
}

nlohmann::json to_json(const MorseComplexZ2& complex) {
  nlohmann::json generators = nlohmann::json::array();
  nlohmann::json boundaries = nlohmann::json::array();
  for (int d = 0; d <= complex.top_degree(); ++d) {
    for (const auto& g : complex.generators[d]) {
      generators.push_back({{"id", g.id}, {"degree", g.degree}, {"label", g.label == OrbitLabel::A ? "A" : "B"}});
    }
  }
  for (int d = 1; d <= complex.top_degree(); ++d) {
    for (int r = 0; r < complex.count(d - 1); ++r)
      for (int c = 0; c < complex.count(d); ++c)
        if (complex.boundaries[d][r][c]) {
          boundaries.push_back(
              {{"from", complex.generators[d][c].id}, {"to", complex.generators[d - 1][r].id}, {"count_mod2", 1}});
        }
  }
  return {{"generators", generators}, {"boundaries", boundaries}};
}

MorseComplexZ2 complex_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("generators")) throw ConfigError("complex: field 'generators' is required");
  std::vector<Generator> generators;
  std::vector<Trajectory> trajectories;
  try {
    for (const auto& g : j.at("generators")) {
      const std::string label = g.value("label", "A");
      if (label != "A" && label != "B") throw ConfigError("complex: label must be \"A\" or \"B\"");
      generators.push_back({g.at("id").get<std::string>(), g.at("degree").get<int>(),
                            label == "A" ? OrbitLabel::A : OrbitLabel::B});
    }
    if (j.contains("boundaries")) {
      for (const auto& b : j.at("boundaries")) {
        trajectories.push_back({b.at("from").get<std::string>(), b.at("to").get<std::string>(),
                                b.at("count_mod2").get<long long>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("complex: ") + e.what());
  }
  return build_complex(generators, trajectories);
}

}  // namespace minsphere
