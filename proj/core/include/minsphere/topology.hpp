#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace minsphere {

/// Cell counts of the real Grassmannian G_m(R^N): counts[k] is the number of
/// partitions of k with at most m parts, each at most N - m.
struct SchubertCensus {
  int m = 0;
  int N = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  bool palindromic() const;
  /// counts[k], zero outside 0..m(N-m).
  std::uint64_t at(int k) const;
};

/// Exhaustive partition enumeration; ResourceError when C(N, m) exceeds 5e7.
SchubertCensus schubert_cell_counts(int m, int N);

/// Coefficients of the q-binomial [N choose m]_q by the integer recurrence.
std::vector<std::uint64_t> gaussian_binomial(int m, int N);

std::uint64_t binomial(int n, int k);

/// lambda -> p_3(lambda - n + 2) for n - 2 <= lambda <= 2n - 5, from the census of G_3(R^(n+1)).
std::map<int, std::uint64_t> predicted_minimum_counts(int n);

void write_census_csv(const SchubertCensus& census, std::ostream& out);

/// A: orbit with trivial module action; B: orbit with nontrivial action.
enum class OrbitLabel { A, B };

struct Generator {
  std::string id;
  int degree = 0;
  OrbitLabel label = OrbitLabel::A;
};

struct Trajectory {
  std::string from;  ///< generator of degree d
  std::string to;    ///< generator of degree d - 1
  long long count = 0;
};

/// Rows index generators of degree d - 1, columns generators of degree d.
using MatrixZ2 = std::vector<std::vector<std::uint8_t>>;

struct MorseComplexZ2 {
  /// generators[d] lists the generators of degree d.
  std::vector<std::vector<Generator>> generators;
  /// boundaries[d] : C_d -> C_(d-1); boundaries[0] is empty.
  std::vector<MatrixZ2> boundaries;

  int top_degree() const { return static_cast<int>(generators.size()) - 1; }
  int count(int degree) const;
  int euler_characteristic() const;
};

/// Reduces trajectory counts mod 2 and checks d o d = 0 (InvariantError naming the degrees).
MorseComplexZ2 build_complex(const std::vector<Generator>& generators, const std::vector<Trajectory>& trajectories);

int rank_z2(MatrixZ2 matrix);

/// Betti numbers b_0..b_top over Z/2.
std::vector<int> homology_z2(const MorseComplexZ2& complex);

/// Height function on the round sphere: one minimum, one maximum.
MorseComplexZ2 sphere_height_complex();
/// Height function on the upright torus with the classical trajectory counts (all 2).
MorseComplexZ2 torus_height_complex();

/// Generators at degree (n - 2) + k with multiplicity p_3(k) for 0 <= k <= n - 3 and
/// zero differentials. With excluded_orbits, adds a cancelling A pair and a B pair
/// in degrees 2n - 4 and 2n - 3.
MorseComplexZ2 desk_model(int n, bool excluded_orbits = false);

struct CountComparison {
  int a_count = 0;
  std::uint64_t predicted = 0;
  bool satisfied = false;
};

struct ActionSplit {
  MorseComplexZ2 a_subcomplex;
  MorseComplexZ2 b_quotient;
  bool verified = false;
  /// Per degree lambda in n - 2..2n - 5.
  std::map<int, CountComparison> counts;
  bool counts_satisfied = false;
};

/// Checks that the boundary maps A-generators into the span of A-generators
/// (InvariantError otherwise) and compares A-counts with predicted_minimum_counts(n).
ActionSplit split_by_action(const MorseComplexZ2& complex, int n);

nlohmann::json to_json(const SchubertCensus& census);
nlohmann::json to_json(const MorseComplexZ2& complex);
/// Reads {generators: [{id, degree, label}], boundaries: [{from, to, count_mod2}]}.
MorseComplexZ2 complex_from_json(const nlohmann::json& j);

}  // namespace minsphere
