#include "minsphere/errors.hpp"
#include "minsphere/topology.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <random>
#include <sstream>

using namespace minsphere;

namespace {

// Schubert cells of G_m(R^N) are indexed by m-subsets {i_1 < ... < i_m}; the
// cell dimension is sum (i_j - j). Counted over bitmasks.
std::vector<std::uint64_t> subset_oracle(int m, int N) {
  std::vector<std::uint64_t> counts(m * (N - m) + 1, 0);
  for (std::uint32_t mask = 0; mask < (1u << N); ++mask) {
    if (std::popcount(mask) != m) continue;
    int dim = 0, j = 0;
    for (int i = 0; i < N; ++i) {
      if (mask & (1u << i)) dim += i - j++;
    }
    ++counts[dim];
  }
  return counts;
}

Generator gen(const std::string& id, int degree, OrbitLabel label = OrbitLabel::A) {
  return {id, degree, label};
}

}  // namespace

TEST(Census, SmallExample) {
  const SchubertCensus c = schubert_cell_counts(3, 5);
  EXPECT_EQ(c.counts, (std::vector<std::uint64_t>{1, 1, 2, 2, 2, 1, 1}));
  EXPECT_EQ(c.total(), 10u);
  EXPECT_EQ(c.at(-1), 0u);
  EXPECT_EQ(c.at(7), 0u);
}

TEST(Census, AgreesWithSubsetCountAndQBinomial) {
  for (int N = 2; N <= 12; ++N) {
    for (int m = 1; m < N; ++m) {
      const SchubertCensus c = schubert_cell_counts(m, N);
      EXPECT_EQ(c.counts, subset_oracle(m, N)) << "m=" << m << " N=" << N;
      EXPECT_EQ(c.counts, gaussian_binomial(m, N)) << "m=" << m << " N=" << N;
      EXPECT_EQ(c.total(), binomial(N, m));
      EXPECT_TRUE(c.palindromic());
      EXPECT_EQ(c.counts, schubert_cell_counts(N - m, N).counts);
    }
  }
}

TEST(Census, RangeChecks) {
  EXPECT_THROW(schubert_cell_counts(0, 5), PreconditionError);
  EXPECT_THROW(schubert_cell_counts(5, 5), PreconditionError);
  EXPECT_THROW(schubert_cell_counts(20, 41), ResourceError);
}

TEST(Census, CsvOutput) {
  std::ostringstream out;
  write_census_csv(schubert_cell_counts(1, 3), out);
  EXPECT_EQ(out.str(), "k,count\n0,1\n1,1\n2,1\n");
}

TEST(Census, PredictedMinimumCounts) {
  // p_3 of G_3(R^5) shifted to start at n - 2.
  const auto p4 = predicted_minimum_counts(4);
  EXPECT_EQ(p4, (std::map<int, std::uint64_t>{{2, 1}, {3, 1}}));
  const auto p5 = predicted_minimum_counts(5);
  EXPECT_EQ(p5, (std::map<int, std::uint64_t>{{3, 1}, {4, 1}, {5, 2}}));
  const auto p6 = predicted_minimum_counts(6);
  EXPECT_EQ(p6, (std::map<int, std::uint64_t>{{4, 1}, {5, 1}, {6, 2}, {7, 3}}));
}

TEST(Morse, SphereAndTorus) {
  EXPECT_EQ(homology_z2(sphere_height_complex()), (std::vector<int>{1, 0, 1}));
  const MorseComplexZ2 torus = torus_height_complex();
  EXPECT_EQ(homology_z2(torus), (std::vector<int>{1, 2, 1}));
  EXPECT_EQ(torus.euler_characteristic(), 0);
}

TEST(Morse, OddCountsGiveACancellingPair) {
  const MorseComplexZ2 c = build_complex({gen("min", 0), gen("saddle", 1), gen("max", 2), gen("min2", 0)},
                                         {{"saddle", "min", 1}, {"saddle", "min2", 1}});
  EXPECT_EQ(homology_z2(c), (std::vector<int>{1, 0, 1}));
}

TEST(Morse, NonZeroSquareIsRejected) {
  try {
    build_complex({gen("a", 0), gen("b", 1), gen("c", 2)}, {{"c", "b", 1}, {"b", "a", 1}});
    FAIL() << "expected InvariantError";
  } catch (const InvariantError& e) {
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

TEST(Morse, MalformedInputIsRejected) {
  EXPECT_THROW(build_complex({gen("a", 0), gen("a", 1)}, {}), PreconditionError);
  EXPECT_THROW(build_complex({gen("a", 0)}, {{"x", "a", 1}}), PreconditionError);
  EXPECT_THROW(build_complex({gen("a", 0), gen("b", 2)}, {{"b", "a", 1}}), PreconditionError);
}

TEST(Morse, GeneratorOrderDoesNotChangeHomology) {
  std::vector<Generator> gens = {gen("p", 0), gen("q", 0), gen("r", 1), gen("s", 1), gen("t", 1), gen("u", 2)};
  const std::vector<Trajectory> traj = {{"r", "p", 1}, {"r", "q", 1}, {"s", "p", 1}, {"s", "q", 3},
                                        {"u", "r", 1}, {"u", "s", 1}};
  const std::vector<int> expected = homology_z2(build_complex(gens, traj));
  std::mt19937 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(gens.begin(), gens.end(), rng);
    EXPECT_EQ(homology_z2(build_complex(gens, traj)), expected);
  }
  EXPECT_EQ(expected, (std::vector<int>{1, 1, 0}));
}

TEST(Morse, RankOverZ2) {
  EXPECT_EQ(rank_z2({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}), 2);
  EXPECT_EQ(rank_z2({{1, 0}, {0, 1}}), 2);
  EXPECT_EQ(rank_z2({}), 0);
}

TEST(Desk, BettiNumbersMatchTheCensus) {
  for (int n = 4; n <= 8; ++n) {
    const auto predicted = predicted_minimum_counts(n);
    for (const bool excluded : {false, true}) {
      const MorseComplexZ2 c = desk_model(n, excluded);
      const std::vector<int> betti = homology_z2(c);
      for (const auto& [lambda, count] : predicted) {
        ASSERT_LT(lambda, static_cast<int>(betti.size()));
        EXPECT_EQ(static_cast<std::uint64_t>(betti[lambda]), count) << "n=" << n << " lambda=" << lambda;
      }
      const ActionSplit split = split_by_action(c, n);
      EXPECT_TRUE(split.verified);
      EXPECT_TRUE(split.counts_satisfied) << "n=" << n;
    }
  }
}

TEST(Desk, ActionViolationIsRejected) {
  const MorseComplexZ2 c =
      build_complex({gen("a", 2, OrbitLabel::A), gen("b", 1, OrbitLabel::B)}, {{"a", "b", 1}});
  EXPECT_THROW(split_by_action(c, 4), InvariantError);
}

TEST(Morse, JsonRoundTrip) {
  const MorseComplexZ2 c = desk_model(5, true);
  const MorseComplexZ2 back = complex_from_json(to_json(c));
  EXPECT_EQ(homology_z2(back), homology_z2(c));
  ASSERT_EQ(back.top_degree(), c.top_degree());
  for (int d = 0; d <= c.top_degree(); ++d) EXPECT_EQ(back.count(d), c.count(d));
  EXPECT_THROW(complex_from_json(nlohmann::json::parse(R"({"generators": 3})")), ConfigError);
}
