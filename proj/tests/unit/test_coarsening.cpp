#include <cmath>
#include <limits>

#include "support.hpp"
#include "tdshift/coarsening.hpp"
#include "tdshift/rng.hpp"

using namespace tdshift;

namespace {

EmbeddingTable table(std::vector<std::vector<double>> rows) {
  std::vector<Label> ids;
  for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back("p" + std::to_string(i));
  return EmbeddingTable(ids, std::move(rows));
}

EmbeddingTable random_table(std::uint64_t seed, std::size_t n, std::size_t dim) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> rows(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i)
    for (auto& x : rows[i]) x = z(rng) + 5.0 * static_cast<double>(i % 3);
  return table(rows);
}

}  // namespace

TEST(EmbeddingTable, Validation) {
  EXPECT_ERROR_CODE(EmbeddingTable({"a", "a"}, {{1.0}, {2.0}}), "duplicate-id");
  EXPECT_ERROR_CODE(EmbeddingTable({"a", "b"}, {{1.0}, {2.0, 3.0}}), "dim-mismatch");
  EXPECT_ERROR_CODE(EmbeddingTable({"a"}, {{std::numeric_limits<double>::quiet_NaN()}}), "invalid-embedding");
  EXPECT_ERROR_CODE(EmbeddingTable({"a"}, {{}}), "invalid-embedding");
}

TEST(FitKMeans, SingleClusterIsTheMean) {
  const auto c = fit_kmeans(table({{0, 0}, {2, 4}, {4, 2}}), 1, 1);
  ASSERT_EQ(c.num_clusters(), 1u);
  EXPECT_DOUBLE_EQ(c.centroids()[0][0], 2.0);
  EXPECT_DOUBLE_EQ(c.centroids()[0][1], 2.0);
}

TEST(FitKMeans, OneClusterPerDistinctPoint) {
  const auto e = table({{0, 0}, {3, 1}, {-2, 5}, {7, 7}});
  const auto c = fit_kmeans(e, 4, 3);
  EXPECT_EQ(c.num_clusters(), 4u);
  EXPECT_EQ(within_cluster_sse(e, c), 0.0);
}

TEST(FitKMeans, TwoObviousGroups) {
  const auto e = table({{0, 0}, {0, 1}, {10, 0}, {10, 1}});
  // Brute force over all 2-partitions for the SSE minimum.
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < 15; ++mask) {
    double sse = 0.0;
    for (unsigned side : {0u, 1u}) {
      double mx = 0, my = 0, n = 0;
      for (unsigned i = 0; i < 4; ++i)
        if (((mask >> i) & 1u) == side) mx += e.row(i)[0], my += e.row(i)[1], n += 1;
      mx /= n, my /= n;
      for (unsigned i = 0; i < 4; ++i)
        if (((mask >> i) & 1u) == side)
          sse += (e.row(i)[0] - mx) * (e.row(i)[0] - mx) + (e.row(i)[1] - my) * (e.row(i)[1] - my);
    }
    best = std::min(best, sse);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = fit_kmeans(e, 2, seed);
    ASSERT_EQ(c.num_clusters(), 2u);
    EXPECT_DOUBLE_EQ(within_cluster_sse(e, c), best);
    EXPECT_EQ(*c.cluster_of("p0"), *c.cluster_of("p1"));
    EXPECT_EQ(*c.cluster_of("p2"), *c.cluster_of("p3"));
    const auto& left = c.centroids()[*c.cluster_of("p0")];
    const auto& right = c.centroids()[*c.cluster_of("p2")];
    EXPECT_DOUBLE_EQ(left[0], 0.0);
    EXPECT_DOUBLE_EQ(left[1], 0.5);
    EXPECT_DOUBLE_EQ(right[0], 10.0);
    EXPECT_DOUBLE_EQ(right[1], 0.5);
  }
}

TEST(FitKMeans, ReducesOversizedK) {
  const auto c = fit_kmeans(table({{0.0}, {1.0}}), 5, 0);
  EXPECT_TRUE(c.k_reduced);
  EXPECT_LE(c.num_clusters(), 2u);
}

TEST(FitKMeans, DuplicatePointsDropEmptyClusters) {
  const auto c = fit_kmeans(table({{1.0}, {1.0}, {1.0}}), 3, 0);
  EXPECT_EQ(c.num_clusters(), 1u);
}

TEST(FitKMeans, Invariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto e = random_table(seed, 60, 3);
    const std::size_t k = 2 + seed % 7;
    const auto c = fit_kmeans(e, k, seed);
    EXPECT_LE(c.num_clusters(), k);
    EXPECT_LT(c.num_clusters(), e.size());
    EXPECT_EQ(c.assignment().size(), e.size());
    for (std::size_t x = 0; x < c.num_clusters(); ++x) EXPECT_EQ(*c.cluster_of(c.representatives()[x]), x);
    for (std::size_t i = 1; i < c.sse_history.size(); ++i) EXPECT_LE(c.sse_history[i], c.sse_history[i - 1] + 1e-9);
    const auto again = fit_kmeans(e, k, seed);
    EXPECT_EQ(again.centroids(), c.centroids());
    EXPECT_EQ(again.assignment(), c.assignment());
    EXPECT_EQ(again.representatives(), c.representatives());
  }
}

TEST(FitKMeans, RepresentativeIsClosestMember) {
  const auto e = random_table(42, 40, 2);
  const auto c = fit_kmeans(e, 4, 1);
  for (std::size_t x = 0; x < c.num_clusters(); ++x) {
    double best = std::numeric_limits<double>::infinity();
    Label arg;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (*c.cluster_of(e.ids()[i]) != x) continue;
      double d = 0.0;
      for (std::size_t k = 0; k < e.dim(); ++k) d += (e.row(i)[k] - c.centroids()[x][k]) * (e.row(i)[k] - c.centroids()[x][k]);
      if (d < best || (d == best && e.ids()[i] < arg)) best = d, arg = e.ids()[i];
    }
    EXPECT_EQ(c.representatives()[x], arg);
  }
}

TEST(Assign, Examples) {
  const CoarseningFunction c(2, 2, {{0, 0}, {10, 0}}, {"a", "b"}, {{"a", 0}, {"b", 1}});
  EXPECT_EQ(c.assign(std::vector<double>{0, 0}), 0u);
  EXPECT_EQ(c.assign(std::vector<double>{10, 0}), 1u);
  EXPECT_EQ(c.assign(std::vector<double>{5, 3}), 0u);
  EXPECT_EQ(c.assign(std::vector<double>{1, 0}), 0u);
  EXPECT_ERROR_CODE(c.assign(std::vector<double>{1, 0, 0}), "dim-mismatch");
}

TEST(CoarseningFunction, ValidatesInvariants) {
  EXPECT_ERROR_CODE(CoarseningFunction(2, 1, {{0.0}, {1.0}}, {"a", "b"}, {{"a", 1}, {"b", 0}}), "invalid-coarsening");
  EXPECT_ERROR_CODE(CoarseningFunction(1, 1, {{0.0}, {1.0}}, {"a", "b"}, {{"a", 0}, {"b", 1}}), "invalid-coarsening");
}

TEST(LabelEnergyEquivalence, Examples) {
  const CoarseningFunction c(3, 1, {{0.0}, {1.0}, {2.0}}, {"a", "b", "c"},
                             {{"a", 0}, {"a2", 0}, {"b", 1}, {"c", 2}, {"c2", 2}});
  const auto same = SampleSet::from_counts({{"a", 2}, {"b", 1}});
  auto [r0, l0] = label_energy_equivalence(same, same, c);
  EXPECT_EQ(r0.value, 0.0);
  EXPECT_EQ(l0.value, 0.0);

  auto [r1, l1] = label_energy_equivalence(SampleSet::from_counts({{"a", 1}, {"a2", 3}}),
                                           SampleSet::from_counts({{"c", 2}, {"c2", 1}}), c);
  EXPECT_EQ(r1.value, 2.0);
  EXPECT_EQ(l1.value, 2.0);

  auto [r2, l2] = label_energy_equivalence(SampleSet::from_counts({{"a", 3}, {"b", 2}, {"c2", 5}}),
                                           SampleSet::from_counts({{"a2", 1}, {"b", 4}, {"c", 2}}), c);
  EXPECT_EQ(r2.value, l2.value);
  EXPECT_GT(r2.value, 0.0);

  EXPECT_ERROR_CODE(label_energy_equivalence(SampleSet::from_counts({{"zz", 1}}), same, c), "unknown-dialogue");
}
