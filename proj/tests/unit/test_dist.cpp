#include <cmath>
#include <numeric>

#include "support.hpp"
#include "tdshift/dist.hpp"
#include "tdshift/rng.hpp"

using namespace tdshift;

TEST(OutcomeSpace, SortsAndRejectsDuplicates) {
  OutcomeSpace s({"b", "c", "a"});
  EXPECT_EQ(s.labels(), (std::vector<Label>{"a", "b", "c"}));
  EXPECT_EQ(*s.index_of("c"), 2u);
  EXPECT_FALSE(s.index_of("z"));
  EXPECT_ERROR_CODE(OutcomeSpace({"a", "a"}), "duplicate-label");
  EXPECT_EQ(OutcomeSpace::union_of(OutcomeSpace({"a", "c"}), OutcomeSpace({"b", "c"})).labels(),
            (std::vector<Label>{"a", "b", "c"}));
}

TEST(Pmf, ValidatesMass) {
  EXPECT_ERROR_CODE(Pmf::from_map({{"a", 0.5}, {"b", 0.6}}), "invalid-pmf");
  EXPECT_ERROR_CODE(Pmf::from_map({{"a", -0.1}, {"b", 1.1}}), "invalid-pmf");
  EXPECT_ERROR_CODE(Pmf(OutcomeSpace({"a", "b"}), {1.0}), "invalid-pmf");
  const auto p = Pmf::from_map({{"b", 0.25}, {"a", 0.75}});
  EXPECT_DOUBLE_EQ(p.mass_of("a"), 0.75);
  EXPECT_DOUBLE_EQ(p.mass_of("zz"), 0.0);
}

TEST(Pmf, AlignAndPushforward) {
  const auto p = Pmf::from_map({{"x", 0.5}, {"y", 0.25}, {"z", 0.25}});
  const auto aligned = p.aligned_to(OutcomeSpace({"w", "x", "y", "z"}));
  EXPECT_EQ(aligned.mass_of("w"), 0.0);
  EXPECT_ERROR_CODE(p.aligned_to(OutcomeSpace({"x", "y"})), "space-mismatch");
  const auto pushed = p.pushforward({{"x", "r"}, {"y", "r"}, {"z", "z"}});
  EXPECT_DOUBLE_EQ(pushed.mass_of("r"), 0.75);
  EXPECT_DOUBLE_EQ(pushed.mass_of("z"), 0.25);
  EXPECT_ERROR_CODE(p.pushforward({{"x", "r"}}), "unknown-dialogue");
}

TEST(PmfFromSamples, Examples) {
  const auto point = pmf_from_samples(SampleSet::from_counts({{"a", 2}}));
  EXPECT_EQ(point.space().size(), 1u);
  EXPECT_EQ(point.mass_of("a"), 1.0);

  const auto half = pmf_from_samples(SampleSet::from_counts({{"a", 1}, {"b", 1}}));
  EXPECT_EQ(half.mass_of("a"), 0.5);
  EXPECT_EQ(half.mass_of("b"), 0.5);

  const auto q = pmf_from_samples(SampleSet::from_counts({{"a", 3}, {"b", 1}}));
  EXPECT_EQ(q.mass_of("a"), 3.0 / 4.0);
  EXPECT_EQ(q.mass_of("b"), 1.0 / 4.0);

  EXPECT_ERROR_CODE(pmf_from_samples(SampleSet{}), "empty-sample");
}

TEST(Sample, DegenerateAndDeterministic) {
  const auto s = sample(Pmf::point_mass("a"), 5, 11);
  EXPECT_EQ(s.count_of("a"), 5u);
  EXPECT_EQ(s.n(), 5u);

  const auto p = Pmf::uniform(OutcomeSpace({"a", "b"}));
  EXPECT_EQ(sample(p, 1000, 3), sample(p, 1000, 3));
  EXPECT_NE(sample(p, 1000, 3), sample(p, 1000, 4));
}

TEST(Sample, FairCoinWithinChernoffBound) {
  const auto p = Pmf::uniform(OutcomeSpace({"a", "b"}));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto s = sample(p, 100000, seed);
    EXPECT_NEAR(static_cast<double>(s.count_of("a")) / 1e5, 0.5, 0.02);
  }
}

TEST(Sample, TotalVariationShrinksAtLargeN) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + uniform_index(rng, 19);
    std::vector<Label> labels;
    for (std::size_t i = 0; i < n; ++i) labels.push_back("L" + std::to_string(i));
    const Pmf p(OutcomeSpace(labels), random_simplex(rng, n));
    const auto est = pmf_from_samples(sample(p, 1000000, seed + 100));
    EXPECT_LE(total_variation(p, est), 0.01) << "seed " << seed;
  }
}

TEST(Sample, InverseCdfUsesCanonicalOrder) {
  // Masses follow the sorted space, whatever order the labels were given in.
  const auto p1 = Pmf::from_map({{"b", 0.1}, {"a", 0.9}});
  const auto p2 = Pmf(OutcomeSpace({"b", "a"}), {0.9, 0.1});
  EXPECT_EQ(p2.mass_of("a"), 0.9);
  EXPECT_EQ(sample(p1, 500, 9), sample(p2, 500, 9));
}

namespace {

JointModel two_by_two() {
  return JointModel::from_tables({{"c1", 0.3}, {"c2", 0.7}},
                                 {{"c1", {{"d1", 0.6}, {"d2", 0.4}}}, {"c2", {{"d1", 0.1}, {"d2", 0.9}}}},
                                 {{"c1", {{"d1", 0.5}, {"d2", 0.5}}}, {"c2", {{"d1", 0.2}, {"d2", 0.8}}}},
                                 {{"c1", {{"d1", 0.3}, {"d2", 0.7}}}, {"c2", {{"d1", 0.9}, {"d2", 0.1}}}},
                                 {{"u1", 0.4}, {"u2", 0.6}});
}

}  // namespace

TEST(EnumerateJoint, SinglePointMassTuple) {
  const auto j = JointModel::from_tables({{"c", 1.0}}, {{"c", {{"d", 1.0}}}}, {{"c", {{"d", 1.0}}}},
                                         {{"c", {{"d", 1.0}}}}, {{"u", 1.0}});
  const auto t = enumerate_joint(j);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].probability, 1.0);
}

TEST(EnumerateJoint, TwoContexts) {
  const auto j = JointModel::from_tables({{"a", 0.5}, {"b", 0.5}}, {{"a", {{"x", 1.0}}}, {"b", {{"y", 1.0}}}},
                                         {{"a", {{"x", 1.0}}}, {"b", {{"y", 1.0}}}},
                                         {{"a", {{"y", 1.0}}}, {"b", {{"x", 1.0}}}}, {{"u", 1.0}});
  const auto t = enumerate_joint(j);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0].probability, 0.5);
  EXPECT_EQ(t[1].probability, 0.5);
}

TEST(EnumerateJoint, MixedExampleHas32TuplesWithProductProbabilities) {
  const auto j = two_by_two();
  const auto t = enumerate_joint(j);
  ASSERT_EQ(t.size(), 32u);
  double total = 0.0;
  for (const auto& x : t) {
    const double expected = j.contexts()[x.context] * j.human(x.context)[x.human] * j.gen1(x.context)[x.gen1] *
                            j.gen2(x.context)[x.gen2] * j.noise()[x.noise];
    EXPECT_DOUBLE_EQ(x.probability, expected);
    total += x.probability;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(EnumerateJoint, RejectsBadRows) {
  EXPECT_ERROR_CODE(JointModel::from_tables({{"c", 1.0}}, {{"c", {{"d", 0.5}}}}, {{"c", {{"d", 1.0}}}},
                                            {{"c", {{"d", 1.0}}}}, {{"u", 1.0}}),
                    "invalid-joint");
  EXPECT_ERROR_CODE(JointModel::from_tables({{"c", 1.0}}, {{"c", {{"d", 1.0}}}}, {}, {{"c", {{"d", 1.0}}}},
                                            {{"u", 1.0}}),
                    "invalid-joint");
}

TEST(EnumerateJoint, RandomModelsAreValidProbabilityVectors) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    auto row = [&](std::size_t n) {
      const auto w = random_simplex(rng, n, 0.3);
      std::map<Label, double> m;
      for (std::size_t i = 0; i < n; ++i) m["d" + std::to_string(i)] = w[i];
      return m;
    };
    std::map<Label, double> contexts;
    JointModel::Table h, g1, g2;
    const std::size_t nc = 1 + uniform_index(rng, 3);
    const auto cw = random_simplex(rng, nc);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto name = "c" + std::to_string(c);
      contexts[name] = cw[c];
      h[name] = row(4);
      g1[name] = row(4);
      g2[name] = row(4);
    }
    const auto uw = random_simplex(rng, 2);
    const auto j = JointModel::from_tables(contexts, h, g1, g2, {{"u0", uw[0]}, {"u1", uw[1]}});
    double total = 0.0;
    for (const auto& t : enumerate_joint(j)) {
      EXPECT_GT(t.probability, 0.0);
      total += t.probability;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(JointModel, Marginals) {
  const auto j = two_by_two();
  EXPECT_NEAR(j.gen1_marginal().mass_of("d1"), 0.3 * 0.5 + 0.7 * 0.2, 1e-15);
  EXPECT_NEAR(j.gen2_marginal().mass_of("d1"), 0.3 * 0.3 + 0.7 * 0.9, 1e-15);
}
