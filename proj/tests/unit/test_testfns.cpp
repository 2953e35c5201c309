#include <random>

#include "dialogues.hpp"
#include "support.hpp"
#include "tdshift/testfns.hpp"

using namespace tdshift;

TEST(Tokenize, LowercaseWhitespace) {
  EXPECT_EQ(tokenize("  Is it\tRED?  "), (Tokens{"is", "it", "red?"}));
  EXPECT_TRUE(tokenize("   ").empty());
}

TEST(Dialogue, Validate) {
  EXPECT_ERROR_CODE(make_dialogue("d", {}).validate(8), "empty-dialogue");
  EXPECT_ERROR_CODE(make_dialogue("d", {"a", ""}).validate(8), "empty-dialogue");
  EXPECT_ERROR_CODE(make_dialogue("d", {"a", "b", "c"}).validate(2), "dialogue-too-long");
  EXPECT_NO_THROW(make_dialogue("d", {"a", "b"}).validate(kDefaultMaxQuestions));
}

TEST(StrategyProportion, Examples) {
  const auto color = strategy_proportion("color", keyword_classifier({"red", "blue"}));
  EXPECT_EQ(color(make_dialogue("d", {"is it a car", "is it left"}), no_reference()), 0.0);
  EXPECT_EQ(color(make_dialogue("d", {"is it red", "is it blue"}), no_reference()), 1.0);
  EXPECT_EQ(color(make_dialogue("d", {"is it red", "is it a car"}), no_reference()), 0.5);
  EXPECT_EQ(color.name(), "color");
}

TEST(StrategyProportion, IgnoresAnswers) {
  const auto color = strategy_proportion("color", keyword_classifier({"red"}));
  auto d = make_dialogue("d", {"is it red", "is it a car", "is it red"});
  const double before = color(d, no_reference());
  for (auto& t : d.turns) t.answer = "no";
  EXPECT_EQ(color(d, no_reference()), before);
}

TEST(LexicalDiversity, Examples) {
  const auto lex = lexical_diversity();
  EXPECT_DOUBLE_EQ(lex(make_dialogue("d", {"cat cat", "cat cat"}), no_reference()), 1.0 / 4.0);
  EXPECT_EQ(lex(make_dialogue("d", {"one two", "three four"}), no_reference()), 1.0);
  EXPECT_EQ(lex(make_dialogue("d", {"is it a cat", "is it a dog"}), no_reference()), 0.625);
  EXPECT_ERROR_CODE(lex(make_dialogue("d", {}), no_reference()), "empty-dialogue");
}

TEST(Repetition, Examples) {
  const auto rep = repetition_indicator();
  EXPECT_EQ(rep(make_dialogue("d", {"q1", "q2", "q3"}), no_reference()), 0.0);
  EXPECT_EQ(rep(make_dialogue("d", {"q1", "q1"}), no_reference()), 1.0);
  EXPECT_EQ(rep(make_dialogue("d", {"q1", "q2", "q1"}), no_reference()), 1.0);
  // Verbatim after tokenization.
  EXPECT_EQ(rep(make_dialogue("d", {"Is it RED", "is  it red"}), no_reference()), 1.0);
}

TEST(ReferenceOverlap, Examples) {
  const auto ov = reference_overlap();
  const auto ref = make_dialogue("r", {"a b", "x y"});
  EXPECT_EQ(ov(ref, reference_of(ref)), 1.0);
  EXPECT_EQ(ov(make_dialogue("d", {"p q"}), reference_of(ref)), 0.0);
  EXPECT_EQ(ov(make_dialogue("d", {"a b c d"}), reference_of(ref)), 0.5);
  EXPECT_ERROR_CODE(ov(ref, no_reference()), "missing-reference");
}

TEST(ReferenceOverlap, ClipsRepeatedTokens) {
  const auto ov = reference_overlap();
  EXPECT_EQ(ov(make_dialogue("d", {"a a a a"}), reference_of(make_dialogue("r", {"a b"}))), 0.25);
}

TEST(ExternalScores, LookupAndRange) {
  const auto h = external_scores("human", {{{"d1", "u1"}, 0.25}});
  EXPECT_EQ(h(make_dialogue("d1", {"q"}), no_reference("u1")), 0.25);
  EXPECT_ERROR_CODE(h(make_dialogue("d2", {"q"}), no_reference("u1")), "missing-score");
  EXPECT_ERROR_CODE(external_scores("bad", {{{"d1", "u1"}, 1.5}}), "test-range");
}

TEST(TestFunction, RangeIsEnforced) {
  const TestFunction bad("bad", [](const Dialogue&, const Noise&) { return 1.5; });
  EXPECT_ERROR_CODE(bad(make_dialogue("d", {"q"}), no_reference()), "test-range");
}

TEST(BuiltIns, StayInUnitIntervalOnFuzzedDialogues) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> words{"is", "it", "red", "blue", "a", "car", "left", "the", "dog"};
  const std::vector<TestFunction> tests{strategy_proportion("s", keyword_classifier({"red", "car"})),
                                        lexical_diversity(), repetition_indicator(), reference_overlap()};
  for (int trial = 0; trial < 500; ++trial) {
    auto random_dialogue = [&](const std::string& id) {
      std::vector<std::string> qs(1 + rng() % 8);
      for (auto& q : qs) {
        const std::size_t n = 1 + rng() % 5;
        for (std::size_t k = 0; k < n; ++k) q += (k ? " " : "") + words[rng() % words.size()];
      }
      return make_dialogue(id, qs);
    };
    const auto d = random_dialogue("d"), r = random_dialogue("r");
    for (const auto& t : tests) {
      const double v = t(d, reference_of(r));
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(tests[3](d, reference_of(d)), 1.0);
  }
}
