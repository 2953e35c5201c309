#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tdshift/dist.hpp"

namespace tdshift {

using Tokens = std::vector<std::string>;

// Lowercased whitespace split.
Tokens tokenize(std::string_view text);

struct Turn {
  Tokens question;
  std::string answer;
};

/// A question/answer sequence tied to a context.
struct Dialogue {
  Label id;
  Label context_id;
  std::vector<Turn> turns;

  // Throws "empty-dialogue" when there are no turns or an empty question, and
  // "dialogue-too-long" when there are more than max_turns turns.
  void validate(std::size_t max_turns) const;
  Tokens question_tokens() const;
};

inline constexpr std::size_t kDefaultMaxQuestions = 8;

/// The noise input of a test: an opaque label plus, for reference-based
/// tests, the reference dialogue it carries.
struct Noise {
  Label id;
  std::shared_ptr<const Dialogue> reference;
};

/// Named map (dialogue, noise) -> [0, 1].
class TestFunction {
 public:
  using Fn = std::function<double(const Dialogue&, const Noise&)>;

  TestFunction(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  const std::string& name() const noexcept { return name_; }
  // Throws "test-range" if the wrapped function leaves [0, 1].
  double operator()(const Dialogue& d, const Noise& u) const;

 private:
  std::string name_;
  Fn fn_;
};

// Predicate over a single question.
using StrategyClassifier = std::function<bool(const Tokens& question)>;

// Matches questions containing any of the keywords (after tokenization).
StrategyClassifier keyword_classifier(std::vector<std::string> keywords);

TestFunction strategy_proportion(std::string name, StrategyClassifier s);
TestFunction lexical_diversity();
TestFunction repetition_indicator();
TestFunction reference_overlap();

// (dialogue id, noise id) -> score in [0, 1], e.g. collected annotations.
using ScoreTable = std::map<std::pair<Label, Label>, double>;

// Lookup test over a score table; a missing entry throws "missing-score".
TestFunction external_scores(std::string name, ScoreTable table);

}  // namespace tdshift
