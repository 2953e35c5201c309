#include "tdshift/testfns.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace tdshift {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void Dialogue::validate(std::size_t max_turns) const {
  if (turns.empty()) throw Error("empty-dialogue", "dialogue '" + id + "' has no turns");
  if (turns.size() > max_turns) throw Error("dialogue-too-long", "dialogue '" + id + "'");
  for (const auto& t : turns)
    if (t.question.empty()) throw Error("empty-dialogue", "dialogue '" + id + "' has an empty question");
}

Tokens Dialogue::question_tokens() const {
  Tokens out;
  for (const auto& t : turns) out.insert(out.end(), t.question.begin(), t.question.end());
  return out;
}

double TestFunction::operator()(const Dialogue& d, const Noise& u) const {
  const double v = fn_(d, u);
  if (!(v >= 0.0 && v <= 1.0)) throw Error("test-range", name_ + " returned " + std::to_string(v));
  return v;
}

StrategyClassifier keyword_classifier(std::vector<std::string> keywords) {
  std::set<std::string> keys;
  for (const auto& k : keywords)
    for (auto& t : tokenize(k)) keys.insert(std::move(t));
  return [keys = std::move(keys)](const Tokens& q) {
    return std::any_of(q.begin(), q.end(), [&](const std::string& t) { return keys.count(t) > 0; });
  };
}

TestFunction strategy_proportion(std::string name, StrategyClassifier s) {
  return TestFunction(std::move(name), [s = std::move(s)](const Dialogue& d, const Noise&) {
    if (d.turns.empty()) throw Error("empty-dialogue", d.id);
    std::size_t hits = 0;
    for (const auto& t : d.turns) hits += s(t.question) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(d.turns.size());
  });
}

TestFunction lexical_diversity() {
  return TestFunction("lexical_diversity", [](const Dialogue& d, const Noise&) {
    const Tokens toks = d.question_tokens();
    if (toks.empty()) throw Error("empty-dialogue", d.id);
    const std::set<std::string> types(toks.begin(), toks.end());
    return static_cast<double>(types.size()) / static_cast<double>(toks.size());
  });
}

TestFunction repetition_indicator() {
  return TestFunction("repetition", [](const Dialogue& d, const Noise&) {
    std::set<Tokens> seen;
    for (const auto& t : d.turns)
      if (!seen.insert(t.question).second) return 1.0;
    return 0.0;
  });
}

TestFunction reference_overlap() {
  return TestFunction("reference_overlap", [](const Dialogue& d, const Noise& u) {
    if (!u.reference) throw Error("missing-reference", "noise '" + u.id + "' carries no reference");
    const Tokens cand = d.question_tokens();
    if (cand.empty()) throw Error("empty-dialogue", d.id);
    std::map<std::string, std::size_t> ref;
    for (const auto& t : u.reference->question_tokens()) ++ref[t];
    // Clipped unigram precision: each reference token can be matched once.
    std::size_t matched = 0;
    for (const auto& t : cand) {
      auto it = ref.find(t);
      if (it != ref.end() && it->second > 0) {
        --it->second;
        ++matched;
      }
    }
    return static_cast<double>(matched) / static_cast<double>(cand.size());
  });
}

TestFunction external_scores(std::string name, ScoreTable table) {
  for (const auto& [key, v] : table)
    if (!(v >= 0.0 && v <= 1.0))
      throw Error("test-range", "score for (" + key.first + ", " + key.second + ") outside [0,1]");
  return TestFunction(std::move(name), [table = std::move(table)](const Dialogue& d, const Noise& u) {
    auto it = table.find({d.id, u.id});
    if (it == table.end()) throw Error("missing-score", "(" + d.id + ", " + u.id + ")");
    return it->second;
  });
}

}  // namespace tdshift
