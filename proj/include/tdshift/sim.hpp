#pragma once

// Tabular cooperative-learning game. A questioner asks yes/no attribute
// questions about a hidden goal object in a context. A shared recurrent
// encoder summarizes the dialogue prefix as one of a small number of states:
// a start state per context, then a transition per (state, question, answer).
// The question policy and the guesser both read that state. The task phase
// moves encoder entries to lower guessing error, which shifts the
// distribution of generated dialogues.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tdshift/coarsening.hpp"
#include "tdshift/dist.hpp"
#include "tdshift/testdiv.hpp"

namespace tdshift::sim {

struct Attribute {
  std::string name;
  std::vector<std::string> values;
};

std::vector<Attribute> default_attributes();

struct GameConfig {
  std::size_t n_contexts = 6;
  std::size_t n_objects_per_context = 4;
  std::vector<Attribute> attributes = default_attributes();
  std::size_t m = 8;          // max questions per dialogue
  std::size_t n_states = 12;  // encoder capacity
  std::uint64_t seed = 0;     // world generation

  // Throws "invalid-config".
  void validate() const;
};

/// One question/answer game. Questions index the scenario vocabulary.
struct GameDialogue {
  std::uint32_t context = 0;
  std::uint32_t goal = 0;
  std::vector<std::uint32_t> questions;
  std::vector<bool> answers;
  std::uint32_t final_mask = 0;  // objects consistent with every answer

  bool operator==(const GameDialogue&) const = default;
};

/// Realized world: contexts with attribute-valued objects and the derived
/// question vocabulary ("is it <value>", sorted).
class Scenario {
 public:
  static Scenario generate(const GameConfig& cfg);

  const GameConfig& config() const noexcept { return cfg_; }
  std::size_t n_contexts() const noexcept { return cfg_.n_contexts; }
  std::size_t n_objects() const noexcept { return cfg_.n_objects_per_context; }
  std::size_t vocab_size() const noexcept { return questions_.size(); }
  std::size_t m() const noexcept { return cfg_.m; }
  const OutcomeSpace& question_vocab() const noexcept { return questions_; }
  const std::string& question_text(std::size_t q) const { return questions_[q]; }
  std::size_t question_attribute(std::size_t q) const { return question_attr_[q]; }

  std::uint32_t full_mask() const noexcept { return (1u << n_objects()) - 1u; }
  // Objects of context c whose answer to q is "yes".
  std::uint32_t yes_mask(std::size_t c, std::size_t q) const { return yes_mask_[c * vocab_size() + q]; }
  bool answer(std::size_t c, std::size_t goal, std::size_t q) const { return (yes_mask(c, q) >> goal) & 1u; }
  // Candidate set after hearing the answer to q about goal.
  std::uint32_t refine(std::size_t c, std::uint32_t mask, std::size_t goal, std::size_t q) const;

  // Attribute value index of an object.
  std::size_t value_of(std::size_t c, std::size_t object, std::size_t attribute) const;

 private:
  GameConfig cfg_;
  OutcomeSpace questions_;
  std::vector<std::size_t> question_attr_;
  std::vector<std::size_t> question_value_;
  std::vector<std::size_t> object_values_;  // [c][object][attribute]
  std::vector<std::uint32_t> yes_mask_;
};

/// Scripted human questioner: asks the question that most evenly splits the
/// remaining candidates (ties to the lowest vocabulary index), stops once a
/// single candidate remains or no question splits, and always asks at least
/// one question.
GameDialogue scripted_dialogue(const Scenario& s, std::size_t context, std::size_t goal);

// n games with uniform context and goal; deterministic in seed.
std::vector<GameDialogue> sample_goal_corpus(const Scenario& s, std::size_t n, std::uint64_t seed);

/// Question-generator rows over (state, step); action vocab_size() means stop.
class TabularPolicy {
 public:
  TabularPolicy() = default;
  TabularPolicy(std::size_t n_states, std::size_t m, std::size_t vocab);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t n_actions() const noexcept { return n_actions_; }
  std::size_t stop_action() const noexcept { return n_actions_ - 1; }

  const double* row(std::size_t state, std::size_t step) const {
    return probs_.data() + (state * m_ + step) * n_actions_;
  }
  double* row(std::size_t state, std::size_t step) { return probs_.data() + (state * m_ + step) * n_actions_; }

  bool operator==(const TabularPolicy&) const = default;

 private:
  std::size_t n_states_ = 0, m_ = 0, n_actions_ = 0;
  std::vector<double> probs_;
};

/// Shared recurrent encoder. Entries 0..n_contexts-1 are start states; the
/// rest are transitions indexed by (state, question, answer).
struct EncoderMap {
  std::size_t n_states = 0;
  std::size_t vocab = 0;
  std::size_t n_contexts = 0;
  std::vector<std::uint32_t> entries;

  std::uint32_t start(std::size_t c) const { return entries[c]; }
  std::size_t transition_index(std::size_t state, std::size_t q, bool yes) const {
    return n_contexts + (state * vocab + q) * 2 + (yes ? 1 : 0);
  }
  std::uint32_t next(std::size_t state, std::size_t q, bool yes) const {
    return entries[transition_index(state, q, yes)];
  }
  // State after the whole dialogue.
  std::uint32_t final_state(const Scenario& s, const GameDialogue& d) const;
  bool operator==(const EncoderMap&) const = default;
};

// Uniformly random state per entry; deterministic in seed.
EncoderMap random_encoder(const Scenario& s, std::size_t n_states, std::uint64_t seed);

/// Guesser rows: state -> pmf over object slots.
struct GuesserTable {
  std::size_t n_objects = 0;
  std::vector<double> probs;  // [state][object]

  std::uint32_t guess(std::size_t state) const;  // argmax, ties to lowest
  bool operator==(const GuesserTable&) const = default;
};

GuesserTable uniform_guesser(std::size_t n_states, std::size_t n_objects);

struct Rollout {
  GameDialogue dialogue;
  std::uint32_t guess = 0;
};

Rollout rollout(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                const GuesserTable& guesser, std::size_t context, std::size_t goal, std::uint64_t seed);

// n rollouts with uniform (context, goal), deterministic in seed.
std::vector<Rollout> sample_rollouts(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                                     const GuesserTable& guesser, std::size_t n, std::uint64_t seed);

// Fraction of rollouts whose guess differs from the goal.
double task_error(const std::vector<Rollout>& rollouts);

// Exact probability of a wrong guess under uniform (context, goal).
double exact_task_error(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                        const GuesserTable& guesser);

// Exact law of generated dialogue labels (see dialogue_label).
Pmf generated_distribution(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc);

/// Teacher-forced maximum likelihood: each (state, step) row becomes the
/// normalized counts of the human actions observed there. Rows with no data
/// fall back to the step's pooled counts, then to stop.
TabularPolicy phase_language(const Scenario& s, const EncoderMap& enc, const std::vector<GameDialogue>& corpus);

struct TaskPhaseResult {
  GuesserTable guesser;
  EncoderMap enc;
  std::size_t changed_entries = 0;
  double objective = 0.0;  // final objective value
};

/// Guesser refit plus at most ceil(step * |encoder entries|) greedy encoder
/// reassignments, each strictly lowering the objective: exact generated
/// guessing error, plus (when regularized) the guessing error on the human
/// corpus with equal weight.
TaskPhaseResult phase_task(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                           const std::vector<GameDialogue>& corpus, bool regularize, double step);

// Supervised pretraining analog: the same greedy encoder search on the
// human-corpus guessing error alone.
TaskPhaseResult pretrain_encoder(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                                 const std::vector<GameDialogue>& corpus, double step);

// --- dialogue views -------------------------------------------------------

// Canonical label, e.g. "3y.7n".
std::string dialogue_label(const GameDialogue& d);
Dialogue to_dialogue(const Scenario& s, const GameDialogue& d, const std::string& id);
// Question counts / m, then length / m.
std::vector<double> embed(const Scenario& s, const GameDialogue& d);

// Tests used by the simulator: one strategy proportion per attribute,
// lexical diversity, repetition and reference overlap.
std::vector<TestFunction> default_tests(const Scenario& s);

// Pairs each rollout with the scripted human dialogue for its (context, goal).
PairedCorpus pair_with_human(const Scenario& s, const std::vector<Rollout>& rollouts);

/// Energy between two rollout batches under a k-means coarsening fitted on
/// the distinct dialogues of both batches.
double coarse_energy(const Scenario& s, const std::vector<Rollout>& a, const std::vector<Rollout>& b,
                     std::size_t k, std::uint64_t seed);

// --- experiments ----------------------------------------------------------

struct SweepConfig {
  GameConfig game;
  std::vector<double> magnitudes = {0.0, 0.004, 0.008, 0.015, 0.03, 0.06, 0.12};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::size_t corpus_size = 2000;
  std::size_t rollouts = 10000;
  std::size_t k = 20;
  double pretrain_step = 0.0;  // 0 skips pretraining
  std::vector<std::string> tests;  // subset of default_tests by name; empty means all
  // compare_cl_leather
  std::size_t epochs = 4;
  double step = 0.1;
  std::vector<std::uint64_t> compare_seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
};

struct SweepRow {
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::map<std::string, double> dtd;  // per test
  double total_abs_dtd = 0.0;         // sum over tests of |dtd|
  std::size_t changed_entries = 0;
};

// default_tests restricted to cfg.tests. Throws "invalid-config" on an unknown name.
std::vector<TestFunction> selected_tests(const Scenario& s, const SweepConfig& cfg);

std::vector<SweepRow> shift_sweep(const SweepConfig& cfg);

double pearson(const std::vector<double>& x, const std::vector<double>& y);

struct ArmSummary {
  std::vector<double> epsilon_per_transition;
  std::vector<double> abs_dtd_per_transition;
  double mean_epsilon = 0.0;
  double total_abs_dtd = 0.0;
  double final_td = 0.0;
  double final_task_error = 0.0;
  std::size_t changed_entries = 0;
};

struct CompareRow {
  std::uint64_t seed = 0;
  ArmSummary cl;
  ArmSummary leather;
};

std::vector<CompareRow> compare_cl_leather(const SweepConfig& cfg);

}  // namespace tdshift::sim
