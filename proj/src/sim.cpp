#include "tdshift/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "tdshift/energy.hpp"
#include "tdshift/rng.hpp"

namespace tdshift::sim {

std::vector<Attribute> default_attributes() {
  return {
      {"color", {"red", "blue", "green", "yellow"}},
      {"place", {"left", "right", "middle"}},
      {"kind", {"car", "person", "dog", "chair"}},
  };
}

void GameConfig::validate() const {
  if (n_contexts == 0 || n_objects_per_context == 0 || m == 0 || n_states == 0)
    throw Error("invalid-config", "counts must be at least 1");
  if (n_objects_per_context > 16) throw Error("invalid-config", "at most 16 objects per context");
  if (attributes.empty()) throw Error("invalid-config", "no attributes");
  std::set<std::string> values;
  for (const auto& a : attributes) {
    if (a.values.empty()) throw Error("invalid-config", "attribute '" + a.name + "' has no values");
    for (const auto& v : a.values)
      if (!values.insert(v).second) throw Error("invalid-config", "value '" + v + "' used twice");
  }
}

// ---------------------------------------------------------------------------

Scenario Scenario::generate(const GameConfig& cfg) {
  cfg.validate();
  Scenario s;
  s.cfg_ = cfg;

  std::vector<Label> texts;
  for (const auto& a : cfg.attributes)
    for (const auto& v : a.values) texts.push_back("is it " + v);
  s.questions_ = OutcomeSpace(texts);
  s.question_attr_.resize(texts.size());
  s.question_value_.resize(texts.size());
  for (std::size_t ai = 0; ai < cfg.attributes.size(); ++ai)
    for (std::size_t vi = 0; vi < cfg.attributes[ai].values.size(); ++vi) {
      const std::size_t q = *s.questions_.index_of("is it " + cfg.attributes[ai].values[vi]);
      s.question_attr_[q] = ai;
      s.question_value_[q] = vi;
    }

  const std::size_t na = cfg.attributes.size(), no = cfg.n_objects_per_context;
  Rng rng(cfg.seed);
  s.object_values_.resize(cfg.n_contexts * no * na);
  for (std::size_t c = 0; c < cfg.n_contexts; ++c)
    for (std::size_t o = 0; o < no; ++o)
      for (std::size_t a = 0; a < na; ++a)
        s.object_values_[(c * no + o) * na + a] = uniform_index(rng, cfg.attributes[a].values.size());

  const std::size_t V = texts.size();
  s.yes_mask_.assign(cfg.n_contexts * V, 0);
  for (std::size_t c = 0; c < cfg.n_contexts; ++c)
    for (std::size_t q = 0; q < V; ++q)
      for (std::size_t o = 0; o < no; ++o)
        if (s.value_of(c, o, s.question_attr_[q]) == s.question_value_[q]) s.yes_mask_[c * V + q] |= 1u << o;

  return s;
}

std::uint32_t Scenario::refine(std::size_t c, std::uint32_t mask, std::size_t goal, std::size_t q) const {
  return answer(c, goal, q) ? (mask & yes_mask(c, q)) : (mask & ~yes_mask(c, q));
}

std::size_t Scenario::value_of(std::size_t c, std::size_t object, std::size_t attribute) const {
  return object_values_[(c * n_objects() + object) * cfg_.attributes.size() + attribute];
}

GameDialogue scripted_dialogue(const Scenario& s, std::size_t context, std::size_t goal) {
  GameDialogue d;
  d.context = static_cast<std::uint32_t>(context);
  d.goal = static_cast<std::uint32_t>(goal);
  std::uint32_t mask = s.full_mask();
  while (d.questions.size() < s.m()) {
    const int remaining = std::popcount(mask);
    std::size_t best_q = 0;
    int best_split = -1;
    for (std::size_t q = 0; q < s.vocab_size(); ++q) {
      const int yes = std::popcount(mask & s.yes_mask(context, q));
      const int split = std::min(yes, remaining - yes);
      if (split > best_split) {
        best_split = split;
        best_q = q;
      }
    }
    if (!d.questions.empty() && (remaining == 1 || best_split == 0)) break;
    d.questions.push_back(static_cast<std::uint32_t>(best_q));
    d.answers.push_back(s.answer(context, goal, best_q));
    mask = s.refine(context, mask, goal, best_q);
  }
  d.final_mask = mask;
  return d;
}

std::vector<GameDialogue> sample_goal_corpus(const Scenario& s, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("empty-sample", "corpus size must be at least 1");
  Rng rng(seed);
  std::vector<GameDialogue> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = uniform_index(rng, s.n_contexts());
    const std::size_t g = uniform_index(rng, s.n_objects());
    out.push_back(scripted_dialogue(s, c, g));
  }
  return out;
}

// ---------------------------------------------------------------------------

TabularPolicy::TabularPolicy(std::size_t n_states, std::size_t m, std::size_t vocab)
    : n_states_(n_states), m_(m), n_actions_(vocab + 1), probs_(n_states * m * (vocab + 1), 0.0) {
  // Uniform over questions until trained.
  for (std::size_t r = 0; r < n_states * m; ++r)
    for (std::size_t a = 0; a < vocab; ++a) probs_[r * n_actions_ + a] = 1.0 / static_cast<double>(vocab);
}

EncoderMap random_encoder(const Scenario& s, std::size_t n_states, std::uint64_t seed) {
  if (n_states == 0) throw Error("invalid-config", "n_states must be at least 1");
  Rng rng(seed);
  EncoderMap enc;
  enc.n_states = n_states;
  enc.vocab = s.vocab_size();
  enc.n_contexts = s.n_contexts();
  enc.entries.resize(s.n_contexts() + n_states * s.vocab_size() * 2);
  for (auto& e : enc.entries) e = static_cast<std::uint32_t>(uniform_index(rng, n_states));
  return enc;
}

std::uint32_t EncoderMap::final_state(const Scenario& s, const GameDialogue& d) const {
  std::uint32_t st = start(d.context);
  for (std::size_t t = 0; t < d.questions.size(); ++t) st = next(st, d.questions[t], s.answer(d.context, d.goal, d.questions[t]));
  return st;
}

std::uint32_t GuesserTable::guess(std::size_t state) const {
  const double* row = probs.data() + state * n_objects;
  return static_cast<std::uint32_t>(std::max_element(row, row + n_objects) - row);
}

GuesserTable uniform_guesser(std::size_t n_states, std::size_t n_objects) {
  return {n_objects, std::vector<double>(n_states * n_objects, 1.0 / static_cast<double>(n_objects))};
}

namespace {

void check_shapes(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc) {
  if (enc.n_contexts != s.n_contexts() || enc.vocab != s.vocab_size() ||
      enc.entries.size() != s.n_contexts() + enc.n_states * s.vocab_size() * 2)
    throw Error("state-hole", "encoder does not cover the scenario");
  if (policy.n_states() != enc.n_states || policy.m() != s.m() || policy.n_actions() != s.vocab_size() + 1)
    throw Error("state-hole", "policy does not cover the encoder states");
  for (auto e : enc.entries)
    if (e >= enc.n_states) throw Error("state-hole", "encoder entry out of range");
}

// Action distribution at (state, step); stop is excluded at step 0 so every
// dialogue has at least one question. Returns the normalizer.
double action_mass(const TabularPolicy& policy, std::size_t state, std::size_t step, std::vector<double>& out) {
  const double* row = policy.row(state, step);
  out.assign(row, row + policy.n_actions());
  if (step == 0) out[policy.stop_action()] = 0.0;
  double total = std::accumulate(out.begin(), out.end(), 0.0);
  if (total <= 0.0) {
    // Only reachable when a step-0 row is pure stop; fall back to uniform questions.
    std::fill(out.begin(), out.end() - 1, 1.0);
    out.back() = 0.0;
    total = static_cast<double>(out.size() - 1);
  }
  return total;
}

}  // namespace

Rollout rollout(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc, const GuesserTable& guesser,
                std::size_t context, std::size_t goal, std::uint64_t seed) {
  check_shapes(s, policy, enc);
  Rng rng(seed);
  Rollout r;
  r.dialogue.context = static_cast<std::uint32_t>(context);
  r.dialogue.goal = static_cast<std::uint32_t>(goal);
  std::uint32_t mask = s.full_mask();
  std::uint32_t st = enc.start(context);
  std::vector<double> mass;
  for (std::size_t t = 0; t < s.m(); ++t) {
    const double total = action_mass(policy, st, t, mass);
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t action = mass.size() - 1;
    for (std::size_t a = 0; a < mass.size(); ++a) {
      if (mass[a] <= 0.0) continue;
      acc += mass[a];
      action = a;
      if (acc > u) break;
    }
    if (action == policy.stop_action()) break;
    const bool yes = s.answer(context, goal, action);
    r.dialogue.questions.push_back(static_cast<std::uint32_t>(action));
    r.dialogue.answers.push_back(yes);
    mask = s.refine(context, mask, goal, action);
    st = enc.next(st, action, yes);
  }
  r.dialogue.final_mask = mask;
  r.guess = guesser.guess(st);
  return r;
}

std::vector<Rollout> sample_rollouts(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                                     const GuesserTable& guesser, std::size_t n, std::uint64_t seed) {
  check_shapes(s, policy, enc);
  std::vector<Rollout> out(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(child_seed(seed, i));
    const std::size_t c = uniform_index(rng, s.n_contexts());
    const std::size_t g = uniform_index(rng, s.n_objects());
    out[i] = rollout(s, policy, enc, guesser, c, g, rng());
  }
  return out;
}

double task_error(const std::vector<Rollout>& rollouts) {
  if (rollouts.empty()) throw Error("empty-sample", "no rollouts");
  std::size_t wrong = 0;
  for (const auto& r : rollouts) wrong += r.guess != r.dialogue.goal ? 1 : 0;
  return static_cast<double>(wrong) / static_cast<double>(rollouts.size());
}

namespace {

// Exact forward pass over encoder states. F[state][goal] receives the
// probability of finishing in that state, under uniform (context, goal).
// When used is non-null, every encoder entry read with positive probability
// is flagged.
void final_mass(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc, std::vector<double>& F,
                std::vector<char>* used) {
  const std::size_t no = s.n_objects(), V = s.vocab_size(), S = enc.n_states;
  const double w = 1.0 / static_cast<double>(s.n_contexts() * no);
  F.assign(S * no, 0.0);
  std::vector<double> cur(S), next(S), mass;
  for (std::size_t c = 0; c < s.n_contexts(); ++c) {
    if (used) (*used)[c] = 1;
    for (std::size_t goal = 0; goal < no; ++goal) {
      std::fill(cur.begin(), cur.end(), 0.0);
      cur[enc.start(c)] = w;
      for (std::size_t t = 0; t <= s.m(); ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t st = 0; st < S; ++st) {
          const double p = cur[st];
          if (p == 0.0) continue;
          if (t == s.m()) {
            F[st * no + goal] += p;
            continue;
          }
          const double total = action_mass(policy, st, t, mass);
          if (mass[V] > 0.0) F[st * no + goal] += p * mass[V] / total;
          for (std::size_t q = 0; q < V; ++q) {
            if (mass[q] <= 0.0) continue;
            const std::size_t e = enc.transition_index(st, q, s.answer(c, goal, q));
            if (used) (*used)[e] = 1;
            next[enc.entries[e]] += p * mass[q] / total;
          }
        }
        std::swap(cur, next);
      }
    }
  }
}

}  // namespace

double exact_task_error(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                        const GuesserTable& guesser) {
  check_shapes(s, policy, enc);
  std::vector<double> F;
  final_mass(s, policy, enc, F, nullptr);
  const std::size_t no = s.n_objects();
  double right = 0.0;
  for (std::size_t st = 0; st < enc.n_states; ++st) right += F[st * no + guesser.guess(st)];
  return 1.0 - right;
}

std::string dialogue_label(const GameDialogue& d) {
  std::string out;
  for (std::size_t i = 0; i < d.questions.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(d.questions[i]);
    out.push_back(d.answers[i] ? 'y' : 'n');
  }
  return out;
}

Pmf generated_distribution(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc) {
  check_shapes(s, policy, enc);
  std::map<Label, double> law;
  const double w = 1.0 / static_cast<double>(s.n_contexts() * s.n_objects());
  struct Frame {
    GameDialogue d;
    std::uint32_t state;
    double p;
  };
  std::vector<double> mass;
  for (std::size_t c = 0; c < s.n_contexts(); ++c)
    for (std::size_t goal = 0; goal < s.n_objects(); ++goal) {
      std::vector<Frame> stack;
      GameDialogue root;
      root.context = static_cast<std::uint32_t>(c);
      root.goal = static_cast<std::uint32_t>(goal);
      stack.push_back({root, enc.start(c), w});
      while (!stack.empty()) {
        Frame f = std::move(stack.back());
        stack.pop_back();
        const std::size_t t = f.d.questions.size();
        if (t == s.m()) {
          law[dialogue_label(f.d)] += f.p;
          continue;
        }
        const double total = action_mass(policy, f.state, t, mass);
        if (mass[s.vocab_size()] > 0.0) law[dialogue_label(f.d)] += f.p * mass[s.vocab_size()] / total;
        for (std::size_t q = 0; q < s.vocab_size(); ++q) {
          if (mass[q] <= 0.0) continue;
          const bool yes = s.answer(c, goal, q);
          Frame child = f;
          child.d.questions.push_back(static_cast<std::uint32_t>(q));
          child.d.answers.push_back(yes);
          child.state = enc.next(f.state, q, yes);
          child.p = f.p * mass[q] / total;
          stack.push_back(std::move(child));
        }
      }
    }
  double total = 0.0;
  for (const auto& [k, v] : law) total += v;
  for (auto& [k, v] : law) v /= total;
  return Pmf::from_map(law);
}

// ---------------------------------------------------------------------------

TabularPolicy phase_language(const Scenario& s, const EncoderMap& enc, const std::vector<GameDialogue>& corpus) {
  if (corpus.empty()) throw Error("empty-sample", "language phase needs a human corpus");
  const std::size_t S = enc.n_states, m = s.m(), A = s.vocab_size() + 1;
  std::vector<double> counts(S * m * A, 0.0), pooled(m * A, 0.0);
  for (const auto& d : corpus) {
    std::uint32_t st = enc.start(d.context);
    for (std::size_t t = 0; t < d.questions.size(); ++t) {
      counts[(st * m + t) * A + d.questions[t]] += 1.0;
      pooled[t * A + d.questions[t]] += 1.0;
      st = enc.next(st, d.questions[t], s.answer(d.context, d.goal, d.questions[t]));
    }
    const std::size_t P = d.questions.size();
    if (P < m) {
      counts[(st * m + P) * A + A - 1] += 1.0;
      pooled[P * A + A - 1] += 1.0;
    }
  }

  TabularPolicy policy(S, m, s.vocab_size());
  for (std::size_t st = 0; st < S; ++st)
    for (std::size_t t = 0; t < m; ++t) {
      const double* src = counts.data() + (st * m + t) * A;
      double total = std::accumulate(src, src + A, 0.0);
      if (total <= 0.0) {
        src = pooled.data() + t * A;
        total = std::accumulate(src, src + A, 0.0);
      }
      double* row = policy.row(st, t);
      if (total <= 0.0) {
        std::fill(row, row + A, 0.0);
        row[A - 1] = 1.0;
        continue;
      }
      for (std::size_t a = 0; a < A; ++a) row[a] = src[a] / total;
    }
  return policy;
}

namespace {

struct TaskObjective {
  const Scenario& s;
  const TabularPolicy& policy;
  const std::vector<GameDialogue>& corpus;
  double gen_weight;
  double human_weight;

  std::size_t no() const { return s.n_objects(); }

  void human_mass(const EncoderMap& enc, std::vector<double>& H, std::vector<char>* used) const {
    H.assign(enc.n_states * no(), 0.0);
    if (human_weight <= 0.0) return;
    const double w = 1.0 / static_cast<double>(corpus.size());
    for (const auto& d : corpus) {
      if (used) (*used)[d.context] = 1;
      std::uint32_t st = enc.start(d.context);
      for (std::size_t t = 0; t < d.questions.size(); ++t) {
        const std::size_t e = enc.transition_index(st, d.questions[t], d.answers[t]);
        if (used) (*used)[e] = 1;
        st = enc.entries[e];
      }
      H[st * no() + d.goal] += w;
    }
  }

  // Objective at optimal guesser rows; fills used when non-null.
  double evaluate(const EncoderMap& enc, std::vector<double>& F, std::vector<double>& H,
                  std::vector<char>* used) const {
    if (gen_weight > 0.0)
      final_mass(s, policy, enc, F, used);
    else
      F.assign(enc.n_states * no(), 0.0);
    human_mass(enc, H, used);
    double right = 0.0;
    for (std::size_t st = 0; st < enc.n_states; ++st) {
      double best = 0.0;
      for (std::size_t o = 0; o < no(); ++o)
        best = std::max(best, gen_weight * F[st * no() + o] + human_weight * H[st * no() + o]);
      right += best;
    }
    return gen_weight + human_weight - right;
  }
};

GuesserTable fit_guesser(const TaskObjective& obj, std::size_t S, const std::vector<double>& F,
                         const std::vector<double>& H) {
  const std::size_t no = obj.no();
  GuesserTable g = uniform_guesser(S, no);
  for (std::size_t st = 0; st < S; ++st) {
    double best = 0.0;
    std::size_t arg = no;
    for (std::size_t o = 0; o < no; ++o) {
      const double v = obj.gen_weight * F[st * no + o] + obj.human_weight * H[st * no + o];
      if (v > best) {
        best = v;
        arg = o;
      }
    }
    if (arg == no) continue;  // no data reaches this state
    double* row = g.probs.data() + st * no;
    std::fill(row, row + no, 0.0);
    row[arg] = 1.0;
  }
  return g;
}

TaskPhaseResult improve_encoder(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                                const std::vector<GameDialogue>& corpus, double gen_weight, double human_weight,
                                double step) {
  check_shapes(s, policy, enc);
  if (human_weight > 0.0 && corpus.empty()) throw Error("empty-sample", "human error term needs a human corpus");
  if (step < 0.0) throw Error("invalid-argument", "step must be nonnegative");
  const TaskObjective obj{s, policy, corpus, gen_weight, human_weight};
  const std::size_t S = enc.n_states;

  EncoderMap current = enc;
  std::vector<double> F, H;
  std::vector<char> used(enc.entries.size(), 0);
  double value = obj.evaluate(current, F, H, &used);

  const auto budget =
      static_cast<std::size_t>(std::ceil(step * static_cast<double>(enc.entries.size()) - 1e-12));
  for (std::size_t move = 0; move < budget; ++move) {
    std::vector<std::size_t> active;
    for (std::size_t e = 0; e < used.size(); ++e)
      if (used[e]) active.push_back(e);
    const std::size_t n_cand = active.size() * S;
    std::vector<double> cand_value(n_cand, value);

#pragma omp parallel
    {
      EncoderMap trial = current;
      std::vector<double> Ft, Ht;
#pragma omp for schedule(dynamic, 4)
      for (std::size_t i = 0; i < n_cand; ++i) {
        const std::size_t e = active[i / S];
        const auto to = static_cast<std::uint32_t>(i % S);
        if (current.entries[e] == to) continue;
        trial.entries[e] = to;
        cand_value[i] = obj.evaluate(trial, Ft, Ht, nullptr);
        trial.entries[e] = current.entries[e];
      }
    }

    std::size_t best = n_cand;
    double best_value = value - 1e-12;
    for (std::size_t i = 0; i < n_cand; ++i)
      if (cand_value[i] < best_value) {
        best_value = cand_value[i];
        best = i;
      }
    if (best == n_cand) break;

    current.entries[active[best / S]] = static_cast<std::uint32_t>(best % S);
    std::fill(used.begin(), used.end(), 0);
    value = obj.evaluate(current, F, H, &used);
  }

  TaskPhaseResult r;
  r.guesser = fit_guesser(obj, S, F, H);
  r.objective = value;
  for (std::size_t e = 0; e < current.entries.size(); ++e)
    r.changed_entries += current.entries[e] != enc.entries[e] ? 1 : 0;
  r.enc = std::move(current);
  return r;
}

}  // namespace

TaskPhaseResult phase_task(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                           const std::vector<GameDialogue>& corpus, bool regularize, double step) {
  return improve_encoder(s, policy, enc, corpus, 1.0, regularize ? 1.0 : 0.0, step);
}

TaskPhaseResult pretrain_encoder(const Scenario& s, const TabularPolicy& policy, const EncoderMap& enc,
                                 const std::vector<GameDialogue>& corpus, double step) {
  return improve_encoder(s, policy, enc, corpus, 0.0, 1.0, step);
}

// ---------------------------------------------------------------------------

Dialogue to_dialogue(const Scenario& s, const GameDialogue& d, const std::string& id) {
  Dialogue out;
  out.id = id;
  out.context_id = "ctx" + std::to_string(d.context);
  for (std::size_t i = 0; i < d.questions.size(); ++i)
    out.turns.push_back({tokenize(s.question_text(d.questions[i])), d.answers[i] ? "yes" : "no"});
  return out;
}

std::vector<double> embed(const Scenario& s, const GameDialogue& d) {
  std::vector<double> v(s.vocab_size() + 1, 0.0);
  const double m = static_cast<double>(s.m());
  for (auto q : d.questions) v[q] += 1.0 / m;
  v.back() = static_cast<double>(d.questions.size()) / m;
  return v;
}

std::vector<TestFunction> default_tests(const Scenario& s) {
  std::vector<TestFunction> tests;
  for (const auto& a : s.config().attributes)
    tests.push_back(strategy_proportion("strategy_" + a.name, keyword_classifier(a.values)));
  tests.push_back(lexical_diversity());
  tests.push_back(repetition_indicator());
  tests.push_back(reference_overlap());
  return tests;
}

PairedCorpus pair_with_human(const Scenario& s, const std::vector<Rollout>& rollouts) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::shared_ptr<const Dialogue>> human;
  std::vector<PairedItem> items;
  items.reserve(rollouts.size());
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const auto& g = rollouts[i].dialogue;
    auto& h = human[{g.context, g.goal}];
    if (!h) {
      h = std::make_shared<const Dialogue>(to_dialogue(
          s, scripted_dialogue(s, g.context, g.goal), "human_" + std::to_string(g.context) + "_" + std::to_string(g.goal)));
    }
    items.push_back({h->context_id, *h, to_dialogue(s, g, "gen_" + std::to_string(i)), Noise{h->id, h}});
  }
  return PairedCorpus(std::move(items));
}

double coarse_energy(const Scenario& s, const std::vector<Rollout>& a, const std::vector<Rollout>& b,
                     std::size_t k, std::uint64_t seed) {
  std::map<Label, std::vector<double>> distinct;
  std::vector<Label> la, lb;
  for (int side = 0; side < 2; ++side)
    for (const auto& r : side == 0 ? a : b) {
      auto label = dialogue_label(r.dialogue);
      if (!distinct.count(label)) distinct.emplace(label, embed(s, r.dialogue));
      (side == 0 ? la : lb).push_back(std::move(label));
    }
  std::vector<Label> ids;
  std::vector<std::vector<double>> vecs;
  for (auto& [id, v] : distinct) {
    ids.push_back(id);
    vecs.push_back(v);
  }
  const auto c = fit_kmeans(EmbeddingTable(ids, vecs), k, seed);
  return energy_coarsened(SampleSet::from_labels(la), SampleSet::from_labels(lb), c.representative_map()).value;
}

// ---------------------------------------------------------------------------

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("invalid-argument", "pearson needs two equal series of length >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::vector<TestFunction> selected_tests(const Scenario& s, const SweepConfig& cfg) {
  auto all = default_tests(s);
  if (cfg.tests.empty()) return all;
  std::vector<TestFunction> out;
  for (const auto& name : cfg.tests) {
    auto it = std::find_if(all.begin(), all.end(), [&](const TestFunction& t) { return t.name() == name; });
    if (it == all.end()) throw Error("invalid-config", "unknown simulator test '" + name + "'");
    out.push_back(*it);
  }
  return out;
}

namespace {

struct Transition {
  double epsilon = 0.0;
  TDChange change;
  double abs_dtd = 0.0;
  TDReport target_td;
};

Transition measure(const Scenario& s, const TabularPolicy& policy, const EncoderMap& before,
                   const GuesserTable& g_before, const EncoderMap& after, const GuesserTable& g_after,
                   const SweepConfig& cfg, std::uint64_t seed) {
  const auto tests = selected_tests(s, cfg);
  const auto src = sample_rollouts(s, policy, before, g_before, cfg.rollouts, child_seed(seed, 1));
  const auto tgt = sample_rollouts(s, policy, after, g_after, cfg.rollouts, child_seed(seed, 1));
  Transition t;
  t.epsilon = coarse_energy(s, src, tgt, cfg.k, child_seed(seed, 2));
  const auto td_s = test_divergence(pair_with_human(s, src), tests);
  t.target_td = test_divergence(pair_with_human(s, tgt), tests);
  t.change = td_change(td_s, t.target_td);
  for (const auto& [name, v] : t.change.per_test) t.abs_dtd += std::abs(v);
  return t;
}

EncoderMap pretrained_encoder(const Scenario& s, const SweepConfig& cfg, const std::vector<GameDialogue>& corpus,
                              std::uint64_t seed) {
  EncoderMap enc = random_encoder(s, cfg.game.n_states, child_seed(seed, 11));
  if (cfg.pretrain_step > 0.0)
    enc = pretrain_encoder(s, phase_language(s, enc, corpus), enc, corpus, cfg.pretrain_step).enc;
  return enc;
}

}  // namespace

std::vector<SweepRow> shift_sweep(const SweepConfig& cfg) {
  if (cfg.magnitudes.size() < 5 || cfg.seeds.size() < 3)
    throw Error("invalid-config", "sweep needs at least 5 magnitudes and 3 seeds");
  const Scenario s = Scenario::generate(cfg.game);
  const std::size_t nm = cfg.magnitudes.size();
  std::vector<SweepRow> rows(cfg.seeds.size() * nm);

  for (std::size_t si = 0; si < cfg.seeds.size(); ++si) {
    const std::uint64_t seed = cfg.seeds[si];
    const auto corpus = sample_goal_corpus(s, cfg.corpus_size, child_seed(seed, 10));
    const EncoderMap enc = pretrained_encoder(s, cfg, corpus, seed);
    const TabularPolicy policy = phase_language(s, enc, corpus);
    const GuesserTable g0 = phase_task(s, policy, enc, corpus, false, 0.0).guesser;

    for (std::size_t mi = 0; mi < nm; ++mi) {
      const auto res = phase_task(s, policy, enc, corpus, false, cfg.magnitudes[mi]);
      const auto t = measure(s, policy, enc, g0, res.enc, res.guesser, cfg, child_seed(seed, 12));
      SweepRow& row = rows[si * nm + mi];
      row.magnitude = cfg.magnitudes[mi];
      row.seed = seed;
      row.epsilon = t.epsilon;
      row.dtd = t.change.per_test;
      row.total_abs_dtd = t.abs_dtd;
      row.changed_entries = res.changed_entries;
    }
  }
  return rows;
}

std::vector<CompareRow> compare_cl_leather(const SweepConfig& cfg) {
  if (cfg.epochs < 1) throw Error("invalid-config", "epochs must be at least 1");
  const Scenario s = Scenario::generate(cfg.game);
  std::vector<CompareRow> rows;
  for (const auto seed : cfg.compare_seeds) {
    CompareRow row;
    row.seed = seed;
    const auto corpus = sample_goal_corpus(s, cfg.corpus_size, child_seed(seed, 10));
    for (const bool regularize : {false, true}) {
      ArmSummary& arm = regularize ? row.leather : row.cl;
      EncoderMap enc = pretrained_encoder(s, cfg, corpus, seed);
      const EncoderMap initial = enc;
      for (std::size_t e = 0; e < cfg.epochs; ++e) {
        const TabularPolicy policy = phase_language(s, enc, corpus);
        const GuesserTable g0 = phase_task(s, policy, enc, corpus, regularize, 0.0).guesser;
        const auto res = phase_task(s, policy, enc, corpus, regularize, cfg.step);
        const auto t = measure(s, policy, enc, g0, res.enc, res.guesser, cfg, child_seed(seed, 100 + e));
        arm.epsilon_per_transition.push_back(t.epsilon);
        arm.abs_dtd_per_transition.push_back(t.abs_dtd);
        enc = res.enc;
        if (e + 1 == cfg.epochs) {
          arm.final_td = t.target_td.total;
          arm.final_task_error = exact_task_error(s, policy, enc, res.guesser);
        }
      }
      for (std::size_t e = 0; e < enc.entries.size(); ++e) arm.changed_entries += enc.entries[e] != initial.entries[e] ? 1 : 0;
      arm.mean_epsilon = std::accumulate(arm.epsilon_per_transition.begin(), arm.epsilon_per_transition.end(), 0.0) /
                         static_cast<double>(arm.epsilon_per_transition.size());
      arm.total_abs_dtd = std::accumulate(arm.abs_dtd_per_transition.begin(), arm.abs_dtd_per_transition.end(), 0.0);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace tdshift::sim
