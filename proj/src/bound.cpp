#include "tdshift/bound.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tdshift/rng.hpp"

namespace tdshift {

DialogueScore score_from_table(ScoreTable table) {
  return [table = std::move(table)](const Label& d, const Label& u) {
    auto it = table.find({d, u});
    if (it == table.end()) throw Error("missing-score", "(" + d + ", " + u + ")");
    return it->second;
  };
}

DialogueScore score_from_test(TestFunction h, std::map<Label, Dialogue> dialogues,
                              std::map<Label, Noise> noise) {
  return [h = std::move(h), dialogues = std::move(dialogues), noise = std::move(noise)](
             const Label& d, const Label& u) {
    auto di = dialogues.find(d);
    if (di == dialogues.end()) throw Error("unknown-dialogue", d);
    auto ui = noise.find(u);
    const Noise fallback{u, nullptr};
    return h(di->second, ui == noise.end() ? fallback : ui->second);
  };
}

namespace {

double checked_score(const DialogueScore& h, const Label& d, const Label& u) {
  const double v = h(d, u);
  if (!(v >= 0.0 && v <= 1.0)) throw Error("test-range", "h(" + d + ", " + u + ") = " + std::to_string(v));
  return v;
}

}  // namespace

BoundProblem::BoundProblem(const JointModel& j, const DialogueScore& h, const LabelMap& c)
    : joint_(j), c_(c) {
  const auto& dialogues = joint_.dialogues();
  const auto& noise = joint_.noise().space();
  nu_ = noise.size();

  std::vector<Label> image;
  for (const auto& d : dialogues.labels()) {
    auto it = c_.find(d);
    if (it == c_.end()) throw Error("unknown-dialogue", "coarsening has no image for '" + d + "'");
    image.push_back(it->second);
  }
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  coarse_ = OutcomeSpace(std::move(image));

  coarse_of_.resize(dialogues.size());
  h_dialogue_.resize(dialogues.size() * nu_);
  for (std::size_t d = 0; d < dialogues.size(); ++d) {
    coarse_of_[d] = *coarse_.index_of(c_.at(dialogues[d]));
    for (std::size_t u = 0; u < nu_; ++u) h_dialogue_[d * nu_ + u] = checked_score(h, dialogues[d], noise[u]);
  }
  h_coarse_.resize(coarse_.size() * nu_);
  for (std::size_t x = 0; x < coarse_.size(); ++x)
    for (std::size_t u = 0; u < nu_; ++u) h_coarse_[x * nu_ + u] = checked_score(h, coarse_[x], noise[u]);

  tuples_ = enumerate_joint(joint_);
}

std::size_t GFunction::unconstrained_count() const {
  return static_cast<std::size_t>(std::count(unconstrained.begin(), unconstrained.end(), true));
}

double weighted_median(std::vector<std::pair<double, double>> value_weight) {
  if (value_weight.empty()) throw Error("empty-sample", "weighted median of nothing");
  std::sort(value_weight.begin(), value_weight.end());
  double total = 0.0;
  for (const auto& [v, w] : value_weight) total += w;
  // Tolerance absorbs rounding in products of probabilities so that an exact
  // half split still resolves to the smaller endpoint.
  const double half = 0.5 * total * (1.0 - 1e-12);
  double cum = 0.0;
  for (const auto& [v, w] : value_weight) {
    cum += w;
    if (cum >= half) return v;
  }
  return value_weight.back().first;
}

double compute_gamma(const BoundProblem& bp) {
  double gamma = 0.0;
  for (const auto& t : bp.tuples()) {
    const double a = std::abs(bp.h_coarse(bp.coarse_of(t.gen1), t.noise) - bp.h(t.gen1, t.noise));
    const double b = std::abs(bp.h_coarse(bp.coarse_of(t.gen2), t.noise) - bp.h(t.gen2, t.noise));
    gamma += t.probability * (a + b);
  }
  return gamma;
}

GFunction solve_g(const BoundProblem& bp) {
  const std::size_t nx = bp.coarse().size(), nu = bp.noise_size();
  // Per cell, the law of the target h(D, u) under both branches, unnormalized.
  std::vector<std::map<double, double>> cells(nx * nu);
  for (const auto& t : bp.tuples()) {
    const double target = bp.h(t.human, t.noise);
    cells[bp.coarse_of(t.gen1) * nu + t.noise][target] += t.probability;
    cells[bp.coarse_of(t.gen2) * nu + t.noise][target] += t.probability;
  }
  GFunction g{bp.coarse(), bp.joint().noise().space(), std::vector<double>(nx * nu, 0.0),
              std::vector<bool>(nx * nu, false)};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    double w = 0.0;
    for (const auto& [v, p] : cells[i]) w += p;
    if (w <= 0.0) {
      g.unconstrained[i] = true;
      continue;
    }
    g.values[i] = weighted_median({cells[i].begin(), cells[i].end()});
  }
  return g;
}

namespace {

void check_shape(const BoundProblem& bp, const GFunction& g) {
  if (g.coarse != bp.coarse() || g.noise != bp.joint().noise().space())
    throw Error("space-mismatch", "g is not defined on this instance's coarse x noise grid");
}

}  // namespace

double compute_phi(const BoundProblem& bp, const GFunction& g) {
  check_shape(bp, g);
  double phi = 0.0;
  for (const auto& t : bp.tuples()) {
    const double target = bp.h(t.human, t.noise);
    phi += t.probability * (std::abs(g(bp.coarse_of(t.gen1), t.noise) - target) +
                            std::abs(g(bp.coarse_of(t.gen2), t.noise) - target));
  }
  return phi;
}

double compute_delta(const BoundProblem& bp, const GFunction& g) {
  check_shape(bp, g);
  const Pmf& noise = bp.joint().noise();
  double delta = 0.0;
  for (std::size_t u = 0; u < bp.noise_size(); ++u) {
    double s = 0.0;
    for (std::size_t x = 0; x < bp.coarse().size(); ++x) s += std::abs(g(x, u) - bp.h_coarse(x, u));
    delta += noise[u] * s;
  }
  return delta;
}

double td_target(const BoundProblem& bp) {
  double td = 0.0;
  for (const auto& t : bp.tuples()) td += t.probability * std::abs(bp.h(t.human, t.noise) - bp.h(t.gen1, t.noise));
  return td;
}

double td_source(const BoundProblem& bp) {
  double td = 0.0;
  for (const auto& t : bp.tuples()) td += t.probability * std::abs(bp.h(t.human, t.noise) - bp.h(t.gen2, t.noise));
  return td;
}

EnergyValue coarse_energy(const BoundProblem& bp) {
  return energy_coarsened(bp.joint().gen1_marginal(), bp.joint().gen2_marginal(), bp.coarsening());
}

namespace {

std::string describe(const BoundReport& r) {
  std::ostringstream os;
  os.precision(17);
  os << "td_target=" << r.td_target << " rhs=" << r.rhs << " (gamma=" << r.gamma << " phi=" << r.phi
     << " td_source=" << r.td_source << " epsilon=" << r.epsilon.value << " delta=" << r.delta << ")";
  return os.str();
}

}  // namespace

BoundViolation::BoundViolation(BoundReport report)
    : Error("bound-violated", describe(report)), report_(std::move(report)) {}

BoundReport evaluate_bound(const BoundProblem& bp) {
  BoundReport r;
  const GFunction g = solve_g(bp);
  r.gamma = compute_gamma(bp);
  r.phi = compute_phi(bp, g);
  r.delta = compute_delta(bp, g);
  r.epsilon = coarse_energy(bp);
  r.td_source = td_source(bp);
  r.td_target = td_target(bp);
  r.unconstrained_cells = g.unconstrained_count();
  r.rhs = r.gamma + r.phi + r.td_source + std::sqrt(r.epsilon.value * r.delta);
  if (r.td_target > r.rhs + kBoundSlack) throw BoundViolation(r);
  return r;
}

BoundReport evaluate_bound(const JointModel& j, const DialogueScore& h, const LabelMap& c) {
  return evaluate_bound(BoundProblem(j, h, c));
}

ObservableTerms estimate_terms(const SampleSet& target_generated, const SampleSet& source_generated,
                               const LabelMap& c, double td_source_value) {
  return {energy_coarsened(target_generated, source_generated, c), td_source_value};
}

// ---------------------------------------------------------------------------

namespace {

std::map<Label, double> random_row(Rng& rng, const std::vector<Label>& labels, double zero_prob) {
  const auto w = random_simplex(rng, labels.size(), zero_prob);
  std::map<Label, double> row;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (w[i] > 0.0) row[labels[i]] = w[i];
  return row;
}

std::vector<Label> numbered(const std::string& prefix, std::size_t n) {
  std::vector<Label> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

double random_score(Rng& rng) {
  // Mix of endpoints, a coarse grid and continuous values.
  const double kind = uniform01(rng);
  if (kind < 0.2) return uniform01(rng) < 0.5 ? 0.0 : 1.0;
  if (kind < 0.5) return static_cast<double>(uniform_index(rng, 5)) / 4.0;
  return uniform01(rng);
}

}  // namespace

BoundFuzzCase random_bound_case(std::uint64_t seed, const BoundFuzzLimits& limits) {
  Rng rng(seed);
  const std::size_t nd = 1 + uniform_index(rng, limits.max_dialogues);
  const std::size_t nc = 1 + uniform_index(rng, limits.max_contexts);
  const std::size_t nu = 1 + uniform_index(rng, limits.max_noise);
  const std::size_t nx = 1 + uniform_index(rng, std::min(limits.max_coarse, nd));

  const auto dialogues = numbered("d", nd);
  const auto contexts = numbered("c", nc);
  const auto noise = numbered("u", nu);

  // Partition dialogues into nx nonempty clusters; each cluster's
  // representative is one of its members.
  std::vector<std::size_t> cluster(nd);
  std::vector<std::size_t> order(nd);
  for (std::size_t i = 0; i < nd; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t i = 0; i < nd; ++i) cluster[order[i]] = i < nx ? i : uniform_index(rng, nx);
  std::vector<Label> rep(nx);
  for (std::size_t x = 0; x < nx; ++x) rep[x] = dialogues[order[x]];
  LabelMap c;
  for (std::size_t d = 0; d < nd; ++d) c[dialogues[d]] = rep[cluster[d]];

  const double sparsity = uniform01(rng) * 0.6;
  JointModel::Table human, gen1, gen2;
  for (const auto& ctx : contexts) {
    human[ctx] = random_row(rng, dialogues, sparsity);
    gen1[ctx] = random_row(rng, dialogues, sparsity);
    gen2[ctx] = random_row(rng, dialogues, sparsity);
  }
  auto joint = JointModel::from_tables(random_row(rng, contexts, 0.0), human, gen1, gen2,
                                       random_row(rng, noise, 0.0));

  // Scores on every (dialogue, noise) of the realized space plus representatives.
  ScoreTable scores;
  for (const auto& d : dialogues)
    for (const auto& u : noise) scores[{d, u}] = random_score(rng);

  // Keep only mappings for dialogues present in the joint model's space.
  LabelMap used;
  for (const auto& d : joint.dialogues().labels()) used[d] = c.at(d);
  return {std::move(joint), std::move(scores), std::move(used)};
}

}  // namespace tdshift
