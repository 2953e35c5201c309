#include "tdshift/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdshift/rng.hpp"

namespace tdshift {

OutcomeSpace::OutcomeSpace(std::vector<Label> labels) : labels_(std::move(labels)) {
  std::sort(labels_.begin(), labels_.end());
  auto dup = std::adjacent_find(labels_.begin(), labels_.end());
  if (dup != labels_.end()) throw Error("duplicate-label", *dup);
}

OutcomeSpace OutcomeSpace::union_of(const OutcomeSpace& a, const OutcomeSpace& b) {
  std::vector<Label> merged;
  merged.reserve(a.size() + b.size());
  std::set_union(a.labels_.begin(), a.labels_.end(), b.labels_.begin(), b.labels_.end(),
                 std::back_inserter(merged));
  OutcomeSpace out;
  out.labels_ = std::move(merged);
  return out;
}

std::optional<std::size_t> OutcomeSpace::index_of(const Label& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t OutcomeSpace::require(const Label& label, const char* code) const {
  auto idx = index_of(label);
  if (!idx) throw Error(code, "label '" + label + "' not in outcome space");
  return *idx;
}

// ---------------------------------------------------------------------------

Pmf::Pmf(OutcomeSpace space, std::vector<double> mass)
    : space_(std::move(space)), mass_(std::move(mass)) {
  if (mass_.size() != space_.size())
    throw Error("invalid-pmf", "mass vector length differs from space size");
  if (space_.empty()) throw Error("invalid-pmf", "empty outcome space");
  double total = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error("invalid-pmf", "negative or non-finite mass");
    total += m;
  }
  if (std::abs(total - 1.0) > kNormTolerance)
    throw Error("invalid-pmf", "masses sum to " + std::to_string(total));
}

Pmf Pmf::from_map(const std::map<Label, double>& mass) {
  std::vector<Label> labels;
  std::vector<double> values;
  for (const auto& [k, v] : mass) {
    labels.push_back(k);
    values.push_back(v);
  }
  // std::map iteration is already lexicographic, matching OutcomeSpace order.
  return Pmf(OutcomeSpace(std::move(labels)), std::move(values));
}

Pmf Pmf::point_mass(const Label& label) { return Pmf(OutcomeSpace({label}), {1.0}); }

Pmf Pmf::uniform(const OutcomeSpace& space) {
  return Pmf(space, std::vector<double>(space.size(), 1.0 / static_cast<double>(space.size())));
}

double Pmf::mass_of(const Label& label) const {
  auto idx = space_.index_of(label);
  return idx ? mass_[*idx] : 0.0;
}

Pmf Pmf::aligned_to(const OutcomeSpace& target) const {
  if (target == space_) return *this;
  std::vector<double> out(target.size(), 0.0);
  for (std::size_t i = 0; i < space_.size(); ++i) {
    auto idx = target.index_of(space_[i]);
    if (!idx) {
      if (mass_[i] > 0.0) throw Error("space-mismatch", "label '" + space_[i] + "' missing from target space");
      continue;
    }
    out[*idx] = mass_[i];
  }
  Pmf p;
  p.space_ = target;
  p.mass_ = std::move(out);
  return p;
}

Pmf Pmf::pushforward(const LabelMap& c) const {
  std::map<Label, double> acc;
  for (std::size_t i = 0; i < space_.size(); ++i) {
    auto it = c.find(space_[i]);
    if (it == c.end()) {
      if (mass_[i] > 0.0) throw Error("unknown-dialogue", "no coarse label for '" + space_[i] + "'");
      continue;
    }
    acc[it->second] += mass_[i];
  }
  std::vector<Label> labels;
  std::vector<double> values;
  for (const auto& [k, v] : acc) {
    labels.push_back(k);
    values.push_back(v);
  }
  Pmf p;
  p.space_ = OutcomeSpace(std::move(labels));
  p.mass_ = std::move(values);
  return p;
}

std::vector<Label> Pmf::support() const {
  std::vector<Label> out;
  for (std::size_t i = 0; i < mass_.size(); ++i)
    if (mass_[i] > 0.0) out.push_back(space_[i]);
  return out;
}

// ---------------------------------------------------------------------------

SampleSet::SampleSet(OutcomeSpace space, std::vector<std::uint64_t> counts)
    : space_(std::move(space)), counts_(std::move(counts)) {
  if (counts_.size() != space_.size()) throw Error("invalid-samples", "count vector length differs from space size");
  n_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

SampleSet SampleSet::from_labels(const std::vector<Label>& observations) {
  std::map<Label, std::uint64_t> counts;
  for (const auto& l : observations) ++counts[l];
  return from_counts(counts);
}

SampleSet SampleSet::from_counts(const std::map<Label, std::uint64_t>& counts) {
  std::vector<Label> labels;
  std::vector<std::uint64_t> values;
  for (const auto& [k, v] : counts) {
    labels.push_back(k);
    values.push_back(v);
  }
  return SampleSet(OutcomeSpace(std::move(labels)), std::move(values));
}

std::uint64_t SampleSet::count_of(const Label& label) const {
  auto idx = space_.index_of(label);
  return idx ? counts_[*idx] : 0;
}

Pmf pmf_from_samples(const SampleSet& s) {
  if (s.n() == 0) throw Error("empty-sample", "sample set has no observations");
  std::vector<double> mass(s.counts().size());
  const double n = static_cast<double>(s.n());
  for (std::size_t i = 0; i < mass.size(); ++i) mass[i] = static_cast<double>(s.counts()[i]) / n;
  return Pmf(s.space(), std::move(mass));
}

SampleSet sample(const Pmf& p, std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw Error("empty-sample", "requested zero draws");
  const auto mass = p.mass();
  std::vector<double> cdf(mass.size());
  std::partial_sum(mass.begin(), mass.end(), cdf.begin());
  std::size_t last = 0;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] > 0.0) last = i;

  Rng rng(seed);
  std::vector<std::uint64_t> counts(mass.size(), 0);
  for (std::uint64_t k = 0; k < n; ++k) {
    const double u = uniform01(rng) * cdf.back();
    auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    ++counts[std::min(idx, last)];
  }
  return SampleSet(p.space(), std::move(counts));
}

double total_variation(const Pmf& p, const Pmf& q) {
  const auto space = OutcomeSpace::union_of(p.space(), q.space());
  const Pmf a = p.aligned_to(space), b = q.aligned_to(space);
  double tv = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double zero_prob) {
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool zero = uniform01(rng) < zero_prob;
    w[i] = zero ? 0.0 : -std::log(1.0 - uniform01(rng));
    total += w[i];
  }
  if (total <= 0.0) {
    const std::size_t keep = uniform_index(rng, n);
    w[keep] = 1.0;
    total = 1.0;
  }
  for (double& v : w) v /= total;
  return w;
}

// ---------------------------------------------------------------------------

namespace {

void check_row(const std::map<Label, double>& row, const std::string& what) {
  if (row.empty()) throw Error("invalid-joint", what + " is empty");
  double total = 0.0;
  for (const auto& [k, v] : row) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error("invalid-joint", what + " has a negative mass at '" + k + "'");
    total += v;
  }
  if (std::abs(total - 1.0) > kNormTolerance)
    throw Error("invalid-joint", what + " sums to " + std::to_string(total));
}

std::vector<Pmf> rows_for(const Pmf& contexts, const JointModel::Table& table,
                          const OutcomeSpace& dialogues, const std::string& name) {
  std::vector<Pmf> rows;
  for (const auto& c : contexts.space().labels()) {
    auto it = table.find(c);
    if (it == table.end()) throw Error("invalid-joint", name + " has no row for context '" + c + "'");
    check_row(it->second, name + "[" + c + "]");
    rows.push_back(Pmf::from_map(it->second).aligned_to(dialogues));
  }
  return rows;
}

Pmf marginal(const Pmf& contexts, const std::vector<Pmf>& rows, const OutcomeSpace& dialogues) {
  std::vector<double> m(dialogues.size(), 0.0);
  for (std::size_t c = 0; c < rows.size(); ++c)
    for (std::size_t d = 0; d < dialogues.size(); ++d) m[d] += contexts[c] * rows[c][d];
  double total = std::accumulate(m.begin(), m.end(), 0.0);
  for (double& v : m) v /= total;
  return Pmf(dialogues, std::move(m));
}

}  // namespace

JointModel JointModel::from_tables(const std::map<Label, double>& contexts, const Table& human,
                                   const Table& gen1, const Table& gen2,
                                   const std::map<Label, double>& noise) {
  check_row(contexts, "context weights");
  check_row(noise, "noise");
  JointModel j;
  j.contexts_ = Pmf::from_map(contexts);
  j.noise_ = Pmf::from_map(noise);

  std::vector<Label> all;
  for (const Table* t : {&human, &gen1, &gen2})
    for (const auto& [c, row] : *t)
      for (const auto& [d, v] : row) all.push_back(d);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  j.dialogues_ = OutcomeSpace(std::move(all));

  j.human_ = rows_for(j.contexts_, human, j.dialogues_, "human");
  j.gen1_ = rows_for(j.contexts_, gen1, j.dialogues_, "gen1");
  j.gen2_ = rows_for(j.contexts_, gen2, j.dialogues_, "gen2");
  return j;
}

Pmf JointModel::gen1_marginal() const { return marginal(contexts_, gen1_, dialogues_); }
Pmf JointModel::gen2_marginal() const { return marginal(contexts_, gen2_, dialogues_); }

std::vector<JointTuple> enumerate_joint(const JointModel& j) {
  std::vector<JointTuple> out;
  const std::size_t nd = j.dialogues().size();
  const auto& ctx = j.contexts();
  const auto& noise = j.noise();
  for (std::size_t c = 0; c < ctx.space().size(); ++c) {
    if (ctx[c] == 0.0) continue;
    const Pmf& h = j.human(c);
    const Pmf& g1 = j.gen1(c);
    const Pmf& g2 = j.gen2(c);
    for (std::size_t d = 0; d < nd; ++d) {
      if (h[d] == 0.0) continue;
      for (std::size_t a = 0; a < nd; ++a) {
        if (g1[a] == 0.0) continue;
        for (std::size_t b = 0; b < nd; ++b) {
          if (g2[b] == 0.0) continue;
          const double pcdab = ctx[c] * h[d] * g1[a] * g2[b];
          for (std::size_t u = 0; u < noise.space().size(); ++u) {
            if (noise[u] == 0.0) continue;
            out.push_back({c, d, a, b, u, pcdab * noise[u]});
          }
        }
      }
    }
  }
  return out;
}

}  // namespace tdshift
