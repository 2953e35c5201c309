#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tdshift/error.hpp"

namespace tdshift {

using Label = std::string;

// Mapping from one label to another; the finite form of a coarsening
// function (dialogue -> representative) or any other relabeling.
using LabelMap = std::map<Label, Label>;

inline constexpr double kNormTolerance = 1e-12;

/// Ordered set of distinct outcome labels. Labels are sorted
/// lexicographically at construction so every vector built on top of a space
/// has a stable, platform-independent order.
class OutcomeSpace {
 public:
  OutcomeSpace() = default;
  explicit OutcomeSpace(std::vector<Label> labels);

  static OutcomeSpace union_of(const OutcomeSpace& a, const OutcomeSpace& b);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const Label& operator[](std::size_t i) const { return labels_[i]; }
  const std::vector<Label>& labels() const noexcept { return labels_; }

  std::optional<std::size_t> index_of(const Label& label) const;
  bool contains(const Label& label) const { return index_of(label).has_value(); }
  // Throws Error(code) when the label is absent.
  std::size_t require(const Label& label, const char* code = "unknown-label") const;

  bool operator==(const OutcomeSpace& other) const = default;

 private:
  std::vector<Label> labels_;
};

/// Exact categorical distribution over a finite OutcomeSpace.
class Pmf {
 public:
  Pmf() = default;
  Pmf(OutcomeSpace space, std::vector<double> mass);

  static Pmf from_map(const std::map<Label, double>& mass);
  static Pmf point_mass(const Label& label);
  static Pmf uniform(const OutcomeSpace& space);

  const OutcomeSpace& space() const noexcept { return space_; }
  std::span<const double> mass() const noexcept { return mass_; }
  double operator[](std::size_t i) const { return mass_[i]; }
  double mass_of(const Label& label) const;

  // Re-expresses this pmf over a superset space, filling zeros.
  // Throws "space-mismatch" if a supported label is missing from `target`.
  Pmf aligned_to(const OutcomeSpace& target) const;

  // Distribution of c(X) for X ~ this. Masses within a preimage are summed.
  // Throws "unknown-dialogue" if a label with positive mass is unmapped.
  Pmf pushforward(const LabelMap& c) const;

  // Labels with strictly positive mass.
  std::vector<Label> support() const;

  bool operator==(const Pmf& other) const = default;

 private:
  OutcomeSpace space_;
  std::vector<double> mass_;
};

/// Multiset of observed outcomes.
class SampleSet {
 public:
  SampleSet() = default;
  SampleSet(OutcomeSpace space, std::vector<std::uint64_t> counts);

  static SampleSet from_labels(const std::vector<Label>& observations);
  static SampleSet from_counts(const std::map<Label, std::uint64_t>& counts);

  const OutcomeSpace& space() const noexcept { return space_; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }
  std::uint64_t count_of(const Label& label) const;
  std::uint64_t n() const noexcept { return n_; }

  bool operator==(const SampleSet& other) const = default;

 private:
  OutcomeSpace space_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

Pmf pmf_from_samples(const SampleSet& s);

// n inverse-CDF draws over the canonical label order; deterministic in seed.
SampleSet sample(const Pmf& p, std::uint64_t n, std::uint64_t seed);

double total_variation(const Pmf& p, const Pmf& q);

// Random point of the probability simplex (normalized exponentials). Each
// coordinate is zeroed with probability zero_prob, keeping at least one.
std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0);

/// Exact joint law of (C, D, D1, D2, U): goal distribution over contexts,
/// per-context rows for the human dialogue and the two generated dialogues,
/// and a noise label independent of everything else. All dialogue rows share
/// one dialogue space (the union of every label mentioned).
class JointModel {
 public:
  using Table = std::map<Label, std::map<Label, double>>;

  // Validates every row; non-normalized or negative rows raise "invalid-joint".
  static JointModel from_tables(const std::map<Label, double>& contexts,
                                const Table& human, const Table& gen1,
                                const Table& gen2,
                                const std::map<Label, double>& noise);

  const Pmf& contexts() const noexcept { return contexts_; }
  const OutcomeSpace& dialogues() const noexcept { return dialogues_; }
  const Pmf& noise() const noexcept { return noise_; }
  // Rows are indexed by context index and expressed over dialogues().
  const Pmf& human(std::size_t c) const { return human_[c]; }
  const Pmf& gen1(std::size_t c) const { return gen1_[c]; }
  const Pmf& gen2(std::size_t c) const { return gen2_[c]; }

  // Marginal law of the first / second generated dialogue.
  Pmf gen1_marginal() const;
  Pmf gen2_marginal() const;

 private:
  Pmf contexts_;
  OutcomeSpace dialogues_;
  std::vector<Pmf> human_, gen1_, gen2_;
  Pmf noise_;
};

struct JointTuple {
  std::size_t context;
  std::size_t human;
  std::size_t gen1;
  std::size_t gen2;
  std::size_t noise;
  double probability;
};

// Every tuple with positive probability, in lexicographic index order.
std::vector<JointTuple> enumerate_joint(const JointModel& j);

}  // namespace tdshift
