#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "tdshift/dist.hpp"
#include "tdshift/energy.hpp"
#include "tdshift/testfns.hpp"

namespace tdshift {

// A test function over the labels of a JointModel: (dialogue, noise) -> [0,1].
using DialogueScore = std::function<double(const Label& dialogue, const Label& noise)>;

DialogueScore score_from_table(ScoreTable table);
DialogueScore score_from_test(TestFunction h, std::map<Label, Dialogue> dialogues,
                              std::map<Label, Noise> noise);

/// An enumerable instance of the adaptation bound: joint law, one test, and a
/// coarsening c over the dialogue space. D1 plays the target environment and
/// D2 the source. Scores are tabulated once at construction.
class BoundProblem {
 public:
  // Throws "unknown-dialogue" if c is not total on the dialogue space and
  // "test-range" for scores outside [0,1].
  BoundProblem(const JointModel& j, const DialogueScore& h, const LabelMap& c);

  const JointModel& joint() const noexcept { return joint_; }
  const OutcomeSpace& coarse() const noexcept { return coarse_; }
  const std::vector<JointTuple>& tuples() const noexcept { return tuples_; }

  std::size_t coarse_of(std::size_t dialogue) const { return coarse_of_[dialogue]; }
  double h(std::size_t dialogue, std::size_t u) const { return h_dialogue_[dialogue * nu_ + u]; }
  double h_coarse(std::size_t x, std::size_t u) const { return h_coarse_[x * nu_ + u]; }
  std::size_t noise_size() const noexcept { return nu_; }
  const LabelMap& coarsening() const noexcept { return c_; }

 private:
  JointModel joint_;
  LabelMap c_;
  OutcomeSpace coarse_;
  std::vector<std::size_t> coarse_of_;
  std::vector<double> h_dialogue_, h_coarse_;
  std::size_t nu_ = 0;
  std::vector<JointTuple> tuples_;
};

/// Table over (coarse label, noise label).
struct GFunction {
  OutcomeSpace coarse;
  OutcomeSpace noise;
  std::vector<double> values;          // row-major [x][u], in [0,1]
  std::vector<bool> unconstrained;     // cell had zero probability

  double operator()(std::size_t x, std::size_t u) const { return values[x * noise.size() + u]; }
  std::size_t unconstrained_count() const;
};

// Smallest value whose cumulative weight reaches half the total.
double weighted_median(std::vector<std::pair<double, double>> value_weight);

double compute_gamma(const BoundProblem& bp);
GFunction solve_g(const BoundProblem& bp);
double compute_phi(const BoundProblem& bp, const GFunction& g);
double compute_delta(const BoundProblem& bp, const GFunction& g);
double td_target(const BoundProblem& bp);
double td_source(const BoundProblem& bp);
EnergyValue coarse_energy(const BoundProblem& bp);

struct BoundReport {
  double gamma = 0.0;
  double phi = 0.0;
  double delta = 0.0;
  EnergyValue epsilon;
  double td_source = 0.0;
  double td_target = 0.0;
  double rhs = 0.0;
  std::size_t unconstrained_cells = 0;
};

inline constexpr double kBoundSlack = 1e-9;

class BoundViolation : public Error {
 public:
  explicit BoundViolation(BoundReport report);
  const BoundReport& report() const noexcept { return report_; }

 private:
  BoundReport report_;
};

/// Assembles every term with g from solve_g. Throws BoundViolation when
/// td_target > rhs + kBoundSlack.
BoundReport evaluate_bound(const BoundProblem& bp);
BoundReport evaluate_bound(const JointModel& j, const DialogueScore& h, const LabelMap& c);

/// The observable terms when only samples are available.
struct ObservableTerms {
  EnergyValue epsilon;
  double td_source = 0.0;
};
ObservableTerms estimate_terms(const SampleSet& target_generated, const SampleSet& source_generated,
                               const LabelMap& c, double td_source);

// --- random enumerable instances ------------------------------------------

struct BoundFuzzLimits {
  std::size_t max_dialogues = 8;
  std::size_t max_coarse = 4;
  std::size_t max_noise = 3;
  std::size_t max_contexts = 3;
};

struct BoundFuzzCase {
  JointModel joint;
  ScoreTable scores;
  LabelMap coarsening;
};

BoundFuzzCase random_bound_case(std::uint64_t seed, const BoundFuzzLimits& limits = {});

}  // namespace tdshift
