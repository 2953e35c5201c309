#pragma once

#include <map>
#include <string>
#include <vector>

#include "tdshift/testfns.hpp"

namespace tdshift {

struct PairedItem {
  Label context_id;
  Dialogue human;
  Dialogue generated;
  Noise noise;
};

/// Human/generated dialogue pairs sharing a context.
class PairedCorpus {
 public:
  PairedCorpus() = default;
  // Throws "context-mismatch" when a pair's dialogues disagree with its context.
  explicit PairedCorpus(std::vector<PairedItem> items);

  const std::vector<PairedItem>& items() const noexcept { return items_; }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

 private:
  std::vector<PairedItem> items_;
};

struct TDReport {
  std::map<std::string, double> per_test;
  double total = 0.0;
  std::size_t n_pairs = 0;   // pairs that contributed
  std::size_t skipped = 0;   // pairs dropped because some test raised
};

/// Mean over pairs of |h(human, u) - h(generated, u)| for every test, plus
/// the sum across tests. A pair on which any test raises is skipped as a
/// whole; if every pair is skipped the call raises "no-valid-pairs".
TDReport test_divergence(const PairedCorpus& corpus, const std::vector<TestFunction>& tests);

struct TDChange {
  std::map<std::string, double> per_test;
  double total = 0.0;
};

// target - source, per test and in total. Throws "test-mismatch".
TDChange td_change(const TDReport& source, const TDReport& target);

}  // namespace tdshift
