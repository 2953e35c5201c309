#include "tdshift/testdiv.hpp"

#include <cmath>
#include <optional>
#include <set>

namespace tdshift {

PairedCorpus::PairedCorpus(std::vector<PairedItem> items) : items_(std::move(items)) {
  for (const auto& it : items_) {
    if (it.human.context_id != it.context_id || it.generated.context_id != it.context_id)
      throw Error("context-mismatch", "pair (" + it.human.id + ", " + it.generated.id + ") in context '" +
                                          it.context_id + "'");
  }
}

TDReport test_divergence(const PairedCorpus& corpus, const std::vector<TestFunction>& tests) {
  if (corpus.empty()) throw Error("no-valid-pairs", "empty corpus");
  std::set<std::string> names;
  for (const auto& t : tests)
    if (!names.insert(t.name()).second) throw Error("duplicate-test", t.name());

  const auto& items = corpus.items();
  const std::size_t n = items.size(), L = tests.size();
  std::vector<double> gaps(n * L, 0.0);
  std::vector<char> ok(n, 1);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      for (std::size_t l = 0; l < L; ++l) {
        const double a = tests[l](items[i].human, items[i].noise);
        const double b = tests[l](items[i].generated, items[i].noise);
        gaps[i * L + l] = std::abs(a - b);
      }
    } catch (const std::exception&) {
      ok[i] = 0;
    }
  }

  // Ordered reduction keeps the report independent of thread scheduling.
  std::vector<double> sums(L, 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    ++used;
    for (std::size_t l = 0; l < L; ++l) sums[l] += gaps[i * L + l];
  }
  if (used == 0) throw Error("no-valid-pairs", "every pair raised in some test");

  TDReport r;
  r.n_pairs = used;
  r.skipped = n - used;
  for (std::size_t l = 0; l < L; ++l) {
    const double v = sums[l] / static_cast<double>(used);
    r.per_test[tests[l].name()] = v;
    r.total += v;
  }
  return r;
}

TDChange td_change(const TDReport& source, const TDReport& target) {
  if (source.per_test.size() != target.per_test.size()) throw Error("test-mismatch", "different test counts");
  TDChange out;
  for (const auto& [name, s] : source.per_test) {
    auto it = target.per_test.find(name);
    if (it == target.per_test.end()) throw Error("test-mismatch", "target lacks '" + name + "'");
    out.per_test[name] = it->second - s;
  }
  out.total = target.total - source.total;
  return out;
}

}  // namespace tdshift
