#include "tdshift/energy.hpp"

#include <algorithm>
#include <tuple>

namespace tdshift {

std::string_view to_string(EnergyMode mode) {
  return mode == EnergyMode::kExactPmf ? "exact-pmf" : "plugin-sample";
}

EnergyValue energy_exact(const Pmf& p, const Pmf& q) {
  const auto space = OutcomeSpace::union_of(p.space(), q.space());
  const Pmf a = p.aligned_to(space);
  const Pmf b = q.aligned_to(space);
  if (a.space() != b.space()) throw Error("space-mismatch", "pmfs disagree after alignment");

  // Sum in an order that depends only on the mass values, so that any
  // bijective relabeling of the space (and swapping p, q) gives bit-identical
  // results.
  std::vector<std::tuple<double, double, double>> terms;
  terms.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i)
    terms.emplace_back(std::min(a[i], b[i]), std::max(a[i], b[i]), a[i] * b[i]);
  std::sort(terms.begin(), terms.end());

  double cross = 0.0, self_lo = 0.0, self_hi = 0.0;
  for (const auto& [lo, hi, prod] : terms) {
    cross += prod;
    self_lo += lo * lo;
    self_hi += hi * hi;
  }
  // (1 - sum p^2) + (1 - sum q^2) regrouped so the expression is symmetric.
  const double within = (1.0 - self_lo) + (1.0 - self_hi);
  double value = 2.0 * (1.0 - cross) - within;
  value = std::clamp(value, 0.0, 2.0);
  return {value, EnergyMode::kExactPmf};
}

EnergyValue energy_estimate(const SampleSet& a, const SampleSet& b) {
  EnergyValue e = energy_exact(pmf_from_samples(a), pmf_from_samples(b));
  e.mode = EnergyMode::kPluginSample;
  return e;
}

EnergyValue energy_coarsened(const Pmf& p, const Pmf& q, const LabelMap& c) {
  return energy_exact(p.pushforward(c), q.pushforward(c));
}

EnergyValue energy_coarsened(const SampleSet& a, const SampleSet& b, const LabelMap& c) {
  EnergyValue e = energy_coarsened(pmf_from_samples(a), pmf_from_samples(b), c);
  e.mode = EnergyMode::kPluginSample;
  return e;
}

}  // namespace tdshift
