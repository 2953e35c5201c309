#pragma once

#include <string_view>

#include "tdshift/dist.hpp"

namespace tdshift {

enum class EnergyMode { kExactPmf, kPluginSample };

std::string_view to_string(EnergyMode mode);

// Discrete energy distance 2P[A!=B] - P[A!=A'] - P[B!=B'], in [0, 2].
struct EnergyValue {
  double value = 0.0;
  EnergyMode mode = EnergyMode::kExactPmf;
};

/// Closed form 2(1 - sum p*q) - (1 - sum p^2) - (1 - sum q^2) over the label
/// union of both pmfs (missing labels have zero mass). The result is
/// symmetric in its arguments, invariant under relabeling of the outcome
/// space, and exactly 0 when p == q. Clamped to [0, 2].
EnergyValue energy_exact(const Pmf& p, const Pmf& q);

/// Plug-in (V-statistic) estimate: energy_exact of the two empirical pmfs.
/// Biased upward by O(1/n) when both samples come from one law.
EnergyValue energy_estimate(const SampleSet& a, const SampleSet& b);

/// Energy after pushing both arguments through a coarsening map.
EnergyValue energy_coarsened(const Pmf& p, const Pmf& q, const LabelMap& c);
EnergyValue energy_coarsened(const SampleSet& a, const SampleSet& b, const LabelMap& c);

}  // namespace tdshift
