#include "tdshift/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "tdshift/coarsening.hpp"
#include "tdshift/energy.hpp"
#include "tdshift/kernels.hpp"
#include "tdshift/rng.hpp"

namespace tdshift {

RealEmbeddedPmf::RealEmbeddedPmf(std::vector<double> support, std::vector<double> mass)
    : support_(std::move(support)), mass_(std::move(mass)) {
  if (support_.size() != mass_.size()) throw Error("invalid-support", "support and mass lengths differ");
  std::set<double> seen;
  for (double a : support_) {
    if (!std::isfinite(a)) throw Error("invalid-support", "non-finite atom");
    if (!seen.insert(a).second) throw Error("invalid-support", "repeated atom " + std::to_string(a));
  }
  // Reuse Pmf validation on an index-labelled space.
  std::vector<Label> labels;
  for (std::size_t i = 0; i < mass_.size(); ++i) labels.push_back(std::to_string(i));
  std::map<Label, double> m;
  for (std::size_t i = 0; i < mass_.size(); ++i) m[labels[i]] = mass_[i];
  (void)Pmf::from_map(m);
}

std::complex<double> characteristic_fn(const RealEmbeddedPmf& p, double t) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < p.support().size(); ++i) {
    re += p.mass()[i] * std::cos(t * p.support()[i]);
    im += p.mass()[i] * std::sin(t * p.support()[i]);
  }
  return {re, im};
}

L2Check l2_identity_check(const Pmf& p, const Pmf& q) {
  L2Check r;
  r.lhs = energy_exact(p, q).value;
  const auto space = OutcomeSpace::union_of(p.space(), q.space());
  const Pmf a = p.aligned_to(space), b = q.aligned_to(space);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const double d = a[i] - b[i];
    r.rhs += d * d;
    r.l1 += std::abs(d);
  }
  r.gap = std::abs(r.lhs - r.rhs);
  r.l1_gap = std::abs(r.lhs - r.l1);
  return r;
}

double parseval_quadrature(const RealEmbeddedPmf& p, const RealEmbeddedPmf& q, double tau, std::size_t steps) {
  if (!(tau > 0.0)) throw Error("invalid-argument", "tau must be positive");
  if (steps < 1000) throw Error("invalid-argument", "at least 1000 quadrature steps required");
  // phi_p - phi_q is the transform of the signed measure p - q on the union of atoms.
  std::map<double, double> signed_mass;
  for (std::size_t i = 0; i < p.support().size(); ++i) signed_mass[p.support()[i]] += p.mass()[i];
  for (std::size_t i = 0; i < q.support().size(); ++i) signed_mass[q.support()[i]] -= q.mass()[i];
  std::vector<double> atoms, weights;
  for (const auto& [a, w] : signed_mass) {
    atoms.push_back(a);
    weights.push_back(w);
  }
  return kernels::mean_sq_modulus_omp(atoms, weights, tau, steps);
}

// ---------------------------------------------------------------------------

namespace {

double random_unit_score(Rng& rng) {
  const double kind = uniform01(rng);
  if (kind < 0.2) return uniform01(rng) < 0.5 ? 0.0 : 1.0;
  if (kind < 0.5) return static_cast<double>(uniform_index(rng, 5)) / 4.0;
  return uniform01(rng);
}

}  // namespace

GeneralizedBoundTerms generalized_bound_trial(std::uint64_t seed, const GeneralizedFuzzOptions& options) {
  Rng rng(seed);
  const std::size_t m = std::max<std::size_t>(1, options.max_space);
  const std::size_t nx = 1 + uniform_index(rng, m);
  const std::size_t nu = 1 + uniform_index(rng, m);
  const std::size_t ns = 1 + uniform_index(rng, m);
  const std::size_t ns2 = 1 + uniform_index(rng, m);
  const std::size_t nclusters = nx > 1 ? 1 + uniform_index(rng, nx - 1) : 1;

  // Coarsening: a partition with one representative (a member) per block.
  std::vector<std::size_t> order(nx);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> block(nx);
  for (std::size_t i = 0; i < nx; ++i) block[order[i]] = i < nclusters ? i : uniform_index(rng, nclusters);
  std::vector<std::size_t> rep(nclusters);
  for (std::size_t b = 0; b < nclusters; ++b) rep[b] = order[b];
  auto coarse = [&](std::size_t x) { return rep[block[x]]; };

  const double sparsity = uniform01(rng) * 0.5;
  const auto pA = random_simplex(rng, nx, sparsity);
  const auto pB = random_simplex(rng, nx, sparsity);
  const auto pU = random_simplex(rng, nu, 0.0);
  std::vector<double> sval(ns), sval2(ns2);
  for (auto& v : sval) v = random_unit_score(rng);
  for (auto& v : sval2) v = random_unit_score(rng);
  std::vector<std::vector<double>> pS(nx * nu), pS2(nx * nu);
  for (auto& row : pS) row = random_simplex(rng, ns, sparsity);
  for (auto& row : pS2) row = random_simplex(rng, ns2, sparsity);
  std::vector<double> f(nx * nu);
  for (auto& v : f) v = random_unit_score(rng);

  // g: pointwise weighted median over cells (c(x), u).
  std::vector<std::vector<std::pair<double, double>>> cells(nx * nu);
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t u = 0; u < nu; ++u) {
      for (std::size_t s = 0; s < ns; ++s) {
        const double w = pA[a] * pU[u] * pS[a * nu + u][s];
        if (w > 0.0) cells[coarse(a) * nu + u].emplace_back(sval[s], w);
      }
      for (std::size_t s = 0; s < ns2; ++s) {
        const double w = pB[a] * pU[u] * pS2[a * nu + u][s];
        if (w > 0.0) cells[coarse(a) * nu + u].emplace_back(sval2[s], w);
      }
    }
  std::vector<double> g(nx * nu, 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i)
    if (!cells[i].empty()) g[i] = weighted_median(cells[i]);

  if (options.f_equals_g)
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t u = 0; u < nu; ++u) f[x * nu + u] = g[coarse(x) * nu + u];

  GeneralizedBoundTerms t;
  for (std::size_t a = 0; a < nx; ++a)
    for (std::size_t u = 0; u < nu; ++u) {
      const double fa = f[a * nu + u], fca = f[coarse(a) * nu + u], gca = g[coarse(a) * nu + u];
      for (std::size_t s = 0; s < ns; ++s) {
        const double w = pA[a] * pU[u] * pS[a * nu + u][s];
        t.lhs += w * std::abs(sval[s] - fa);
        t.phi += w * std::abs(sval[s] - gca);
      }
      for (std::size_t s = 0; s < ns2; ++s) {
        const double w = pB[a] * pU[u] * pS2[a * nu + u][s];
        t.source += w * std::abs(sval2[s] - fa);
        t.phi += w * std::abs(gca - sval2[s]);
      }
      t.gamma += (pA[a] + pB[a]) * pU[u] * std::abs(fca - fa);
    }

  std::map<Label, double> ca, cb;
  for (std::size_t x = 0; x < nx; ++x) {
    ca["x" + std::to_string(coarse(x))] += pA[x];
    cb["x" + std::to_string(coarse(x))] += pB[x];
  }
  t.epsilon = energy_exact(Pmf::from_map(ca), Pmf::from_map(cb)).value;

  double tight = 0.0;
  for (std::size_t u = 0; u < nu; ++u) {
    double l1 = 0.0, l2 = 0.0;
    for (std::size_t b = 0; b < nclusters; ++b) {
      const double d = std::abs(g[rep[b] * nu + u] - f[rep[b] * nu + u]);
      l1 += d;
      l2 += d * d;
    }
    t.delta += pU[u] * l1;
    tight += pU[u] * std::sqrt(l2);
  }
  t.delta_tight = tight * tight;
  t.rhs = t.gamma + t.phi + t.source + std::sqrt(t.epsilon * t.delta);
  t.rhs_tight = t.gamma + t.phi + t.source + std::sqrt(t.epsilon * t.delta_tight);
  return t;
}

std::size_t generalized_bound_fuzz(std::uint64_t seed, std::size_t trials, const GeneralizedFuzzOptions& options) {
  if (trials == 0) throw Error("invalid-argument", "trials must be at least 1");
  std::vector<char> violated(trials, 0);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::size_t i = 0; i < trials; ++i) {
    const auto t = generalized_bound_trial(child_seed(seed, i), options);
    violated[i] = (t.lhs > t.rhs + kBoundSlack || t.lhs > t.rhs_tight + kBoundSlack) ? 1 : 0;
  }
  return static_cast<std::size_t>(std::count(violated.begin(), violated.end(), 1));
}

GFunction grid_search_g(const BoundProblem& bp, double step) {
  const std::size_t nx = bp.coarse().size(), nu = bp.noise_size();
  std::vector<std::vector<std::pair<double, double>>> cells(nx * nu);
  for (const auto& t : bp.tuples()) {
    const double target = bp.h(t.human, t.noise);
    cells[bp.coarse_of(t.gen1) * nu + t.noise].emplace_back(target, t.probability);
    cells[bp.coarse_of(t.gen2) * nu + t.noise].emplace_back(target, t.probability);
  }
  const auto grid_points = static_cast<std::size_t>(std::llround(1.0 / step));
  GFunction g{bp.coarse(), bp.joint().noise().space(), std::vector<double>(nx * nu, 0.0),
              std::vector<bool>(nx * nu, false)};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].empty()) {
      g.unconstrained[i] = true;
      continue;
    }
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    for (std::size_t k = 0; k <= grid_points; ++k) {
      const double v = static_cast<double>(k) / static_cast<double>(grid_points);
      double obj = 0.0;
      for (const auto& [target, w] : cells[i]) obj += w * std::abs(v - target);
      if (obj < best) {
        best = obj;
        arg = v;
      }
    }
    g.values[i] = arg;
  }
  return g;
}

// ---------------------------------------------------------------------------

std::pair<Pmf, Pmf> random_pmf_pair(std::uint64_t seed, std::size_t max_space, double zero_prob) {
  Rng rng(seed);
  const std::size_t n = 1 + uniform_index(rng, max_space);
  std::vector<Label> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("w" + std::to_string(i));
  const OutcomeSpace space(labels);
  return {Pmf(space, random_simplex(rng, n, zero_prob)), Pmf(space, random_simplex(rng, n, zero_prob))};
}

std::pair<RealEmbeddedPmf, RealEmbeddedPmf> random_integer_pmf_pair(std::uint64_t seed, std::size_t atoms,
                                                                    int max_atom) {
  Rng rng(seed);
  auto draw = [&] {
    std::set<int> chosen;
    while (chosen.size() < atoms) chosen.insert(static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(max_atom) + 1)));
    std::vector<double> support(chosen.begin(), chosen.end());
    return RealEmbeddedPmf(std::move(support), random_simplex(rng, atoms, 0.0));
  };
  auto p = draw();
  auto q = draw();
  return {std::move(p), std::move(q)};
}

namespace {

template <typename Fn>
OracleCheck timed_check(std::string name, double tolerance, std::size_t cases, Fn&& body) {
  OracleCheck c;
  c.name = std::move(name);
  c.tolerance = tolerance;
  c.cases = cases;
  c.worst = body();
  c.passed = c.worst <= tolerance;
  return c;
}

}  // namespace

std::vector<OracleCheck> run_oracle_suite(const VerifyOptions& o) {
  std::vector<OracleCheck> out;
  const std::uint64_t s = o.seed;

  out.push_back(timed_check("characteristic_fn_normalization", 1e-15, 1000, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < 1000; ++i) {
      auto [p, q] = random_integer_pmf_pair(child_seed(s, 100 + i), 5, 20);
      worst = std::max(worst, std::abs(characteristic_fn(p, 0.0) - std::complex<double>(1.0, 0.0)));
      Rng rng(child_seed(s, 5000 + i));
      const double t = (uniform01(rng) - 0.5) * 200.0;
      worst = std::max(worst, std::abs(characteristic_fn(q, t)) - 1.0);
    }
    return worst;
  }));

  std::vector<L2Check> l2(o.l2_pairs);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < o.l2_pairs; ++i) {
    auto [p, q] = random_pmf_pair(child_seed(s, 1'000'000 + i), 50);
    l2[i] = l2_identity_check(p, q);
  }
  out.push_back(timed_check("energy_l2_identity", 1e-12, o.l2_pairs, [&] {
    double worst = 0.0;
    for (const auto& r : l2) worst = std::max(worst, r.gap);
    return worst;
  }));
  {
    // Unsquared form: record how far it is from the energy; informational.
    OracleCheck c;
    c.name = "energy_l1_identity";
    c.informational = true;
    c.cases = o.l2_pairs;
    c.tolerance = 1e-12;
    for (const auto& r : l2) c.worst = std::max(c.worst, r.l1_gap);
    c.passed = c.worst <= c.tolerance;
    out.push_back(c);
  }

  out.push_back(timed_check("bijective_relabeling", 0.0, o.bijection_cases, [&] {
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < o.bijection_cases; ++i) {
      Rng rng(child_seed(s, 2'000'000 + i));
      const std::size_t n = 2 + uniform_index(rng, 30);
      std::vector<Label> ids;
      std::vector<std::vector<double>> vecs;
      for (std::size_t k = 0; k < n; ++k) {
        ids.push_back("dlg" + std::to_string(k));
        vecs.push_back({uniform01(rng) * 10.0, uniform01(rng) * 10.0});
      }
      const EmbeddingTable table(ids, vecs);
      const auto c = fit_kmeans(table, 1 + uniform_index(rng, 8), rng());
      std::map<Label, std::uint64_t> ca, cb;
      for (std::size_t k = 0; k < 1 + uniform_index(rng, 200); ++k) ++ca[ids[uniform_index(rng, n)]];
      for (std::size_t k = 0; k < 1 + uniform_index(rng, 200); ++k) ++cb[ids[uniform_index(rng, n)]];
      const auto [rep, lab] =
          label_energy_equivalence(SampleSet::from_counts(ca), SampleSet::from_counts(cb), c);
      if (rep.value != lab.value) ++mismatches;
    }
    return static_cast<double>(mismatches);
  }));

  out.push_back(timed_check("characteristic_fn_quadrature", 1e-2, o.quadrature_pairs, [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < o.quadrature_pairs; ++i) {
      auto [p, q] = random_integer_pmf_pair(child_seed(s, 3'000'000 + i), 5, 10);
      std::map<double, double> diff;
      for (std::size_t k = 0; k < 5; ++k) {
        diff[p.support()[k]] += p.mass()[k];
        diff[q.support()[k]] -= q.mass()[k];
      }
      double l2sq = 0.0;
      for (const auto& [a, d] : diff) l2sq += d * d;
      worst = std::max(worst, std::abs(parseval_quadrature(p, q, 1e4, 1'000'000) - l2sq));
    }
    return worst;
  }));

  out.push_back(timed_check("adaptation_bound", 0.0, o.bound_trials, [&] {
    std::vector<char> bad(o.bound_trials, 0);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::size_t i = 0; i < o.bound_trials; ++i) {
      const auto fc = random_bound_case(child_seed(s, 4'000'000 + i));
      try {
        evaluate_bound(fc.joint, score_from_table(fc.scores), fc.coarsening);
      } catch (const BoundViolation&) {
        bad[i] = 1;
      }
    }
    return static_cast<double>(std::count(bad.begin(), bad.end(), 1));
  }));

  out.push_back(timed_check("generalized_bound", 0.0, o.generalized_trials, [&] {
    return static_cast<double>(generalized_bound_fuzz(child_seed(s, 5'000'000), o.generalized_trials));
  }));

  out.push_back(timed_check("g_optimality", 1e-9, o.g_optimality_cases, [&] {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < o.g_optimality_cases; ++i) {
      const auto fc = random_bound_case(child_seed(s, 6'000'000 + i));
      const BoundProblem bp(fc.joint, score_from_table(fc.scores), fc.coarsening);
      worst = std::max(worst, compute_phi(bp, solve_g(bp)) - compute_phi(bp, grid_search_g(bp)));
    }
    return worst;
  }));

  return out;
}

}  // namespace tdshift
