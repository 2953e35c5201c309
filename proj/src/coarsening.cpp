#include "tdshift/coarsening.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "tdshift/kernels.hpp"
#include "tdshift/rng.hpp"

namespace tdshift {

EmbeddingTable::EmbeddingTable(std::vector<Label> ids, std::vector<std::vector<double>> vectors)
    : ids_(std::move(ids)) {
  if (ids_.size() != vectors.size()) throw Error("invalid-embedding", "id and vector counts differ");
  if (ids_.empty()) throw Error("invalid-embedding", "empty embedding table");
  std::set<Label> seen;
  for (const auto& id : ids_)
    if (!seen.insert(id).second) throw Error("duplicate-id", id);
  dim_ = vectors.front().size();
  if (dim_ == 0) throw Error("invalid-embedding", "zero-dimensional vectors");
  data_.reserve(dim_ * vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim_) throw Error("dim-mismatch", "vector for '" + ids_[i] + "'");
    for (double x : vectors[i]) {
      if (!std::isfinite(x)) throw Error("invalid-embedding", "non-finite value in '" + ids_[i] + "'");
      data_.push_back(x);
    }
  }
}

CoarseningFunction::CoarseningFunction(std::size_t k, std::size_t dim,
                                       std::vector<std::vector<double>> centroids,
                                       std::vector<Label> representatives,
                                       std::map<Label, std::size_t> assignment)
    : k_(k), dim_(dim), centroids_(std::move(centroids)),
      representatives_(std::move(representatives)), assignment_(std::move(assignment)) {
  if (centroids_.empty() || centroids_.size() > k_)
    throw Error("invalid-coarsening", "cluster count must be in [1, k]");
  if (representatives_.size() != centroids_.size())
    throw Error("invalid-coarsening", "one representative per cluster required");
  for (const auto& c : centroids_)
    if (c.size() != dim_) throw Error("invalid-coarsening", "centroid dimension mismatch");
  for (const auto& [id, cl] : assignment_)
    if (cl >= centroids_.size()) throw Error("invalid-coarsening", "assignment out of range for '" + id + "'");
  for (std::size_t c = 0; c < representatives_.size(); ++c) {
    auto it = assignment_.find(representatives_[c]);
    if (it == assignment_.end() || it->second != c)
      throw Error("invalid-coarsening", "representative '" + representatives_[c] + "' outside its cluster");
  }
}

std::size_t CoarseningFunction::assign(std::span<const double> v) const {
  if (v.size() != dim_)
    throw Error("dim-mismatch", "expected " + std::to_string(dim_) + " got " + std::to_string(v.size()));
  std::size_t best_idx = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids_.size(); ++c) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      const double diff = v[j] - centroids_[c][j];
      d2 += diff * diff;
    }
    if (d2 < best) {
      best = d2;
      best_idx = c;
    }
  }
  return best_idx;
}

std::optional<std::size_t> CoarseningFunction::cluster_of(const Label& id) const {
  auto it = assignment_.find(id);
  if (it == assignment_.end()) return std::nullopt;
  return it->second;
}

LabelMap CoarseningFunction::representative_map() const {
  LabelMap m;
  for (const auto& [id, c] : assignment_) m.emplace(id, representatives_[c]);
  return m;
}

LabelMap CoarseningFunction::cluster_label_map() const {
  LabelMap m;
  for (const auto& [id, c] : assignment_) m.emplace(id, std::to_string(c));
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> kmeanspp_seed(const EmbeddingTable& e, std::size_t k, Rng& rng) {
  const std::size_t n = e.size(), dim = e.dim();
  std::vector<double> centroids;
  const auto first = e.row(uniform_index(rng, n));
  centroids.insert(centroids.end(), first.begin(), first.end());

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centroids.size() / dim < k) {
    const double* last = centroids.data() + centroids.size() - dim;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = e.row(i);
      double d = 0.0;
      for (std::size_t j = 0; j < dim; ++j) d += (x[j] - last[j]) * (x[j] - last[j]);
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }
    if (total <= 0.0) break;  // every point already coincides with a centroid
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      acc += d2[i];
      pick = i;
      if (acc > target) break;
    }
    const auto x = e.row(pick);
    centroids.insert(centroids.end(), x.begin(), x.end());
  }
  return centroids;
}

// Recomputes centroids as member means and drops clusters with no members.
// Returns the max displacement over the surviving clusters.
double update_centroids(const EmbeddingTable& e, std::span<const std::uint32_t> labels,
                        std::vector<double>& centroids) {
  const std::size_t dim = e.dim(), k = centroids.size() / dim;
  std::vector<double> sums(k * dim, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto x = e.row(i);
    ++counts[labels[i]];
    for (std::size_t j = 0; j < dim; ++j) sums[labels[i] * dim + j] += x[j];
  }
  std::vector<double> next;
  double shift = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) continue;
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double m = sums[c * dim + j] / static_cast<double>(counts[c]);
      d2 += (m - centroids[c * dim + j]) * (m - centroids[c * dim + j]);
      next.push_back(m);
    }
    shift = std::max(shift, std::sqrt(d2));
  }
  centroids = std::move(next);
  return shift;
}

}  // namespace

CoarseningFunction fit_kmeans(const EmbeddingTable& e, std::size_t k, std::uint64_t seed,
                              const KMeansOptions& options) {
  if (k == 0) throw Error("invalid-k", "k must be at least 1");
  if (e.size() == 0) throw Error("invalid-embedding", "empty embedding table");
  const bool reduced = k > e.size();
  const std::size_t k_eff = std::min(k, e.size());
  const std::size_t dim = e.dim(), n = e.size();

  Rng rng(seed);
  std::vector<double> centroids = kmeanspp_seed(e, k_eff, rng);
  std::vector<std::uint32_t> labels(n);
  std::vector<double> history;
  bool converged = false;
  std::size_t iter = 0;
  while (iter < options.max_iterations) {
    ++iter;
    history.push_back(kernels::assign_nearest_omp(e.data(), dim, centroids, labels));
    const double shift = update_centroids(e, labels, centroids);
    if (shift <= options.tolerance) {
      converged = true;
      break;
    }
  }
  history.push_back(kernels::assign_nearest_omp(e.data(), dim, centroids, labels));

  // Compact away clusters that lost every member in the final assignment.
  const std::size_t kc = centroids.size() / dim;
  std::vector<std::size_t> members(kc, 0);
  for (auto l : labels) ++members[l];
  std::vector<std::size_t> remap(kc, kc);
  std::vector<std::vector<double>> kept;
  for (std::size_t c = 0; c < kc; ++c) {
    if (members[c] == 0) continue;
    remap[c] = kept.size();
    kept.emplace_back(centroids.begin() + static_cast<std::ptrdiff_t>(c * dim),
                      centroids.begin() + static_cast<std::ptrdiff_t>((c + 1) * dim));
  }

  std::map<Label, std::size_t> assignment;
  std::vector<Label> reps(kept.size());
  std::vector<double> rep_dist(kept.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = remap[labels[i]];
    assignment.emplace(e.ids()[i], c);
    const auto x = e.row(i);
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) d2 += (x[j] - kept[c][j]) * (x[j] - kept[c][j]);
    if (d2 < rep_dist[c] || (d2 == rep_dist[c] && e.ids()[i] < reps[c])) {
      rep_dist[c] = d2;
      reps[c] = e.ids()[i];
    }
  }

  CoarseningFunction out(k_eff, dim, std::move(kept), std::move(reps), std::move(assignment));
  out.k_reduced = reduced;
  out.converged = converged;
  out.iterations = iter;
  out.sse_history = std::move(history);
  return out;
}

double within_cluster_sse(const EmbeddingTable& e, const CoarseningFunction& c) {
  double sse = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    auto cl = c.cluster_of(e.ids()[i]);
    if (!cl) throw Error("unknown-dialogue", e.ids()[i]);
    const auto x = e.row(i);
    for (std::size_t j = 0; j < e.dim(); ++j) {
      const double d = x[j] - c.centroids()[*cl][j];
      sse += d * d;
    }
  }
  return sse;
}

std::pair<EnergyValue, EnergyValue> label_energy_equivalence(const SampleSet& a, const SampleSet& b,
                                                             const CoarseningFunction& c) {
  return {energy_coarsened(a, b, c.representative_map()), energy_coarsened(a, b, c.cluster_label_map())};
}

}  // namespace tdshift
