#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tdshift/dist.hpp"
#include "tdshift/energy.hpp"

namespace tdshift {

/// Dialogue ids with equal-dimension real embeddings, stored row-major.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // Throws "duplicate-id", "invalid-embedding" (non-finite, empty) or "dim-mismatch".
  EmbeddingTable(std::vector<Label> ids, std::vector<std::vector<double>> vectors);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Label>& ids() const noexcept { return ids_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::vector<Label> ids_;
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

struct KMeansOptions {
  std::size_t max_iterations = 300;
  double tolerance = 1e-8;  // max centroid displacement
};

/// A fitted coarsening: nonempty clusters with centroids, one representative
/// dialogue per cluster, and the cluster of every fitted id.
class CoarseningFunction {
 public:
  CoarseningFunction() = default;
  // Validates the invariants; used by fit_kmeans and by deserialization.
  CoarseningFunction(std::size_t k, std::size_t dim, std::vector<std::vector<double>> centroids,
                     std::vector<Label> representatives, std::map<Label, std::size_t> assignment);

  std::size_t k() const noexcept { return k_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_clusters() const noexcept { return centroids_.size(); }
  const std::vector<std::vector<double>>& centroids() const noexcept { return centroids_; }
  const std::vector<Label>& representatives() const noexcept { return representatives_; }
  const std::map<Label, std::size_t>& assignment() const noexcept { return assignment_; }

  // Nearest centroid, ties to the lower index. Throws "dim-mismatch".
  std::size_t assign(std::span<const double> v) const;
  std::optional<std::size_t> cluster_of(const Label& id) const;

  // id -> representative dialogue id (the map c of the theory).
  LabelMap representative_map() const;
  // id -> decimal cluster index.
  LabelMap cluster_label_map() const;

  // Fit diagnostics (not part of the function itself).
  bool k_reduced = false;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> sse_history;

 private:
  std::size_t k_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::vector<double>> centroids_;
  std::vector<Label> representatives_;
  std::map<Label, std::size_t> assignment_;
};

/// Lloyd's algorithm with k-means++ seeding. Empty clusters are dropped.
/// k larger than the table is reduced to the table size and flagged.
CoarseningFunction fit_kmeans(const EmbeddingTable& e, std::size_t k, std::uint64_t seed,
                              const KMeansOptions& options = {});

// Within-cluster sum of squares of the table under c's current assignment.
double within_cluster_sse(const EmbeddingTable& e, const CoarseningFunction& c);

/// Energy computed on representative dialogues and on bare cluster indices.
/// The two agree bit-for-bit because the relabeling is a bijection.
std::pair<EnergyValue, EnergyValue> label_energy_equivalence(const SampleSet& a, const SampleSet& b,
                                                             const CoarseningFunction& c);

}  // namespace tdshift
