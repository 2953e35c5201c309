#pragma once

// Data-parallel inner loops. Each kernel has a plain serial version kept as
// the reference for tests and an OpenMP version used by the library. The
// OpenMP versions reduce over a fixed block decomposition, so their output
// does not depend on the number of threads.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tdshift::kernels {

// Nearest centroid for each row of `points` (n x dim, row-major). Ties go to
// the lower centroid index. Writes labels and returns the total squared
// distance to the assigned centroids.
double assign_nearest_serial(std::span<const double> points, std::size_t dim,
                             std::span<const double> centroids, std::span<std::uint32_t> labels);
double assign_nearest_omp(std::span<const double> points, std::size_t dim,
                          std::span<const double> centroids, std::span<std::uint32_t> labels);

// Trapezoidal estimate of (1 / 2tau) * integral_{-tau}^{tau} |sum_a w_a e^{i t x_a}|^2 dt
// for real atoms x_a with signed weights w_a; `steps` panels.
double mean_sq_modulus_serial(std::span<const double> atoms, std::span<const double> weights,
                              double tau, std::size_t steps);
double mean_sq_modulus_omp(std::span<const double> atoms, std::span<const double> weights,
                           double tau, std::size_t steps);

// Number of blocks used by the deterministic parallel reductions.
inline constexpr std::size_t kReductionBlocks = 256;

}  // namespace tdshift::kernels
