#include "tdshift/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>


namespace tdshift::kernels {

namespace {

inline std::uint32_t nearest(const double* x, std::size_t dim, std::span<const double> centroids,
                             double& best) {
  const std::size_t k = centroids.size() / dim;
  std::uint32_t arg = 0;
  best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double* y = centroids.data() + c * dim;
    double d2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double diff = x[j] - y[j];
      d2 += diff * diff;
    }
    if (d2 < best) {
      best = d2;
      arg = static_cast<std::uint32_t>(c);
    }
  }
  return arg;
}

inline double integrand(std::span<const double> atoms, std::span<const double> weights, double t) {
  double re = 0.0, im = 0.0;
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    const double phase = t * atoms[a];
    re += weights[a] * std::cos(phase);
    im += weights[a] * std::sin(phase);
  }
  return re * re + im * im;
}

}  // namespace

double assign_nearest_serial(std::span<const double> points, std::size_t dim,
                             std::span<const double> centroids, std::span<std::uint32_t> labels) {
  const std::size_t n = points.size() / dim;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d2;
    labels[i] = nearest(points.data() + i * dim, dim, centroids, d2);
    sse += d2;
  }
  return sse;
}

double assign_nearest_omp(std::span<const double> points, std::size_t dim,
                          std::span<const double> centroids, std::span<std::uint32_t> labels) {
  const std::size_t n = points.size() / dim;
  std::vector<double> dist(n);
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = nearest(points.data() + i * dim, dim, centroids, dist[i]);
  }
  double sse = 0.0;
  for (double d : dist) sse += d;
  return sse;
}

double mean_sq_modulus_serial(std::span<const double> atoms, std::span<const double> weights,
                              double tau, std::size_t steps) {
  const double h = 2.0 * tau / static_cast<double>(steps);
  double sum = 0.5 * (integrand(atoms, weights, -tau) + integrand(atoms, weights, tau));
  for (std::size_t i = 1; i < steps; ++i) sum += integrand(atoms, weights, -tau + h * static_cast<double>(i));
  return sum * h / (2.0 * tau);
}

double mean_sq_modulus_omp(std::span<const double> atoms, std::span<const double> weights,
                           double tau, std::size_t steps) {
  const double h = 2.0 * tau / static_cast<double>(steps);
  std::vector<double> partial(kReductionBlocks, 0.0);
  const std::size_t interior = steps - 1;  // nodes 1 .. steps-1
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < kReductionBlocks; ++b) {
    const std::size_t lo = 1 + b * interior / kReductionBlocks;
    const std::size_t hi = 1 + (b + 1) * interior / kReductionBlocks;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += integrand(atoms, weights, -tau + h * static_cast<double>(i));
    partial[b] = s;
  }
  double sum = 0.5 * (integrand(atoms, weights, -tau) + integrand(atoms, weights, tau));
  for (double s : partial) sum += s;
  return sum * h / (2.0 * tau);
}

}  // namespace tdshift::kernels
