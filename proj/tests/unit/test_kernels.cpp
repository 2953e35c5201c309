#include <random>
#include <vector>

#include <gtest/gtest.h>
#include <omp.h>

#include "tdshift/kernels.hpp"

using namespace tdshift::kernels;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (auto& x : v) x = z(rng);
  return v;
}

}  // namespace

TEST(AssignNearest, OmpMatchesSerial) {
  const std::size_t dim = 5, n = 3001, k = 17;
  const auto points = normals(n * dim, 1), centroids = normals(k * dim, 2);
  std::vector<std::uint32_t> a(n), b(n);
  const double sa = assign_nearest_serial(points, dim, centroids, a);
  const double sb = assign_nearest_omp(points, dim, centroids, b);
  EXPECT_EQ(a, b);
  EXPECT_DOUBLE_EQ(sa, sb);
}

TEST(AssignNearest, TiesGoToLowerIndex) {
  const std::vector<double> points{0.0, 2.0};
  const std::vector<double> centroids{1.0, -1.0, 3.0};
  std::vector<std::uint32_t> labels(2);
  assign_nearest_serial(points, 1, centroids, labels);
  EXPECT_EQ(labels[0], 0u);
  EXPECT_EQ(labels[1], 0u);
  assign_nearest_omp(points, 1, centroids, labels);
  EXPECT_EQ(labels[0], 0u);
  EXPECT_EQ(labels[1], 0u);
}

TEST(AssignNearest, OmpIndependentOfThreadCount) {
  const std::size_t dim = 3, n = 2000, k = 9;
  const auto points = normals(n * dim, 5), centroids = normals(k * dim, 6);
  std::vector<std::uint32_t> labels(n);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double one = assign_nearest_omp(points, dim, centroids, labels);
  omp_set_num_threads(4);
  const double four = assign_nearest_omp(points, dim, centroids, labels);
  omp_set_num_threads(saved);
  EXPECT_EQ(one, four);
}

TEST(MeanSqModulus, OmpMatchesSerialClosely) {
  const std::vector<double> atoms{0, 1, 4, 7};
  const std::vector<double> weights{0.2, -0.1, 0.3, -0.4};
  const double s = mean_sq_modulus_serial(atoms, weights, 500.0, 200000);
  const double o = mean_sq_modulus_omp(atoms, weights, 500.0, 200000);
  EXPECT_NEAR(s, o, 1e-12);
}

TEST(MeanSqModulus, OmpIndependentOfThreadCount) {
  const std::vector<double> atoms{0, 2, 3};
  const std::vector<double> weights{0.5, -0.25, -0.25};
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double one = mean_sq_modulus_omp(atoms, weights, 1e3, 100000);
  omp_set_num_threads(3);
  const double three = mean_sq_modulus_omp(atoms, weights, 1e3, 100000);
  omp_set_num_threads(saved);
  EXPECT_EQ(one, three);
}

TEST(MeanSqModulus, ConstantIntegrandForSingleAtom) {
  // |w e^{itx}|^2 = w^2 for every t.
  const std::vector<double> atoms{3.0};
  const std::vector<double> weights{0.5};
  EXPECT_NEAR(mean_sq_modulus_serial(atoms, weights, 10.0, 1000), 0.25, 1e-14);
  EXPECT_NEAR(mean_sq_modulus_omp(atoms, weights, 10.0, 1000), 0.25, 1e-14);
}
