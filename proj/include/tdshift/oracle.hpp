#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "tdshift/bound.hpp"
#include "tdshift/dist.hpp"

namespace tdshift {

/// Discrete law on distinct finite reals.
class RealEmbeddedPmf {
 public:
  // Throws "invalid-support" for repeated or non-finite atoms.
  RealEmbeddedPmf(std::vector<double> support, std::vector<double> mass);

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& mass() const noexcept { return mass_; }

 private:
  std::vector<double> support_;
  std::vector<double> mass_;
};

// E[exp(i t A)].
std::complex<double> characteristic_fn(const RealEmbeddedPmf& p, double t);

struct L2Check {
  double lhs = 0.0;  // energy_exact(p, q)
  double rhs = 0.0;  // sum (p - q)^2
  double gap = 0.0;  // |lhs - rhs|
  // The unsquared variant sum |p - q|, reported to show it does not match.
  double l1 = 0.0;
  double l1_gap = 0.0;
};

L2Check l2_identity_check(const Pmf& p, const Pmf& q);

/// Trapezoidal (1/2tau) * integral_{-tau}^{tau} |phi_p(t) - phi_q(t)|^2 dt.
/// Tends to sum_x (p(x) - q(x))^2 as tau grows. Requires tau > 0, steps >= 1000.
double parseval_quadrature(const RealEmbeddedPmf& p, const RealEmbeddedPmf& q, double tau,
                           std::size_t steps);

// --- general form of the adaptation bound ----------------------------------
//
// For independent A, B over a finite X, a coarsening c : X -> X, scores S, S'
// in [0,1] (S may depend on (A, U), S' on (B, U)), U independent of A and B,
// and any f : X x U -> [0,1]:
//   E|S - f(A,U)| <= gamma + phi + E|S' - f(B,U)| + sqrt(eps_c(A,B) * delta).

struct GeneralizedBoundTerms {
  double lhs = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
  double source = 0.0;       // E|S' - f(B,U)|
  double epsilon = 0.0;
  double delta = 0.0;        // E_U sum_x |g - f|
  double delta_tight = 0.0;  // (E_U (sum_x |g - f|^2)^{1/2})^2 <= delta
  double rhs = 0.0;          // with delta
  double rhs_tight = 0.0;    // with delta_tight
};

struct GeneralizedFuzzOptions {
  std::size_t max_space = 6;
  bool f_equals_g = false;  // evaluate with f set to the solved g
};

// One random instance, fully evaluated.
GeneralizedBoundTerms generalized_bound_trial(std::uint64_t seed, const GeneralizedFuzzOptions& options = {});

// Number of trials whose lhs exceeds either right-hand side by more than 1e-9.
std::size_t generalized_bound_fuzz(std::uint64_t seed, std::size_t trials,
                                   const GeneralizedFuzzOptions& options = {});

// --- random instances shared by tests and the verify command ---------------

std::pair<Pmf, Pmf> random_pmf_pair(std::uint64_t seed, std::size_t max_space, double zero_prob = 0.3);
std::pair<RealEmbeddedPmf, RealEmbeddedPmf> random_integer_pmf_pair(std::uint64_t seed, std::size_t atoms,
                                                                    int max_atom);

// Per-cell best value on the grid {0, step, 2 step, ..., 1}; phi is separable
// over cells, so this is the grid minimizer of phi. Brute force reference for
// solve_g.
GFunction grid_search_g(const BoundProblem& bp, double step = 0.01);

/// One named oracle check and its outcome.
struct OracleCheck {
  std::string name;
  bool passed = false;
  double worst = 0.0;       // largest observed error / violation count
  double tolerance = 0.0;
  std::size_t cases = 0;
  bool informational = false;  // reported, not part of the pass/fail verdict
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t l2_pairs = 10000;
  std::size_t quadrature_pairs = 100;
  std::size_t bound_trials = 10000;
  std::size_t generalized_trials = 10000;
  std::size_t g_optimality_cases = 500;
  std::size_t bijection_cases = 1000;
};

std::vector<OracleCheck> run_oracle_suite(const VerifyOptions& options);

}  // namespace tdshift
