// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tdshift/bound.hpp"
#include "tdshift/coarsening.hpp"
#include "tdshift/energy.hpp"
#include "tdshift/io.hpp"
#include "tdshift/oracle.hpp"
#include "tdshift/report.hpp"
#include "tdshift/rng.hpp"

using namespace tdshift;
namespace fs = std::filesystem;
using io::Json;

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double limit_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = limit_seconds <= 0 || secs < limit_seconds;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s %s: %s; %.2fs", pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  if (limit_seconds > 0) std::printf(" (limit %.0fs)", limit_seconds);
  std::printf("\n");
  std::fflush(stdout);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

fs::path workdir;

// Runs the CLI; stdout goes to the returned file.
int cli(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string("'") + TDSHIFT_CLI + "' " + args + " >'" + out.string() + "' 2>>'" +
                          (workdir / "stderr.txt").string() + "'";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json stripped(const fs::path& file) { return report::strip_timestamps(Json::parse(io::read_text(file))); }

}  // namespace

int main(int argc, char** argv) {
  workdir = fs::temp_directory_path() / "tdshift_acceptance";
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--workdir") workdir = argv[i + 1];
  fs::create_directories(workdir);
  const std::string scenario = TDSHIFT_SCENARIO;

  criterion("energy_l2_identity [1e4 pairs, |omega|<=50, gap<=1e-12]", 5, [] {
    double worst = 0.0;
    for (std::size_t i = 0; i < 10000; ++i) {
      const auto [p, q] = random_pmf_pair(child_seed(101, i), 50);
      double l2 = 0.0;
      for (std::size_t k = 0; k < p.space().size(); ++k) l2 += (p[k] - q[k]) * (p[k] - q[k]);
      worst = std::max(worst, std::abs(energy_exact(p, q).value - l2));
    }
    return Outcome{worst <= 1e-12, fmt("worst gap %.3g", worst)};
  });

  criterion("bijective_relabeling [1e3 coarsened sample pairs, exact]", 5, [] {
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
      Rng rng(child_seed(202, i));
      const std::size_t n = 2 + uniform_index(rng, 40);
      std::vector<Label> ids;
      std::vector<std::vector<double>> vecs;
      for (std::size_t k = 0; k < n; ++k) {
        ids.push_back("d" + std::to_string(k));
        vecs.push_back({uniform01(rng), uniform01(rng), uniform01(rng)});
      }
      const auto c = fit_kmeans(EmbeddingTable(ids, vecs), 1 + uniform_index(rng, 10), rng());
      std::map<Label, std::uint64_t> ca, cb;
      const std::size_t na = 1 + uniform_index(rng, 300), nb = 1 + uniform_index(rng, 300);
      for (std::size_t k = 0; k < na; ++k) ++ca[ids[uniform_index(rng, n)]];
      for (std::size_t k = 0; k < nb; ++k) ++cb[ids[uniform_index(rng, n)]];
      const auto a = SampleSet::from_counts(ca), b = SampleSet::from_counts(cb);
      const double by_rep = energy_coarsened(a, b, c.representative_map()).value;
      const double by_label = energy_coarsened(a, b, c.cluster_label_map()).value;
      if (by_rep != by_label) ++mismatches;
    }
    return Outcome{mismatches == 0, std::to_string(mismatches) + " mismatches"};
  });

  criterion("characteristic_fn_quadrature [100 pairs, tau=1e4, err<=1e-2]", 60, [] {
    double worst = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      const auto [p, q] = random_integer_pmf_pair(child_seed(303, i), 5, 10);
      std::map<double, double> diff;
      for (std::size_t k = 0; k < 5; ++k) {
        diff[p.support()[k]] += p.mass()[k];
        diff[q.support()[k]] -= q.mass()[k];
      }
      double l2 = 0.0;
      for (const auto& [a, d] : diff) l2 += d * d;
      worst = std::max(worst, std::abs(parseval_quadrature(p, q, 1e4, 1'000'000) - l2));
    }
    return Outcome{worst <= 1e-2, fmt("worst error %.3g", worst)};
  });

  criterion("adaptation_bound [1e4 instances, violations beyond 1e-9]", 120, [] {
    std::size_t violations = 0;
    double tightest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 10000; ++i) {
      const auto fc = random_bound_case(child_seed(404, i));
      try {
        const auto r = evaluate_bound(fc.joint, score_from_table(fc.scores), fc.coarsening);
        tightest = std::min(tightest, r.rhs - r.td_target);
      } catch (const BoundViolation&) {
        ++violations;
      }
    }
    return Outcome{violations == 0,
                   std::to_string(violations) + " violations, smallest slack " + fmt("%.3g", tightest)};
  });

  criterion("g_optimality [500 instances, phi(solve_g)<=phi(grid)+1e-9]", 60, [] {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < 500; ++i) {
      const auto fc = random_bound_case(child_seed(505, i));
      const BoundProblem bp(fc.joint, score_from_table(fc.scores), fc.coarsening);
      worst = std::max(worst, compute_phi(bp, solve_g(bp)) - compute_phi(bp, grid_search_g(bp)));
    }
    return Outcome{worst <= 1e-9, fmt("worst excess %.3g", worst)};
  });

  criterion("estimator_consistency [n=1e5, |omega|<=20, 10 seeds, err<=0.01]", 0, [] {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto [p, q] = random_pmf_pair(child_seed(606, seed), 20);
      const auto a = sample(p, 100000, child_seed(607, seed));
      const auto b = sample(q, 100000, child_seed(608, seed));
      worst = std::max(worst, std::abs(energy_estimate(a, b).value - energy_exact(p, q).value));
    }
    return Outcome{worst <= 0.01, fmt("worst error %.3g", worst)};
  });

  const auto sweep_out = workdir / "sweep.json";
  criterion("energy_predicts_dtd [default scenario, >=20 cells, pearson>=0.6]", 600, [&] {
    const int code = cli("simulate --seed 0 --no-compare --config '" + scenario + "' --out '" + sweep_out.string() + "'",
                         workdir / "sweep.stdout");
    if (code != 0) return Outcome{false, "simulate exited " + std::to_string(code)};
    const auto j = Json::parse(io::read_text(sweep_out));
    const auto cells = j.at("sweep").at("cells").get<std::size_t>();
    const double r = j.at("sweep").at("pearson").get<double>();
    return Outcome{cells >= 20 && r >= 0.6, std::to_string(cells) + " cells, pearson " + fmt("%.4f", r)};
  });

  const auto compare_out = workdir / "compare.json";
  criterion("leather_vs_cl [10 seeds, lower epsilon >=8, lower-or-equal |dTD| >=6]", 600, [&] {
    const int code = cli("simulate --seed 0 --no-sweep --config '" + scenario + "' --out '" + compare_out.string() + "'",
                         workdir / "compare.stdout");
    if (code != 0) return Outcome{false, "simulate exited " + std::to_string(code)};
    const auto c = Json::parse(io::read_text(compare_out)).at("comparison");
    const auto seeds = c.at("seeds").get<std::size_t>();
    const auto eps = c.at("leather_lower_epsilon").get<std::size_t>();
    const auto dtd = c.at("leather_lower_or_equal_dtd").get<std::size_t>();
    const bool ok = seeds == 10 && eps * 10 >= seeds * 8 && dtd * 2 > seeds;
    return Outcome{ok, "lower epsilon " + std::to_string(eps) + "/" + std::to_string(seeds) +
                           ", lower-or-equal |dTD| " + std::to_string(dtd) + "/" + std::to_string(seeds)};
  });

  criterion("determinism [rerun acceptance commands, payloads identical]", 0, [&] {
    std::vector<std::string> differing;
    auto twice = [&](const std::string& name, const std::string& args, const fs::path& first) {
      // Same file name in a sibling directory, so the invocations match.
      fs::create_directories(workdir / "rerun");
      const auto again = workdir / "rerun" / first.filename();
      if (cli(args + " --out '" + again.string() + "'", workdir / "rerun" / (name + ".stdout")) != 0) {
        differing.push_back(name + " (exit)");
        return;
      }
      if (stripped(first).dump() != stripped(again).dump()) differing.push_back(name);
    };
    twice("sweep", "simulate --seed 0 --no-compare --config '" + scenario + "'", sweep_out);
    twice("compare", "simulate --seed 0 --no-sweep --config '" + scenario + "'", compare_out);
    const auto verify_out = workdir / "verify.json";
    const std::string verify = "verify --seed 0 --trials 20";
    if (cli(verify + " --out '" + verify_out.string() + "'", workdir / "verify.stdout") != 0)
      differing.push_back("verify (exit)");
    else
      twice("verify", verify, verify_out);
    const bool ok = differing.empty();
    std::string detail = ok ? "sweep, compare and verify reports match" : "differing:";
    for (const auto& d : differing) detail += " " + d;
    return Outcome{ok, detail};
  });

  std::printf("%s\n", failures == 0 ? "ALL PASS" : (std::to_string(failures) + " FAILED").c_str());
  return failures == 0 ? 0 : 1;
}
