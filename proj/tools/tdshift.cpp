// tdshift: energy, test divergence, adaptation bound, oracle checks and the
// game simulator from the command line.
//
// Exit codes: 0 success, 2 input error, 3 theory assertion failed.

#include <cstdio>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "tdshift/bound.hpp"
#include "tdshift/coarsening.hpp"
#include "tdshift/energy.hpp"
#include "tdshift/io.hpp"
#include "tdshift/oracle.hpp"
#include "tdshift/report.hpp"
#include "tdshift/sim.hpp"
#include "tdshift/testdiv.hpp"

namespace {

using namespace tdshift;
using io::Json;
namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kTheoryFailure = 3;

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed")->required();
  cmd->add_option("--out", c.out, "Output file (stdout when omitted)");
  cmd->add_option("--config", c.config, "Command settings JSON")->check(CLI::ExistingFile);
}

report::RunManifest start(const std::string& command, const Common& c) {
  report::RunManifest m;
  m.command = command;
  m.seed = c.seed;
  m.started = report::utc_now();
  if (!c.config.empty()) m.add_input(c.config);
  return m;
}

void emit(const Common& c, report::RunManifest& m, const std::string& kind, const Json& settings, Json payload) {
  m.config_digest = report::digest(settings.dump());
  m.finished = report::utc_now();
  const auto text = report::to_text(report::envelope(kind, m, std::move(payload)));
  if (c.out.empty())
    std::cout << text;
  else
    io::write_text(c.out, text);
}

std::optional<io::JsonDocument> load_config(const Common& c) {
  if (c.config.empty()) return std::nullopt;
  auto doc = io::read_json(c.config);
  if (!doc.value.is_object()) doc.fail("", "config must be a JSON object");
  return doc;
}

template <typename T>
void config_value(const std::optional<io::JsonDocument>& doc, const char* key, T& target) {
  if (!doc || !doc->value.contains(key)) return;
  try {
    target = doc->value.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    doc->fail(key, std::string("bad value for '") + key + "'");
  }
}

// A path setting from the config file; relative paths resolve against the
// config's directory.
void config_path(const std::optional<io::JsonDocument>& doc, const char* key, std::string& target) {
  std::string value;
  config_value(doc, key, value);
  if (value.empty()) return;
  fs::path p(value);
  if (p.is_relative()) p = doc->file.parent_path() / p;
  target = p.string();
}

// --- energy ----------------------------------------------------------------

struct EnergyArgs {
  Common common;
  std::string a, b, coarsening, embeddings;
  std::size_t k = 0;
};

int cmd_energy(EnergyArgs& args) {
  auto m = start("energy", args.common);
  const auto cfg = load_config(args.common);
  if (args.coarsening.empty()) config_path(cfg, "coarsening", args.coarsening);
  if (args.embeddings.empty()) config_path(cfg, "embeddings", args.embeddings);
  if (args.k == 0) config_value(cfg, "k", args.k);
  m.add_input(args.a);
  m.add_input(args.b);

  const bool json_a = io::has_json_extension(args.a), json_b = io::has_json_extension(args.b);
  if (json_a != json_b)
    throw io::InputError(args.b, 1, "inputs must both be label CSVs or both be pmf JSON files");

  std::optional<LabelMap> c;
  Json coarsening_info = {{"source", "none"}};
  if (!args.coarsening.empty()) {
    m.add_input(args.coarsening);
    c = io::read_label_map(args.coarsening);
    coarsening_info = {{"source", "file"}};
  } else if (!args.embeddings.empty()) {
    if (args.k == 0) throw io::InputError(args.embeddings, 1, "--k is required with --embeddings");
    m.add_input(args.embeddings);
    const auto fitted = fit_kmeans(io::read_embeddings(args.embeddings), args.k, args.common.seed);
    c = fitted.representative_map();
    coarsening_info = {{"source", "fitted"}, {"clusters", fitted.num_clusters()}, {"k_reduced", fitted.k_reduced}};
  }

  EnergyValue e;
  if (json_a) {
    const auto p = io::read_pmf_json(args.a), q = io::read_pmf_json(args.b);
    e = c ? energy_coarsened(p, q, *c) : energy_exact(p, q);
  } else {
    const auto p = io::read_samples_csv(args.a), q = io::read_samples_csv(args.b);
    e = c ? energy_coarsened(p, q, *c) : energy_estimate(p, q);
  }
  const Json settings = {{"coarsening", args.coarsening}, {"embeddings", args.embeddings}, {"k", args.k}};
  Json payload = report::to_json(e);
  payload["coarsening"] = coarsening_info;
  emit(args.common, m, "energy", settings, std::move(payload));
  return kOk;
}

// --- testdiv ---------------------------------------------------------------

struct TestdivArgs {
  Common common;
  std::string corpus;
};

int cmd_testdiv(TestdivArgs& args) {
  auto m = start("testdiv", args.common);
  const auto cfg = load_config(args.common);
  const auto tests = cfg ? io::tests_from_json(*cfg) : io::default_test_set();
  m.add_input(args.corpus);
  const auto corpus = io::read_paired_corpus(args.corpus);
  const auto td = test_divergence(corpus, tests);
  Json names = Json::array();
  for (const auto& t : tests) names.push_back(t.name());
  emit(args.common, m, "testdiv", {{"tests", names}}, report::to_json(td));
  return kOk;
}

// --- bound -----------------------------------------------------------------

struct BoundArgs {
  Common common;
  std::string joint, coarsening, dialogues;
};

int cmd_bound(BoundArgs& args) {
  auto m = start("bound", args.common);
  const auto cfg = load_config(args.common);
  if (!cfg) throw io::InputError("--config", 0, "bound needs a test spec via --config");
  if (args.coarsening.empty()) config_path(cfg, "coarsening", args.coarsening);
  if (args.dialogues.empty()) config_path(cfg, "dialogues", args.dialogues);
  if (args.coarsening.empty()) throw io::InputError(args.common.config, 1, "bound needs a coarsening");

  const auto tests = io::tests_from_json(*cfg);
  m.add_input(args.joint);
  m.add_input(args.coarsening);
  const auto joint = io::read_joint_json(args.joint);
  const auto c = io::read_label_map(args.coarsening);

  std::map<Label, Dialogue> dialogues;
  std::map<Label, Dialogue> by_id;
  if (!args.dialogues.empty()) {
    m.add_input(args.dialogues);
    for (auto& d : io::read_dialogues(args.dialogues)) by_id.emplace(d.id, std::move(d));
  }
  for (const auto& label : joint.dialogues().labels()) {
    auto it = by_id.find(label);
    if (it != by_id.end())
      dialogues.emplace(label, it->second);
    else if (args.dialogues.empty())
      dialogues.emplace(label, Dialogue{label, "", {}});
    else
      throw io::InputError(args.dialogues, 1, "no dialogue with id '" + label + "'");
  }
  std::map<Label, Noise> noise;
  for (const auto& u : joint.noise().space().labels()) {
    auto it = by_id.find(u);
    noise.emplace(u, Noise{u, it == by_id.end() ? nullptr : std::make_shared<const Dialogue>(it->second)});
  }

  Json per_test = Json::object();
  bool violated = false;
  for (const auto& t : tests) {
    const auto h = score_from_test(t, dialogues, noise);
    Json entry;
    try {
      entry = report::to_json(evaluate_bound(joint, h, c));
      entry["violated"] = false;
    } catch (const BoundViolation& v) {
      entry = report::to_json(v.report());
      entry["violated"] = true;
      violated = true;
    }
    per_test[t.name()] = entry;
  }
  Json names = Json::array();
  for (const auto& t : tests) names.push_back(t.name());
  emit(args.common, m, "bound", {{"tests", names}, {"coarsening", args.coarsening}, {"dialogues", args.dialogues}},
       {{"tests", per_test}, {"violated", violated}});
  if (violated) std::fprintf(stderr, "tdshift: adaptation bound violated\n");
  return violated ? kTheoryFailure : kOk;
}

// --- verify ----------------------------------------------------------------

struct VerifyArgs {
  Common common;
  std::optional<std::size_t> trials;
};

int cmd_verify(VerifyArgs& args) {
  auto m = start("verify", args.common);
  const auto cfg = load_config(args.common);
  VerifyOptions opt;
  opt.seed = args.common.seed;
  config_value(cfg, "l2_pairs", opt.l2_pairs);
  config_value(cfg, "quadrature_pairs", opt.quadrature_pairs);
  config_value(cfg, "bound_trials", opt.bound_trials);
  config_value(cfg, "generalized_trials", opt.generalized_trials);
  config_value(cfg, "g_optimality_cases", opt.g_optimality_cases);
  config_value(cfg, "bijection_cases", opt.bijection_cases);
  if (args.trials) {
    opt.l2_pairs = opt.quadrature_pairs = opt.bound_trials = opt.generalized_trials = opt.g_optimality_cases =
        opt.bijection_cases = *args.trials;
  }
  const auto checks = run_oracle_suite(opt);
  bool passed = true;
  Json list = Json::array();
  for (const auto& c : checks) {
    if (!c.informational) passed = passed && c.passed;
    list.push_back(report::to_json(c));
  }
  const Json settings = {{"l2_pairs", opt.l2_pairs},
                         {"quadrature_pairs", opt.quadrature_pairs},
                         {"bound_trials", opt.bound_trials},
                         {"generalized_trials", opt.generalized_trials},
                         {"g_optimality_cases", opt.g_optimality_cases},
                         {"bijection_cases", opt.bijection_cases}};
  emit(args.common, m, "verify", settings, {{"passed", passed}, {"checks", list}});
  return passed ? kOk : kTheoryFailure;
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  Common common;
  std::string csv;
  bool no_sweep = false;
  bool no_compare = false;
};

int cmd_simulate(SimulateArgs& args) {
  auto m = start("simulate", args.common);
  const auto cfg_doc = load_config(args.common);
  sim::SweepConfig cfg = cfg_doc ? io::sweep_config_from_json(*cfg_doc) : sim::SweepConfig{};
  cfg.game.seed = args.common.seed;
  cfg.game.validate();

  Json payload = {{"config", io::sweep_config_to_json(cfg)}};
  if (!args.no_sweep) {
    const auto rows = sim::shift_sweep(cfg);
    std::vector<double> eps, dtd;
    Json jrows = Json::array();
    for (const auto& r : rows) {
      eps.push_back(r.epsilon);
      dtd.push_back(r.total_abs_dtd);
      jrows.push_back(report::to_json(r));
    }
    payload["sweep"] = {{"cells", rows.size()}, {"pearson", sim::pearson(eps, dtd)}, {"rows", jrows}};
    std::string csv = args.csv;
    if (csv.empty() && !args.common.out.empty()) csv = fs::path(args.common.out).replace_extension(".csv").string();
    if (!csv.empty()) {
      io::write_text(csv, report::sweep_csv(rows));
      payload["sweep"]["csv"] = fs::path(csv).filename().string();
    }
  }
  if (!args.no_compare) {
    const auto rows = sim::compare_cl_leather(cfg);
    const auto s = report::summarize(rows);
    Json jrows = Json::array();
    for (const auto& r : rows)
      jrows.push_back({{"seed", r.seed}, {"cl", report::to_json(r.cl)}, {"leather", report::to_json(r.leather)}});
    payload["comparison"] = {{"seeds", s.seeds},
                             {"leather_lower_epsilon", s.leather_lower_epsilon},
                             {"leather_lower_or_equal_dtd", s.leather_lower_or_equal_dtd},
                             {"rows", jrows}};
  }
  emit(args.common, m, "simulate", io::sweep_config_to_json(cfg), std::move(payload));
  return kOk;
}

// --- coarsen ---------------------------------------------------------------

struct CoarsenFitArgs {
  Common common;
  std::string embeddings;
  std::size_t k = 0;
  KMeansOptions options;
};

int cmd_coarsen_fit(CoarsenFitArgs& args) {
  auto m = start("coarsen fit", args.common);
  const auto cfg = load_config(args.common);
  if (args.k == 0) config_value(cfg, "k", args.k);
  config_value(cfg, "max_iterations", args.options.max_iterations);
  config_value(cfg, "tolerance", args.options.tolerance);
  if (args.k == 0) throw io::InputError(args.embeddings, 1, "--k is required");
  m.add_input(args.embeddings);
  const auto c = fit_kmeans(io::read_embeddings(args.embeddings), args.k, args.common.seed, args.options);
  Json payload = io::coarsening_to_json(c);
  payload.erase("schema_version");
  emit(args.common, m, "coarsening",
       {{"k", args.k}, {"max_iterations", args.options.max_iterations}, {"tolerance", args.options.tolerance}},
       std::move(payload));
  return kOk;
}

struct CoarsenApplyArgs {
  Common common;
  std::string coarsening, embeddings;
};

int cmd_coarsen_apply(CoarsenApplyArgs& args) {
  auto m = start("coarsen apply", args.common);
  m.add_input(args.coarsening);
  m.add_input(args.embeddings);
  const auto c = io::coarsening_from_json(io::read_json(args.coarsening));
  const auto e = io::read_embeddings(args.embeddings);
  if (e.dim() != c.dim())
    throw io::InputError(args.embeddings, 1,
                         "dim-mismatch: embeddings have dimension " + std::to_string(e.dim()) + ", coarsening " +
                             std::to_string(c.dim()));
  Json out = Json::object();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const auto known = c.cluster_of(e.ids()[i]);
    const std::size_t cluster = known ? *known : c.assign(e.row(i));
    out[e.ids()[i]] = {{"cluster", cluster}, {"representative", c.representatives()[cluster]}, {"fitted", known.has_value()}};
  }
  emit(args.common, m, "assignment", Json::object(), {{"assignments", out}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-based distribution-shift diagnostics for generated dialogue"};
  app.require_subcommand(1);
  app.set_version_flag("--version", report::kVersion);

  EnergyArgs energy;
  auto* e = app.add_subcommand("energy", "Energy between two label CSVs or two pmf JSON files");
  add_common(e, energy.common);
  e->add_option("a", energy.a, "First input")->required()->check(CLI::ExistingFile);
  e->add_option("b", energy.b, "Second input")->required()->check(CLI::ExistingFile);
  e->add_option("--coarsening", energy.coarsening, "Coarsening or label-map JSON")->check(CLI::ExistingFile);
  e->add_option("--embeddings", energy.embeddings, "Embeddings to fit a coarsening on")->check(CLI::ExistingFile);
  e->add_option("--k", energy.k, "Clusters for an on-the-fly coarsening");

  TestdivArgs testdiv;
  auto* t = app.add_subcommand("testdiv", "Test divergence of a paired corpus");
  add_common(t, testdiv.common);
  t->add_option("corpus", testdiv.corpus, "Paired corpus JSONL")->required()->check(CLI::ExistingFile);

  BoundArgs bound;
  auto* b = app.add_subcommand("bound", "Adaptation bound on an enumerable joint model");
  add_common(b, bound.common);
  b->add_option("joint", bound.joint, "Joint model JSON")->required()->check(CLI::ExistingFile);
  b->add_option("--coarsening", bound.coarsening, "Coarsening or label-map JSON")->check(CLI::ExistingFile);
  b->add_option("--dialogues", bound.dialogues, "Dialogue JSONL for text-based tests")->check(CLI::ExistingFile);

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run the oracle suite");
  add_common(v, verify.common);
  v->add_option("--trials", verify.trials, "Use this many cases for every check");

  SimulateArgs simulate;
  auto* s = app.add_subcommand("simulate", "Shift sweep and CL/LEATHER comparison on the game simulator");
  add_common(s, simulate.common);
  s->add_option("--csv", simulate.csv, "Sweep CSV (defaults next to --out)");
  s->add_flag("--no-sweep", simulate.no_sweep, "Skip the shift sweep");
  s->add_flag("--no-compare", simulate.no_compare, "Skip the CL/LEATHER comparison");

  auto* c = app.add_subcommand("coarsen", "Fit or apply a k-means coarsening");
  c->require_subcommand(1);
  CoarsenFitArgs fit;
  auto* cf = c->add_subcommand("fit", "Fit k-means on embeddings");
  add_common(cf, fit.common);
  cf->add_option("embeddings", fit.embeddings, "Embeddings CSV or JSONL")->required()->check(CLI::ExistingFile);
  cf->add_option("--k", fit.k, "Number of clusters");
  cf->add_option("--max-iterations", fit.options.max_iterations, "Lloyd iteration cap");
  cf->add_option("--tolerance", fit.options.tolerance, "Centroid displacement tolerance");
  CoarsenApplyArgs apply;
  auto* ca = c->add_subcommand("apply", "Assign embeddings to a fitted coarsening");
  add_common(ca, apply.common);
  ca->add_option("coarsening", apply.coarsening, "Coarsening JSON")->required()->check(CLI::ExistingFile);
  ca->add_option("embeddings", apply.embeddings, "Embeddings CSV or JSONL")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*e) return cmd_energy(energy);
    if (*t) return cmd_testdiv(testdiv);
    if (*b) return cmd_bound(bound);
    if (*v) return cmd_verify(verify);
    if (*s) return cmd_simulate(simulate);
    if (*cf) return cmd_coarsen_fit(fit);
    if (*ca) return cmd_coarsen_apply(apply);
  } catch (const BoundViolation& err) {
    std::fprintf(stderr, "tdshift: %s\n", err.what());
    return kTheoryFailure;
  } catch (const io::InputError& err) {
    std::fprintf(stderr, "tdshift: %s\n", err.what());
    return kInputError;
  } catch (const Error& err) {
    std::fprintf(stderr, "tdshift: %s\n", err.what());
    return kInputError;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "tdshift: %s\n", err.what());
    return kInputError;
  }
  return kInputError;
}
