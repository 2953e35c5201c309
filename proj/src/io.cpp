#include "tdshift/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace tdshift::io {

InputError::InputError(const fs::path& file, std::size_t line, const std::string& detail)
    : Error("input-error", file.string() + ":" + std::to_string(line) + ": " + detail), file_(file), line_(line) {}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw InputError(file, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError(file, 0, "cannot write file");
  out << text;
}

namespace {

std::size_t line_at(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

double parse_number(const std::string& field, const fs::path& file, std::size_t line, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != field.size() || !std::isfinite(v))
    throw InputError(file, line, std::string("bad ") + what + " '" + field + "'");
  return v;
}

std::uint64_t parse_count(const std::string& field, const fs::path& file, std::size_t line) {
  if (field.empty() || !std::all_of(field.begin(), field.end(), [](unsigned char ch) { return std::isdigit(ch); }))
    throw InputError(file, line, "bad count '" + field + "'");
  try {
    return std::stoull(field);
  } catch (const std::exception&) {
    throw InputError(file, line, "count out of range '" + field + "'");
  }
}

std::map<Label, double> number_map(const JsonDocument& doc, const Json& j, const std::string& key) {
  if (!j.is_object()) doc.fail(key, "'" + key + "' must be an object of numbers");
  std::map<Label, double> out;
  for (const auto& [label, v] : j.items()) {
    if (!v.is_number()) doc.fail(label, "mass of '" + label + "' is not a number");
    out[label] = v.get<double>();
  }
  return out;
}

const Json& member(const JsonDocument& doc, const Json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) doc.fail(key, "missing field '" + key + "'");
  return j.at(key);
}

void check_schema(const JsonDocument& doc) {
  if (!doc.value.is_object()) doc.fail("", "expected a JSON object");
  if (!doc.value.contains("schema_version")) return;
  const auto& v = doc.value.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    doc.fail("schema_version", "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
}

}  // namespace

std::size_t JsonDocument::line_of(const std::string& key) const {
  if (key.empty()) return 1;
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_at(text, pos);
}

void JsonDocument::fail(const std::string& key, const std::string& detail) const {
  throw InputError(file, line_of(key), detail);
}

JsonDocument read_json(const fs::path& file) {
  JsonDocument doc{file, read_text(file), {}};
  try {
    doc.value = Json::parse(doc.text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(file, line_at(doc.text, e.byte == 0 ? 0 : e.byte - 1), "invalid JSON");
  }
  return doc;
}

std::vector<JsonLine> read_jsonl(const fs::path& file) {
  const auto lines = split_lines(read_text(file));
  std::vector<JsonLine> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    try {
      out.push_back({i + 1, Json::parse(lines[i])});
    } catch (const nlohmann::json::parse_error&) {
      throw InputError(file, i + 1, "invalid JSON record");
    }
  }
  return out;
}

CsvTable read_csv(const fs::path& file) {
  const auto lines = split_lines(read_text(file));
  CsvTable table;
  bool have_header = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    const std::string& s = lines[i];
    for (std::size_t k = 0; k < s.size(); ++k) {
      const char ch = s[k];
      if (quoted) {
        if (ch == '"' && k + 1 < s.size() && s[k + 1] == '"') {
          field.push_back('"');
          ++k;
        } else if (ch == '"') {
          quoted = false;
        } else {
          field.push_back(ch);
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else {
        field.push_back(ch);
      }
    }
    if (quoted) throw InputError(file, i + 1, "unterminated quoted field");
    fields.push_back(std::move(field));
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw InputError(file, i + 1,
                       "expected " + std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
    table.rows.push_back({i + 1, std::move(fields)});
  }
  if (!have_header) throw InputError(file, 1, "empty CSV file");
  return table;
}

bool has_json_extension(const fs::path& file) {
  auto ext = file.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".json";
}

// ---------------------------------------------------------------------------

SampleSet read_samples_csv(const fs::path& file) {
  const auto t = read_csv(file);
  std::map<Label, std::uint64_t> counts;
  if (t.header == std::vector<std::string>{"label", "count"}) {
    for (const auto& r : t.rows) {
      if (r.fields[0].empty()) throw InputError(file, r.line, "empty label");
      counts[r.fields[0]] += parse_count(r.fields[1], file, r.line);
    }
  } else if (t.header == std::vector<std::string>{"label"}) {
    for (const auto& r : t.rows) {
      if (r.fields[0].empty()) throw InputError(file, r.line, "empty label");
      counts[r.fields[0]] += 1;
    }
  } else {
    throw InputError(file, 1, "expected header 'label,count' or 'label'");
  }
  std::uint64_t n = 0;
  for (const auto& [label, c] : counts) n += c;
  if (n == 0) throw InputError(file, 1, "no observations");
  std::erase_if(counts, [](const auto& kv) { return kv.second == 0; });
  return SampleSet::from_counts(counts);
}

Pmf read_pmf_json(const fs::path& file) {
  const auto doc = read_json(file);
  check_schema(doc);
  const auto mass = number_map(doc, member(doc, doc.value, "pmf"), "pmf");
  try {
    return Pmf::from_map(mass);
  } catch (const Error& e) {
    doc.fail("pmf", e.what());
  }
}

JointModel read_joint_json(const fs::path& file) {
  const auto doc = read_json(file);
  check_schema(doc);
  auto table = [&](const std::string& key) {
    const auto& j = member(doc, doc.value, key);
    if (!j.is_object()) doc.fail(key, "'" + key + "' must map contexts to rows");
    JointModel::Table t;
    for (const auto& [ctx, row] : j.items()) t[ctx] = number_map(doc, row, ctx);
    return t;
  };
  const auto contexts = number_map(doc, member(doc, doc.value, "contexts"), "contexts");
  const auto noise = number_map(doc, member(doc, doc.value, "noise"), "noise");
  const auto human = table("human"), gen1 = table("gen1"), gen2 = table("gen2");
  try {
    return JointModel::from_tables(contexts, human, gen1, gen2, noise);
  } catch (const Error& e) {
    doc.fail(e.code() == "invalid-joint" ? "" : "contexts", e.what());
  }
}

EmbeddingTable read_embeddings(const fs::path& file) {
  std::vector<Label> ids;
  std::vector<std::vector<double>> vecs;
  std::vector<std::size_t> lines;
  if (file.extension() == ".jsonl") {
    for (const auto& rec : read_jsonl(file)) {
      if (!rec.value.is_object() || !rec.value.contains("id") || !rec.value.at("id").is_string() ||
          !rec.value.contains("vector") || !rec.value.at("vector").is_array())
        throw InputError(file, rec.line, "expected {\"id\": string, \"vector\": [numbers]}");
      std::vector<double> v;
      for (const auto& x : rec.value.at("vector")) {
        if (!x.is_number()) throw InputError(file, rec.line, "non-numeric vector entry");
        v.push_back(x.get<double>());
      }
      ids.push_back(rec.value.at("id").get<std::string>());
      vecs.push_back(std::move(v));
      lines.push_back(rec.line);
    }
  } else {
    const auto t = read_csv(file);
    if (t.header.size() < 2 || t.header[0] != "id") throw InputError(file, 1, "expected header 'id,v1,...,vd'");
    for (const auto& r : t.rows) {
      std::vector<double> v;
      for (std::size_t k = 1; k < r.fields.size(); ++k) v.push_back(parse_number(r.fields[k], file, r.line, "coordinate"));
      ids.push_back(r.fields[0]);
      vecs.push_back(std::move(v));
      lines.push_back(r.line);
    }
  }
  if (ids.empty()) throw InputError(file, 1, "no embeddings");
  // Row-level checks first so the diagnostic can point at a line.
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (vecs[i].size() != vecs[0].size()) throw InputError(file, lines[i], "dim-mismatch: row has a different dimension");
    for (double x : vecs[i])
      if (!std::isfinite(x)) throw InputError(file, lines[i], "invalid-embedding: non-finite coordinate");
  }
  std::map<Label, std::size_t> seen;
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (!seen.emplace(ids[i], i).second) throw InputError(file, lines[i], "duplicate-id '" + ids[i] + "'");
  return EmbeddingTable(std::move(ids), std::move(vecs));
}

Json coarsening_to_json(const CoarseningFunction& c) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["k"] = c.k();
  j["dim"] = c.dim();
  j["centroids"] = c.centroids();
  j["representatives"] = c.representatives();
  Json assignment = Json::object();
  for (const auto& [id, cluster] : c.assignment()) assignment[id] = cluster;
  j["assignment"] = assignment;
  j["diagnostics"] = {{"k_reduced", c.k_reduced},
                      {"converged", c.converged},
                      {"iterations", c.iterations},
                      {"sse_history", c.sse_history}};
  return j;
}

CoarseningFunction coarsening_from_json(const JsonDocument& doc) {
  check_schema(doc);
  const auto& v = doc.value;
  try {
    const auto k = member(doc, v, "k").get<std::size_t>();
    const auto dim = member(doc, v, "dim").get<std::size_t>();
    auto centroids = member(doc, v, "centroids").get<std::vector<std::vector<double>>>();
    auto reps = member(doc, v, "representatives").get<std::vector<Label>>();
    std::map<Label, std::size_t> assignment;
    const auto& a = member(doc, v, "assignment");
    if (!a.is_object()) doc.fail("assignment", "'assignment' must be an object");
    for (const auto& [id, cluster] : a.items()) {
      if (!cluster.is_number_unsigned()) doc.fail(id, "cluster of '" + id + "' is not an index");
      assignment[id] = cluster.get<std::size_t>();
    }
    return CoarseningFunction(k, dim, std::move(centroids), std::move(reps), std::move(assignment));
  } catch (const nlohmann::json::exception& e) {
    doc.fail("", std::string("malformed coarsening: ") + e.what());
  } catch (const Error& e) {
    if (dynamic_cast<const InputError*>(&e)) throw;
    doc.fail("representatives", e.what());
  }
}

LabelMap read_label_map(const fs::path& file) {
  const auto doc = read_json(file);
  check_schema(doc);
  if (doc.value.contains("map")) {
    const auto& m = doc.value.at("map");
    if (!m.is_object()) doc.fail("map", "'map' must be an object of labels");
    LabelMap out;
    for (const auto& [d, x] : m.items()) {
      if (!x.is_string()) doc.fail(d, "coarse label of '" + d + "' is not a string");
      out[d] = x.get<std::string>();
    }
    return out;
  }
  return coarsening_from_json(doc).representative_map();
}

// ---------------------------------------------------------------------------

Dialogue dialogue_from_json(const Json& j) {
  if (!j.is_object()) throw Error("schema", "dialogue must be an object");
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_string()) throw Error("schema", std::string("missing string field '") + key + "'");
    return j.at(key).get<std::string>();
  };
  Dialogue d;
  d.id = str("id");
  d.context_id = str("context_id");
  if (!j.contains("turns") || !j.at("turns").is_array()) throw Error("schema", "missing array field 'turns'");
  for (const auto& t : j.at("turns")) {
    if (!t.is_object() || !t.contains("q") || !t.at("q").is_string() || !t.contains("a") || !t.at("a").is_string())
      throw Error("schema", "turns must be {\"q\": string, \"a\": string}");
    d.turns.push_back({tokenize(t.at("q").get<std::string>()), t.at("a").get<std::string>()});
  }
  d.validate(std::numeric_limits<std::size_t>::max());
  return d;
}

Json dialogue_to_json(const Dialogue& d) {
  Json turns = Json::array();
  for (const auto& t : d.turns) {
    std::string q;
    for (const auto& tok : t.question) q += (q.empty() ? "" : " ") + tok;
    turns.push_back({{"q", q}, {"a", t.answer}});
  }
  return {{"id", d.id}, {"context_id", d.context_id}, {"turns", turns}};
}

std::vector<Dialogue> read_dialogues(const fs::path& file) {
  std::vector<Dialogue> out;
  for (const auto& rec : read_jsonl(file)) {
    try {
      out.push_back(dialogue_from_json(rec.value));
    } catch (const Error& e) {
      throw InputError(file, rec.line, e.what());
    }
  }
  return out;
}

PairedCorpus read_paired_corpus(const fs::path& file) {
  std::vector<PairedItem> items;
  for (const auto& rec : read_jsonl(file)) {
    try {
      const auto& j = rec.value;
      if (!j.is_object() || !j.contains("context_id") || !j.at("context_id").is_string())
        throw Error("schema", "missing string field 'context_id'");
      if (!j.contains("human") || !j.contains("generated")) throw Error("schema", "missing 'human' or 'generated'");
      auto human = std::make_shared<const Dialogue>(dialogue_from_json(j.at("human")));
      Dialogue generated = dialogue_from_json(j.at("generated"));
      std::string noise = "u0";
      if (j.contains("noise")) {
        if (!j.at("noise").is_string()) throw Error("schema", "'noise' must be a string");
        noise = j.at("noise").get<std::string>();
      }
      items.push_back({j.at("context_id").get<std::string>(), *human, std::move(generated), Noise{noise, human}});
      // Validate pair by pair so the failing line is known.
      PairedCorpus({items.back()});
    } catch (const Error& e) {
      throw InputError(file, rec.line, e.what());
    }
  }
  if (items.empty()) throw InputError(file, 1, "empty corpus");
  return PairedCorpus(std::move(items));
}

ScoreTable read_score_table(const fs::path& file) {
  const auto t = read_csv(file);
  if (t.header != std::vector<std::string>{"dialogue_id", "u_id", "score"})
    throw InputError(file, 1, "expected header 'dialogue_id,u_id,score'");
  ScoreTable table;
  for (const auto& r : t.rows) {
    const double v = parse_number(r.fields[2], file, r.line, "score");
    if (v < 0.0 || v > 1.0) throw InputError(file, r.line, "score outside [0,1]");
    if (!table.emplace(std::make_pair(r.fields[0], r.fields[1]), v).second)
      throw InputError(file, r.line, "duplicate (dialogue_id, u_id)");
  }
  return table;
}

std::vector<TestFunction> default_test_set() {
  return {lexical_diversity(), repetition_indicator(), reference_overlap()};
}

std::vector<TestFunction> tests_from_json(const JsonDocument& doc) {
  check_schema(doc);
  const auto& list = member(doc, doc.value, "tests");
  if (!list.is_array() || list.empty()) doc.fail("tests", "'tests' must be a nonempty array");
  std::vector<TestFunction> out;
  for (const auto& t : list) {
    if (!t.is_object() || !t.contains("type") || !t.at("type").is_string())
      doc.fail("tests", "every test needs a string 'type'");
    const auto type = t.at("type").get<std::string>();
    auto name = [&](const char* fallback) {
      if (!t.contains("name")) return std::string(fallback);
      if (!t.at("name").is_string()) doc.fail("name", "'name' must be a string");
      return t.at("name").get<std::string>();
    };
    if (type == "lexical_diversity") {
      out.push_back(lexical_diversity());
    } else if (type == "repetition") {
      out.push_back(repetition_indicator());
    } else if (type == "reference_overlap") {
      out.push_back(reference_overlap());
    } else if (type == "strategy") {
      if (!t.contains("keywords") || !t.at("keywords").is_array() || t.at("keywords").empty())
        doc.fail("keywords", "strategy test needs a nonempty 'keywords' array");
      std::vector<std::string> kw;
      for (const auto& k : t.at("keywords")) {
        if (!k.is_string()) doc.fail("keywords", "keywords must be strings");
        kw.push_back(k.get<std::string>());
      }
      out.push_back(strategy_proportion(name("strategy"), keyword_classifier(std::move(kw))));
    } else if (type == "scores") {
      if (!t.contains("table") || !t.at("table").is_string()) doc.fail("table", "scores test needs a 'table' path");
      fs::path table = t.at("table").get<std::string>();
      if (table.is_relative()) table = doc.file.parent_path() / table;
      out.push_back(external_scores(name(table.stem().string().c_str()), read_score_table(table)));
    } else {
      doc.fail(type, "unknown test type '" + type + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

sim::SweepConfig sweep_config_from_json(const JsonDocument& doc) {
  check_schema(doc);
  sim::SweepConfig cfg;
  const auto& v = doc.value;
  try {
    if (v.contains("game")) {
      const auto& g = v.at("game");
      if (!g.is_object()) doc.fail("game", "'game' must be an object");
      if (g.contains("n_contexts")) cfg.game.n_contexts = g.at("n_contexts").get<std::size_t>();
      if (g.contains("n_objects_per_context"))
        cfg.game.n_objects_per_context = g.at("n_objects_per_context").get<std::size_t>();
      if (g.contains("m")) cfg.game.m = g.at("m").get<std::size_t>();
      if (g.contains("n_states")) cfg.game.n_states = g.at("n_states").get<std::size_t>();
      if (g.contains("attributes")) {
        cfg.game.attributes.clear();
        for (const auto& a : g.at("attributes"))
          cfg.game.attributes.push_back({a.at("name").get<std::string>(), a.at("values").get<std::vector<std::string>>()});
      }
    }
    if (v.contains("magnitudes")) cfg.magnitudes = v.at("magnitudes").get<std::vector<double>>();
    if (v.contains("seeds")) cfg.seeds = v.at("seeds").get<std::vector<std::uint64_t>>();
    if (v.contains("corpus_size")) cfg.corpus_size = v.at("corpus_size").get<std::size_t>();
    if (v.contains("rollouts")) cfg.rollouts = v.at("rollouts").get<std::size_t>();
    if (v.contains("k")) cfg.k = v.at("k").get<std::size_t>();
    if (v.contains("pretrain_step")) cfg.pretrain_step = v.at("pretrain_step").get<double>();
    if (v.contains("epochs")) cfg.epochs = v.at("epochs").get<std::size_t>();
    if (v.contains("step")) cfg.step = v.at("step").get<double>();
    if (v.contains("compare_seeds")) cfg.compare_seeds = v.at("compare_seeds").get<std::vector<std::uint64_t>>();
    if (v.contains("tests")) cfg.tests = v.at("tests").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    doc.fail("", std::string("malformed scenario: ") + e.what());
  }
  for (double m : cfg.magnitudes)
    if (!(m >= 0.0) || !std::isfinite(m)) doc.fail("magnitudes", "magnitudes must be finite and nonnegative");
  if (!(cfg.step >= 0.0)) doc.fail("step", "step must be nonnegative");
  if (cfg.corpus_size == 0 || cfg.rollouts == 0 || cfg.k == 0)
    doc.fail("corpus_size", "corpus_size, rollouts and k must be at least 1");
  try {
    cfg.game.validate();
  } catch (const Error& e) {
    doc.fail("game", e.what());
  }
  return cfg;
}

Json sweep_config_to_json(const sim::SweepConfig& cfg) {
  Json attrs = Json::array();
  for (const auto& a : cfg.game.attributes) attrs.push_back({{"name", a.name}, {"values", a.values}});
  return {{"game",
           {{"n_contexts", cfg.game.n_contexts},
            {"n_objects_per_context", cfg.game.n_objects_per_context},
            {"m", cfg.game.m},
            {"n_states", cfg.game.n_states},
            {"attributes", attrs}}},
          {"magnitudes", cfg.magnitudes},
          {"seeds", cfg.seeds},
          {"corpus_size", cfg.corpus_size},
          {"rollouts", cfg.rollouts},
          {"k", cfg.k},
          {"pretrain_step", cfg.pretrain_step},
          {"epochs", cfg.epochs},
          {"step", cfg.step},
          {"compare_seeds", cfg.compare_seeds},
          {"tests", cfg.tests}};
}

}  // namespace tdshift::io
