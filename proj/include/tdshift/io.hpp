#pragma once

// File formats. Every reader reports malformed input as InputError naming the
// file and the 1-based line of the offending record.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdshift/coarsening.hpp"
#include "tdshift/dist.hpp"
#include "tdshift/sim.hpp"
#include "tdshift/testdiv.hpp"

namespace tdshift::io {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

class InputError : public Error {
 public:
  InputError(const fs::path& file, std::size_t line, const std::string& detail);
  const fs::path& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  fs::path file_;
  std::size_t line_;
};

std::string read_text(const fs::path& file);
void write_text(const fs::path& file, const std::string& text);

// A parsed JSON document with enough of the source kept to locate keys.
struct JsonDocument {
  fs::path file;
  std::string text;
  Json value;

  // Line of the first occurrence of "key" in the source, or 1.
  std::size_t line_of(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& detail) const;
};

JsonDocument read_json(const fs::path& file);

struct JsonLine {
  std::size_t line;
  Json value;
};
// Blank lines are skipped.
std::vector<JsonLine> read_jsonl(const fs::path& file);

struct CsvRow {
  std::size_t line;
  std::vector<std::string> fields;
};
// Comma separated, double-quoted fields may contain commas and "" escapes.
// The header row is returned separately.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};
CsvTable read_csv(const fs::path& file);

bool has_json_extension(const fs::path& file);

// label,count rows, or a bare label column with one observation per row.
SampleSet read_samples_csv(const fs::path& file);
// {"schema_version": 1, "pmf": {"label": mass, ...}}
Pmf read_pmf_json(const fs::path& file);
// {"schema_version": 1, "contexts": {..}, "human": {ctx: {dialogue: p}},
//  "gen1": {..}, "gen2": {..}, "noise": {..}}
JointModel read_joint_json(const fs::path& file);

// CSV (id, v1..vd) or JSONL {"id": .., "vector": [..]}.
EmbeddingTable read_embeddings(const fs::path& file);

Json coarsening_to_json(const CoarseningFunction& c);
CoarseningFunction coarsening_from_json(const JsonDocument& doc);
// A fitted coarsening (representatives) or {"map": {dialogue: coarse label}}.
LabelMap read_label_map(const fs::path& file);

// {id, context_id, turns: [{q, a}]}
Dialogue dialogue_from_json(const Json& j);
Json dialogue_to_json(const Dialogue& d);
std::vector<Dialogue> read_dialogues(const fs::path& file);

// {context_id, human: <dialogue>, generated: <dialogue>, noise: "u"}; the
// human dialogue doubles as the noise reference.
PairedCorpus read_paired_corpus(const fs::path& file);

// dialogue_id,u_id,score
ScoreTable read_score_table(const fs::path& file);

// {"tests": [{"type": "strategy", "name": .., "keywords": [..]},
//            {"type": "lexical_diversity"}, {"type": "repetition"},
//            {"type": "reference_overlap"},
//            {"type": "scores", "name": .., "table": "file.csv"}]}
// Relative table paths resolve against the spec's directory.
std::vector<TestFunction> tests_from_json(const JsonDocument& doc);
std::vector<TestFunction> default_test_set();

sim::SweepConfig sweep_config_from_json(const JsonDocument& doc);
Json sweep_config_to_json(const sim::SweepConfig& cfg);

}  // namespace tdshift::io
