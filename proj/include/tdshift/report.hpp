#pragma once

// Report payloads. Every report embeds a RunManifest; the manifest's
// "timestamps" member is the only part that varies between identical runs.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tdshift/bound.hpp"
#include "tdshift/energy.hpp"
#include "tdshift/io.hpp"
#include "tdshift/oracle.hpp"
#include "tdshift/sim.hpp"
#include "tdshift/testdiv.hpp"

namespace tdshift::report {

using io::Json;

inline constexpr const char* kVersion = "1.0.0";

// FNV-1a, 64 bit, as 16 lowercase hex digits.
std::string digest(std::string_view bytes);
std::string file_digest(const io::fs::path& file);

struct RunManifest {
  std::string command;
  std::string config_digest;  // of the canonical config JSON
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;  // path as given -> digest
  std::string started;
  std::string finished;

  void add_input(const io::fs::path& file);
  Json to_json() const;
};

// UTC, ISO 8601.
std::string utc_now();

Json to_json(const EnergyValue& e);
Json to_json(const TDReport& r);
Json to_json(const BoundReport& r);
Json to_json(const OracleCheck& c);
Json to_json(const sim::SweepRow& r);
Json to_json(const sim::ArmSummary& a);

// {"schema_version", "kind", "manifest", ...payload}
Json envelope(const std::string& kind, const RunManifest& m, Json payload);
// Drops manifest.timestamps; what determinism checks compare.
Json strip_timestamps(Json report);

std::string to_text(const Json& report);

// magnitude,seed,epsilon,dtd_<test>...,total_abs_dtd,changed_entries
std::string sweep_csv(const std::vector<sim::SweepRow>& rows);

struct ComparisonSummary {
  std::size_t seeds = 0;
  std::size_t leather_lower_epsilon = 0;
  std::size_t leather_lower_or_equal_dtd = 0;
};
ComparisonSummary summarize(const std::vector<sim::CompareRow>& rows);

}  // namespace tdshift::report
