#include "tdshift/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <sstream>

namespace tdshift::report {

std::string digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_digest(const io::fs::path& file) { return digest(io::read_text(file)); }

void RunManifest::add_input(const io::fs::path& file) { input_digests[file.string()] = file_digest(file); }

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json RunManifest::to_json() const {
  Json inputs = Json::object();
  for (const auto& [path, d] : input_digests) inputs[path] = d;
  return {{"command", command},
          {"config_digest", config_digest},
          {"seed", seed},
          {"versions", {{"tdshift", kVersion}, {"schema_version", io::kSchemaVersion}}},
          {"input_digests", inputs},
          {"timestamps", {{"started", started}, {"finished", finished}}}};
}

Json to_json(const EnergyValue& e) { return {{"value", e.value}, {"mode", std::string(to_string(e.mode))}}; }

Json to_json(const TDReport& r) {
  Json per = Json::object();
  for (const auto& [name, v] : r.per_test) per[name] = v;
  return {{"per_test", per}, {"total", r.total}, {"n_pairs", r.n_pairs}, {"skipped", r.skipped}};
}

Json to_json(const BoundReport& r) {
  return {{"gamma", r.gamma},
          {"phi", r.phi},
          {"delta", r.delta},
          {"epsilon", to_json(r.epsilon)},
          {"td_source", r.td_source},
          {"td_target", r.td_target},
          {"rhs", r.rhs},
          {"unconstrained_cells", r.unconstrained_cells}};
}

Json to_json(const OracleCheck& c) {
  return {{"name", c.name},     {"passed", c.passed}, {"worst", c.worst},
          {"tolerance", c.tolerance}, {"cases", c.cases}, {"informational", c.informational}};
}

Json to_json(const sim::SweepRow& r) {
  Json dtd = Json::object();
  for (const auto& [name, v] : r.dtd) dtd[name] = v;
  return {{"magnitude", r.magnitude},         {"seed", r.seed},   {"epsilon", r.epsilon},
          {"dtd", dtd}, {"total_abs_dtd", r.total_abs_dtd}, {"changed_entries", r.changed_entries}};
}

Json to_json(const sim::ArmSummary& a) {
  return {{"epsilon_per_transition", a.epsilon_per_transition},
          {"abs_dtd_per_transition", a.abs_dtd_per_transition},
          {"mean_epsilon", a.mean_epsilon},
          {"total_abs_dtd", a.total_abs_dtd},
          {"final_td", a.final_td},
          {"final_task_error", a.final_task_error},
          {"changed_entries", a.changed_entries}};
}

Json envelope(const std::string& kind, const RunManifest& m, Json payload) {
  Json out = {{"schema_version", io::kSchemaVersion}, {"kind", kind}, {"manifest", m.to_json()}};
  for (auto& [key, v] : payload.items()) out[key] = v;
  return out;
}

Json strip_timestamps(Json report) {
  if (report.contains("manifest") && report["manifest"].is_object()) report["manifest"].erase("timestamps");
  return report;
}

std::string to_text(const Json& report) { return report.dump(2) + "\n"; }

std::string sweep_csv(const std::vector<sim::SweepRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << "magnitude,seed,epsilon";
  if (!rows.empty())
    for (const auto& [name, v] : rows.front().dtd) out << ",dtd_" << name;
  out << ",total_abs_dtd,changed_entries\n";
  for (const auto& r : rows) {
    out << r.magnitude << ',' << r.seed << ',' << r.epsilon;
    for (const auto& [name, v] : r.dtd) out << ',' << v;
    out << ',' << r.total_abs_dtd << ',' << r.changed_entries << '\n';
  }
  return out.str();
}

ComparisonSummary summarize(const std::vector<sim::CompareRow>& rows) {
  ComparisonSummary s;
  s.seeds = rows.size();
  for (const auto& r : rows) {
    s.leather_lower_epsilon += r.leather.mean_epsilon < r.cl.mean_epsilon ? 1 : 0;
    s.leather_lower_or_equal_dtd += r.leather.total_abs_dtd <= r.cl.total_abs_dtd ? 1 : 0;
  }
  return s;
}

}  // namespace tdshift::report
