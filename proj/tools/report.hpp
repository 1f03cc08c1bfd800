#pragma once

// JSON-lines report: one record per check, then a summary object.

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

namespace bethe3::cli {

inline constexpr const char* kReportSchema = "bethe3-report/1";

enum class Status { pass, fail, skip };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::skip: return "skip";
  }
  return "?";
}

struct CheckRecord {
  std::string suite;
  std::string name;
  std::string anchor;
  nlohmann::json params = nlohmann::json::object();
  Status status = Status::pass;
  double max_deviation = 0;
  double wall_time_s = -1;  ///< negative until the runner fills it in
  std::string message;
  /// Extra timing measurements (bench); stripped together with wall_time_s
  /// when reports are compared.
  nlohmann::json timing;
};

struct Counts {
  std::size_t pass = 0, fail = 0, skip = 0;
  std::size_t total() const { return pass + fail + skip; }
};

struct Report {
  std::vector<CheckRecord> records;
  nlohmann::json config;
  std::string version;
  unsigned threads = 1;
  double wall_time_s = 0;

  Counts counts() const {
    Counts c;
    for (const auto& r : records) {
      if (r.status == Status::pass) ++c.pass;
      else if (r.status == Status::fail) ++c.fail;
      else ++c.skip;
    }
    return c;
  }
  bool all_passed() const { return counts().fail == 0; }
};

inline nlohmann::json deviation_json(double d) {
  if (!std::isfinite(d)) return nullptr;
  return d;
}

inline nlohmann::json to_json(const CheckRecord& r) {
  nlohmann::json j = {{"schema", kReportSchema},
                      {"type", "check"},
                      {"suite", r.suite},
                      {"name", r.name},
                      {"anchor", r.anchor},
                      {"params", r.params},
                      {"status", to_string(r.status)},
                      {"max_deviation", deviation_json(r.max_deviation)},
                      {"wall_time_s", r.wall_time_s}};
  if (!r.message.empty()) j["message"] = r.message;
  if (!r.timing.is_null()) j["timing"] = r.timing;
  return j;
}

inline nlohmann::json summary_json(const Report& rep) {
  const Counts c = rep.counts();
  return {{"schema", kReportSchema},
          {"type", "summary"},
          {"counts", {{"pass", c.pass}, {"fail", c.fail}, {"skip", c.skip}, {"total", c.total()}}},
          {"config", rep.config},
          {"version", rep.version},
          {"runtime", {{"threads", rep.threads}, {"wall_time_s", rep.wall_time_s}}}};
}

inline void write_report(std::ostream& os, const Report& rep) {
  for (const auto& r : rep.records) os << to_json(r).dump() << '\n';
  os << summary_json(rep).dump() << '\n';
}

/// Removes timing fields (runtime and wall-clock measurements) from one parsed
/// report line, leaving the content that must be reproducible.
inline nlohmann::json strip_timing(nlohmann::json line) {
  line.erase("wall_time_s");
  line.erase("timing");
  line.erase("runtime");
  return line;
}

/// The report lines in the form compared across runs.
inline std::vector<std::string> comparable_lines(const Report& rep) {
  std::vector<std::string> out;
  for (const auto& r : rep.records) out.push_back(strip_timing(to_json(r)).dump());
  out.push_back(strip_timing(summary_json(rep)).dump());
  return out;
}

}  // namespace bethe3::cli
