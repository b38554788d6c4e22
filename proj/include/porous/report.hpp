#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace porous {

inline constexpr int kReportSchemaVersion = 1;

enum class Status { pass, fail, indeterminate };
std::string to_string(Status s);
Status parse_status(const std::string& s);

/// One audited inequality or identity. `margin` is positive when the check holds with room
/// to spare (bound - measured for upper bounds, measured - bound for lower bounds).
struct AuditEntry {
  std::string section;  // construction_audits | analysis_audits | budget_ledgers | porosity | verdicts
  std::string id;
  std::string lemma_ref;
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;
  Status status = Status::pass;
  std::string detail;
};

/// measured <= bound.
AuditEntry upper_check(std::string section, std::string id, std::string lemma_ref, double measured, double bound,
                       std::string detail = {});
/// measured >= bound.
AuditEntry lower_check(std::string section, std::string id, std::string lemma_ref, double measured, double bound,
                       std::string detail = {});
/// A count that must be zero.
AuditEntry zero_check(std::string section, std::string id, std::string lemma_ref, double count,
                      std::string detail = {});
/// Upper check against a confidence interval: pass if upper <= bound, fail if lower > bound,
/// indeterminate otherwise.
AuditEntry interval_check(std::string section, std::string id, std::string lemma_ref, double lower, double value,
                          double upper, double bound, std::string detail = {});

inline const std::vector<std::string>& report_sections() {
  static const std::vector<std::string> s{"construction_audits", "analysis_audits", "budget_ledgers", "porosity",
                                          "verdicts"};
  return s;
}

struct AuditReport {
  int schema_version = kReportSchemaVersion;
  std::string config_hash;
  std::uint64_t seed = 0;
  /// Configuration echo plus notes such as the relaxed-mode constant mapping.
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<AuditEntry> entries;

  /// fail if any entry failed, else indeterminate if any is, else pass (also for no entries).
  Status overall() const;
  void add(AuditEntry e) { entries.push_back(std::move(e)); }
  void add(const std::vector<AuditEntry>& es) { entries.insert(entries.end(), es.begin(), es.end()); }
};

nlohmann::ordered_json report_to_json(const AuditReport& r);
/// Throws ParseError on malformed input or a schema-version mismatch.
AuditReport report_from_json(const nlohmann::ordered_json& j);

std::string report_json_text(const AuditReport& r);
/// id,lemma_ref,measured,bound,margin,status
std::string report_csv_text(const AuditReport& r);
/// section,id,measured,bound,margin,status: one row per entry, for plotting.
std::string report_series_text(const AuditReport& r);

AuditReport load_report(const std::string& path);
void save_report(const std::string& json_path, const std::string& csv_path, const AuditReport& r);

/// Concatenates entries. Throws InvalidArgument when config hashes differ.
AuditReport merge_reports(const std::vector<AuditReport>& reports);

}  // namespace porous
