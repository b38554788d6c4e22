#include "porous/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "porous/errors.hpp"

namespace porous {

using ojson = nlohmann::ordered_json;

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "PASS";
    case Status::fail: return "FAIL";
    case Status::indeterminate: return "INDETERMINATE";
  }
  return "FAIL";
}

Status parse_status(const std::string& s) {
  if (s == "PASS") return Status::pass;
  if (s == "FAIL") return Status::fail;
  if (s == "INDETERMINATE") return Status::indeterminate;
  throw ParseError(0, "unknown status '" + s + "'");
}

namespace {

AuditEntry make_entry(std::string section, std::string id, std::string lemma_ref, double measured, double bound,
                      double margin, Status status, std::string detail) {
  AuditEntry e;
  e.section = std::move(section);
  e.id = std::move(id);
  e.lemma_ref = std::move(lemma_ref);
  e.measured = measured;
  e.bound = bound;
  e.margin = margin + 0.0;  // no -0 in the output
  e.status = status;
  e.detail = std::move(detail);
  return e;
}

// Non-finite reals are stored as strings; JSON has no representation for them.
ojson number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double read_number(const ojson& j, const char* key) {
  if (!j.contains(key)) throw ParseError(0, std::string("report entry missing '") + key + "'");
  const ojson& v = j.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw ParseError(0, std::string("report entry field '") + key + "' is not a number");
}

std::string csv_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  return ojson(v).dump();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

AuditEntry upper_check(std::string section, std::string id, std::string lemma_ref, double measured, double bound,
                       std::string detail) {
  const bool ok = measured <= bound;
  return make_entry(std::move(section), std::move(id), std::move(lemma_ref), measured, bound, bound - measured,
                    ok ? Status::pass : Status::fail, std::move(detail));
}

AuditEntry lower_check(std::string section, std::string id, std::string lemma_ref, double measured, double bound,
                       std::string detail) {
  const bool ok = measured >= bound;
  return make_entry(std::move(section), std::move(id), std::move(lemma_ref), measured, bound, measured - bound,
                    ok ? Status::pass : Status::fail, std::move(detail));
}

AuditEntry zero_check(std::string section, std::string id, std::string lemma_ref, double count, std::string detail) {
  return make_entry(std::move(section), std::move(id), std::move(lemma_ref), count, 0.0, -count,
                    count == 0.0 ? Status::pass : Status::fail, std::move(detail));
}

AuditEntry interval_check(std::string section, std::string id, std::string lemma_ref, double lower, double value,
                          double upper, double bound, std::string detail) {
  Status st = Status::indeterminate;
  if (upper <= bound) st = Status::pass;
  else if (lower > bound) st = Status::fail;
  std::ostringstream d;
  d << "estimate " << value << " in [" << lower << ", " << upper << "]";
  if (!detail.empty()) d << "; " << detail;
  return make_entry(std::move(section), std::move(id), std::move(lemma_ref), upper, bound, bound - upper, st, d.str());
}

Status AuditReport::overall() const {
  bool indeterminate = false;
  for (const AuditEntry& e : entries) {
    if (e.status == Status::fail) return Status::fail;
    if (e.status == Status::indeterminate) indeterminate = true;
  }
  return indeterminate ? Status::indeterminate : Status::pass;
}

ojson report_to_json(const AuditReport& r) {
  ojson j;
  j["schema_version"] = r.schema_version;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["overall"] = to_string(r.overall());
  j["config"] = r.config;
  for (const std::string& section : report_sections()) {
    ojson arr = ojson::array();
    for (const AuditEntry& e : r.entries) {
      if (e.section != section) continue;
      ojson o;
      o["id"] = e.id;
      o["lemma_ref"] = e.lemma_ref;
      o["measured"] = number(e.measured);
      o["bound"] = number(e.bound);
      o["margin"] = number(e.margin);
      o["status"] = to_string(e.status);
      o["detail"] = e.detail;
      arr.push_back(std::move(o));
    }
    j[section] = std::move(arr);
  }
  return j;
}

AuditReport report_from_json(const ojson& j) {
  if (!j.is_object()) throw ParseError(0, "report: expected a JSON object");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer())
    throw ParseError(0, "report: missing schema_version");
  AuditReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion)
    throw ParseError(0, "report: schema version " + std::to_string(r.schema_version) + " is not supported (expected " +
                            std::to_string(kReportSchemaVersion) + ")");
  try {
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = j.at("config");
    for (const std::string& section : report_sections()) {
      if (!j.contains(section)) continue;
      for (const ojson& o : j.at(section)) {
        AuditEntry e;
        e.section = section;
        e.id = o.at("id").get<std::string>();
        e.lemma_ref = o.at("lemma_ref").get<std::string>();
        e.measured = read_number(o, "measured");
        e.bound = read_number(o, "bound");
        e.margin = read_number(o, "margin");
        e.status = parse_status(o.at("status").get<std::string>());
        e.detail = o.value("detail", "");
        r.entries.push_back(std::move(e));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("report: ") + e.what());
  }
  return r;
}

std::string report_json_text(const AuditReport& r) { return report_to_json(r).dump(2) + "\n"; }

std::string report_csv_text(const AuditReport& r) {
  std::string out = "id,lemma_ref,measured,bound,margin,status\n";
  for (const std::string& section : report_sections()) {
    for (const AuditEntry& e : r.entries) {
      if (e.section != section) continue;
      out += csv_field(e.id) + "," + csv_field(e.lemma_ref) + "," + csv_number(e.measured) + "," +
             csv_number(e.bound) + "," + csv_number(e.margin) + "," + to_string(e.status) + "\n";
    }
  }
  return out;
}

std::string report_series_text(const AuditReport& r) {
  std::string out = "section,id,measured,bound,margin,status\n";
  for (const std::string& section : report_sections()) {
    for (const AuditEntry& e : r.entries) {
      if (e.section != section) continue;
      out += section + "," + csv_field(e.id) + "," + csv_number(e.measured) + "," + csv_number(e.bound) + "," +
             csv_number(e.margin) + "," + to_string(e.status) + "\n";
    }
  }
  return out;
}

AuditReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open report " + path);
  ojson j;
  try {
    j = ojson::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, path + ": " + e.what());
  }
  return report_from_json(j);
}

void save_report(const std::string& json_path, const std::string& csv_path, const AuditReport& r) {
  std::ofstream j(json_path, std::ios::binary);
  if (!j) throw InvalidArgument("cannot write " + json_path);
  j << report_json_text(r);
  std::ofstream c(csv_path, std::ios::binary);
  if (!c) throw InvalidArgument("cannot write " + csv_path);
  c << report_csv_text(r);
}

AuditReport merge_reports(const std::vector<AuditReport>& reports) {
  AuditReport out;
  if (reports.empty()) return out;
  out.config_hash = reports.front().config_hash;
  out.seed = reports.front().seed;
  out.config = reports.front().config;
  for (const AuditReport& r : reports) {
    if (r.config_hash != out.config_hash)
      throw InvalidArgument("merge: config hash " + r.config_hash + " differs from " + out.config_hash);
    out.add(r.entries);
  }
  return out;
}

}  // namespace porous
