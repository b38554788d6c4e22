#include "porous/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "porous/errors.hpp"
#include "porous/rng.hpp"

namespace porous {

using ojson = nlohmann::ordered_json;

std::string content_hash(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

/// Reads typed fields from one object, collecting every problem instead of stopping at the first.
class Reader {
 public:
  Reader(const ojson& obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {
    if (!obj_.is_object()) errors_.push_back(where() + "must be an object");
  }

  template <class T>
  void get(const char* key, T& out, bool required = false) {
    seen_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) {
      if (required) errors_.push_back(where() + "missing required key '" + key + "'");
      return;
    }
    const ojson& v = obj_.at(key);
    if (!type_ok<T>(v)) {
      errors_.push_back(where() + "'" + key + "' has the wrong type (" + v.type_name() + ")");
      return;
    }
    out = v.get<T>();
  }

  const ojson* child(const char* key) {
    seen_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) return nullptr;
    return &obj_.at(key);
  }

  void reject_unknown() {
    if (!obj_.is_object()) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) errors_.push_back(where() + "unknown key '" + it.key() + "'");
  }

  void check(bool ok, const std::string& msg) {
    if (!ok) errors_.push_back(where() + msg);
  }

 private:
  template <class T>
  static bool type_ok(const ojson& v) {
    if constexpr (std::is_same_v<T, bool>) return v.is_boolean();
    else if constexpr (std::is_same_v<T, std::string>) return v.is_string();
    else if constexpr (std::is_same_v<T, double>) return v.is_number();
    else if constexpr (std::is_same_v<T, int>) return v.is_number_integer();
    else if constexpr (std::is_same_v<T, std::uint64_t>) return v.is_number_unsigned();
    else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) return false;
      for (const ojson& e : v)
        if (!e.is_number()) return false;
      return true;
    } else return false;
  }

  std::string where() const { return path_.empty() ? "" : path_ + ": "; }

  const ojson& obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

[[noreturn]] void fail(const std::string& context, const std::vector<std::string>& errors) {
  std::string msg = context;
  for (const std::string& e : errors) msg += "\n  " + e;
  throw InvalidArgument(msg);
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("config: not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  cfg.document = doc;
  BuildConfig& b = cfg.build;
  AuditSettings& a = cfg.audit;
  std::vector<std::string> errors;

  Reader top(doc, "", errors);
  std::string description;
  top.get("description", description);
  top.get("n", b.n);
  top.get("s", b.s);
  top.get("r", b.r);
  top.get("L", b.L);
  top.get("strict", b.strict);
  top.get("enlargement", b.enlargement);
  top.get("epsilons", b.epsilons, true);
  top.get("stop_fractions", b.stop_fractions);
  top.get("seed", b.seed);
  top.get("workers", b.workers);
  if (const ojson* bj = top.child("budgets")) {
    Reader r(*bj, "budgets", errors);
    r.get("radius_samples", b.budgets.radius_samples);
    r.get("coverage_samples", b.budgets.coverage_samples);
    r.get("packing_density", b.budgets.packing_density);
    r.get("max_levels", b.budgets.max_levels);
    r.get("max_balls", b.budgets.max_balls);
    r.get("max_radius_halvings", b.budgets.max_radius_halvings);
    r.reject_unknown();
  }
  if (const ojson* aj = top.child("audit")) {
    Reader r(*aj, "audit", errors);
    r.get("samples", a.samples);
    r.get("residue_samples", a.residue_samples);
    r.get("porosity_points", a.porosity_points);
    r.get("porosity_tol", a.porosity_tol);
    r.get("analysis_fields", a.analysis_fields);
    r.get("extract_delta", a.extract_delta);
    if (const ojson* cj = r.child("constants")) {
      Reader c(*cj, "audit.constants", errors);
      c.get("budget", a.constants.budget);
      c.get("dbound", a.constants.dbound);
      c.get("area", a.constants.area);
      c.get("flatten", a.constants.flatten);
      c.get("smoothed", a.constants.smoothed);
      c.reject_unknown();
      c.check(a.constants.budget > 0 && a.constants.dbound > 0 && a.constants.area > 0 && a.constants.flatten > 0 &&
                  a.constants.smoothed > 0,
              "constants must be positive");
    }
    r.reject_unknown();
    r.check(a.samples >= 1024, "samples must be >= 1024");
    r.check(a.residue_samples >= 256, "residue_samples must be >= 256");
    r.check(a.porosity_points >= 1, "porosity_points must be >= 1");
    r.check(a.porosity_tol >= 0.0, "porosity_tol must be non-negative");
    r.check(a.analysis_fields >= 1, "analysis_fields must be >= 1");
    r.check(a.extract_delta >= 0.0, "extract_delta must be non-negative");
  }
  top.reject_unknown();
  top.check(b.workers >= 0, "workers must be non-negative");
  if (errors.empty()) {
    try {
      b.validate();
    } catch (const InvalidArgument& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) fail("config: invalid configuration", errors);
  b.config_hash = content_hash(text);
  if (a.extract_delta == 0.0) a.extract_delta = 1e-2 * b.r;
  return cfg;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

ojson config_schema() {
  auto num = [](const char* desc) { return ojson{{"type", "number"}, {"description", desc}}; };
  auto integer = [](const char* desc) { return ojson{{"type", "integer"}, {"description", desc}}; };
  ojson s;
  s["type"] = "object";
  s["required"] = {"epsilons"};
  s["additionalProperties"] = false;
  ojson& p = s["properties"];
  p["description"] = {{"type", "string"}};
  p["n"] = integer("base dimension, >= 3 (default 3)");
  p["s"] = num("base radius, in (0, 1/2) (default 0.25)");
  p["r"] = num("plane slope bound, in (0, 1/32) (default 1/64)");
  p["L"] = num("porosity enlargement, >= 1 (default sqrt(10))");
  p["strict"] = {{"type", "boolean"}, {"description", "use 1/eps^3 enlargements and 2^-(k+3) stops"}};
  p["enlargement"] = num("relaxed enlargement E > 1 (default 1.5)");
  p["epsilons"] = {{"type", "array"}, {"items", {{"type", "number"}}}, {"description", "eps_1..eps_K, each in (0, 1/2)"}};
  p["stop_fractions"] = {{"type", "array"}, {"items", {{"type", "number"}}}, {"description", "relaxed per-stage stop fractions in (0, 1)"}};
  p["seed"] = integer("unsigned 64-bit seed");
  p["workers"] = integer("OpenMP threads, 0 = runtime default");
  p["budgets"] = {{"type", "object"},
                  {"additionalProperties", false},
                  {"properties",
                   {{"radius_samples", integer(">= 1024")},
                    {"coverage_samples", integer(">= 1024")},
                    {"packing_density", num("> 0")},
                    {"max_levels", integer(">= 1")},
                    {"max_balls", integer(">= 1")},
                    {"max_radius_halvings", integer(">= 0")}}}};
  p["audit"] = {{"type", "object"},
                {"additionalProperties", false},
                {"properties",
                 {{"samples", integer(">= 1024")},
                  {"residue_samples", integer(">= 256")},
                  {"porosity_points", integer(">= 1")},
                  {"porosity_tol", num(">= 0")},
                  {"analysis_fields", integer(">= 1")},
                  {"extract_delta", num(">= 0; 0 selects 1e-2 r")},
                  {"constants",
                   {{"type", "object"},
                    {"additionalProperties", false},
                    {"properties",
                     {{"budget", num("> 0")},
                      {"dbound", num("> 0")},
                      {"area", num("> 0")},
                      {"flatten", num("> 0")},
                      {"smoothed", num("> 0")}}}}}}}};
  return s;
}

std::vector<CorpusSpec> parse_corpus(const std::string& text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("corpus: not valid JSON: ") + e.what());
  }
  std::vector<std::string> errors;
  if (!doc.is_array()) fail("corpus: invalid corpus", {"expected a JSON list"});
  std::vector<CorpusSpec> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string where = "corpus[" + std::to_string(i) + "]";
    Reader r(doc[i], where, errors);
    CorpusSpec spec;
    r.get("kind", spec.kind, true);
    r.get("seed", spec.seed);
    r.get("count", spec.count);
    if (const ojson* pj = r.child("params")) {
      Reader p(*pj, where + ".params", errors);
      p.get("c1_ceiling", spec.c1_ceiling);
      p.get("gradient", spec.gradient);
      p.get("offset", spec.offset);
      p.get("amplitude", spec.amplitude);
      p.get("amplitude_fraction", spec.amplitude_fraction);
      p.get("width_min", spec.width_min);
      p.get("width_max", spec.width_max);
      p.get("bumps_per_field", spec.bumps_per_field);
      p.get("center_spread", spec.center_spread);
      p.get("allow_negative", spec.allow_negative);
      p.get("spacing", spec.spacing);
      p.reject_unknown();
    }
    r.reject_unknown();
    r.check(spec.kind == "plane" || spec.kind == "bump" || spec.kind == "multi-bump" || spec.kind == "mollified-noise",
            "kind must be one of plane, bump, multi-bump, mollified-noise");
    r.check(spec.count >= 0, "count must be non-negative");
    out.push_back(std::move(spec));
  }
  if (!errors.empty()) fail("corpus: invalid corpus", errors);
  return out;
}

std::vector<CorpusSpec> load_corpus(const std::string& path) { return parse_corpus(read_file(path)); }

}  // namespace porous
