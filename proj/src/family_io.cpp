#include "porous/family_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "porous/errors.hpp"

namespace porous {

using ojson = nlohmann::ordered_json;

void write_family(std::ostream& out, const HoleFamily& family) {
  const FamilyHeader& h = family.header;
  ojson head;
  head["format_version"] = h.format_version;
  head["n"] = h.n;
  head["s"] = h.s;
  head["r"] = h.r;
  head["L"] = h.L;
  head["E"] = h.E;
  head["epsilons"] = h.epsilons;
  head["seed"] = h.seed;
  head["config_hash"] = h.config_hash;
  head["stop_fractions"] = h.stop_fractions;
  head["strict"] = h.strict;
  out << head.dump() << '\n';
  for (const HoleRecord& rec : family.records) {
    ojson j;
    j["k"] = rec.k;
    j["l"] = rec.l;
    j["m"] = rec.m;
    j["base_center"] = rec.base_center;
    j["t"] = rec.t;
    j["lifted_center"] = rec.lifted_center;
    out << j.dump() << '\n';
  }
}

std::string serialize_family(const HoleFamily& family) {
  std::ostringstream os;
  write_family(os, family);
  return os.str();
}

namespace {

template <class T>
T field(const ojson& j, const char* key, std::size_t line, const std::string& what) {
  if (!j.contains(key)) throw ParseError(line, what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(line, what + ": field '" + key + "' has the wrong type");
  }
}

bool finite_all(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace

HoleFamily read_family(std::istream& in) {
  HoleFamily family;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  std::uint32_t selection = 0;
  int last_k = 0, last_l = 0;

  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    ojson j;
    try {
      j = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line, "expected a JSON object");

    if (!have_header) {
      FamilyHeader& h = family.header;
      const std::string what = "header";
      h.format_version = field<int>(j, "format_version", line, what);
      if (h.format_version != 1)
        throw ParseError(line, "unsupported format_version " + std::to_string(h.format_version));
      h.n = field<int>(j, "n", line, what);
      h.s = field<double>(j, "s", line, what);
      h.r = field<double>(j, "r", line, what);
      h.L = field<double>(j, "L", line, what);
      h.E = field<double>(j, "E", line, what);
      h.epsilons = field<std::vector<double>>(j, "epsilons", line, what);
      h.seed = field<std::uint64_t>(j, "seed", line, what);
      h.config_hash = field<std::string>(j, "config_hash", line, what);
      if (j.contains("stop_fractions")) h.stop_fractions = field<std::vector<double>>(j, "stop_fractions", line, what);
      if (j.contains("strict")) h.strict = field<bool>(j, "strict", line, what);
      if (h.n < 1 || h.n + 1 > kMaxDim) throw ParseError(line, "header: unsupported n");
      have_header = true;
      continue;
    }

    HoleRecord rec;
    const std::string what = "record " + std::to_string(family.records.size() + 1);
    rec.k = field<int>(j, "k", line, what);
    rec.l = field<int>(j, "l", line, what);
    rec.m = field<std::uint64_t>(j, "m", line, what);
    rec.base_center = field<std::vector<double>>(j, "base_center", line, what);
    rec.t = field<double>(j, "t", line, what);
    rec.lifted_center = field<std::vector<double>>(j, "lifted_center", line, what);
    const std::string tag = what + " (k=" + std::to_string(rec.k) + ", l=" + std::to_string(rec.l) + ")";
    if (rec.k < 1 || rec.l < 1 || rec.m < 1) throw ParseError(line, tag + ": k, l and m must be >= 1");
    if (!(rec.t > 0.0) || !std::isfinite(rec.t)) throw ParseError(line, tag + ": radius t must be positive");
    if (static_cast<int>(rec.base_center.size()) != family.header.n)
      throw ParseError(line, tag + ": base_center must have n coordinates");
    if (static_cast<int>(rec.lifted_center.size()) != family.header.n + 1)
      throw ParseError(line, tag + ": lifted_center must have n+1 coordinates");
    if (!finite_all(rec.base_center) || !finite_all(rec.lifted_center))
      throw ParseError(line, tag + ": non-finite coordinate");
    if (rec.k < last_k || (rec.k == last_k && rec.l < last_l))
      throw ParseError(line, tag + ": records out of (k, l) order");
    if (rec.k != last_k || rec.l != last_l) selection = 0;
    rec.selection = selection++;
    last_k = rec.k;
    last_l = rec.l;
    family.records.push_back(std::move(rec));
  }
  if (!have_header) throw ParseError(line, "missing header record");
  return family;
}

HoleFamily deserialize_family(const std::string& text) {
  std::istringstream is(text);
  return read_family(is);
}

HoleFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open family file: " + path);
  return read_family(in);
}

void save_family(const std::string& path, const HoleFamily& family) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write family file: " + path);
  write_family(out, family);
  if (!out) throw Error("write failed: " + path);
}

}  // namespace porous
