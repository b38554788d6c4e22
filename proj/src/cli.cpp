#include "porous/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "porous/audits.hpp"
#include "porous/config.hpp"
#include "porous/construction.hpp"
#include "porous/errors.hpp"
#include "porous/family_io.hpp"
#include "porous/kernels.hpp"
#include "porous/report.hpp"

namespace porous {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Manifest {
  ojson j;
  explicit Manifest(const std::string& sub) {
    j["tool_version"] = kToolVersion;
    j["subcommand"] = sub;
    j["started"] = utc_now();
    j["inputs"] = ojson::object();
    j["outputs"] = ojson::array();
  }
  void write(const fs::path& dir) {
    j["finished"] = utc_now();
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    f << j.dump(2) << "\n";
  }
};

void write_text(const fs::path& p, const std::string& text, Manifest& m) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw InvalidArgument("cannot write " + p.string());
  f << text;
  m.j["outputs"].push_back(p.string());
}

int exit_for(Status s) {
  switch (s) {
    case Status::pass: return kExitPass;
    case Status::fail: return kExitFail;
    case Status::indeterminate: return kExitIndeterminate;
  }
  return kExitFail;
}

void print_failures(const AuditReport& r, std::ostream& err) {
  for (const AuditEntry& e : r.entries) {
    if (e.status == Status::pass) continue;
    err << to_string(e.status) << " " << e.id << ": measured " << e.measured << ", bound " << e.bound;
    if (!e.detail.empty()) err << " (" << e.detail << ")";
    err << "\n";
  }
}

ojson header_json(const FamilyHeader& h) {
  ojson j;
  j["n"] = h.n;
  j["s"] = h.s;
  j["r"] = h.r;
  j["L"] = h.L;
  j["E"] = h.E;
  j["epsilons"] = h.epsilons;
  j["stop_fractions"] = h.stop_fractions;
  j["strict"] = h.strict;
  j["seed"] = h.seed;
  return j;
}

struct Options {
  std::string config, family, corpus, out = ".", which = "all";
  std::vector<std::string> inputs;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;
};

void apply_workers(int workers) {
  if (workers > 0) kernels::set_workers(workers);
}

int cmd_build(const Options& o, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(o.config);
  if (o.seed_set) cfg.build.seed = o.seed;
  apply_workers(o.workers >= 0 ? o.workers : cfg.build.workers);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  Manifest m("build");
  m.j["inputs"]["config"] = o.config;
  m.j["config_hash"] = cfg.build.config_hash;
  m.j["seed"] = cfg.build.seed;

  const auto t0 = std::chrono::steady_clock::now();
  BuildResult res;
  try {
    res = build_family(cfg.build);
  } catch (const ConstructionFailure& e) {
    err << "construction failed: " << e.what() << "\n" << e.diagnostics() << "\n";
    m.j["status"] = "construction-failure";
    m.j["diagnostics"] = e.diagnostics();
    m.write(dir);
    return kExitFail;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(dir / "family.jsonl", serialize_family(res.family), m);

  AuditReport r;
  r.config_hash = cfg.build.config_hash;
  r.seed = cfg.build.seed;
  r.config["document"] = cfg.document;
  r.config["family"] = header_json(res.family.header);
  r.config["relaxed_mapping"] = relaxed_mapping(res.family.header);
  r.add(construction_audits(res.family));
  write_text(dir / "build_audit.json", report_json_text(r), m);
  write_text(dir / "build_audit.csv", report_csv_text(r), m);
  m.j["status"] = to_string(r.overall());
  m.j["build_seconds"] = secs;
  m.j["holes"] = res.family.records.size();
  m.write(dir);
  out << "built " << res.family.records.size() << " holes in " << secs << " s; construction audits "
      << to_string(r.overall()) << "\n";
  print_failures(r, err);
  return exit_for(r.overall());
}

std::vector<std::string> split_which(const std::string& which) {
  static const std::vector<std::string> all{"construction", "analysis", "cover", "budget", "porosity", "holes-mass",
                                            "extraction"};
  if (which == "all") return all;
  std::vector<std::string> out;
  std::stringstream ss(which);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (std::find(all.begin(), all.end(), item) == all.end())
      throw InvalidArgument("--which: unknown audit '" + item + "'");
    out.push_back(item);
  }
  return out;
}

int cmd_audit(const Options& o, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> which = split_which(o.which);
  auto wants = [&](const char* w) { return std::find(which.begin(), which.end(), w) != which.end(); };
  if (!fs::exists(o.family)) throw InvalidArgument("family file not found: " + o.family);
  const HoleFamily family = load_family(o.family);
  AuditSettings settings;
  ojson doc = ojson::object();
  std::uint64_t seed = family.header.seed;
  int workers = 0;
  if (!o.config.empty()) {
    const RunConfig cfg = load_config(o.config);
    settings = cfg.audit;
    doc = cfg.document;
    workers = cfg.build.workers;
    if (cfg.build.config_hash != family.header.config_hash)
      err << "note: config hash " << cfg.build.config_hash << " differs from the family's " << family.header.config_hash
          << "\n";
  } else {
    settings.extract_delta = 1e-2 * family.header.r;
  }
  if (o.seed_set) seed = o.seed;
  apply_workers(o.workers >= 0 ? o.workers : workers);
  std::vector<GraphPatch> corpus;
  if (!o.corpus.empty()) {
    for (const CorpusSpec& spec : load_corpus(o.corpus)) {
      auto part = corpus_generate(spec, family.header.n, family.header.s);
      corpus.insert(corpus.end(), part.begin(), part.end());
    }
  }

  const fs::path dir(o.out);
  fs::create_directories(dir);
  Manifest m("audit");
  m.j["inputs"]["family"] = o.family;
  if (!o.config.empty()) m.j["inputs"]["config"] = o.config;
  if (!o.corpus.empty()) m.j["inputs"]["corpus"] = o.corpus;
  m.j["config_hash"] = family.header.config_hash;
  m.j["seed"] = seed;

  AuditReport r;
  r.config_hash = family.header.config_hash;
  r.seed = seed;
  r.config["document"] = doc;
  r.config["family"] = header_json(family.header);
  r.config["relaxed_mapping"] = relaxed_mapping(family.header);
  r.config["which"] = which;
  r.config["corpus_fields"] = corpus.size();

  auto timed = [&](const char* name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    out << name << ": " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
  };
  if (wants("construction")) timed("construction", [&] { r.add(construction_audits(family)); });
  if (wants("analysis")) timed("analysis", [&] { r.add(analysis_audits(family.header.n, settings, seed)); });
  double alpha_prime = 0.0;
  const bool need_cover = wants("cover") || (wants("holes-mass") && !corpus.empty());
  if (need_cover && family.depth() > 0 && !family.records.empty()) {
    timed("cover", [&] {
      CoverSummary cs = cover_audits(family, settings, seed);
      alpha_prime = cs.alpha_prime;
      if (wants("cover")) r.add(cs.entries);
    });
  }
  if (wants("budget") && !family.records.empty()) timed("budget", [&] { r.add(budget_audits(family, corpus, settings, seed).entries); });
  if (wants("porosity") && !family.records.empty()) timed("porosity", [&] { r.add(porosity_audits(family, settings, seed)); });
  if (wants("holes-mass") && !family.records.empty())
    timed("holes-mass", [&] { r.add(holes_mass_audits(family, corpus, alpha_prime, settings, seed)); });
  if (wants("extraction") && !corpus.empty())
    timed("extraction", [&] { r.add(extraction_audits(corpus, family.header, settings, seed)); });

  write_text(dir / "report.json", report_json_text(r), m);
  write_text(dir / "report.csv", report_csv_text(r), m);
  m.j["status"] = to_string(r.overall());
  m.write(dir);
  out << r.entries.size() << " audits, overall " << to_string(r.overall()) << "\n";
  print_failures(r, err);
  return exit_for(r.overall());
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<AuditReport> reports;
  for (const std::string& p : o.inputs) reports.push_back(load_report(p));
  const AuditReport merged = merge_reports(reports);
  const fs::path dir(o.out);
  fs::create_directories(dir);
  Manifest m("report");
  m.j["inputs"]["reports"] = o.inputs;
  m.j["config_hash"] = merged.config_hash;
  m.j["seed"] = merged.seed;
  write_text(dir / "merged.json", report_json_text(merged), m);
  write_text(dir / "merged.csv", report_csv_text(merged), m);
  write_text(dir / "series.csv", report_series_text(merged), m);
  m.j["status"] = to_string(merged.overall());
  m.write(dir);
  out << "merged " << reports.size() << " reports, " << merged.entries.size() << " rows, overall "
      << to_string(merged.overall()) << "\n";
  (void)err;
  return kExitPass;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Porous-set construction and audit tool"};
  app.require_subcommand(1);
  Options o;
  std::string seed_text;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed_text, "seed override (unsigned 64-bit)");
    sub->add_option("--workers", o.workers, "OpenMP worker threads")->check(CLI::NonNegativeNumber);
  };
  CLI::App* build = app.add_subcommand("build", "build a hole family from a config");
  build->add_option("--config", o.config, "config JSON")->required();
  add_common(build);
  CLI::App* audit = app.add_subcommand("audit", "audit a hole family");
  audit->add_option("--family", o.family, "family JSON-lines file")->required();
  audit->add_option("--config", o.config, "config JSON (audit settings)");
  audit->add_option("--corpus", o.corpus, "surface corpus JSON");
  audit->add_option("--which", o.which,
                    "comma list of construction,analysis,cover,budget,porosity,holes-mass,extraction, or all")
      ->capture_default_str();
  add_common(audit);
  CLI::App* report = app.add_subcommand("report", "merge audit reports");
  report->add_option("inputs", o.inputs, "report JSON files")->required();
  report->add_option("--out", o.out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o_out, o_err;
    const int code = app.exit(e, o_out, o_err);
    out << o_out.str();
    err << o_err.str();
    return code == 0 ? kExitPass : kExitInput;
  }

  try {
    if (!seed_text.empty()) {
      std::size_t used = 0;
      o.seed = std::stoull(seed_text, &used);
      if (used != seed_text.size()) throw InvalidArgument("--seed: not an unsigned integer");
      o.seed_set = true;
    }
    if (build->parsed()) return cmd_build(o, out, err);
    if (audit->parsed()) return cmd_audit(o, out, err);
    return cmd_report(o, out, err);
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InvalidArgument& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::logic_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const PreconditionError& e) {
    err << "audit precondition failed (" << e.hypothesis() << "): " << e.what() << "\n";
    return kExitFail;
  } catch (const Error& e) {
    err << "audit failure: " << e.what() << "\n";
    return kExitFail;
  }
}

}  // namespace porous
