// Runs the acceptance criteria end to end and prints one PASS/FAIL line per criterion.
// Exit status is 0 only when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "porous/ball_index.hpp"
#include "porous/cli.hpp"
#include "porous/config.hpp"
#include "porous/family_io.hpp"
#include "porous/measure.hpp"
#include "porous/report.hpp"
#include "porous/surfaces.hpp"
#include "porous/verification.hpp"

using namespace porous;
namespace fs = std::filesystem;

namespace {

const std::string kSource = POROUS_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CliRun {
  int code = -1;
  double seconds = 0.0;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "porous");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  const auto t0 = std::chrono::steady_clock::now();
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

/// Desk build plus full audit into `dir`; returns build and audit wall time.
struct DeskRun {
  CliRun build, audit;
  bool ok() const { return build.code == kExitPass && audit.code == kExitPass; }
};

DeskRun desk_run(const fs::path& dir) {
  DeskRun r;
  r.build = cli({"build", "--config", kSource + "/configs/desk.json", "--out", (dir / "build").string()});
  if (r.build.code != kExitPass) return r;
  r.audit = cli({"audit", "--family", (dir / "build" / "family.jsonl").string(), "--config",
                 kSource + "/configs/desk.json", "--corpus", kSource + "/configs/corpus_demo.json", "--which", "all",
                 "--out", (dir / "audit").string()});
  return r;
}

/// Every entry matching `pick` passes, and at least `min_count` match.
Outcome entries_pass(const AuditReport& r, const std::function<bool(const AuditEntry&)>& pick, std::size_t min_count,
                     const std::string& what) {
  std::size_t n = 0;
  std::string bad;
  for (const AuditEntry& e : r.entries) {
    if (!pick(e)) continue;
    ++n;
    if (e.status != Status::pass && bad.size() < 400)
      bad += "; " + e.id + " " + to_string(e.status) + " (" + fmt(e.measured) + " vs " + fmt(e.bound) + ")";
  }
  Outcome o;
  o.pass = bad.empty() && n >= min_count;
  o.detail = std::to_string(n) + " " + what + " entries" + (n < min_count ? ", expected >= " + std::to_string(min_count) : "") + bad;
  return o;
}

bool contains(const std::string& s, const char* part) { return s.find(part) != std::string::npos; }

const AuditEntry* find_entry(const AuditReport& r, const std::string& id) {
  for (const AuditEntry& e : r.entries)
    if (e.id == id) return &e;
  return nullptr;
}

Outcome merge(std::vector<Outcome> parts) {
  Outcome o{true, {}};
  for (const Outcome& p : parts) {
    o.pass = o.pass && p.pass;
    o.detail += (o.detail.empty() ? "" : " | ") + p.detail;
  }
  return o;
}

// ---- criteria --------------------------------------------------------------------------------

Outcome ac1(const fs::path& work, const AuditReport& desk_build) {
  const fs::path dir = work / "demo";
  const CliRun b = cli({"build", "--config", kSource + "/configs/demo.json", "--out", dir.string()});
  Outcome o;
  if (b.code != kExitPass) {
    std::string diag = b.err;
    while (!diag.empty() && diag.back() == '\n') diag.pop_back();
    o.detail = "demo build exit " + std::to_string(b.code) + " after " + fmt(b.seconds) + " s: " + diag;
    const Outcome desk = entries_pass(desk_build, [](const AuditEntry&) { return true; }, 1, "desk construction");
    o.detail += " | desk config (stop 95%/90%) " + std::string(desk.pass ? "passes" : "fails") + " the same audits: " + desk.detail;
    return o;
  }
  const CliRun a = cli({"audit", "--family", (dir / "family.jsonl").string(), "--config", kSource + "/configs/demo.json",
                        "--which", "construction", "--out", (dir / "audit").string()});
  const AuditReport r = load_report((dir / "audit" / "report.json").string());
  o = entries_pass(r, [](const AuditEntry&) { return true; }, 1, "construction");
  const double total = b.seconds + a.seconds;
  o.pass = o.pass && a.code == kExitPass && total <= 600.0;
  o.detail += ", build+audit " + fmt(total) + " s";
  return o;
}

Outcome ac2(const AuditReport& r) {
  const Outcome entries = entries_pass(
      r, [](const AuditEntry& e) { return contains(e.id, "cover deficit") || contains(e.id, "strict cover bound"); }, 3,
      "coverage");
  // ω_3 (1/4)^3 / 2^3
  const double strict = 4.0 / 3.0 * M_PI * std::pow(0.25, 3) / 8.0;
  const bool arith = std::abs(strict_cover_bound(3, 0.25, 1) - strict) <= 1e-15 && std::abs(strict - 8.18e-3) < 5e-6;
  Outcome o = entries;
  o.pass = o.pass && arith;
  o.detail += ", strict bound " + fmt(strict_cover_bound(3, 0.25, 1));
  return o;
}

Outcome ac3(const AuditReport& r, const HoleFamily& family) {
  Outcome rep = entries_pass(r, [](const AuditEntry& e) { return e.section == "porosity"; }, 3, "porosity");
  const AuditEntry* pts = find_entry(r, "sampled points");
  rep.pass = rep.pass && pts && pts->measured >= 1000;
  // Independent pass: fresh points, witnesses by scanning every record.
  const TruncatedP p(family, family.header.L, family.depth());
  const std::vector<Point> fresh = sample_truncated_p(p, family, 1000, 0xacce55);
  double worst = 1e300;
  std::size_t missing = 0;
  for (const Point& x : fresh) {
    const auto w = porosity_witness_reference(x, family, family.header.L);
    if (!w) ++missing;
    else worst = std::min(worst, w->ratio);
  }
  const double bound = 1.0 / std::sqrt(10.0) - 1e-6;
  Outcome scan;
  scan.pass = fresh.size() == 1000 && missing == 0 && worst >= bound;
  scan.detail = "exhaustive scan: " + std::to_string(fresh.size()) + " points, " + std::to_string(missing) +
                " without witness, worst ratio " + fmt(worst) + " >= " + fmt(bound);
  return merge({rep, scan});
}

Outcome ac4(const AuditReport& r) {
  return entries_pass(r, [](const AuditEntry& e) { return e.section == "analysis_audits"; }, 14, "analysis");
}

Outcome ac5(const AuditReport& r) {
  auto budget_entry = [](const AuditEntry& e) {
    return contains(e.id, "u-mass") || contains(e.id, "residue disjointness") || contains(e.id, " ledger") ||
           e.id == "budget global C" || e.id == "dbound global C" || e.id == "flat field hit mass" ||
           contains(e.id, "classification");
  };
  Outcome o = entries_pass(r, budget_entry, 50, "budget");
  std::size_t fields = 0;
  for (const AuditEntry& e : r.entries)
    if (contains(e.id, " ledger") && !contains(e.id, "flat")) ++fields;
  const AuditEntry* flat = find_entry(r, "flat field hit mass");
  const AuditEntry* c = find_entry(r, "budget global C");
  const AuditEntry* d = find_entry(r, "dbound global C");
  o.pass = o.pass && fields >= 50 && flat && flat->measured == 0.0 && c && d;
  o.detail += ", " + std::to_string(fields) + " corpus fields";
  if (c) o.detail += ", global C " + fmt(c->measured);
  if (d) o.detail += ", dbound C " + fmt(d->measured) + " (" + d->detail + ")";
  if (flat) o.detail += ", flat mass " + fmt(flat->measured);
  return o;
}

Outcome ac6(const AuditReport& r) {
  const Outcome all = entries_pass(r, [](const AuditEntry& e) { return contains(e.id, "hole mass"); }, 50, "hole mass");
  const Outcome planes =
      entries_pass(r, [](const AuditEntry& e) { return contains(e.id, "hole mass vs alpha'/4"); }, 1, "plane alpha'/4");
  return merge({all, planes});
}

Outcome ac7(const AuditReport& r, const HoleFamily& family, const std::vector<GraphPatch>& corpus) {
  std::vector<Outcome> parts;

  {  // union measure vs grid
    const Ball region{{0.5, 0.5, 0.5}, 0.25};
    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t f = 0; f < 20; ++f) {
      const CounterRng rng(500 + f);
      std::uint64_t ctr = 0;
      std::vector<Ball> balls;
      for (int i = 0; i < 50; ++i) {
        const double rad = 0.02 + 0.08 * rng.uniform(ctr++);
        balls.push_back(Ball{oracle::uniform_in_ball(rng, ctr, region.center, region.radius), rad});
      }
      const MeasureEstimate mc = union_measure(balls, region, SamplingBudget{1u << 18}, f);
      const oracle::GridMeasure grid = oracle::grid_union_measure_3d(balls, region, 256);
      const double ratio = std::abs(mc.value - grid.value) / (mc.half_width + grid.error);
      worst = std::max(worst, ratio);
      if (ratio <= 1.0) ++ok;
    }
    parts.push_back({ok == 20, "union measure: " + std::to_string(ok) + "/20 families within error bars (worst " +
                                   fmt(worst) + " of the combined bar)"});
  }

  {  // ball index vs linear scan on the lifted holes
    std::vector<Ball> holes;
    for (const HoleRecord& rec : family.records) holes.push_back(rec.hole());
    const BallIndex index(holes);
    const CounterRng rng(0x1d3);
    std::uint64_t ctr = 0;
    std::size_t mismatches = 0, hits = 0;
    for (int p = 0; p < 10000; ++p) {
      const auto pick = static_cast<std::size_t>(rng.uniform(ctr++) * static_cast<double>(holes.size())) % holes.size();
      const Point x = oracle::uniform_in_ball(rng, ctr, holes[pick].center, 2.0 * holes[pick].radius);
      std::vector<std::uint32_t> scan;
      for (std::uint32_t i = 0; i < holes.size(); ++i)
        if (contains_open(holes[i], x)) scan.push_back(i);
      if (index.query(x) != scan) ++mismatches;
      hits += !scan.empty();
    }
    parts.push_back({mismatches == 0, "ball index: 10000 probes, " + std::to_string(hits) + " inside a hole, " +
                                          std::to_string(mismatches) + " mismatches"});
  }

  {  // graph round trip
    ExtractOptions opt;
    opt.delta = 1.0;
    opt.enforce_r = false;
    double worst = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const GraphPatch back = graph_extract(embed_graph(corpus[i]), opt);
      const CounterRng rng(9000 + i);
      std::uint64_t ctr = 0;
      const Ball& dom = corpus[i].g.domain();
      for (int p = 0; p < 200; ++p) {
        const Point x = oracle::uniform_in_ball(rng, ctr, dom.center, dom.radius);
        worst = std::max(worst, std::abs(back.g(x) - corpus[i].g(x)));
      }
    }
    parts.push_back({worst <= 1e-10, "round trip: worst residual " + fmt(worst) + " over " +
                                         std::to_string(corpus.size()) + " fields"});
    // Surfaces with a non-trivial base map, checked by forward evaluation in the audit.
    const AuditEntry* id = find_entry(r, "graph identity");
    const bool ok = id && id->status == Status::pass && id->measured <= 1e-10;
    parts.push_back({ok, "perturbed-surface identity: " + (id ? fmt(id->measured) + " (" + id->detail + ")" : "missing")});
  }

  {  // budget hit mass vs exhaustive scan
    std::size_t mismatched = 0;
    double total = 0.0;
    BudgetOptions opt;
    opt.residue = SamplingBudget{1024};
    opt.energy = SamplingBudget{1u << 12};
    for (const GraphPatch& patch : corpus) {
      const BudgetLedger led = budget(patch, family, opt);
      const double scan = oracle::exhaustive_hit_mass(patch.g, family, 1.0);
      if (led.mass_plain != scan) ++mismatched;
      total += scan;
    }
    parts.push_back({mismatched == 0, "budget hit mass: " + std::to_string(corpus.size() - mismatched) + "/" +
                                          std::to_string(corpus.size()) + " fields equal to the exhaustive scan (total " +
                                          fmt(total) + ")"});
  }
  return merge(parts);
}

Outcome ac8(const fs::path& a, const fs::path& b) {
  std::vector<std::string> same, differ;
  for (const char* f : {"build/family.jsonl", "build/build_audit.json", "build/build_audit.csv", "audit/report.json",
                        "audit/report.csv"}) {
    const bool eq = fs::exists(a / f) && fs::exists(b / f) && read_file((a / f).string()) == read_file((b / f).string());
    (eq ? same : differ).push_back(f);
  }
  Outcome o;
  o.pass = differ.empty();
  o.detail = std::to_string(same.size()) + " files byte-identical";
  for (const std::string& d : differ) o.detail += ", differs: " + d;
  return o;
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "porous_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  std::vector<std::pair<std::string, Outcome>> results;
  auto report = [&](const std::string& name, Outcome o) {
    std::cout << name << " " << (o.pass ? "PASS" : "FAIL") << ": " << o.detail << std::endl;
    results.emplace_back(name, std::move(o));
  };

  const DeskRun first = desk_run(work / "run1");
  std::cout << "desk build " << first.build.seconds << " s (exit " << first.build.code << "), full audit "
            << first.audit.seconds << " s (exit " << first.audit.code << ")" << std::endl;
  if (!first.build.err.empty()) std::cout << first.build.err;
  if (first.build.code != kExitPass) {
    std::cout << "desk build failed; nothing to audit" << std::endl;
    return 1;
  }
  const AuditReport build_report = load_report((work / "run1" / "build" / "build_audit.json").string());
  const HoleFamily family = load_family((work / "run1" / "build" / "family.jsonl").string());
  AuditReport audit_report;
  if (fs::exists(work / "run1" / "audit" / "report.json"))
    audit_report = load_report((work / "run1" / "audit" / "report.json").string());

  std::vector<GraphPatch> corpus;
  for (const CorpusSpec& spec : load_corpus(kSource + "/configs/corpus_demo.json")) {
    auto part = corpus_generate(spec, family.header.n, family.header.s);
    corpus.insert(corpus.end(), part.begin(), part.end());
  }

  report("AC1", ac1(work, build_report));
  report("AC2", ac2(audit_report));
  report("AC3", ac3(audit_report, family));
  report("AC4", ac4(audit_report));
  report("AC5", ac5(audit_report));
  report("AC6", ac6(audit_report));
  report("AC7", ac7(audit_report, family, corpus));
  const DeskRun second = desk_run(work / "run2");
  report("AC8", second.ok() || second.build.code == first.build.code ? ac8(work / "run1", work / "run2")
                                                                    : Outcome{false, "second run failed"});

  int failed = 0;
  for (const auto& [name, o] : results) failed += !o.pass;
  std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
