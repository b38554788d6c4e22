#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "porous/cli.hpp"
#include "porous/config.hpp"
#include "porous/family_io.hpp"
#include "porous/report.hpp"

using namespace porous;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "porous");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct Scratch {
  fs::path dir;
  ~Scratch() { fs::remove_all(dir); }
};

fs::path scratch() {
  static const Scratch s{[] {
    const fs::path d = fs::temp_directory_path() / ("porous_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }()};
  return s.dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSmall = R"({"n": 3, "epsilons": [0.45, 0.45], "stop_fractions": [0.97, 0.96], "seed": 7,
  "audit": {"samples": 4096, "residue_samples": 1024, "porosity_points": 50, "analysis_fields": 5}})";

}  // namespace

TEST_CASE("input errors exit with 1") {
  CHECK(cli({}).code == kExitInput);
  CHECK(cli({"frobnicate"}).code == kExitInput);
  CHECK(cli({"--help"}).code == kExitPass);
  CHECK(cli({"build"}).code == kExitInput);
  const fs::path bad = scratch() / "bad.json";
  write(bad, R"({"epsilons": [0.45], "n": 2})");
  const Run r = cli({"build", "--config", bad.string(), "--out", (scratch() / "bad").string()});
  CHECK(r.code == kExitInput);
  CHECK(r.err.find("n must be") != std::string::npos);
  CHECK(cli({"audit", "--family", (scratch() / "missing.jsonl").string()}).code == kExitInput);
  CHECK(cli({"build", "--config", bad.string(), "--seed", "12x"}).code == kExitInput);
}

TEST_CASE("build, audit and report") {
  const fs::path cfg = scratch() / "small.json";
  write(cfg, kSmall);
  const fs::path out = scratch() / "run";
  const Run b = cli({"build", "--config", cfg.string(), "--out", out.string()});
  INFO(b.err);
  REQUIRE(b.code == kExitPass);
  for (const char* f : {"family.jsonl", "build_audit.json", "build_audit.csv", "manifest.json"})
    CHECK(fs::exists(out / f));
  const auto manifest = nlohmann::json::parse(read_file((out / "manifest.json").string()));
  CHECK(manifest["subcommand"] == "build");
  CHECK(manifest["status"] == "PASS");
  CHECK(manifest["config_hash"] == load_config(cfg.string()).build.config_hash);

  const std::string fam = (out / "family.jsonl").string();
  CHECK(cli({"audit", "--family", fam, "--which", "spiral", "--out", out.string()}).code == kExitInput);

  const fs::path a1 = scratch() / "a1";
  const Run a = cli({"audit", "--family", fam, "--config", cfg.string(), "--which", "construction", "--out", a1.string()});
  INFO(a.err);
  CHECK(a.code == kExitPass);
  CHECK(load_report((a1 / "report.json").string()).overall() == Status::pass);

  const fs::path a2 = scratch() / "a2";
  CHECK(cli({"audit", "--family", fam, "--config", cfg.string(), "--which", "porosity", "--out", a2.string()}).code ==
        kExitPass);

  const fs::path merged = scratch() / "merged";
  const Run m = cli({"report", (a1 / "report.json").string(), (a2 / "report.json").string(), "--out", merged.string()});
  CHECK(m.code == kExitPass);
  CHECK(fs::exists(merged / "series.csv"));
  const AuditReport mr = load_report((merged / "merged.json").string());
  CHECK(mr.entries.size() == load_report((a1 / "report.json").string()).entries.size() +
                                 load_report((a2 / "report.json").string()).entries.size());

  // A moved hole overlapping its neighbour must fail the construction audit.
  HoleFamily broken = load_family(fam);
  HoleRecord& victim = broken.records[1];
  victim.base_center = broken.records[0].base_center;
  victim.base_center[0] += 0.5 * broken.records[0].t;
  victim.lifted_center = victim.base_center;
  victim.lifted_center.push_back(2.0 * victim.t);
  const fs::path bad_fam = scratch() / "broken.jsonl";
  save_family(bad_fam.string(), broken);
  const Run f = cli({"audit", "--family", bad_fam.string(), "--which", "construction", "--out", (scratch() / "a3").string()});
  CHECK(f.code == kExitFail);
  CHECK(load_report((scratch() / "a3" / "report.json").string()).overall() == Status::fail);

  // Truncated family file: parse error with a line number.
  std::string text = read_file(fam);
  text.resize(text.size() / 2);
  write(scratch() / "cut.jsonl", text);
  const Run c = cli({"audit", "--family", (scratch() / "cut.jsonl").string(), "--out", (scratch() / "a4").string()});
  CHECK(c.code == kExitInput);
  CHECK(c.err.find("line ") != std::string::npos);
}

TEST_CASE("an infeasible build exits with 2 and leaves diagnostics") {
  const fs::path cfg = scratch() / "tight.json";
  write(cfg, R"({"epsilons": [0.45, 0.45], "stop_fractions": [0.5, 0.5], "budgets": {"max_balls": 10}})");
  const fs::path out = scratch() / "tight";
  const Run r = cli({"build", "--config", cfg.string(), "--out", out.string()});
  CHECK(r.code == kExitFail);
  const auto manifest = nlohmann::json::parse(read_file((out / "manifest.json").string()));
  CHECK(manifest["status"] == "construction-failure");
  CHECK(manifest.contains("diagnostics"));
}
