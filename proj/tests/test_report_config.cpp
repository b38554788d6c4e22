#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "fixtures.hpp"
#include "porous/config.hpp"
#include "porous/errors.hpp"
#include "porous/family_io.hpp"
#include "porous/report.hpp"

using namespace porous;

namespace {

AuditReport sample_report() {
  AuditReport r;
  r.config_hash = "0123456789abcdef";
  r.seed = 42;
  r.config["note"] = "x";
  r.add(upper_check("construction_audits", "a", "ref-a", 1.0, 2.0));
  r.add(lower_check("porosity", "b,with comma", "ref-b", 0.5, 0.25, "detail"));
  r.add(zero_check("verdicts", "c", "ref-c", 0.0));
  r.add(upper_check("budget_ledgers", "d", "ref-d", std::numeric_limits<double>::infinity(), 1.0));
  return r;
}

}  // namespace

TEST_CASE("check constructors set margins and statuses") {
  const AuditEntry u = upper_check("verdicts", "u", "x", 1.0, 3.0);
  CHECK(u.status == Status::pass);
  CHECK(u.margin == 2.0);
  CHECK(upper_check("verdicts", "u", "x", 3.0, 1.0).status == Status::fail);
  const AuditEntry l = lower_check("verdicts", "l", "x", 1.0, 3.0);
  CHECK(l.status == Status::fail);
  CHECK(l.margin == -2.0);
  CHECK(zero_check("verdicts", "z", "x", 2.0).status == Status::fail);
  CHECK_FALSE(std::signbit(zero_check("verdicts", "z", "x", 0.0).margin));
  CHECK(interval_check("verdicts", "i", "x", 0.1, 0.2, 0.3, 0.5).status == Status::pass);
  CHECK(interval_check("verdicts", "i", "x", 0.1, 0.2, 0.3, 0.25).status == Status::indeterminate);
  CHECK(interval_check("verdicts", "i", "x", 0.1, 0.2, 0.3, 0.05).status == Status::fail);
}

TEST_CASE("overall status") {
  AuditReport r;
  CHECK(r.overall() == Status::pass);
  r.add(interval_check("verdicts", "i", "x", 0.1, 0.2, 0.3, 0.25));
  CHECK(r.overall() == Status::indeterminate);
  r.add(upper_check("verdicts", "u", "x", 3.0, 1.0));
  CHECK(r.overall() == Status::fail);
}

TEST_CASE("report JSON round trip keeps non-finite values") {
  const AuditReport r = sample_report();
  const auto j = report_to_json(r);
  CHECK(j["budget_ledgers"][0]["measured"] == "inf");
  CHECK(j["overall"] == "FAIL");
  const AuditReport back = report_from_json(nlohmann::ordered_json::parse(report_json_text(r)));
  CHECK(report_json_text(back) == report_json_text(r));
  CHECK(std::isinf(back.entries[1].measured));  // reordered by section
}

TEST_CASE("report CSV quotes fields and orders by section") {
  const std::string csv = report_csv_text(sample_report());
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "id,lemma_ref,measured,bound,margin,status");
  std::getline(in, line);
  CHECK(line == "a,ref-a,1.0,2.0,1.0,PASS");
  std::getline(in, line);
  CHECK(line == "d,ref-d,inf,1.0,-inf,FAIL");
  std::getline(in, line);
  CHECK(line == "\"b,with comma\",ref-b,0.5,0.25,0.25,PASS");
}

TEST_CASE("report parsing rejects bad input") {
  auto j = report_to_json(sample_report());
  j["schema_version"] = 2;
  CHECK_THROWS_AS(report_from_json(j), ParseError);
  auto k = report_to_json(sample_report());
  k["verdicts"][0].erase("status");
  CHECK_THROWS_AS(report_from_json(k), ParseError);
  auto m = report_to_json(sample_report());
  m["verdicts"][0]["status"] = "MAYBE";
  CHECK_THROWS_AS(report_from_json(m), ParseError);
}

TEST_CASE("merging requires one config hash") {
  AuditReport a = sample_report(), b = sample_report();
  CHECK(merge_reports({a, b}).entries.size() == 8);
  b.config_hash = "fedcba9876543210";
  CHECK_THROWS_AS(merge_reports({a, b}), InvalidArgument);
}

TEST_CASE("config parsing: defaults, hash and derived delta") {
  const std::string text = R"({"epsilons": [0.45, 0.45], "stop_fractions": [0.95, 0.9]})";
  const RunConfig c = parse_config(text);
  CHECK(c.build.n == 3);
  CHECK(c.build.depth() == 2);
  CHECK(c.audit.extract_delta == doctest::Approx(1e-2 / 64));
  CHECK(c.build.config_hash.size() == 16);
  CHECK(c.build.config_hash.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(c.build.config_hash == content_hash(text));
  CHECK(parse_config(text + " ").build.config_hash != c.build.config_hash);
  // FNV-1a 64 of the empty string.
  CHECK(content_hash("") == "cbf29ce484222325");
}

TEST_CASE("config parsing reports every problem") {
  try {
    parse_config(R"({"n": "three", "bogus": 1, "audit": {"samples": 10, "extra": true}})");
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'n' has the wrong type") != std::string::npos);
    CHECK(msg.find("unknown key 'bogus'") != std::string::npos);
    CHECK(msg.find("audit: unknown key 'extra'") != std::string::npos);
    CHECK(msg.find("samples must be >= 1024") != std::string::npos);
    CHECK(msg.find("missing required key 'epsilons'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("{"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"epsilons": [0.45], "n": 2})"), InvalidArgument);
  CHECK_THROWS_AS(parse_config(R"({"epsilons": [0.45], "audit": {"constants": {"area": 0}}})"), InvalidArgument);
}

TEST_CASE("shipped configurations parse") {
  for (const char* name : {"desk.json", "demo.json"}) {
    const RunConfig c = load_config(std::string(POROUS_SOURCE_DIR) + "/configs/" + name);
    CHECK(c.build.depth() == 2);
  }
  const auto corpus = load_corpus(std::string(POROUS_SOURCE_DIR) + "/configs/corpus_demo.json");
  CHECK(corpus.size() == 6);
}

TEST_CASE("corpus parsing") {
  const auto c = parse_corpus(R"([{"kind": "bump", "seed": 3, "count": 2, "params": {"width_min": 0.5}}])");
  REQUIRE(c.size() == 1);
  CHECK(c[0].width_min == 0.5);
  CHECK_THROWS_AS(parse_corpus(R"({"kind": "bump"})"), InvalidArgument);
  CHECK_THROWS_AS(parse_corpus(R"([{"kind": "spiral"}])"), InvalidArgument);
  CHECK_THROWS_AS(parse_corpus(R"([{"seed": 1}])"), InvalidArgument);
  CHECK_THROWS_AS(parse_corpus(R"([{"kind": "bump", "params": {"wdth": 1}}])"), InvalidArgument);
}

TEST_CASE("family files round trip and report the bad line") {
  const HoleFamily& fam = fixture::small_family();
  const std::string text = serialize_family(fam);
  CHECK(serialize_family(deserialize_family(text)) == text);
  std::string broken = text;
  std::size_t pos = 0;
  for (int i = 0; i < 3; ++i) pos = broken.find('\n', pos) + 1;
  broken.insert(pos, "{not json");
  try {
    deserialize_family(broken);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
}
