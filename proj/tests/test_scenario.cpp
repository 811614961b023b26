#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fincat/scenario.hpp"

using namespace fincat::scenario;

namespace {

Limits lims() { return Limits{}; }

RunResult run(const std::string& text, bool parallel = false) {
  return run_scenario_text(text, lims(), parallel);
}

const char* kTraceDoc = R"({
  "groupoids": {"Y": {"discrete": ["1", "2"]}},
  "kernels": {"K": {"dims": {"y1": "Y", "y2": "Y", "stalks": [[5, 1], [2, 7]]}}},
  "tasks": [{"op": "trace", "kernel": "K"}]
})";

struct EnvGuard {
  std::string name;
  explicit EnvGuard(const std::string& n, const std::string& v) : name(n) {
    setenv(n.c_str(), v.c_str(), 1);
  }
  ~EnvGuard() { unsetenv(name.c_str()); }
};

}  // namespace

TEST_CASE("a trace task reports the diagonal dimension") {
  RunResult r = run(kTraceDoc);
  CHECK(r.exit_code == 0);
  CHECK(r.machine.find("12") != std::string::npos);
  CHECK(r.human.find("12") != std::string::npos);
}

TEST_CASE("empty task list succeeds") {
  CHECK(run(R"({"tasks": []})").exit_code == 0);
}

TEST_CASE("undeclared names are input errors") {
  RunResult r = run(R"({"tasks": [{"op": "trace", "kernel": "NOPE"}]})");
  CHECK(r.exit_code == 1);
  CHECK(r.machine.find("NOPE") != std::string::npos);
}

TEST_CASE("malformed JSON is an input error") {
  CHECK(run("{not json").exit_code == 1);
}

TEST_CASE("expectation mismatches exit with code 2 and a diff") {
  std::string doc = R"({
    "coeff": {"tropical": 9},
    "tasks": [{"op": "residuate", "a": "2", "b": "5", "expect": {"value": "4"}}]
  })";
  RunResult r = run(doc);
  CHECK(r.exit_code == 2);
  CHECK(r.machine.find("mismatch") != std::string::npos);
  CHECK(r.machine.find("\"3\"") != std::string::npos);  // the actual value
}

TEST_CASE("task exceptions are reported as errors, not crashes") {
  // mat_rank over a non-rational system is unsupported.
  std::string doc = R"({
    "coeff": "naturals",
    "tasks": [{"op": "mat_rank", "rows": ["r"], "cols": ["c"], "entries": [["1"]]}]
  })";
  RunResult r = run(doc);
  CHECK(r.exit_code == 1);
  CHECK(r.machine.find("error") != std::string::npos);
}

TEST_CASE("limits") {
  SUBCASE("apply parses key=value lists") {
    Limits l;
    l.apply("carrier=8,group=12");
    CHECK(l.carrier == 8);
    CHECK(l.group == 12);
    CHECK(l.stalk == 16);
    CHECK_THROWS_AS(l.apply("bogus=3"), std::invalid_argument);
    CHECK_THROWS_AS(l.apply("group=abc"), std::invalid_argument);
  }
  SUBCASE("violations are input errors") {
    Limits l;
    l.apply("group=4");
    std::string doc = R"({
      "groups": {"G": {"symmetric": 3}},
      "groupoids": {"Y": {"one_point": "G"}},
      "tasks": [{"op": "pi0", "groupoid": "Y"}]
    })";
    RunResult r = run_scenario_text(doc, l, false);
    CHECK(r.exit_code == 1);
    CHECK(run_scenario_text(doc, lims(), false).exit_code == 0);
  }
  SUBCASE("FINCAT_LIMITS feeds from_env") {
    EnvGuard g("FINCAT_LIMITS", "stalk=3");
    CHECK(Limits::from_env().stalk == 3);
  }
}

TEST_CASE("machine output is byte-deterministic, serial or parallel") {
  std::string doc = R"({
    "groups": {"G": {"symmetric": 3}},
    "groupoids": {"Y": {"one_point": "G"}},
    "maps": {"F": {"identity": "Y"}},
    "tasks": [
      {"op": "pi0", "groupoid": "Y"},
      {"op": "tr_frob", "groupoid": "Y", "map": "F"},
      {"op": "omega", "groupoid": "Y"}
    ]
  })";
  RunResult a = run(doc, false), b = run(doc, false), c = run(doc, true);
  CHECK(a.machine == b.machine);
  CHECK(a.machine == c.machine);
  CHECK(a.exit_code == 0);
}

TEST_CASE("selftest") {
  std::string path = "test-scenario-cex.json";
  SUBCASE("small corpus passes and reports per-property trials") {
    RunResult r = selftest(10, 1, lims(), path);
    CHECK(r.exit_code == 0);
    CHECK(r.machine.find("\"status\"") != std::string::npos);
    CHECK(r.machine.find("fail") == std::string::npos);
  }
  SUBCASE("zero corpus is vacuous") {
    CHECK(selftest(0, 0, lims(), path).exit_code == 0);
  }
  SUBCASE("an injected mutation is caught, minimized, and re-fails") {
    std::remove(path.c_str());
    {
      EnvGuard g("FINCAT_MUTATE", "flip_residuation");
      RunResult r = selftest(10, 1, lims(), path);
      CHECK(r.exit_code != 0);
      std::ifstream in(path);
      REQUIRE(in.good());
      std::stringstream ss;
      ss << in.rdbuf();
      std::string cex = ss.str();
      CHECK_FALSE(cex.empty());
      // The counterexample still fails while the mutation is active...
      CHECK(run(cex).exit_code != 0);
      // ...and is a genuine scenario document.
      CHECK(cex.find("tasks") != std::string::npos);
    }
    // Without the mutation the same document passes.
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(run(ss.str()).exit_code == 0);
    std::remove(path.c_str());
  }
}
