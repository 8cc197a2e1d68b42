#include <doctest.h>

#include <random>

#include "heterotest/blockmodel.hpp"
#include "support.hpp"

using namespace heterotest;
using namespace heterotest::blockmodel;

namespace {

const char* kGainSuite = R"(suite gains
steps 4
sut {
  in u
  out y
  block g gain 2.0
  wire u -> g
  wire g -> y
}

test test_double {
  block c const 3.0
  block want const 6.0
  block check assert_eq 1e-9
  wire c -> sut.u
  wire sut.y -> check.actual
  wire want -> check.expected
}
)";

std::string single_test(const std::string& body, int steps = 5) {
  return "suite s\nsteps " + std::to_string(steps) + "\ntest test_it {\n" + body + "}\n";
}

}  // namespace

TEST_CASE("minimal suite parses") {
  auto g = parse_model(kGainSuite, "gains.bdm");
  CHECK(g.suite_name == "gains");
  CHECK(g.steps == 4);
  REQUIRE(g.sut);
  CHECK(g.sut->inputs == std::vector<std::string>{"u"});
  REQUIRE(discover_tests(g) == std::vector<std::string>{"test_double"});
  const auto* t = g.find_subsystem("test_double");
  REQUIRE(t);
  CHECK(std::count_if(t->blocks.begin(), t->blocks.end(), [](const Block& b) { return b.kind == BlockKind::assert_eq; }) ==
        1);
  CHECK(t->find_block("check")->numbers == std::vector<double>{1e-9});
}

TEST_CASE("default horizon is 10 steps") { CHECK(parse_model("suite s\n").steps == 10); }

TEST_CASE("dangling wire names the line and the block") {
  auto text = single_test("  block c const 1\n  block k assert_eq\n  wire c -> k.actual\n  wire c -> nosuch.x\n");
  try {
    parse_model(text, "bad.bdm");
    FAIL("expected a parse error");
  } catch (const ModelError& e) {
    CHECK(e.line() == 7);
    CHECK(std::string(e.what()).find("nosuch") != std::string::npos);
    CHECK(std::string(e.what()).find("bad.bdm:7:") == 0);
  }
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_model(single_test("  block a const 1\n  block a const 2\n")), ModelError);
  CHECK_THROWS_AS(parse_model(single_test("  block a warp 1\n")), ModelError);
  CHECK_THROWS_AS(parse_model(single_test("  block a const 1\n  block s sink\n  wire a -> s\n")), ModelError);
  CHECK_THROWS_AS(parse_model(single_test("  block a const 1\n  block k assert_eq\n  wire a -> k.actual\n")),
                  ModelError);
  CHECK_THROWS_AS(parse_model(single_test("  block a const 1\n  block k assert_eq\n  wire a -> k.actual\n"
                                          "  wire a -> k.expected\n  wire a -> k.expected\n")),
                  ModelError);
  CHECK_THROWS_AS(parse_model("suite s\ntest test_x {\n  block a const 1\n"), ModelError);
  CHECK_THROWS_AS(parse_model("suite s\nsteps 0\n"), ModelError);
  CHECK_THROWS_AS(parse_model(single_test("  block s sum +-\n  block a const 1\n  block k assert_eq\n"
                                          "  wire a -> s\n  wire s -> k.actual\n  wire a -> k.expected\n")),
                  ModelError);
}

TEST_CASE("fixture ports must mirror the SUT inputs") {
  std::string text = std::string(kGainSuite) + "fixture {\n  in v\n  out v\n  wire v -> v\n}\n";
  CHECK_THROWS_WITH_AS(parse_model(text), doctest::Contains("fixture ports must equal"), ModelError);
}

TEST_CASE("fixture is interposed between test and SUT") {
  std::string text = std::string(kGainSuite) +
                     "fixture {\n  in u\n  out u\n  block offset const 1\n  block add sum ++\n"
                     "  wire u -> add.in1\n  wire offset -> add.in2\n  wire add -> u\n}\n";
  auto g = parse_model(text);
  validate(g);
  auto trace = simulate(g, "test_double", 4);
  REQUIRE_FALSE(trace.outcomes.empty());
  CHECK(trace.outcomes[0].actual == 8.0);
  CHECK(trace.failed());
}

TEST_CASE("discovery keeps file order and the test prefix") {
  auto text = "suite s\nsubsystem test_z {\n  block a const 0\n  block k assert_eq\n  wire a -> k.actual\n"
              "  wire a -> k.expected\n}\nsubsystem helper {\n  in x\n  out y\n  wire x -> y\n}\n"
              "test test_a {\n  block a const 0\n  block k assert_eq\n  wire a -> k.actual\n  wire a -> k.expected\n}\n";
  CHECK(discover_tests(parse_model(text)) == std::vector<std::string>{"test_z", "test_a"});
}

TEST_CASE("external SUT references") {
  support::TempDir tmp;
  heterotest::write_text_file(tmp / "lib/lib.bdm",
                              "subsystem controller {\n  in u\n  out y\n  block g gain 2\n  wire u -> g\n  wire g -> y\n}\n");
  std::string suite = kGainSuite;
  auto sut_begin = suite.find("sut {");
  auto sut_end = suite.find("}\n", sut_begin) + 2;
  suite.replace(sut_begin, sut_end - sut_begin, "sut ref lib.bdm#controller\n");

  SUBCASE("resolved from the search path") {
    auto g = parse_model(suite, tmp / "suite.bdm");
    CHECK_FALSE(g.sut);
    auto r = resolve_sut(g, {tmp / "lib"});
    REQUIRE(r.sut);
    CHECK(r.sut->find_block("g"));
    CHECK_FALSE(simulate(r, "test_double", 4).failed());
  }
  SUBCASE("resolution re-reads the file") {
    auto g = parse_model(suite, tmp / "suite.bdm");
    CHECK_FALSE(simulate(resolve_sut(g, {tmp / "lib"}), "test_double", 4).failed());
    heterotest::write_text_file(tmp / "lib/lib.bdm",
                                "subsystem controller {\n  in u\n  out y\n  block g gain 3\n  wire u -> g\n  wire g -> y\n}\n");
    CHECK(simulate(resolve_sut(g, {tmp / "lib"}), "test_double", 4).failed());
  }
  SUBCASE("missing file or subsystem") {
    auto g = parse_model(suite, tmp / "suite.bdm");
    CHECK_THROWS_AS(resolve_sut(g, {}), ModelError);
    auto other = suite;
    other.replace(other.find("#controller"), 11, "#nothing");
    CHECK_THROWS_AS(resolve_sut(parse_model(other, tmp / "suite.bdm"), {tmp / "lib"}), ModelError);
  }
  SUBCASE("inline SUT is returned unchanged") {
    auto g = parse_model(kGainSuite);
    auto r = resolve_sut(g, {});
    REQUIRE(r.sut);
    CHECK(r.sut->blocks.size() == g.sut->blocks.size());
  }
}

TEST_CASE("cyclic references are reported") {
  support::TempDir tmp;
  heterotest::write_text_file(tmp / "a.bdm", "subsystem s ref b.bdm#t\n");
  heterotest::write_text_file(tmp / "b.bdm", "subsystem t ref a.bdm#s\n");
  auto g = parse_model("suite c\nsut ref a.bdm#s\n", tmp / "suite.bdm");
  try {
    resolve_sut(g, {});
    FAIL("expected a cycle");
  } catch (const ModelError& e) {
    CHECK(std::string(e.what()).find("cyclic reference") != std::string::npos);
  }
}

TEST_CASE("time invariance") {
  CHECK(is_time_invariant(parse_model(kGainSuite), "test_double"));
  auto seq = parse_model(single_test("  block a sequence 1 2\n  block k assert_eq\n  wire a -> k.actual\n"
                                     "  wire a -> k.expected\n"));
  CHECK_FALSE(is_time_invariant(seq, "test_it"));
  std::string delayed = kGainSuite;
  delayed.replace(delayed.find("wire g -> y"), 11, "block d delay 0\n  wire g -> d\n  wire d -> y");
  CHECK_FALSE(is_time_invariant(parse_model(delayed), "test_double"));
  // a time-dependent block that reaches no assertion or sink does not count
  auto idle = parse_model(single_test("  block t clock\n  block g gain 1\n  block a const 1\n  block k assert_eq\n"
                                      "  wire t -> g\n  wire a -> k.actual\n  wire a -> k.expected\n"));
  CHECK(is_time_invariant(idle, "test_it"));
}

TEST_CASE("simulation semantics") {
  SUBCASE("gain example passes at every step") {
    auto trace = simulate(parse_model(kGainSuite), "test_double", 4, SimOptions{false});
    CHECK(trace.steps == 4);
    CHECK(trace.outcomes.size() == 4);
    CHECK_FALSE(trace.failed());
  }
  SUBCASE("unit delay") {
    auto g = parse_model(single_test("  block in sequence 1 2 3\n  block d delay 0\n  block want sequence 0 1 2\n"
                                     "  block k assert_eq\n  wire in -> d\n  wire d -> k.actual\n"
                                     "  wire want -> k.expected\n", 3));
    CHECK_FALSE(simulate(g, "test_it", 3).failed());
  }
  SUBCASE("single-step divergence is recorded at that step only") {
    auto g = parse_model(single_test("  block a sequence 0 0 0 1 0\n  block z const 0\n  block k assert_eq\n"
                                     "  wire a -> k.actual\n  wire z -> k.expected\n"));
    auto trace = simulate(g, "test_it", 5);
    CHECK(trace.failed());
    std::vector<int> failing;
    for (const auto& o : trace.outcomes) {
      if (!o.passed) failing.push_back(o.step);
    }
    CHECK(failing == std::vector<int>{3});
  }
  SUBCASE("algebraic loop") {
    auto g = parse_model(single_test("  block one const 1\n  block s sum ++\n  block k assert_eq\n"
                                     "  wire one -> s.in1\n  wire s -> s.in2\n  wire s -> k.actual\n"
                                     "  wire one -> k.expected\n"));
    try {
      simulate(g, "test_it", 5);
      FAIL("expected a loop");
    } catch (const SimulationError& e) {
      CHECK(std::string(e.what()) == "algebraic loop involving s");
    }
  }
  SUBCASE("a delay breaks the loop") {
    auto g = parse_model(single_test("  block one const 1\n  block s sum ++\n  block d delay 0\n  block t clock 1\n"
                                     "  block n sum ++\n  block k assert_eq\n  wire one -> s.in1\n  wire d -> s.in2\n"
                                     "  wire s -> d\n  wire t -> n.in1\n  wire one -> n.in2\n  wire s -> k.actual\n"
                                     "  wire n -> k.expected\n"));
    CHECK_FALSE(simulate(g, "test_it", 6).failed());
  }
  SUBCASE("non-finite values") {
    auto g = parse_model(single_test("  block a const 1e308\n  block g gain 10\n  block k assert_eq\n"
                                     "  wire a -> g\n  wire g -> k.actual\n  wire a -> k.expected\n"));
    CHECK_THROWS_AS(simulate(g, "test_it", 5), SimulationError);
  }
  SUBCASE("step, clock, saturate and sinks") {
    auto g = parse_model(single_test("  block st step 2 -1 4\n  block c clock 0.5\n  block lim saturate 0 1\n"
                                     "  block s1 sink\n  block s2 sink\n  block s3 sink\n  block z const 0\n"
                                     "  block k assert_eq\n  wire st -> s1\n  wire c -> lim\n  wire lim -> s2\n"
                                     "  wire c -> s3\n  wire z -> k.actual\n  wire z -> k.expected\n"));
    auto trace = simulate(g, "test_it", 4);
    CHECK(trace.sinks.at("s1") == std::vector<double>{-1, -1, 4, 4});
    CHECK(trace.sinks.at("s2") == std::vector<double>{0, 0.5, 1, 1});
    CHECK(trace.sinks.at("s3") == std::vector<double>{0, 0.5, 1, 1.5});
  }
  SUBCASE("simulation is deterministic") {
    auto g = parse_model(kGainSuite);
    CHECK(simulate(g, "test_double", 4) == simulate(g, "test_double", 4));
  }
}

TEST_CASE("time-invariant tests run one step with the same verdict") {
  for (const char* expected : {"6.0", "7.0"}) {
    std::string text = kGainSuite;
    text.replace(text.find("want const 6.0"), 14, std::string("want const ") + expected);
    auto g = parse_model(text);
    auto minimized = simulate(g, "test_double", 10);
    auto full = simulate(g, "test_double", 10, SimOptions{false});
    CHECK(minimized.steps == 1);
    CHECK(full.steps == 10);
    CHECK(minimized.failed() == full.failed());
  }
}

TEST_CASE("pass-through gain 1 never changes outcomes") {
  std::string text = kGainSuite;
  auto base = simulate(parse_model(text), "test_double", 4).outcomes;
  text.replace(text.find("wire c -> sut.u"), 15, "block pass gain 1.0\n  wire c -> pass\n  wire pass -> sut.u");
  auto with_pass = simulate(parse_model(text), "test_double", 4).outcomes;
  REQUIRE(base.size() == with_pass.size());
  for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i].passed == with_pass[i].passed);
}

TEST_CASE("random acyclic graphs match the composition oracle") {
  std::mt19937_64 rng(20261016);
  for (int i = 0; i < 200; ++i) {
    auto rg = support::make_random_graph(rng, i);
    auto trace = simulate(parse_model(rg.model), "test_graph", 3);
    for (const auto& [sink, want] : rg.expected) {
      REQUIRE(trace.sinks.at(sink).size() == 1);
      CHECK(std::abs(trace.sinks.at(sink)[0] - want) <= 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}
