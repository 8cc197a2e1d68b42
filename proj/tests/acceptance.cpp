// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <iostream>
#include <random>
#include <sstream>

#include "heterotest/blockmodel.hpp"
#include "heterotest/ci.hpp"
#include "heterotest/cli.hpp"
#include "heterotest/coverage.hpp"
#include "heterotest/report.hpp"
#include "heterotest/rungen.hpp"
#include "heterotest/slrunner.hpp"
#include "heterotest/testdsl.hpp"
#include "support.hpp"

using namespace heterotest;
namespace bm = heterotest::blockmodel;

namespace {

/// Collects the reasons a criterion failed.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) problems_.push_back(what);
  }
  bool ok() const { return problems_.empty(); }
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[portable_relative(e.path(), dir)] = read_text_file(e.path());
  }
  return files;
}

void addition_suite(Check& c) {
  const auto dir = support::data_dir() / "addition";
  auto manifest = rungen::scan({dir});
  c.expect(manifest.diagnostics.empty(), "scan produced diagnostics");
  c.expect(manifest.entries.size() == 1, "manifest has " + std::to_string(manifest.entries.size()) + " entries");
  if (manifest.entries.size() == 1) {
    c.expect(manifest.entries[0].suite == "MyTestSuite" && manifest.entries[0].method == "testAddition",
             "manifest entry is not (MyTestSuite, testAddition)");
  }
  coverage::CoverageSession session;
  rungen::RunOptions options;
  options.coverage = &session;
  auto doc = rungen::run_manifest(manifest, options);
  auto counts = doc.counts();
  c.expect(doc.suites.size() == 1, "suite count " + std::to_string(doc.suites.size()));
  c.expect(counts.total() == 1 && counts.passed == 1, "expected 1 passed test");
  auto cov = session.summarize();
  bool both = !cov.files.empty() && cov.files[0].executed.count(9) && cov.files[0].executed.count(10);
  c.expect(both, "both assertions (lines 9 and 10) evaluated");
}

void single_step_failure(Check& c) {
  auto result = slrunner::run_suite(support::data_dir() / "models/divergence.bdm", {}, "divergence.bdm");
  c.expect(result.cases.size() == 1, "expected one test case");
  if (result.cases.size() != 1) return;
  const auto& t = result.cases[0];
  c.expect(t.status == TestStatus::failed, "status is " + std::string(to_string(t.status)));
  c.expect(t.messages.size() == 1 && t.messages[0].step == 3, "failure not attributed to step 3");
  c.expect(!t.messages.empty() && t.messages[0].text.find("step 3") != std::string::npos,
           "message does not name step 3");
}

void constant_minimization(Check& c) {
  const char* model = R"(suite consts
steps 10
test test_scaled {
  block a const 4
  block g gain 0.5
  block s sum +-
  block one const 1
  block want const 1
  block k assert_eq
  block probe sink
  wire a -> g
  wire s -> probe
  wire g -> s.in1
  wire one -> s.in2
  wire s -> k.actual
  wire want -> k.expected
}
)";
  for (const char* want : {"1", "2"}) {
    std::string text = model;
    text.replace(text.find("want const 1"), 12, std::string("want const ") + want);
    auto g = bm::parse_model(text);
    c.expect(bm::is_time_invariant(g, "test_scaled"), "test not detected as time-invariant");
    auto minimized = bm::simulate(g, "test_scaled", 10);
    auto full = bm::simulate(g, "test_scaled", 10, bm::SimOptions{false});
    c.expect(minimized.steps == 1, "minimized run took " + std::to_string(minimized.steps) + " steps");
    c.expect(full.steps == 10, "full run took " + std::to_string(full.steps) + " steps");
    c.expect(minimized.failed() == full.failed(), "verdict differs from the 10-step run");
    auto via_runner = slrunner::run_test(g, "test_scaled");
    c.expect(via_runner.trace.size() == 1, "expected one sink trace");
    for (const auto& series : via_runner.trace) c.expect(series.values.size() == 1, "trace length is not 1");
  }
}

void isolation(Check& c) {
  const auto path = support::data_dir() / "models/isolation.bdm";
  auto full = slrunner::run_suite(path, {}, "isolation.bdm");
  std::vector<TestStatus> want{TestStatus::passed, TestStatus::error, TestStatus::passed};
  std::vector<TestStatus> got;
  for (const auto& t : full.cases) got.push_back(t.status);
  c.expect(got == want, "statuses are not [passed, error, passed]");
  if (got != want) return;

  auto graph = bm::load_model(path);
  graph.source_file = "isolation.bdm";
  graph.subsystems.erase(graph.subsystems.begin() + 1);
  auto first = slrunner::run_test(graph, full.cases[0].name);
  auto third = slrunner::run_test(graph, full.cases[2].name);
  c.expect(without_timing(first) == without_timing(full.cases[0]), "first test changed without test 2");
  c.expect(without_timing(third) == without_timing(full.cases[2]), "third test changed without test 2");
}

void adapter_equivalence(Check& c) {
  support::TempDir tmp;
  support::copy_tree(support::data_dir() / "corpus/models", tmp / "models");
  auto adapters = rungen::generate_adapters(tmp / "models", tmp / "adapters");
  c.expect(adapters.adapters.size() >= 10, "corpus has only " + std::to_string(adapters.adapters.size()) + " cases");
  testdsl::ModelEngine engine;
  rungen::RunOptions options;
  options.engine = &engine;
  auto doc = rungen::run_manifest(rungen::scan({tmp / "adapters"}), options);

  std::map<std::string, TestCaseResult> by_name;
  for (const auto& s : doc.suites) {
    for (const auto& t : s.cases) by_name[t.name] = t;
  }
  std::set<TestStatus> seen;
  for (const auto& entry : adapters.adapters) {
    auto model = slrunner::run_test(bm::resolve_sut(bm::load_model(entry.model_suite), {}), entry.test_case);
    seen.insert(model.status);
    auto it = by_name.find(entry.adapter_method);
    if (it == by_name.end()) {
      c.expect(false, "adapter " + entry.adapter_method + " did not run");
      continue;
    }
    auto expected = model.status == TestStatus::passed ? TestStatus::passed : TestStatus::failed;
    c.expect(it->second.status == expected, entry.adapter_method + " verdict mismatch");
    for (const auto& m : model.messages) {
      c.expect(it->second.output.find(m.text) != std::string::npos, entry.adapter_method + " output lacks message");
    }
  }
  c.expect(seen.size() == 3, "corpus does not span all three statuses");
  for (const auto& e : fs::directory_iterator(tmp / "models")) {
    if (e.path().extension() != ".bdm") continue;
    int loads = engine.load_count(e.path());
    // library files without tests are loaded through references, not by adapters
    if (loads != 0 || e.path().filename() != "plant.bdm") {
      c.expect(loads == 1, e.path().filename().string() + " loaded " + std::to_string(loads) + " times");
    }
  }
}

void virtual_revisions(Check& c) {
  support::TempDir tmp;
  support::JournalRepo app(tmp / "app");
  support::JournalRepo lib(tmp / "lib");
  app.commit("1", {{"tests/alpha.tsuite", read_text_file(support::data_dir() / "report/alpha.tsuite")}});
  lib.commit("1", {{"README", "1\n"}});
  auto config = ci::parse_config(
      "[component app]\nkind = journal\nlocation = app\nrole = main\n"
      "[component lib]\nkind = journal\nlocation = lib\nrole = external\n"
      "[notify]\nenabled = false\n",
      tmp.path());
  ci::Daemon daemon(config);
  int runs = 0;
  auto poll = [&] {
    auto out = daemon.poll_once();
    if (out.run) ++runs;
    c.expect(out.error.empty(), "poll error: " + out.error);
    return out;
  };
  poll();

  // (a)
  int before = runs;
  for (int i = 0; i < 3; ++i) c.expect(!poll().created, "unchanged poll created a virtual revision");
  c.expect(runs == before, "unchanged polls ran a pipeline");
  c.expect(daemon.store().revisions().size() == 1, "(a) store grew");

  // (b)
  lib.commit("2", {{"README", "2\n"}});
  before = runs;
  auto bumped = poll();
  c.expect(bumped.created && bumped.created->vid == 2, "external bump did not create vid 2");
  c.expect(runs == before + 1, "external bump did not run exactly one pipeline");
  c.expect(!poll().created, "second poll after the bump created a revision");

  // (c)
  app.commit("2", {});
  poll();
  lib.commit("3", {});
  poll();
  app.commit("3", {});
  lib.commit("4", {});
  poll();
  app.commit("4", {});
  poll();
  lib.commit("5", {});
  poll();
  auto revs = daemon.store().revisions();
  c.expect(revs.size() == 7, "expected 7 virtual revisions, found " + std::to_string(revs.size()));
  for (std::size_t i = 0; i < revs.size(); ++i) {
    c.expect(revs[i].vid == static_cast<std::int64_t>(i + 1), "vids are not gapless");
    if (i > 0) c.expect(revs[i].revisions != revs[i - 1].revisions, "consecutive tuples repeat");
  }
  for (const auto& v : revs) c.expect(daemon.store().is_complete(v.vid), "vid without a pipeline run");
  c.expect(runs == 7, "expected 7 pipeline runs, saw " + std::to_string(runs));
}

void report_tree(Check& c) {
  support::TempDir tmp;
  support::copy_tree(support::data_dir() / "report", tmp / "src");
  auto manifest = rungen::scan({tmp / "src"});
  rungen::generate_runner(manifest, tmp / "src/runner.manifest");
  rungen::RunOptions options;
  options.base_dir = tmp / "src";
  auto ran = rungen::run_manifest(rungen::read_manifest(tmp / "src/runner.manifest"), options);
  report::write_results_xml(ran, tmp / "results.xml");
  auto doc = report::read_results_xml(tmp / "results.xml");
  c.expect(doc.suites.size() == 2, "document does not have 2 suites");

  report::RenderOptions render;
  render.verbosity = 2;
  render.source_root = tmp / "src";
  report::render_html(doc, render, tmp / "html");
  auto overview = read_text_file(tmp / "html/heterotest_report.html");
  int links = support::count_links(overview, report::suite_page_names(doc, "heterotest"));
  c.expect(links == 2, "overview has " + std::to_string(links) + " suite links");

  auto xml = read_text_file(tmp / "results.xml");
  std::smatch m;
  std::regex counts(R"re(<testresults [^>]*tests="(\d+)" passed="(\d+)" failed="(\d+)" error="(\d+)")re");
  if (std::regex_search(xml, m, counts)) {
    auto totals = m[1].str() + " tests: " + m[2].str() + " passed, " + m[3].str() + " failed, " + m[4].str() + " error";
    c.expect(overview.find(totals) != std::string::npos, "overview totals differ from XML counts");
  } else {
    c.expect(false, "results XML lacks counts");
  }

  auto dangling = support::dangling_links(tmp / "html");
  c.expect(dangling.empty(), std::to_string(dangling.size()) + " dangling links");

  // the failing assertion in beta.tsuite is on line 16
  auto beta = read_text_file(tmp / "html/heterotest_Beta.html");
  c.expect(beta.find("<span class=\"line highlight\"><span class=\"lineno\">16</span>") != std::string::npos,
           "failure line not highlighted");
  for (int line = 13; line <= 19; ++line) {
    c.expect(beta.find("<span class=\"lineno\">" + std::to_string(line) + "</span>") != std::string::npos,
             "fragment lacks line " + std::to_string(line));
  }
  for (int line : {12, 20}) {
    c.expect(beta.find("<span class=\"lineno\">" + std::to_string(line) + "</span>") == std::string::npos,
             "fragment exceeds 3 lines of context");
  }
}

void coverage_fixture(Check& c) {
  support::TempDir tmp;
  support::copy_tree(support::data_dir() / "coverage", tmp.path());
  auto manifest = rungen::scan({tmp.path()});
  rungen::RunOptions plain;
  auto without = rungen::run_manifest(manifest, plain);

  coverage::CoverageSession session;
  rungen::RunOptions measured;
  measured.coverage = &session;
  auto with = rungen::run_manifest(manifest, measured);
  c.expect(with.coverage.has_value(), "no coverage in the document");
  if (with.coverage) {
    c.expect(with.coverage->instrumentable() == 10, "instrumentable " + std::to_string(with.coverage->instrumentable()));
    c.expect(with.coverage->executed() == 7, "executed " + std::to_string(with.coverage->executed()));
    c.expect(format_percent(with.coverage->percent()) == "70.0",
             "summary is " + format_percent(with.coverage->percent()) + "%");
  }
  auto a = support::mask_volatile(report::results_xml(without));
  auto b = support::mask_volatile(support::strip_coverage(report::results_xml(with)));
  c.expect(a == b, "results XML differs beyond the coverage block");
}

void determinism(Check& c) {
  support::TempDir tmp;
  support::copy_tree(support::data_dir() / "corpus", tmp / "corpus");
  auto run_cli = [&](std::vector<std::string> args) {
    std::ostringstream out, err;
    return cli::dispatch(args, out, err);
  };
  run_cli({"adapt", "--models", (tmp / "corpus/models").string(), "-o", (tmp / "corpus/adapters").string()});
  run_cli({"gen", "--src", (tmp / "corpus/tests").string(), "--src", (tmp / "corpus/adapters").string(), "-o",
           (tmp / "corpus/runner.manifest").string()});
  for (const char* out : {"r1", "r2"}) {
    run_cli({"run", "--manifest", (tmp / "corpus/runner.manifest").string(), "--cover", "--verbosity", "2", "--out",
             (tmp / out).string()});
  }
  auto first = read_tree(tmp / "r1");
  auto second = read_tree(tmp / "r2");
  c.expect(first.size() > 2, "run produced too few files");
  c.expect(first.size() == second.size(), "runs produced different file sets");
  for (const auto& [name, text] : first) {
    auto it = second.find(name);
    if (it == second.end()) continue;
    c.expect(support::mask_volatile(text) == support::mask_volatile(it->second), name + " differs");
  }

  // the CI pipeline re-run for the same virtual revision
  support::JournalRepo app(tmp / "app");
  app.commit("1", {{"tests/beta.tsuite", read_text_file(support::data_dir() / "report/beta.tsuite")},
                   {"models/arith.bdm", read_text_file(support::data_dir() / "corpus/models/arith.bdm")}});
  auto config = ci::parse_config("[component app]\nkind = journal\nlocation = app\nrole = main\n"
                                 "[pipeline]\nverbosity = 2\n[notify]\nenabled = false\n",
                                 tmp.path());
  ci::Store store(config.store);
  auto v = ci::next_virtual_revision(ci::poll(config.components), store);
  ci::run_pipeline(*v, config, store);
  auto report1 = read_tree(store.run_dir(1) / "report");
  ci::run_pipeline(*v, config, store);
  auto report2 = read_tree(store.run_dir(1) / "report");
  c.expect(report1.size() == report2.size() && !report1.empty(), "pipeline reports differ in file sets");
  for (const auto& [name, text] : report1) {
    auto it = report2.find(name);
    c.expect(it != report2.end() && support::mask_volatile(text) == support::mask_volatile(it->second),
             "pipeline " + name + " differs");
  }
}

void oracles(Check& c) {
  std::mt19937_64 rng(42);
  int graph_mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    auto rg = support::make_random_graph(rng, i);
    auto trace = bm::simulate(bm::parse_model(rg.model), "test_graph", 3);
    for (const auto& [sink, want] : rg.expected) {
      double got = trace.sinks.at(sink).at(0);
      if (!(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)))) ++graph_mismatches;
    }
  }
  c.expect(graph_mismatches == 0, std::to_string(graph_mismatches) + " graph sink mismatches");

  testdsl::Environment env{{"x", std::int64_t{7}}, {"y", 2.5}};
  std::map<std::string, support::RefValue> ref_env{{"x", std::int64_t{7}}, {"y", 2.5}};
  int expr_mismatches = 0;
  for (int i = 0; i < 500; ++i) {
    auto tree = support::random_ref(rng, 6);
    std::optional<support::RefValue> want;
    try {
      want = support::ref_eval(tree, ref_env);
    } catch (const support::RefFault&) {
    }
    std::optional<testdsl::Value> got;
    try {
      got = testdsl::eval_expr(testdsl::parse_expression(support::render_ref(tree)), env);
    } catch (const testdsl::RuntimeFault&) {
    }
    bool same = want.has_value() == got.has_value();
    if (same && want) {
      same = want->index() == got->index() &&
             std::visit([&](const auto& w) { return std::get<std::decay_t<decltype(w)>>(*got) == w; }, *want);
    }
    if (!same) ++expr_mismatches;
  }
  c.expect(expr_mismatches == 0, std::to_string(expr_mismatches) + " expression mismatches");
}

struct Criterion {
  const char* description;
  void (*run)(Check&);
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {"addition suite: 1 suite, 1 passed test, both assertions, manifest (MyTestSuite, testAddition)", addition_suite},
      {"single-step divergence at step 3 of 5 reports failed at step 3", single_step_failure},
      {"time-invariant test runs 1 step with the 10-step verdict", constant_minimization},
      {"isolation: [passed, error, passed], others unchanged without test 2", isolation},
      {"adapter verdicts, forwarded messages, one load per model file", adapter_equivalence},
      {"virtual revisions: no-change, external bump, gapless vids", virtual_revisions},
      {"report tree: 2 suite links, totals, no dangling links, +-3 line fragment", report_tree},
      {"coverage 70.0% and XML unchanged apart from the coverage block", coverage_fixture},
      {"deterministic XML and HTML across runs", determinism},
      {"oracles: 200 graphs within 1e-12, 500 expressions exact", oracles},
  };
  int failures = 0;
  int n = 0;
  for (const auto& criterion : criteria) {
    ++n;
    Check check;
    auto start = std::chrono::steady_clock::now();
    try {
      criterion.run(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    std::cout << (check.ok() ? "PASS " : "FAIL ") << n << ": " << criterion.description << " (" << ms << " ms)\n";
    for (const auto& p : check.problems()) std::cout << "    " << p << "\n";
    if (!check.ok()) ++failures;
  }
  std::cout << n - failures << "/" << n << " criteria passed\n";
  return failures == 0 ? 0 : 1;
}
