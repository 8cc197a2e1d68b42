#include "heterotest/slrunner.hpp"

#include <chrono>
#include <future>
#include <sstream>

#include "heterotest/util.hpp"

namespace heterotest::slrunner {

namespace bm = blockmodel;

namespace {

TestCaseResult error_case(std::string name, std::string text, const std::string& file) {
  TestCaseResult result;
  result.name = std::move(name);
  result.status = TestStatus::error;
  Message m;
  m.text = std::move(text);
  m.file = file;
  result.messages.push_back(std::move(m));
  return result;
}

std::string describe(const bm::AssertionOutcome& o, double tol) {
  std::ostringstream out;
  out << "assertion '" << o.block << "' failed at step " << o.step << ": actual " << format_number(o.actual)
      << ", expected " << format_number(o.expected) << " (tolerance " << format_number(tol) << ")";
  return out.str();
}

int declaration_line(const bm::ModelGraph& graph, std::string_view test, const std::string& block) {
  const bm::Subsystem* sub = graph.find_subsystem(test);
  auto lookup = [&](const bm::Subsystem* s, std::string_view id) {
    const bm::Block* b = s ? s->find_block(id) : nullptr;
    return b ? b->line : 0;
  };
  if (starts_with(block, "sut.") && graph.sut) return lookup(&*graph.sut, std::string_view(block).substr(4));
  if (starts_with(block, "fixture.") && graph.fixture) {
    return lookup(&*graph.fixture, std::string_view(block).substr(8));
  }
  return lookup(sub, block);
}

double tolerance_of(const bm::ModelGraph& graph, std::string_view test, const std::string& block) {
  const bm::Subsystem* sub = graph.find_subsystem(test);
  const bm::Block* b = sub ? sub->find_block(block) : nullptr;
  if (!b && starts_with(block, "sut.") && graph.sut) b = graph.sut->find_block(std::string_view(block).substr(4));
  if (!b && starts_with(block, "fixture.") && graph.fixture) {
    b = graph.fixture->find_block(std::string_view(block).substr(8));
  }
  return b && !b->numbers.empty() ? b->numbers[0] : 0.0;
}

}  // namespace

TestCaseResult run_test(const bm::ModelGraph& graph, std::string_view test, std::string_view resolve_error) {
  const auto start = std::chrono::steady_clock::now();
  const std::string file = graph.source_file.generic_string();
  TestCaseResult result;
  result.name = std::string(test);
  try {
    const bm::Subsystem* sub = graph.find_subsystem(test);
    if (!sub) throw bm::SimulationError("test '" + std::string(test) + "' not found");
    if (!resolve_error.empty() && sub->references_sut() && !graph.sut) {
      throw bm::SimulationError(std::string(resolve_error));
    }
    bm::SimTrace trace = bm::simulate(graph, test, graph.steps);
    for (const auto& o : trace.outcomes) {
      if (o.passed) continue;
      Message m;
      m.text = describe(o, tolerance_of(graph, test, o.block));
      m.file = file;
      m.block = o.block;
      m.step = o.step;
      m.line = declaration_line(graph, test, o.block);
      result.messages.push_back(std::move(m));
    }
    result.status = result.messages.empty() ? TestStatus::passed : TestStatus::failed;
    for (auto& [block, values] : trace.sinks) result.trace.push_back(SinkSeries{block, std::move(values)});
  } catch (const std::exception& e) {
    result = error_case(std::string(test), e.what(), file);
    if (const bm::Subsystem* sub = graph.find_subsystem(test)) result.messages.front().line = sub->line;
  } catch (...) {
    result = error_case(std::string(test), "unknown fault", file);
  }
  result.duration_ms = elapsed_ms(start);
  return result;
}

SuiteResult run_suite(const fs::path& path, const std::vector<fs::path>& search_path,
                      const std::string& display_path) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult suite;
  suite.suite = path.stem().string();
  suite.source_file = display_path.empty() ? path.generic_string() : display_path;
  suite.started_at = utc_timestamp();

  bm::ModelGraph graph;
  try {
    graph = bm::load_model(path);
  } catch (const bm::ModelError& e) {
    suite.cases.push_back(error_case("load", e.what(), suite.source_file));
    suite.cases.back().messages.front().line = e.line();
    suite.duration_ms = elapsed_ms(start);
    return suite;
  } catch (const std::exception& e) {
    suite.cases.push_back(error_case("load", e.what(), suite.source_file));
    suite.duration_ms = elapsed_ms(start);
    return suite;
  }
  if (graph.is_suite()) suite.suite = graph.suite_name;

  std::string resolve_error;
  try {
    graph = bm::resolve_sut(graph, search_path);
  } catch (const std::exception& e) {
    resolve_error = e.what();
  }
  // Messages should name the path as recorded in the results.
  graph.source_file = suite.source_file;

  auto tests = discover_tests(graph);
  if (tests.empty()) {
    suite.cases.push_back(error_case("load", "no tests discovered", suite.source_file));
  }
  for (const auto& name : tests) suite.cases.push_back(run_test(graph, name, resolve_error));
  suite.duration_ms = elapsed_ms(start);
  return suite;
}

RunnerSummary slunit_testrunner(const RunnerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  RunnerSummary summary;
  auto& doc = summary.document;
  doc.timestamp = utc_timestamp();

  auto run_one = [&config](const std::string& name) {
    auto path = config.testpath / (name + ".bdm");
    auto result = run_suite(path, config.search_path);
    if (result.suite.empty()) result.suite = name;
    return result;
  };

  if (config.jobs > 1) {
    std::vector<std::future<SuiteResult>> pending;
    for (const auto& name : config.testsuites) pending.push_back(std::async(std::launch::async, run_one, name));
    for (auto& f : pending) doc.suites.push_back(f.get());
  } else {
    for (const auto& name : config.testsuites) doc.suites.push_back(run_one(name));
  }

  for (const auto& s : doc.suites) {
    auto c = s.counts();
    summary.counts += c;
    if (c.error > 0) ++summary.errored_suites;
  }
  doc.duration_ms = elapsed_ms(start);

  fs::create_directories(config.out_dir);
  auto xml_path = config.out_dir / report::results_file_name(config.report_name);
  report::write_results_xml(doc, xml_path);
  summary.files.push_back(xml_path);

  report::RenderOptions options;
  options.verbosity = config.verbosity;
  options.report_name = config.report_name;
  auto pages = report::render_html(doc, options, config.out_dir);
  summary.files.insert(summary.files.end(), pages.begin(), pages.end());
  return summary;
}

}  // namespace heterotest::slrunner
