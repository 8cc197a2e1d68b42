#include <doctest.h>

#include "heterotest/report.hpp"
#include "heterotest/rungen.hpp"
#include "support.hpp"

using namespace heterotest;
using namespace heterotest::report;

namespace {

ResultsDocument small_doc() {
  ResultsDocument doc;
  doc.timestamp = "2026-01-02T03:04:05Z";
  doc.duration_ms = 12;
  SuiteResult s;
  s.suite = "one";
  s.source_file = "one.tsuite";
  s.started_at = doc.timestamp;
  s.cases.push_back(TestCaseResult{"testA", TestStatus::passed, 1, {}, "", {}});
  doc.suites.push_back(s);
  return doc;
}

ResultsDocument rich_doc() {
  auto doc = small_doc();
  doc.revision = 7;
  doc.diagnostics.push_back("build: odd <file>");
  auto& s = doc.suites[0];
  s.cases.push_back(TestCaseResult{"testB",
                                   TestStatus::failed,
                                   2,
                                   {Message{"line 4: \"x\" != 'y' & <z>", "one.tsuite", 4, "", -1}},
                                   "out\nput\n",
                                   {}});
  s.cases.push_back(TestCaseResult{"test_model",
                                   TestStatus::failed,
                                   0,
                                   {Message{"assertion 'k' failed at step 3", "m.bdm", 9, "k", 3}},
                                   "",
                                   {SinkSeries{"s", {0.1, 2, -3e-20}}}});
  s.cases.push_back(TestCaseResult{"testC", TestStatus::error, 0, {Message{"line 5: division by zero", "one.tsuite", 5, "", -1}}, "", {}});
  coverage::CoverageMap cov;
  cov.files.push_back(coverage::CoverageFile{"one.tsuite", {3, 4, 5}, {3}});
  doc.coverage = cov;
  return doc;
}

ResultsDocument run_report_fixture(const fs::path& root) {
  support::copy_tree(support::data_dir() / "report", root);
  auto manifest = rungen::scan({root});
  rungen::generate_runner(manifest, root / "runner.manifest");
  rungen::RunOptions options;
  options.base_dir = root;
  return rungen::run_manifest(rungen::read_manifest(root / "runner.manifest"), options);
}

}  // namespace

TEST_CASE("results XML writer") {
  auto xml = results_xml(small_doc());
  CHECK(xml.find("<testresults format=\"1\"") != std::string::npos);
  CHECK(xml.find("tests=\"1\" passed=\"1\" failed=\"0\" error=\"0\"") != std::string::npos);
  CHECK(xml.find('\r') == std::string::npos);

  auto rich = results_xml(rich_doc());
  CHECK(rich.find("revision=\"7\"") != std::string::npos);
  CHECK(rich.find("<failure file=\"one.tsuite\" line=\"4\"") != std::string::npos);
  CHECK(rich.find("block=\"k\" step=\"3\"") != std::string::npos);
  CHECK(rich == results_xml(rich_doc()));

  support::TempDir tmp;
  write_results_xml(rich_doc(), tmp / "a.xml");
  write_results_xml(rich_doc(), tmp / "b.xml");
  CHECK(read_text_file(tmp / "a.xml") == read_text_file(tmp / "b.xml"));
}

TEST_CASE("results XML reader") {
  SUBCASE("round trip") {
    for (const auto& doc : {small_doc(), rich_doc()}) {
      auto xml = results_xml(doc);
      std::vector<std::string> warnings;
      auto back = parse_results_xml(xml, &warnings);
      CHECK(back == doc);
      CHECK(warnings.empty());
      CHECK(results_xml(back) == xml);
    }
  }
  SUBCASE("missing status names the element") {
    auto xml = results_xml(small_doc());
    xml.replace(xml.find(" status=\"passed\""), 16, "");
    try {
      parse_results_xml(xml);
      FAIL("expected a schema error");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("test[1]") != std::string::npos);
      CHECK(std::string(e.what()).find("status") != std::string::npos);
    }
  }
  SUBCASE("unknown elements are ignored with a warning") {
    auto xml = results_xml(small_doc());
    xml.insert(xml.find("<suite "), "<extension foo=\"1\"/>\n  ");
    std::vector<std::string> warnings;
    auto back = parse_results_xml(xml, &warnings);
    CHECK(back == small_doc());
    CHECK(warnings.size() == 1);
  }
  SUBCASE("inconsistent counts are rejected") {
    auto xml = results_xml(small_doc());
    xml.replace(xml.find("passed=\"1\""), 10, "passed=\"2\"");
    CHECK_THROWS_AS(parse_results_xml(xml), SchemaError);
  }
  SUBCASE("malformed XML and wrong roots") {
    CHECK_THROWS_AS(parse_results_xml("<testresults"), SchemaError);
    CHECK_THROWS_AS(parse_results_xml("<other/>"), SchemaError);
    CHECK_THROWS_AS(read_results_xml("/nonexistent/results.xml"), SchemaError);
  }
}

TEST_CASE("HTML report tree") {
  support::TempDir tmp;
  auto doc = run_report_fixture(tmp / "src");
  REQUIRE(doc.suites.size() == 2);
  RenderOptions options;
  options.source_root = tmp / "src";
  auto files = render_html(doc, options, tmp / "out");
  REQUIRE_FALSE(files.empty());
  CHECK(files[0].filename() == "heterotest_report.html");

  const auto overview = read_text_file(tmp / "out/heterotest_report.html");
  CHECK(support::count_links(overview, suite_page_names(doc, "heterotest")) == 2);
  auto c = doc.counts();
  CHECK(overview.find(std::to_string(c.total()) + " tests: " + std::to_string(c.passed) + " passed, " +
                      std::to_string(c.failed) + " failed, " + std::to_string(c.error) + " error") != std::string::npos);
  CHECK(overview.find("badge failed") != std::string::npos);
  CHECK(support::dangling_links(tmp / "out").empty());

  SUBCASE("failing test page embeds lines 13-19 with 16 highlighted") {
    const auto beta = read_text_file(tmp / "out/heterotest_Beta.html");
    CHECK(beta.find("<span class=\"line highlight\"><span class=\"lineno\">16</span>") != std::string::npos);
    CHECK(beta.find("<span class=\"lineno\">13</span>") != std::string::npos);
    CHECK(beta.find("<span class=\"lineno\">19</span>") != std::string::npos);
    CHECK(beta.find("<span class=\"lineno\">12</span>") == std::string::npos);
    CHECK(beta.find("id=\"test-testBroken\"") != std::string::npos);
    CHECK(beta.find("<pre class=\"output\">9\n</pre>") != std::string::npos);
  }
  SUBCASE("re-rendering is byte-identical") {
    render_html(doc, options, tmp / "again");
    for (const auto& f : files) {
      CHECK(read_text_file(f) == read_text_file(tmp / "again" / f.filename()));
    }
  }
  SUBCASE("verbosity 0 writes only the overview") {
    options.verbosity = 0;
    auto only = render_html(doc, options, tmp / "quiet");
    CHECK(only.size() == 1);
    int count = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp / "quiet")) ++count;
    CHECK(count == 1);
    CHECK(support::dangling_links(tmp / "quiet").empty());
  }
  SUBCASE("all-green overview gets the passed badge") {
    auto green = doc;
    green.suites.resize(1);
    render_html(green, options, tmp / "green");
    CHECK(read_text_file(tmp / "green/heterotest_report.html").find("badge passed\">passed</span></td></tr>\n<tr><th>Totals") !=
          std::string::npos);
  }
}

TEST_CASE("sink traces appear from verbosity 2") {
  support::TempDir tmp;
  auto doc = rich_doc();
  RenderOptions options;
  options.verbosity = 1;
  render_html(doc, options, tmp / "v1");
  options.verbosity = 2;
  render_html(doc, options, tmp / "v2");
  auto page = suite_page_names(doc, "heterotest").at(0);
  CHECK(read_text_file(tmp / "v1" / page).find("class=\"trace\"") == std::string::npos);
  CHECK(read_text_file(tmp / "v2" / page).find("class=\"trace\"") != std::string::npos);
  CHECK(support::dangling_links(tmp / "v2").empty());
}

TEST_CASE("suite page names are unique and avoid reserved names") {
  ResultsDocument doc;
  for (const char* name : {"a", "a", "report", "cov_x", "a b"}) {
    SuiteResult s;
    s.suite = name;
    doc.suites.push_back(s);
  }
  auto names = suite_page_names(doc, "n");
  std::set<std::string> unique(names.begin(), names.end());
  CHECK(unique.size() == names.size());
  CHECK(unique.count("n_report.html") == 0);
  CHECK(names[3] == "n_suite_cov_x.html");
}
