#pragma once

// xUnit-style harness for model suites: every test case runs in isolation,
// faults become `error` verdicts, and the batch runner writes the result
// files for a list of suites.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "heterotest/blockmodel.hpp"
#include "heterotest/report.hpp"
#include "heterotest/result.hpp"

namespace heterotest::slrunner {

namespace fs = std::filesystem;

using blockmodel::discover_tests;

/// Runs one test case. Never throws: algebraic loops, non-finite values,
/// unresolved references and unknown test names all yield status=error.
/// `resolve_error` explains why the SUT reference could not be resolved.
TestCaseResult run_test(const blockmodel::ModelGraph& graph, std::string_view test,
                        std::string_view resolve_error = {});

/// Parses, resolves and runs every discovered test of the suite file.
/// `display_path` is what gets recorded as the suite's source file (the
/// actual path when empty).
SuiteResult run_suite(const fs::path& path, const std::vector<fs::path>& search_path = {},
                      const std::string& display_path = {});

struct RunnerConfig {
  fs::path testpath;
  std::vector<std::string> testsuites;
  std::string report_name;
  int verbosity = 1;
  fs::path out_dir = ".";
  std::vector<fs::path> search_path;
  /// Suites executed concurrently; results are assembled in config order.
  int jobs = 1;
};

struct RunnerSummary {
  report::ResultsDocument document;
  StatusCounts counts;
  int errored_suites = 0;
  std::vector<fs::path> files;

  int exit_code() const { return exit_code_for(counts); }
};

/// Runs `<testpath>/<name>.bdm` for every configured suite and writes
/// `<report_name>_results.xml`, `<report_name>_report.html` and, from
/// verbosity 1, `<report_name>_<suite>.html` into `out_dir`.
RunnerSummary slunit_testrunner(const RunnerConfig& config);

}  // namespace heterotest::slrunner
