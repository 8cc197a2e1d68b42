#pragma once

// Results XML (writer and reader) and the hierarchical HTML report:
// overview → suite pages → per-test anchors, with source listings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heterotest/coverage.hpp"
#include "heterotest/result.hpp"

namespace heterotest::report {

namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

struct ResultsDocument {
  std::optional<std::int64_t> revision;
  std::string timestamp;
  std::int64_t duration_ms = 0;
  std::vector<std::string> diagnostics;
  std::vector<SuiteResult> suites;
  std::optional<coverage::CoverageMap> coverage;

  StatusCounts counts() const;
  friend bool operator==(const ResultsDocument&, const ResultsDocument&) = default;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string results_xml(const ResultsDocument& doc);
void write_results_xml(const ResultsDocument& doc, const fs::path& out);

/// Unknown elements are skipped and reported through `warnings`.
ResultsDocument parse_results_xml(const std::string& text, std::vector<std::string>* warnings = nullptr);
ResultsDocument read_results_xml(const fs::path& path, std::vector<std::string>* warnings = nullptr);

struct RenderOptions {
  /// 0 overview only, 1 + suite pages and listings, 2 + sink-trace tables.
  int verbosity = 1;
  std::string report_name = "heterotest";
  /// Base directory for relative source paths recorded in the document.
  fs::path source_root;
};

std::string overview_file_name(const std::string& report_name);
std::string results_file_name(const std::string& report_name);
inline constexpr const char* kStylesheetName = "heterotest.css";

/// Per-suite page file names in document order, unique within the report.
std::vector<std::string> suite_page_names(const ResultsDocument& doc, const std::string& report_name);

/// Writes the report tree into `out_dir` and returns the written files,
/// overview first.
std::vector<fs::path> render_html(const ResultsDocument& doc, const RenderOptions& options, const fs::path& out_dir);

}  // namespace heterotest::report
