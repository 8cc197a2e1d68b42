#include <sstream>

#include "heterotest/report.hpp"
#include "heterotest/util.hpp"

namespace heterotest::report {

namespace {

std::string attr(std::string_view name, std::string_view value) {
  return " " + std::string(name) + "=\"" + xml_escape(value, true) + "\"";
}

std::string attr(std::string_view name, long long value) { return attr(name, std::to_string(value)); }

std::string count_attrs(const StatusCounts& c) {
  return attr("tests", c.total()) + attr("passed", c.passed) + attr("failed", c.failed) + attr("error", c.error);
}

void write_case(std::ostringstream& out, const TestCaseResult& tc) {
  out << "    <test" << attr("name", tc.name) << attr("status", to_string(tc.status))
      << attr("duration_ms", tc.duration_ms);
  if (tc.messages.empty() && tc.output.empty() && tc.trace.empty()) {
    out << "/>\n";
    return;
  }
  out << ">\n";
  for (const auto& m : tc.messages) {
    out << "      <failure";
    if (!m.file.empty()) out << attr("file", m.file);
    if (m.line > 0) out << attr("line", m.line);
    if (!m.block.empty()) out << attr("block", m.block);
    if (m.step >= 0) out << attr("step", m.step);
    out << attr("message", m.text) << "/>\n";
  }
  if (!tc.output.empty()) out << "      <output>" << xml_escape(tc.output, false) << "</output>\n";
  for (const auto& series : tc.trace) {
    out << "      <trace" << attr("block", series.block) << ">\n";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
      out << "        <row" << attr("step", static_cast<long long>(i)) << attr("value", format_number(series.values[i]))
          << "/>\n";
    }
    out << "      </trace>\n";
  }
  out << "    </test>\n";
}

}  // namespace

StatusCounts ResultsDocument::counts() const {
  StatusCounts c;
  for (const auto& s : suites) c += s.counts();
  return c;
}

std::string results_xml(const ResultsDocument& doc) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<testresults" << attr("format", kFormatVersion);
  if (doc.revision) out << attr("revision", *doc.revision);
  out << attr("timestamp", doc.timestamp) << attr("duration_ms", doc.duration_ms) << count_attrs(doc.counts())
      << ">\n";
  for (const auto& d : doc.diagnostics) out << "  <diagnostic>" << xml_escape(d, false) << "</diagnostic>\n";
  for (const auto& suite : doc.suites) {
    out << "  <suite" << attr("name", suite.suite) << attr("file", suite.source_file)
        << attr("started_at", suite.started_at) << attr("duration_ms", suite.duration_ms)
        << count_attrs(suite.counts()) << ">\n";
    for (const auto& tc : suite.cases) write_case(out, tc);
    out << "  </suite>\n";
  }
  if (doc.coverage) {
    const auto& cov = *doc.coverage;
    out << "  <coverage" << attr("instrumentable", cov.instrumentable()) << attr("executed", cov.executed())
        << attr("percent", format_percent(cov.percent())) << ">\n";
    for (const auto& f : cov.files) {
      out << "    <file" << attr("name", f.name) << attr("instrumentable", static_cast<long long>(f.instrumentable.size()))
          << attr("executed", static_cast<long long>(f.executed.size())) << attr("percent", format_percent(f.percent()));
      if (f.instrumentable.empty()) {
        out << "/>\n";
        continue;
      }
      out << ">\n";
      for (int line : f.instrumentable) {
        out << "      <line" << attr("number", line) << attr("executed", f.executed.count(line) ? 1 : 0) << "/>\n";
      }
      out << "    </file>\n";
    }
    out << "  </coverage>\n";
  }
  out << "</testresults>\n";
  return out.str();
}

void write_results_xml(const ResultsDocument& doc, const fs::path& out) { write_text_file(out, results_xml(doc)); }

}  // namespace heterotest::report
