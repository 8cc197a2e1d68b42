#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "heterotest/report.hpp"
#include "heterotest/util.hpp"

namespace heterotest::report {

namespace {

constexpr const char* kStylesheet = R"(body { font-family: sans-serif; margin: 2em; color: #222; }
table { border-collapse: collapse; }
th, td { border: 1px solid #ccc; padding: 0.25em 0.6em; text-align: left; }
.badge { display: inline-block; padding: 0.1em 0.6em; border-radius: 0.3em; color: #fff; font-weight: bold; }
.badge.passed { background: #2e7d32; }
.badge.failed { background: #c62828; }
.badge.error { background: #8e0000; }
.test { border-top: 1px solid #ddd; padding: 0.5em 0; }
pre { background: #f6f6f6; padding: 0.5em; overflow-x: auto; }
.line.highlight { background: #ffcdd2; font-weight: bold; }
.line.hit { background: #e8f5e9; }
.line.miss { background: #ffebee; }
.lineno { color: #888; display: inline-block; min-width: 3em; }
.diagnostic { color: #8e0000; }
)";

std::string page(const std::string& title, const std::string& body, bool external_css) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>" << html_escape(title)
      << "</title>\n";
  if (external_css) {
    out << "<link rel=\"stylesheet\" href=\"" << kStylesheetName << "\">\n";
  } else {
    out << "<style>\n" << kStylesheet << "</style>\n";
  }
  out << "</head>\n<body>\n" << body << "</body>\n</html>\n";
  return out.str();
}

std::string badge(std::string_view status) {
  return "<span class=\"badge " + std::string(status) + "\">" + std::string(status) + "</span>";
}

std::string duration(std::int64_t ms) { return "<span class=\"duration\">" + std::to_string(ms) + " ms</span>"; }

std::string counts_cells(const StatusCounts& c) {
  return "<td>" + std::to_string(c.total()) + "</td><td>" + std::to_string(c.passed) + "</td><td>" +
         std::to_string(c.failed) + "</td><td>" + std::to_string(c.error) + "</td>";
}

std::string anchor_for(const std::string& test_name) { return "test-" + sanitize_identifier(test_name); }

class Renderer {
 public:
  Renderer(const ResultsDocument& doc, const RenderOptions& options, const fs::path& out_dir)
      : doc_(doc), opt_(options), out_dir_(out_dir) {}

  std::vector<fs::path> run() {
    fs::create_directories(out_dir_);
    const bool detailed = opt_.verbosity >= 1;
    if (detailed) {
      suite_pages_ = suite_page_names(doc_, opt_.report_name);
      collect_sources();
    }

    write(overview_file_name(opt_.report_name), page("Test report " + opt_.report_name, overview(), detailed));
    if (!detailed) return written_;

    write(kStylesheetName, kStylesheet);
    for (std::size_t i = 0; i < doc_.suites.size(); ++i) {
      const auto& s = doc_.suites[i];
      write(suite_pages_[i], page("Suite " + s.suite, suite_page(s), true));
    }
    for (const auto& [file, name] : source_pages_) {
      write(name, page("Source " + file, source_listing(file), true));
    }
    if (doc_.coverage) {
      for (const auto& f : doc_.coverage->files) {
        auto text = load_source(f.name).value_or("(source not available)");
        write(coverage::listing_file_name(opt_.report_name, f.name),
             page("Coverage " + f.name, back_link() + coverage::render_listing(f, text), true));
      }
    }
    return written_;
  }

 private:
  void write(const std::string& name, const std::string& content) {
    auto path = out_dir_ / name;
    write_text_file(path, content);
    written_.push_back(path);
  }

  std::optional<std::string> load_source(const std::string& file) {
    if (file.empty()) return std::nullopt;
    auto cached = sources_.find(file);
    if (cached != sources_.end()) return cached->second;
    fs::path p = file;
    if (p.is_relative() && !opt_.source_root.empty()) p = opt_.source_root / p;
    std::optional<std::string> text;
    try {
      text = read_text_file(p);
    } catch (const std::exception&) {
    }
    sources_[file] = text;
    return text;
  }

  void collect_sources() {
    std::vector<std::string> files;
    for (const auto& s : doc_.suites) {
      files.push_back(s.source_file);
      for (const auto& tc : s.cases) {
        for (const auto& m : tc.messages) files.push_back(m.file);
      }
    }
    int next = 1;
    for (const auto& f : files) {
      if (source_pages_.count(f) || !load_source(f)) continue;
      source_pages_[f] = opt_.report_name + "_src_" + std::to_string(next++) + ".html";
    }
  }

  std::string back_link() const {
    return "<p><a href=\"" + html_escape(overview_file_name(opt_.report_name)) + "\">&larr; overview</a></p>\n";
  }

  std::string overview() {
    std::ostringstream out;
    const auto total = doc_.counts();
    out << "<h1>Test report " << html_escape(opt_.report_name) << "</h1>\n";
    out << "<table class=\"run\">\n";
    if (doc_.revision) out << "<tr><th>Revision</th><td>" << *doc_.revision << "</td></tr>\n";
    out << "<tr><th>Started</th><td><span class=\"timestamp\">" << html_escape(doc_.timestamp)
        << "</span></td></tr>\n";
    out << "<tr><th>Duration</th><td>" << duration(doc_.duration_ms) << "</td></tr>\n";
    out << "<tr><th>Result</th><td>" << badge(total.failed + total.error == 0 ? "passed" : "failed")
        << "</td></tr>\n";
    out << "<tr><th>Totals</th><td class=\"totals\">" << total.total() << " tests: " << total.passed
        << " passed, " << total.failed << " failed, " << total.error << " error</td></tr>\n";
    if (doc_.coverage) {
      out << "<tr><th>Coverage</th><td class=\"coverage\">" << format_percent(doc_.coverage->percent()) << "% ("
          << doc_.coverage->executed() << "/" << doc_.coverage->instrumentable() << " statements)</td></tr>\n";
    }
    out << "</table>\n";

    if (!doc_.diagnostics.empty()) {
      out << "<h2>Diagnostics</h2>\n<ul>\n";
      for (const auto& d : doc_.diagnostics) out << "<li class=\"diagnostic\">" << html_escape(d) << "</li>\n";
      out << "</ul>\n";
    }

    out << "<h2>Suites</h2>\n<table class=\"suites\">\n"
        << "<tr><th>Suite</th><th>Status</th><th>Tests</th><th>Passed</th><th>Failed</th><th>Error</th>"
        << "<th>Duration</th></tr>\n";
    for (std::size_t i = 0; i < doc_.suites.size(); ++i) {
      const auto& s = doc_.suites[i];
      auto c = s.counts();
      out << "<tr><td>";
      if (!suite_pages_.empty()) {
        out << "<a href=\"" << html_escape(suite_pages_[i]) << "\">" << html_escape(s.suite) << "</a>";
      } else {
        out << html_escape(s.suite);
      }
      out << "</td><td>" << badge(c.failed + c.error == 0 ? "passed" : "failed") << "</td>" << counts_cells(c)
          << "<td>" << duration(s.duration_ms) << "</td></tr>\n";
    }
    out << "<tr class=\"total\"><th>Total</th><td></td>" << counts_cells(total) << "<td>"
        << duration(doc_.duration_ms) << "</td></tr>\n</table>\n";

    if (doc_.coverage && opt_.verbosity >= 1) {
      out << "<h2>Coverage</h2>\n<table class=\"coverage\">\n"
          << "<tr><th>File</th><th>Executed</th><th>Instrumentable</th><th>Percent</th></tr>\n";
      for (const auto& f : doc_.coverage->files) {
        out << "<tr><td><a href=\"" << html_escape(coverage::listing_file_name(opt_.report_name, f.name)) << "\">"
            << html_escape(f.name) << "</a></td><td>" << f.executed.size() << "</td><td>"
            << f.instrumentable.size() << "</td><td>" << format_percent(f.percent()) << "%</td></tr>\n";
      }
      out << "</table>\n";
    }
    return out.str();
  }

  std::string fragment(const std::string& file, int line) {
    auto text = load_source(file);
    if (!text) return {};
    auto lines = split_lines(*text);
    if (line < 1 || line > static_cast<int>(lines.size())) return {};
    int first = std::max(1, line - 3);
    int last = std::min(static_cast<int>(lines.size()), line + 3);
    std::ostringstream out;
    out << "<pre class=\"fragment\">\n";
    for (int n = first; n <= last; ++n) {
      out << "<span class=\"line" << (n == line ? " highlight" : "") << "\"><span class=\"lineno\">" << n
          << "</span> " << html_escape(lines[static_cast<std::size_t>(n - 1)]) << "</span>\n";
    }
    out << "</pre>\n";
    auto page_it = source_pages_.find(file);
    if (page_it != source_pages_.end()) {
      out << "<p><a href=\"" << html_escape(page_it->second) << "#L" << line << "\">" << html_escape(file) << ":"
          << line << "</a></p>\n";
    }
    return out.str();
  }

  std::string trace_table(const TestCaseResult& tc) {
    std::ostringstream out;
    std::size_t rows = 0;
    for (const auto& s : tc.trace) rows = std::max(rows, s.values.size());
    out << "<table class=\"trace\">\n<tr><th>Step</th>";
    for (const auto& s : tc.trace) out << "<th>" << html_escape(s.block) << "</th>";
    out << "</tr>\n";
    for (std::size_t r = 0; r < rows; ++r) {
      out << "<tr><td>" << r << "</td>";
      for (const auto& s : tc.trace) {
        out << "<td>" << (r < s.values.size() ? format_number(s.values[r]) : "") << "</td>";
      }
      out << "</tr>\n";
    }
    out << "</table>\n";
    return out.str();
  }

  std::string suite_page(const SuiteResult& s) {
    std::ostringstream out;
    auto c = s.counts();
    out << back_link();
    out << "<h1>Suite " << html_escape(s.suite) << " " << badge(c.failed + c.error == 0 ? "passed" : "failed")
        << "</h1>\n";
    out << "<p>Source: ";
    auto src = source_pages_.find(s.source_file);
    if (src != source_pages_.end()) {
      out << "<a href=\"" << html_escape(src->second) << "\">" << html_escape(s.source_file) << "</a>";
    } else {
      out << html_escape(s.source_file);
    }
    out << "</p>\n";
    out << "<p class=\"totals\">" << c.total() << " tests: " << c.passed << " passed, " << c.failed << " failed, "
        << c.error << " error; " << duration(s.duration_ms) << "</p>\n";

    out << "<table class=\"tests\">\n<tr><th>Test</th><th>Status</th><th>Duration</th></tr>\n";
    for (const auto& tc : s.cases) {
      out << "<tr><td><a href=\"#" << anchor_for(tc.name) << "\">" << html_escape(tc.name) << "</a></td><td>"
          << badge(to_string(tc.status)) << "</td><td>" << duration(tc.duration_ms) << "</td></tr>\n";
    }
    out << "</table>\n";

    for (const auto& tc : s.cases) {
      out << "<div class=\"test\" id=\"" << anchor_for(tc.name) << "\">\n<h2>" << html_escape(tc.name) << " "
          << badge(to_string(tc.status)) << "</h2>\n";
      if (!tc.messages.empty()) {
        out << "<ul class=\"messages\">\n";
        for (const auto& m : tc.messages) out << "<li>" << html_escape(m.text) << "</li>\n";
        out << "</ul>\n";
        std::set<std::pair<std::string, int>> shown;
        for (const auto& m : tc.messages) {
          if (m.line <= 0 || !shown.insert({m.file, m.line}).second) continue;
          out << fragment(m.file, m.line);
        }
      }
      if (!tc.output.empty()) out << "<pre class=\"output\">" << html_escape(tc.output) << "</pre>\n";
      if (opt_.verbosity >= 2 && !tc.trace.empty()) out << trace_table(tc);
      out << "</div>\n";
    }
    return out.str();
  }

  std::string source_listing(const std::string& file) {
    std::ostringstream out;
    out << back_link() << "<h1>" << html_escape(file) << "</h1>\n<pre class=\"source\">\n";
    auto lines = split_lines(load_source(file).value_or(""));
    for (std::size_t i = 0; i < lines.size(); ++i) {
      out << "<span id=\"L" << i + 1 << "\" class=\"line\"><span class=\"lineno\">" << i + 1 << "</span> "
          << html_escape(lines[i]) << "</span>\n";
    }
    out << "</pre>\n";
    return out.str();
  }

  const ResultsDocument& doc_;
  const RenderOptions& opt_;
  fs::path out_dir_;
  std::vector<std::string> suite_pages_;
  std::map<std::string, std::string> source_pages_;
  std::map<std::string, std::optional<std::string>> sources_;
  std::vector<fs::path> written_;
};

}  // namespace

std::string overview_file_name(const std::string& report_name) { return report_name + "_report.html"; }
std::string results_file_name(const std::string& report_name) { return report_name + "_results.xml"; }

std::vector<std::string> suite_page_names(const ResultsDocument& doc, const std::string& report_name) {
  std::set<std::string> taken = {"report", "results"};
  std::vector<std::string> names;
  for (const auto& s : doc.suites) {
    auto base = sanitize_identifier(s.suite);
    if (starts_with(base, "cov_") || starts_with(base, "src_")) base = "suite_" + base;
    auto candidate = base;
    for (int n = 2; taken.count(candidate); ++n) candidate = base + "_" + std::to_string(n);
    taken.insert(candidate);
    names.push_back(report_name + "_" + candidate + ".html");
  }
  return names;
}

std::vector<fs::path> render_html(const ResultsDocument& doc, const RenderOptions& options, const fs::path& out_dir) {
  return Renderer(doc, options, out_dir).run();
}

}  // namespace heterotest::report
