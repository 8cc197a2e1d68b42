#include "heterotest/coverage.hpp"

#include <cmath>
#include <sstream>

#include "heterotest/testdsl.hpp"
#include "heterotest/util.hpp"

namespace heterotest::coverage {

double rounded_percent(int executed, int instrumentable) {
  if (instrumentable <= 0) return 0.0;
  // Integer rounding of per-mille avoids binary artefacts such as 69.99999.
  long long permille = (2000LL * executed + instrumentable) / (2LL * instrumentable);
  return static_cast<double>(permille) / 10.0;
}

double CoverageFile::percent() const {
  return rounded_percent(static_cast<int>(executed.size()), static_cast<int>(instrumentable.size()));
}

int CoverageMap::instrumentable() const {
  int n = 0;
  for (const auto& f : files) n += static_cast<int>(f.instrumentable.size());
  return n;
}

int CoverageMap::executed() const {
  int n = 0;
  for (const auto& f : files) n += static_cast<int>(f.executed.size());
  return n;
}

double CoverageMap::percent() const { return rounded_percent(executed(), instrumentable()); }

std::set<int> enumerate_instrumentable(const testdsl::SuiteDecl& suite) {
  std::set<int> lines;
  for (const auto& method : suite.methods) {
    if (!method.runnable()) continue;
    for (const auto& stmt : method.body) lines.insert(stmt.line);
  }
  return lines;
}

void CoverageSession::register_lines(const std::string& file, const std::set<int>& lines) {
  std::lock_guard lock(mutex_);
  auto& entry = files_[file];
  entry.name = file;
  entry.instrumentable.insert(lines.begin(), lines.end());
}

void CoverageSession::register_suite(const std::string& file, const testdsl::SuiteDecl& suite) {
  register_lines(file, enumerate_instrumentable(suite));
}

void CoverageSession::record(const std::string& file, int line) {
  std::lock_guard lock(mutex_);
  if (closed_) return;
  auto it = files_.find(file);
  if (it == files_.end() || !it->second.instrumentable.count(line)) {
    diagnostics_.push_back("probe outside instrumentable set: " + file + ":" + std::to_string(line));
    return;
  }
  it->second.executed.insert(line);
}

void CoverageSession::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
}

bool CoverageSession::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

CoverageMap CoverageSession::summarize() const {
  std::lock_guard lock(mutex_);
  CoverageMap map;
  for (const auto& [name, file] : files_) map.files.push_back(file);
  return map;
}

std::vector<std::string> CoverageSession::diagnostics() const {
  std::lock_guard lock(mutex_);
  return diagnostics_;
}

std::string render_listing(const CoverageFile& file, const std::string& source) {
  std::ostringstream out;
  out << "<div class=\"listing\">\n<h2>" << html_escape(file.name) << " &mdash; "
      << format_percent(file.percent()) << "% (" << file.executed.size() << "/" << file.instrumentable.size()
      << " statements)</h2>\n<pre>\n";
  auto lines = split_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    int n = static_cast<int>(i + 1);
    const char* cls = "plain";
    if (file.instrumentable.count(n)) cls = file.executed.count(n) ? "hit" : "miss";
    out << "<span id=\"L" << n << "\" class=\"line " << cls << "\"><span class=\"lineno\">" << n
        << "</span> " << html_escape(lines[i]) << "</span>\n";
  }
  out << "</pre>\n</div>\n";
  return out.str();
}

std::string listing_file_name(const std::string& report_name, const std::string& file) {
  return report_name + "_cov_" + sanitize_identifier(file) + ".html";
}

std::vector<fs::path> write_listings(const CoverageMap& map, const std::string& report_name,
                                     const fs::path& source_root, const fs::path& out_dir) {
  std::vector<fs::path> written;
  for (const auto& file : map.files) {
    fs::path src = file.name;
    if (src.is_relative() && !source_root.empty()) src = source_root / src;
    std::string source;
    try {
      source = read_text_file(src);
    } catch (const std::exception&) {
      source = "(source not available)";
    }
    auto path = out_dir / listing_file_name(report_name, file.name);
    write_text_file(path, render_listing(file, source));
    written.push_back(path);
  }
  return written;
}

}  // namespace heterotest::coverage
