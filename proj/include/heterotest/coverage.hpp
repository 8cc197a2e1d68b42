#pragma once

// Statement coverage for test-DSL sources. Probes are interpreter hooks
// that fire before each statement executes.

#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace heterotest::testdsl {
struct SuiteDecl;
}

namespace heterotest::coverage {

namespace fs = std::filesystem;

struct CoverageFile {
  std::string name;
  std::set<int> instrumentable;
  std::set<int> executed;  // ⊆ instrumentable

  /// executed / instrumentable in percent, rounded to 0.1 (0.0 when empty).
  double percent() const;
  friend bool operator==(const CoverageFile&, const CoverageFile&) = default;
};

struct CoverageMap {
  std::vector<CoverageFile> files;  // ordered by name

  int instrumentable() const;
  int executed() const;
  /// Σexecuted / Σinstrumentable, rounded to 0.1.
  double percent() const;
  friend bool operator==(const CoverageMap&, const CoverageMap&) = default;
};

double rounded_percent(int executed, int instrumentable);

/// Line of every executable statement in the suite's runnable (`test*`)
/// methods.
std::set<int> enumerate_instrumentable(const testdsl::SuiteDecl& suite);

/// One coverage session per runner execution. `record` may be called from
/// several threads.
class CoverageSession {
 public:
  /// Adds `lines` to the instrumentable set of `file`.
  void register_lines(const std::string& file, const std::set<int>& lines);
  void register_suite(const std::string& file, const testdsl::SuiteDecl& suite);

  /// Marks a line executed. Idempotent; lines outside the instrumentable
  /// set produce a diagnostic and are not counted.
  void record(const std::string& file, int line);

  void close();
  bool closed() const;

  CoverageMap summarize() const;
  std::vector<std::string> diagnostics() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, CoverageFile> files_;
  std::vector<std::string> diagnostics_;
  bool closed_ = false;
};

/// HTML fragment listing `source` with every instrumentable line marked
/// executed or not executed.
std::string render_listing(const CoverageFile& file, const std::string& source);

/// File name of the annotated listing for `file`:
/// `<report_name>_cov_<sanitized file>.html`.
std::string listing_file_name(const std::string& report_name, const std::string& file);

/// Writes one annotated listing per covered file. Sources are looked up
/// relative to `source_root`. Returns the written paths.
std::vector<fs::path> write_listings(const CoverageMap& map, const std::string& report_name,
                                     const fs::path& source_root, const fs::path& out_dir);

}  // namespace heterotest::coverage
