#pragma once

// Generators: (a) scan DSL sources into a runner manifest and execute it,
// (b) turn every model test case into a DSL adapter test.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "heterotest/coverage.hpp"
#include "heterotest/report.hpp"
#include "heterotest/testdsl.hpp"

namespace heterotest::rungen {

namespace fs = std::filesystem;

inline constexpr int kManifestVersion = 1;
inline constexpr const char* kManifestHeader = "heterotest-manifest v1";

struct ManifestEntry {
  std::string file;
  std::string suite;
  std::string method;
  int line = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct RunnerManifest {
  int format_version = kManifestVersion;
  std::string generated_at;
  std::vector<ManifestEntry> entries;
  std::vector<std::string> diagnostics;
};

/// Parses every `.tsuite` file under `paths` (directories recursively, in
/// sorted order) and lists the runnable methods of TestSuite classes.
/// Unparsable files become diagnostics.
RunnerManifest scan(const std::vector<fs::path>& paths);

/// Serialized manifest; entry paths are written relative to `base_dir`.
std::string serialize_manifest(const RunnerManifest& manifest, const fs::path& base_dir = {});

/// Writes the manifest with entry paths relative to the manifest's directory.
void generate_runner(const RunnerManifest& manifest, const fs::path& out);

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

RunnerManifest parse_manifest(const std::string& text);
RunnerManifest read_manifest(const fs::path& path);

struct RunOptions {
  /// Directory that relative entry paths are resolved against.
  fs::path base_dir;
  /// Shared engine; a private one is created when null.
  testdsl::ModelEngine* engine = nullptr;
  std::vector<fs::path> model_search_path;
  coverage::CoverageSession* coverage = nullptr;
};

/// Executes exactly the listed tests, in order. Each file is parsed once;
/// the model engine is initialized once before the first test.
report::ResultsDocument run_manifest(const RunnerManifest& manifest, const RunOptions& options);

struct AdapterSpec {
  fs::path model_suite;
  std::string test_case;
  std::string adapter_method;
};

struct AdapterResult {
  std::vector<fs::path> files;
  std::vector<AdapterSpec> adapters;
  std::vector<std::string> diagnostics;
};

/// Raised when an adapter would overwrite a file that was not generated.
class AdapterCollision : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kAdapterMarker = "// generated by heterotest adapt; do not edit";

/// One `.tsuite` per model suite under `model_dir`, one adapter method per
/// model test case. Previously generated adapters are overwritten; stale
/// ones are removed.
AdapterResult generate_adapters(const fs::path& model_dir, const fs::path& out_dir);

}  // namespace heterotest::rungen
