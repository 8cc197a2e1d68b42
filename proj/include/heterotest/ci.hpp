#pragma once

// Continuous integration: polls the main component and its externals,
// keeps a journal of virtual revisions (one per distinct revision tuple),
// and runs the configured action pipeline for each new one.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "heterotest/result.hpp"

namespace heterotest::ci {

namespace fs = std::filesystem;

enum class Role { main, external };

struct ComponentRef {
  std::string name;
  std::string kind;
  fs::path location;
  Role role = Role::external;
};

/// Component name → revision id.
using RevisionMap = std::map<std::string, std::string>;

struct VirtualRevision {
  std::int64_t vid = 0;
  RevisionMap revisions;
  std::string observed_at;

  friend bool operator==(const VirtualRevision&, const VirtualRevision&) = default;
};

// ---------------------------------------------------------------------------
// Configuration

inline const std::vector<std::string> kKnownActions = {"checkout", "build",  "test",   "coverage",
                                                       "report",   "notify", "cleanup"};

struct NotifyConfig {
  bool enabled = true;
  std::vector<std::string> recipients;
  fs::path outbox;
};

struct CiConfig {
  std::vector<ComponentRef> components;
  std::vector<std::string> actions = kKnownActions;
  int verbosity = 1;
  NotifyConfig notify;
  int interval_s = 60;
  fs::path store;

  const ComponentRef& main_component() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Relative locations are resolved against `base_dir`.
CiConfig parse_config(const std::string& text, const fs::path& base_dir);

/// Reads the file; `HETEROTEST_STORE` overrides the store path.
CiConfig load_config(const fs::path& path);

// ---------------------------------------------------------------------------
// Version control

class VcsAdapter {
 public:
  virtual ~VcsAdapter() = default;
  virtual std::string head(const ComponentRef& component) const = 0;
  virtual void checkout(const ComponentRef& component, const std::string& revision, const fs::path& dest) const = 0;
};

/// Reference adapter: a directory with a `HEAD` file naming the current
/// revision and immutable snapshots under `revisions/<id>/`.
class JournalAdapter : public VcsAdapter {
 public:
  std::string head(const ComponentRef& component) const override;
  void checkout(const ComponentRef& component, const std::string& revision, const fs::path& dest) const override;
};

/// Throws ConfigError for unknown kinds.
std::unique_ptr<VcsAdapter> make_adapter(const std::string& kind);

class PollError : public std::runtime_error {
 public:
  PollError(const std::string& component, const std::string& message);
  const std::string& component() const { return component_; }

 private:
  std::string component_;
};

/// Current revision of every component. Throws PollError naming the first
/// unreachable component.
RevisionMap poll(const std::vector<ComponentRef>& components);

// ---------------------------------------------------------------------------
// Store

enum class ActionStatus { ok, failed, skipped };
std::string_view to_string(ActionStatus status);

struct ActionRecord {
  std::string id;
  ActionStatus status = ActionStatus::skipped;
  std::int64_t duration_ms = 0;
  std::string log;
};

struct PipelineRun {
  std::int64_t vid = 0;
  std::vector<ActionRecord> actions;
  /// Results document, relative to the run directory, when one was written.
  std::optional<std::string> results;
  std::optional<std::string> report;
  StatusCounts counts;

  const ActionRecord* action(std::string_view id) const;
};

class StoreCorruption : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layout: `state` (journal lines `vid\tname=rev,...`), `<vid>/` per run.
class Store {
 public:
  explicit Store(fs::path root);

  const fs::path& root() const { return root_; }

  /// All virtual revisions in vid order. Throws StoreCorruption when the
  /// journal is malformed, has gaps, or repeats a tuple.
  std::vector<VirtualRevision> revisions() const;
  std::optional<VirtualRevision> last() const;

  /// Persists the next virtual revision atomically.
  VirtualRevision append(const RevisionMap& revisions, const std::string& observed_at);

  fs::path run_dir(std::int64_t vid) const;
  void mark_running(std::int64_t vid) const;
  bool is_complete(std::int64_t vid) const;
  void save_run(const PipelineRun& run) const;
  std::optional<PipelineRun> load_run(std::int64_t vid) const;

 private:
  fs::path root_;
};

/// New virtual revision iff `current` differs from the last stored tuple.
std::optional<VirtualRevision> next_virtual_revision(const RevisionMap& current, Store& store);

// ---------------------------------------------------------------------------
// Pipeline

inline constexpr const char* kReportName = "heterotest";

/// Runs the configured actions for `vrev` into `<store>/<vid>/`. Never
/// throws; every fault becomes an action status. After a failed action
/// only report, notify and cleanup still run.
PipelineRun run_pipeline(const VirtualRevision& vrev, const CiConfig& config, Store& store);

/// Writes one internet-message-format file into the outbox and returns
/// its path.
fs::path notify(const PipelineRun& run, const NotifyConfig& config, const std::string& summary,
                const fs::path& report_path);

struct HistoryRow {
  VirtualRevision revision;
  bool running = false;
  std::optional<PipelineRun> run;
};

/// Chronological rows; also (re)writes `<store>/index.html`.
std::vector<HistoryRow> history(const Store& store);

class Daemon {
 public:
  explicit Daemon(CiConfig config);

  struct PollOutcome {
    std::optional<VirtualRevision> created;
    std::optional<PipelineRun> run;
    std::string error;
  };

  /// Re-runs every stored revision whose pipeline never completed.
  std::vector<PipelineRun> recover();

  /// One poll; runs the pipeline when a new virtual revision appears.
  PollOutcome poll_once();

  /// Polls every `interval_s` until `stop` becomes true.
  void run(const std::atomic<bool>& stop);

  Store& store() { return store_; }

 private:
  CiConfig config_;
  Store store_;
};

}  // namespace heterotest::ci
