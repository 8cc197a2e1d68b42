#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heterotest {

enum class TestStatus { passed, failed, error };

std::string_view to_string(TestStatus status);
std::optional<TestStatus> parse_status(std::string_view text);

/// One failure or error report. DSL failures carry file+line; model
/// failures carry the assertion block and step (and the block's line in the
/// model file when known).
struct Message {
  std::string text;
  std::string file;
  int line = 0;
  std::string block;
  int step = -1;

  friend bool operator==(const Message&, const Message&) = default;
};

/// Recorded values of one sink block, one entry per executed step.
struct SinkSeries {
  std::string block;
  std::vector<double> values;

  friend bool operator==(const SinkSeries&, const SinkSeries&) = default;
};

struct TestCaseResult {
  std::string name;
  TestStatus status = TestStatus::passed;
  std::int64_t duration_ms = 0;
  std::vector<Message> messages;
  std::string output;
  std::vector<SinkSeries> trace;

  friend bool operator==(const TestCaseResult&, const TestCaseResult&) = default;
};

struct StatusCounts {
  int passed = 0;
  int failed = 0;
  int error = 0;

  int total() const { return passed + failed + error; }
  void add(TestStatus status);
  StatusCounts& operator+=(const StatusCounts& other);
  friend bool operator==(const StatusCounts&, const StatusCounts&) = default;
};

struct SuiteResult {
  std::string suite;
  std::string source_file;
  std::string started_at;
  std::int64_t duration_ms = 0;
  std::vector<TestCaseResult> cases;

  StatusCounts counts() const;
  friend bool operator==(const SuiteResult&, const SuiteResult&) = default;
};

/// Same result with run-varying fields (durations, timestamps) zeroed.
TestCaseResult without_timing(TestCaseResult result);
SuiteResult without_timing(SuiteResult result);

/// 0 all passed, 1 any failed, 2 any errored (errors dominate failures).
int exit_code_for(const StatusCounts& counts);

}  // namespace heterotest
