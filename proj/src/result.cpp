#include "heterotest/result.hpp"

namespace heterotest {

std::string_view to_string(TestStatus status) {
  switch (status) {
    case TestStatus::passed: return "passed";
    case TestStatus::failed: return "failed";
    case TestStatus::error: return "error";
  }
  return "error";
}

std::optional<TestStatus> parse_status(std::string_view text) {
  if (text == "passed") return TestStatus::passed;
  if (text == "failed") return TestStatus::failed;
  if (text == "error") return TestStatus::error;
  return std::nullopt;
}

void StatusCounts::add(TestStatus status) {
  switch (status) {
    case TestStatus::passed: ++passed; break;
    case TestStatus::failed: ++failed; break;
    case TestStatus::error: ++error; break;
  }
}

StatusCounts& StatusCounts::operator+=(const StatusCounts& other) {
  passed += other.passed;
  failed += other.failed;
  error += other.error;
  return *this;
}

StatusCounts SuiteResult::counts() const {
  StatusCounts c;
  for (const auto& tc : cases) c.add(tc.status);
  return c;
}

TestCaseResult without_timing(TestCaseResult result) {
  result.duration_ms = 0;
  return result;
}

SuiteResult without_timing(SuiteResult result) {
  result.duration_ms = 0;
  result.started_at.clear();
  for (auto& tc : result.cases) tc.duration_ms = 0;
  return result;
}

int exit_code_for(const StatusCounts& counts) {
  if (counts.error > 0) return 2;
  if (counts.failed > 0) return 1;
  return 0;
}

}  // namespace heterotest
