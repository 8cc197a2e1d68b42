#include <algorithm>

#include "heterotest/slrunner.hpp"
#include "heterotest/testdsl.hpp"

namespace heterotest::testdsl {

namespace bm = blockmodel;

ModelEngine::ModelEngine(std::vector<fs::path> search_path) : search_path_(std::move(search_path)) {}

void ModelEngine::initialize() {
  std::lock_guard lock(mutex_);
  ++init_count_;
}

bool ModelEngine::initialized() const {
  std::lock_guard lock(mutex_);
  return init_count_ > 0;
}

int ModelEngine::init_count() const {
  std::lock_guard lock(mutex_);
  return init_count_;
}

int ModelEngine::load_count() const {
  std::lock_guard lock(mutex_);
  return loads_;
}

int ModelEngine::load_count(const fs::path& suite_path) const {
  std::lock_guard lock(mutex_);
  auto it = cache_.find(fs::weakly_canonical(fs::absolute(suite_path)));
  return it == cache_.end() ? 0 : it->second.loads;
}

StatusRecord ModelEngine::run(const fs::path& suite_path, std::string_view test) {
  std::lock_guard lock(mutex_);
  auto key = fs::weakly_canonical(fs::absolute(suite_path));
  Entry& entry = cache_[key];
  if (entry.loads == 0) {
    ++entry.loads;
    ++loads_;
    if (!fs::is_regular_file(suite_path)) {
      entry.load_error = "suite file '" + suite_path.generic_string() + "' not found";
    } else {
      try {
        entry.graph = bm::load_model(suite_path);
        try {
          entry.graph = bm::resolve_sut(*entry.graph, search_path_);
        } catch (const std::exception& e) {
          entry.resolve_error = e.what();
        }
      } catch (const std::exception& e) {
        entry.load_error = e.what();
      }
    }
  }

  if (!entry.load_error.empty()) return StatusRecord{2, entry.load_error};
  auto tests = bm::discover_tests(*entry.graph);
  if (std::find(tests.begin(), tests.end(), test) == tests.end()) {
    return StatusRecord{2, "test '" + std::string(test) + "' not found in '" + suite_path.generic_string() + "'"};
  }

  TestCaseResult result = slrunner::run_test(*entry.graph, test, entry.resolve_error);
  StatusRecord record;
  switch (result.status) {
    case TestStatus::passed: record.status = 0; break;
    case TestStatus::failed: record.status = 1; break;
    case TestStatus::error: record.status = 2; break;
  }
  // The original model verdict stays visible in the forwarded output.
  if (result.status != TestStatus::passed) record.output = std::string(to_string(result.status)) + ": ";
  for (std::size_t i = 0; i < result.messages.size(); ++i) {
    if (i > 0) record.output += '\n';
    record.output += result.messages[i].text;
  }
  return record;
}

}  // namespace heterotest::testdsl
