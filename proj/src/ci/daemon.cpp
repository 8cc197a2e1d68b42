#include <chrono>
#include <iostream>
#include <thread>

#include "heterotest/ci.hpp"

namespace heterotest::ci {

Daemon::Daemon(CiConfig config) : config_(std::move(config)), store_(config_.store) {}

std::vector<PipelineRun> Daemon::recover() {
  std::vector<PipelineRun> runs;
  for (const auto& v : store_.revisions()) {
    if (store_.is_complete(v.vid)) continue;
    std::clog << "ci: re-running interrupted pipeline for vid " << v.vid << "\n";
    runs.push_back(run_pipeline(v, config_, store_));
  }
  return runs;
}

Daemon::PollOutcome Daemon::poll_once() {
  PollOutcome outcome;
  RevisionMap current;
  try {
    current = poll(config_.components);
  } catch (const PollError& e) {
    outcome.error = e.what();
    std::clog << "ci: " << e.what() << "; retrying next interval\n";
    return outcome;
  }
  outcome.created = next_virtual_revision(current, store_);
  if (outcome.created) outcome.run = run_pipeline(*outcome.created, config_, store_);
  return outcome;
}

void Daemon::run(const std::atomic<bool>& stop) {
  recover();
  while (!stop) {
    poll_once();
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(config_.interval_s);
    while (!stop && std::chrono::steady_clock::now() < deadline) {
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  }
}

}  // namespace heterotest::ci
