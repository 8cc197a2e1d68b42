#include <algorithm>
#include <cstdlib>
#include <sstream>

#include "heterotest/ci.hpp"
#include "heterotest/util.hpp"

namespace heterotest::ci {

namespace {

constexpr const char* kStateFile = "state";
constexpr const char* kStatusFile = "status";
constexpr const char* kRunFile = "run.txt";
constexpr const char* kObservedFile = "observed_at";

std::string encode_tuple(const RevisionMap& revisions) {
  std::string out;
  for (const auto& [name, rev] : revisions) {
    if (!out.empty()) out += ',';
    out += name + "=" + rev;
  }
  return out;
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\t', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

bool parse_int(const std::string& text, std::int64_t& out) {
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos || text.size() > 18) return false;
  out = std::strtoll(text.c_str(), nullptr, 10);
  return true;
}

}  // namespace

std::string_view to_string(ActionStatus status) {
  switch (status) {
    case ActionStatus::ok: return "ok";
    case ActionStatus::failed: return "failed";
    case ActionStatus::skipped: return "skipped";
  }
  return "skipped";
}

const ActionRecord* PipelineRun::action(std::string_view id) const {
  for (const auto& a : actions) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

Store::Store(fs::path root) : root_(std::move(root)) {}

std::vector<VirtualRevision> Store::revisions() const {
  std::vector<VirtualRevision> result;
  auto state = root_ / kStateFile;
  if (!fs::exists(state)) return result;
  std::string text;
  try {
    text = read_text_file(state);
  } catch (const std::exception& e) {
    throw StoreCorruption(e.what());
  }
  int line_no = 0;
  for (const auto& line : split_lines(text)) {
    ++line_no;
    if (line.empty()) continue;
    auto bad = [&](const std::string& why) {
      return StoreCorruption("store journal '" + state.generic_string() + "' line " + std::to_string(line_no) + ": " +
                             why);
    };
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw bad("missing tab separator");
    VirtualRevision v;
    if (!parse_int(line.substr(0, tab), v.vid)) throw bad("invalid vid");
    for (const auto& pair : split(line.substr(tab + 1), ',')) {
      auto eq = pair.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 == pair.size()) throw bad("malformed entry '" + pair + "'");
      if (!v.revisions.emplace(pair.substr(0, eq), pair.substr(eq + 1)).second) throw bad("duplicate component");
    }
    std::int64_t expected = result.empty() ? 1 : result.back().vid + 1;
    if (v.vid != expected) throw bad("expected vid " + std::to_string(expected));
    if (!result.empty() && result.back().revisions == v.revisions) throw bad("tuple repeats the previous revision");
    std::error_code ec;
    if (fs::exists(run_dir(v.vid) / kObservedFile, ec)) {
      try {
        v.observed_at = trim(read_text_file(run_dir(v.vid) / kObservedFile));
      } catch (const std::exception&) {
      }
    }
    result.push_back(std::move(v));
  }
  return result;
}

std::optional<VirtualRevision> Store::last() const {
  auto all = revisions();
  if (all.empty()) return std::nullopt;
  return all.back();
}

VirtualRevision Store::append(const RevisionMap& revisions, const std::string& observed_at) {
  auto all = this->revisions();
  if (!all.empty() && all.back().revisions == revisions) {
    throw std::logic_error("virtual revision tuple unchanged");
  }
  VirtualRevision v{all.empty() ? 1 : all.back().vid + 1, revisions, observed_at};
  std::string text;
  if (fs::exists(root_ / kStateFile)) text = read_text_file(root_ / kStateFile);
  if (!text.empty() && text.back() != '\n') text += '\n';
  text += std::to_string(v.vid) + "\t" + encode_tuple(revisions) + "\n";
  write_text_file(root_ / kStateFile, text);
  write_text_file(run_dir(v.vid) / kObservedFile, observed_at + "\n");
  return v;
}

fs::path Store::run_dir(std::int64_t vid) const { return root_ / std::to_string(vid); }

void Store::mark_running(std::int64_t vid) const { write_text_file(run_dir(vid) / kStatusFile, "running\n"); }

bool Store::is_complete(std::int64_t vid) const {
  try {
    return trim(read_text_file(run_dir(vid) / kStatusFile)) == "done" && fs::exists(run_dir(vid) / kRunFile);
  } catch (const std::exception&) {
    return false;
  }
}

void Store::save_run(const PipelineRun& run) const {
  std::ostringstream out;
  out << "vid\t" << run.vid << "\n";
  out << "counts\t" << run.counts.passed << "\t" << run.counts.failed << "\t" << run.counts.error << "\n";
  if (run.results) out << "results\t" << *run.results << "\n";
  if (run.report) out << "report\t" << *run.report << "\n";
  for (const auto& a : run.actions) {
    out << "action\t" << a.id << "\t" << to_string(a.status) << "\t" << a.duration_ms << "\t" << one_line(a.log)
        << "\n";
  }
  write_text_file(run_dir(run.vid) / kRunFile, out.str());
  write_text_file(run_dir(run.vid) / kStatusFile, "done\n");
}

std::optional<PipelineRun> Store::load_run(std::int64_t vid) const {
  if (!is_complete(vid)) return std::nullopt;
  PipelineRun run;
  run.vid = vid;
  for (const auto& line : split_lines(read_text_file(run_dir(vid) / kRunFile))) {
    auto f = split(line, '\t');
    if (f.empty()) continue;
    if (f[0] == "counts" && f.size() == 4) {
      run.counts.passed = std::atoi(f[1].c_str());
      run.counts.failed = std::atoi(f[2].c_str());
      run.counts.error = std::atoi(f[3].c_str());
    } else if (f[0] == "results" && f.size() == 2) {
      run.results = f[1];
    } else if (f[0] == "report" && f.size() == 2) {
      run.report = f[1];
    } else if (f[0] == "action" && f.size() >= 4) {
      ActionRecord a;
      a.id = f[1];
      a.status = f[2] == "ok" ? ActionStatus::ok : f[2] == "failed" ? ActionStatus::failed : ActionStatus::skipped;
      a.duration_ms = std::atoll(f[3].c_str());
      if (f.size() > 4) a.log = f[4];
      run.actions.push_back(std::move(a));
    }
  }
  return run;
}

std::optional<VirtualRevision> next_virtual_revision(const RevisionMap& current, Store& store) {
  auto last = store.last();
  if (last && last->revisions == current) return std::nullopt;
  return store.append(current, utc_timestamp());
}

}  // namespace heterotest::ci
