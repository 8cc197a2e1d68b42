#include "heterotest/ci.hpp"
#include "heterotest/util.hpp"

namespace heterotest::ci {

PollError::PollError(const std::string& component, const std::string& message)
    : std::runtime_error("poll of component '" + component + "' failed: " + message), component_(component) {}

std::string JournalAdapter::head(const ComponentRef& component) const {
  auto head_file = component.location / "HEAD";
  std::string text;
  try {
    text = read_text_file(head_file);
  } catch (const std::exception&) {
    throw PollError(component.name, "missing HEAD file '" + head_file.generic_string() + "'");
  }
  auto rev = trim(text);
  if (rev.empty()) throw PollError(component.name, "empty HEAD file");
  if (rev.find_first_of(",=\t\n/\\ ") != std::string::npos || rev == "." || rev == "..") {
    throw PollError(component.name, "invalid revision id '" + rev + "'");
  }
  return rev;
}

void JournalAdapter::checkout(const ComponentRef& component, const std::string& revision, const fs::path& dest) const {
  auto snapshot = component.location / "revisions" / revision;
  if (!fs::is_directory(snapshot)) {
    throw std::runtime_error("revision '" + revision + "' of '" + component.name + "' has no snapshot");
  }
  fs::remove_all(dest);
  fs::create_directories(dest);
  fs::copy(snapshot, dest, fs::copy_options::recursive);
}

std::unique_ptr<VcsAdapter> make_adapter(const std::string& kind) {
  if (kind == "journal") return std::make_unique<JournalAdapter>();
  throw ConfigError("unknown component kind '" + kind + "'");
}

RevisionMap poll(const std::vector<ComponentRef>& components) {
  RevisionMap current;
  for (const auto& c : components) {
    std::unique_ptr<VcsAdapter> adapter;
    try {
      adapter = make_adapter(c.kind);
    } catch (const ConfigError& e) {
      throw PollError(c.name, e.what());
    }
    current[c.name] = adapter->head(c);
  }
  return current;
}

}  // namespace heterotest::ci
