#include <algorithm>
#include <cstdlib>

#include "heterotest/ci.hpp"
#include "heterotest/util.hpp"

namespace heterotest::ci {

namespace {

fs::path resolve_path(const std::string& value, const fs::path& base) {
  fs::path p = value;
  return p.is_relative() ? base / p : p;
}

std::vector<std::string> comma_list(const std::string& value) {
  std::vector<std::string> items;
  for (const auto& part : split(value, ',')) {
    auto item = trim(part);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

}  // namespace

const ComponentRef& CiConfig::main_component() const {
  auto it = std::find_if(components.begin(), components.end(), [](const ComponentRef& c) { return c.role == Role::main; });
  if (it == components.end()) throw ConfigError("no main component configured");
  return *it;
}

CiConfig parse_config(const std::string& text, const fs::path& base_dir) {
  CiConfig config;
  std::optional<fs::path> store;
  std::optional<fs::path> outbox;
  std::string section;
  ComponentRef* component = nullptr;
  int line_no = 0;

  auto fail = [&](const std::string& message) -> void {
    throw ConfigError("config line " + std::to_string(line_no) + ": " + message);
  };

  for (const auto& raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      auto words = split(trim(line.substr(1, line.size() - 2)), ' ');
      words.erase(std::remove(words.begin(), words.end(), ""), words.end());
      if (words.size() == 2 && words[0] == "component") {
        for (const auto& c : config.components) {
          if (c.name == words[1]) fail("duplicate component '" + words[1] + "'");
        }
        config.components.push_back(ComponentRef{words[1], "", {}, Role::external});
        component = &config.components.back();
        section = "component";
      } else if (words.size() == 1 && (words[0] == "pipeline" || words[0] == "notify" || words[0] == "daemon")) {
        section = words[0];
        component = nullptr;
      } else {
        fail("unknown section '" + line + "'");
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));

    if (section == "component") {
      if (key == "kind") {
        component->kind = value;
      } else if (key == "location") {
        component->location = resolve_path(value, base_dir);
      } else if (key == "role") {
        if (value != "main" && value != "external") fail("role must be 'main' or 'external'");
        component->role = value == "main" ? Role::main : Role::external;
      } else {
        fail("unknown component key '" + key + "'");
      }
    } else if (section == "pipeline") {
      if (key == "actions") {
        config.actions = comma_list(value);
        for (std::size_t i = 0; i < config.actions.size(); ++i) {
          const auto& a = config.actions[i];
          if (std::find(kKnownActions.begin(), kKnownActions.end(), a) == kKnownActions.end()) {
            fail("unknown action '" + a + "'");
          }
          if (std::find(config.actions.begin(), config.actions.begin() + static_cast<long>(i), a) !=
              config.actions.begin() + static_cast<long>(i)) {
            fail("duplicate action '" + a + "'");
          }
        }
      } else if (key == "verbosity") {
        config.verbosity = std::atoi(value.c_str());
      } else {
        fail("unknown pipeline key '" + key + "'");
      }
    } else if (section == "notify") {
      if (key == "recipients") {
        config.notify.recipients = comma_list(value);
      } else if (key == "outbox") {
        outbox = resolve_path(value, base_dir);
      } else if (key == "enabled") {
        if (value != "true" && value != "false") fail("enabled must be 'true' or 'false'");
        config.notify.enabled = value == "true";
      } else {
        fail("unknown notify key '" + key + "'");
      }
    } else if (section == "daemon") {
      if (key == "interval_s") {
        config.interval_s = std::atoi(value.c_str());
        if (config.interval_s <= 0) fail("interval_s must be a positive integer");
      } else if (key == "store") {
        store = resolve_path(value, base_dir);
      } else {
        fail("unknown daemon key '" + key + "'");
      }
    } else {
      fail("key outside of a section");
    }
  }

  line_no = 0;
  if (config.components.empty()) throw ConfigError("no components configured");
  int mains = 0;
  for (const auto& c : config.components) {
    if (c.kind.empty()) throw ConfigError("component '" + c.name + "' has no kind");
    make_adapter(c.kind);
    if (c.location.empty()) throw ConfigError("component '" + c.name + "' has no location");
    if (c.role == Role::main) ++mains;
  }
  if (mains != 1) throw ConfigError("exactly one main component required, found " + std::to_string(mains));

  config.store = store.value_or(base_dir / "store");
  config.notify.outbox = outbox.value_or(config.store / "outbox");
  return config;
}

CiConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  auto base = fs::absolute(path).parent_path();
  CiConfig config = parse_config(text, base);
  if (const char* env = std::getenv("HETEROTEST_STORE"); env && *env) {
    bool default_outbox = config.notify.outbox == config.store / "outbox";
    config.store = fs::absolute(env);
    if (default_outbox) config.notify.outbox = config.store / "outbox";
  }
  return config;
}

}  // namespace heterotest::ci
