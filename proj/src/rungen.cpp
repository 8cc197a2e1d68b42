#include "heterotest/rungen.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

#include "heterotest/blockmodel.hpp"
#include "heterotest/util.hpp"

namespace heterotest::rungen {

namespace {

std::vector<fs::path> files_with_extension(const fs::path& root, const std::string& ext) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string single_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\t', ' ');
  return text;
}

}  // namespace

RunnerManifest scan(const std::vector<fs::path>& paths) {
  RunnerManifest manifest;
  manifest.generated_at = utc_timestamp();
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      auto found = files_with_extension(p, ".tsuite");
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p, ec)) {
      files.push_back(p);
    } else {
      manifest.diagnostics.push_back("cannot read '" + p.generic_string() + "'");
    }
  }

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::map<std::string, std::string> suite_owner;
  for (const auto& file : files) {
    const std::string name = file.generic_string();
    std::vector<testdsl::SuiteDecl> suites;
    try {
      suites = testdsl::parse_suite_file(read_text_file(file), name);
    } catch (const std::exception& e) {
      manifest.diagnostics.push_back(single_line(e.what()));
      continue;
    }
    for (const auto& suite : suites) {
      auto [owner, inserted] = suite_owner.emplace(suite.name, name);
      if (!inserted && owner->second != name) {
        manifest.diagnostics.push_back("suite '" + suite.name + "' declared in both '" + owner->second + "' and '" +
                                       name + "'");
      }
      for (const auto& method : suite.methods) {
        if (!method.runnable()) continue;
        if (!seen.insert({name, suite.name, method.name}).second) continue;
        manifest.entries.push_back(ManifestEntry{name, suite.name, method.name, method.line});
      }
    }
  }
  return manifest;
}

std::string serialize_manifest(const RunnerManifest& manifest, const fs::path& base_dir) {
  std::ostringstream out;
  out << kManifestHeader << "\n";
  out << "# generated_at " << manifest.generated_at << "\n";
  for (const auto& d : manifest.diagnostics) out << "# diagnostic " << single_line(d) << "\n";
  for (const auto& e : manifest.entries) {
    std::string file = base_dir.empty() ? e.file : portable_relative(e.file, base_dir);
    out << file << '\t' << e.suite << '\t' << e.method << '\t' << e.line << "\n";
  }
  return out.str();
}

void generate_runner(const RunnerManifest& manifest, const fs::path& out) {
  auto base = fs::absolute(out).parent_path();
  write_text_file(out, serialize_manifest(manifest, base));
}

RunnerManifest parse_manifest(const std::string& text) {
  RunnerManifest manifest;
  auto lines = split_lines(text);
  if (lines.empty() || lines[0] != kManifestHeader) {
    throw ManifestError("not a runner manifest (expected header '" + std::string(kManifestHeader) + "')");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.empty()) continue;
    if (starts_with(line, "# generated_at ")) {
      manifest.generated_at = line.substr(15);
      continue;
    }
    if (starts_with(line, "# diagnostic ")) {
      manifest.diagnostics.push_back(line.substr(13));
      continue;
    }
    if (line[0] == '#') continue;
    auto fields = split(line, '\t');
    int number = 0;
    if (fields.size() != 4 || (number = std::atoi(fields[3].c_str())) <= 0) {
      throw ManifestError("malformed manifest entry at line " + std::to_string(i + 1));
    }
    manifest.entries.push_back(ManifestEntry{fields[0], fields[1], fields[2], number});
  }
  return manifest;
}

RunnerManifest read_manifest(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ManifestError(e.what());
  }
  return parse_manifest(text);
}

report::ResultsDocument run_manifest(const RunnerManifest& manifest, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  report::ResultsDocument doc;
  doc.timestamp = utc_timestamp();
  doc.diagnostics = manifest.diagnostics;

  testdsl::ModelEngine own_engine(options.model_search_path);
  testdsl::ModelEngine* engine = options.engine ? options.engine : &own_engine;
  if (!manifest.entries.empty() && !engine->initialized()) engine->initialize();

  struct Parsed {
    std::vector<testdsl::SuiteDecl> suites;
    std::string error;
  };
  std::map<std::string, Parsed> parsed;
  auto resolve = [&](const std::string& file) {
    fs::path p = file;
    return p.is_relative() && !options.base_dir.empty() ? options.base_dir / p : p;
  };
  auto load = [&](const std::string& file) -> const Parsed& {
    auto it = parsed.find(file);
    if (it != parsed.end()) return it->second;
    Parsed result;
    try {
      result.suites = testdsl::parse_suite_file(read_text_file(resolve(file)), file);
      if (options.coverage) {
        std::set<int> lines;
        for (const auto& s : result.suites) {
          auto l = coverage::enumerate_instrumentable(s);
          lines.insert(l.begin(), l.end());
        }
        options.coverage->register_lines(file, lines);
      }
    } catch (const std::exception& e) {
      result.error = single_line(e.what());
    }
    return parsed.emplace(file, std::move(result)).first->second;
  };

  std::map<std::pair<std::string, std::string>, std::size_t> suite_index;
  for (const auto& entry : manifest.entries) {
    auto key = std::make_pair(entry.file, entry.suite);
    auto it = suite_index.find(key);
    if (it == suite_index.end()) {
      SuiteResult suite;
      suite.suite = entry.suite;
      suite.source_file = entry.file;
      suite.started_at = utc_timestamp();
      doc.suites.push_back(std::move(suite));
      it = suite_index.emplace(key, doc.suites.size() - 1).first;
    }
    SuiteResult& suite = doc.suites[it->second];
    const auto suite_start = std::chrono::steady_clock::now();

    const Parsed& file = load(entry.file);
    const testdsl::TestMethod* method = nullptr;
    std::string problem = file.error;
    if (problem.empty()) {
      auto decl = std::find_if(file.suites.begin(), file.suites.end(),
                               [&](const testdsl::SuiteDecl& s) { return s.name == entry.suite; });
      if (decl == file.suites.end()) {
        problem = "suite '" + entry.suite + "' not found in '" + entry.file + "'";
      } else if (!(method = decl->find_method(entry.method))) {
        problem = "method '" + entry.method + "' not found in suite '" + entry.suite + "'";
      }
    }

    if (!method) {
      TestCaseResult tc;
      tc.name = entry.method;
      tc.status = TestStatus::error;
      tc.messages.push_back(Message{problem, entry.file, entry.line, {}, -1});
      suite.cases.push_back(std::move(tc));
    } else {
      testdsl::ExecContext ctx;
      ctx.file = entry.file;
      ctx.base_dir = resolve(entry.file).parent_path();
      ctx.engine = engine;
      if (options.coverage) {
        ctx.probe = [cov = options.coverage](const std::string& f, int line) { cov->record(f, line); };
      }
      suite.cases.push_back(testdsl::exec_test(*method, ctx));
    }
    suite.duration_ms += elapsed_ms(suite_start);
  }

  if (options.coverage) {
    options.coverage->close();
    doc.coverage = options.coverage->summarize();
  }
  doc.duration_ms = elapsed_ms(start);
  return doc;
}

AdapterResult generate_adapters(const fs::path& model_dir, const fs::path& out_dir) {
  AdapterResult result;
  if (!fs::is_directory(model_dir)) throw std::runtime_error("model directory '" + model_dir.generic_string() + "' not found");
  fs::create_directories(out_dir);

  struct Planned {
    fs::path path;
    std::string content;
  };
  std::vector<Planned> planned;
  std::set<std::string> used_files;
  std::set<std::string> used_methods;
  auto unique = [](std::set<std::string>& used, const std::string& base) {
    std::string candidate = base;
    for (int n = 2; used.count(candidate); ++n) candidate = base + "_" + std::to_string(n);
    used.insert(candidate);
    return candidate;
  };

  for (const auto& model : files_with_extension(model_dir, ".bdm")) {
    blockmodel::ModelGraph graph;
    try {
      graph = blockmodel::load_model(model);
    } catch (const std::exception& e) {
      result.diagnostics.push_back("skipped " + model.generic_string() + ": " + single_line(e.what()));
      continue;
    }
    if (!graph.is_suite()) continue;  // library file

    const std::string suite = sanitize_identifier(graph.suite_name);
    const std::string stem = unique(used_files, suite + "_adapter");
    const std::string model_ref = portable_relative(model, out_dir);

    std::ostringstream out;
    out << kAdapterMarker << "\n";
    out << "// model suite: " << model_ref << "\n";
    out << "#include <cxxtest/TestSuite.h>\n\n";
    out << "class " << stem << " : public CxxTest::TestSuite\n{\npublic:\n";
    bool first = true;
    for (const auto& test : blockmodel::discover_tests(graph)) {
      const std::string method = unique(used_methods, "test_" + suite + "_" + sanitize_identifier(test));
      result.adapters.push_back(AdapterSpec{model, test, method});
      if (!first) out << "\n";
      first = false;
      out << "    void " << method << "()\n    {\n";
      out << "        auto result = slunit_run(\"" << model_ref << "\", \"" << test << "\");\n";
      out << "        TS_ASSERT_EQUALS(result.status, 0);\n";
      out << "    }\n";
    }
    out << "};\n";
    planned.push_back(Planned{out_dir / (stem + ".tsuite"), out.str()});
  }

  auto is_generated = [](const fs::path& p) {
    try {
      return starts_with(read_text_file(p), kAdapterMarker);
    } catch (const std::exception&) {
      return false;
    }
  };

  for (const auto& p : planned) {
    if (fs::exists(p.path) && !is_generated(p.path)) {
      throw AdapterCollision("refusing to overwrite hand-written file '" + p.path.generic_string() + "'");
    }
  }
  std::set<fs::path> keep;
  for (const auto& p : planned) {
    write_text_file(p.path, p.content);
    result.files.push_back(p.path);
    keep.insert(p.path);
  }
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.path().extension() == ".tsuite" && !keep.count(entry.path()) && is_generated(entry.path())) {
      fs::remove(entry.path());
    }
  }
  return result;
}

}  // namespace heterotest::rungen
