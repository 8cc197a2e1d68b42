#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <charconv>
#include <sstream>

#include "heterotest/report.hpp"
#include "heterotest/util.hpp"

namespace heterotest::report {

namespace pt = boost::property_tree;

namespace {

class Reader {
 public:
  explicit Reader(std::vector<std::string>* warnings) : warnings_(warnings) {}

  ResultsDocument document(const pt::ptree& tree) {
    ResultsDocument doc;
    const pt::ptree* root = nullptr;
    for (const auto& [name, child] : tree) {
      if (name == "testresults") root = &child;
    }
    if (!root) throw SchemaError("missing root element 'testresults'");
    const std::string where = "testresults";

    if (required(*root, "format", where) != std::to_string(kFormatVersion)) {
      throw SchemaError(where + ": unsupported format '" + required(*root, "format", where) + "'");
    }
    if (auto rev = optional(*root, "revision")) doc.revision = integer(*rev, where, "revision");
    doc.timestamp = required(*root, "timestamp", where);
    doc.duration_ms = integer(required(*root, "duration_ms", where), where, "duration_ms");

    int suite_index = 0;
    for (const auto& [name, child] : *root) {
      if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
      if (name == "diagnostic") {
        doc.diagnostics.push_back(child.data());
      } else if (name == "suite") {
        doc.suites.push_back(suite(child, where + "/suite[" + std::to_string(++suite_index) + "]"));
      } else if (name == "coverage") {
        doc.coverage = coverage(child, where + "/coverage");
      } else {
        warn(where, name);
      }
    }
    check_counts(*root, doc.counts(), where);
    return doc;
  }

 private:
  void warn(const std::string& where, const std::string& element) {
    if (warnings_) warnings_->push_back(where + ": ignoring unknown element '" + element + "'");
  }

  static std::optional<std::string> optional(const pt::ptree& node, const std::string& attr) {
    auto attrs = node.get_child_optional("<xmlattr>");
    if (!attrs) return std::nullopt;
    auto value = attrs->get_optional<std::string>(attr);
    if (!value) return std::nullopt;
    return *value;
  }

  static std::string required(const pt::ptree& node, const std::string& attr, const std::string& where) {
    auto value = optional(node, attr);
    if (!value) throw SchemaError(where + ": missing required attribute '" + attr + "'");
    return *value;
  }

  static long long integer(const std::string& text, const std::string& where, const std::string& attr) {
    long long v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
      throw SchemaError(where + ": attribute '" + attr + "' is not an integer: '" + text + "'");
    }
    return v;
  }

  static double number(const std::string& text, const std::string& where, const std::string& attr) {
    double v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || p != text.data() + text.size()) {
      throw SchemaError(where + ": attribute '" + attr + "' is not a number: '" + text + "'");
    }
    return v;
  }

  static void check_counts(const pt::ptree& node, const StatusCounts& c, const std::string& where) {
    const std::pair<const char*, int> expected[] = {
        {"tests", c.total()}, {"passed", c.passed}, {"failed", c.failed}, {"error", c.error}};
    for (const auto& [attr, value] : expected) {
      if (integer(required(node, attr, where), where, attr) != value) {
        throw SchemaError(where + ": attribute '" + attr + "' disagrees with the listed tests");
      }
    }
  }

  SuiteResult suite(const pt::ptree& node, const std::string& where) {
    SuiteResult s;
    s.suite = required(node, "name", where);
    s.source_file = required(node, "file", where);
    s.started_at = optional(node, "started_at").value_or("");
    s.duration_ms = integer(required(node, "duration_ms", where), where, "duration_ms");
    int index = 0;
    for (const auto& [name, child] : node) {
      if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
      if (name == "test") {
        s.cases.push_back(test_case(child, where + "/test[" + std::to_string(++index) + "]"));
      } else {
        warn(where, name);
      }
    }
    check_counts(node, s.counts(), where);
    return s;
  }

  TestCaseResult test_case(const pt::ptree& node, const std::string& where) {
    TestCaseResult tc;
    tc.name = required(node, "name", where);
    auto status = parse_status(required(node, "status", where));
    if (!status) throw SchemaError(where + ": invalid status '" + required(node, "status", where) + "'");
    tc.status = *status;
    tc.duration_ms = integer(required(node, "duration_ms", where), where, "duration_ms");
    int trace_index = 0;
    for (const auto& [name, child] : node) {
      if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
      if (name == "failure") {
        const std::string at = where + "/failure";
        Message m;
        m.text = required(child, "message", at);
        m.file = optional(child, "file").value_or("");
        if (auto line = optional(child, "line")) m.line = static_cast<int>(integer(*line, at, "line"));
        m.block = optional(child, "block").value_or("");
        if (auto step = optional(child, "step")) m.step = static_cast<int>(integer(*step, at, "step"));
        tc.messages.push_back(std::move(m));
      } else if (name == "output") {
        tc.output = child.data();
      } else if (name == "trace") {
        const std::string at = where + "/trace[" + std::to_string(++trace_index) + "]";
        SinkSeries series;
        series.block = required(child, "block", at);
        for (const auto& [row_name, row] : child) {
          if (row_name == "<xmlattr>" || row_name == "<xmlcomment>") continue;
          if (row_name != "row") {
            warn(at, row_name);
            continue;
          }
          auto step = integer(required(row, "step", at + "/row"), at + "/row", "step");
          if (step != static_cast<long long>(series.values.size())) {
            throw SchemaError(at + "/row: steps must be consecutive from 0");
          }
          series.values.push_back(number(required(row, "value", at + "/row"), at + "/row", "value"));
        }
        tc.trace.push_back(std::move(series));
      } else {
        warn(where, name);
      }
    }
    if (tc.status != TestStatus::passed && tc.messages.empty()) {
      throw SchemaError(where + ": " + std::string(to_string(tc.status)) + " test without a failure element");
    }
    return tc;
  }

  coverage::CoverageMap coverage(const pt::ptree& node, const std::string& where) {
    coverage::CoverageMap map;
    int index = 0;
    for (const auto& [name, child] : node) {
      if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
      if (name != "file") {
        warn(where, name);
        continue;
      }
      const std::string at = where + "/file[" + std::to_string(++index) + "]";
      coverage::CoverageFile f;
      f.name = required(child, "name", at);
      for (const auto& [line_name, line] : child) {
        if (line_name == "<xmlattr>" || line_name == "<xmlcomment>") continue;
        if (line_name != "line") {
          warn(at, line_name);
          continue;
        }
        int n = static_cast<int>(integer(required(line, "number", at + "/line"), at + "/line", "number"));
        f.instrumentable.insert(n);
        if (required(line, "executed", at + "/line") == "1") f.executed.insert(n);
      }
      if (integer(required(child, "instrumentable", at), at, "instrumentable") !=
              static_cast<long long>(f.instrumentable.size()) ||
          integer(required(child, "executed", at), at, "executed") != static_cast<long long>(f.executed.size()) ||
          required(child, "percent", at) != format_percent(f.percent())) {
        throw SchemaError(at + ": coverage counts disagree with the listed lines");
      }
      map.files.push_back(std::move(f));
    }
    if (integer(required(node, "instrumentable", where), where, "instrumentable") != map.instrumentable() ||
        integer(required(node, "executed", where), where, "executed") != map.executed() ||
        required(node, "percent", where) != format_percent(map.percent())) {
      throw SchemaError(where + ": coverage totals disagree with the listed files");
    }
    return map;
  }

  std::vector<std::string>* warnings_;
};

}  // namespace

ResultsDocument parse_results_xml(const std::string& text, std::vector<std::string>* warnings) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw SchemaError("malformed XML at line " + std::to_string(e.line()) + ": " + e.message());
  }
  return Reader(warnings).document(tree);
}

ResultsDocument read_results_xml(const fs::path& path, std::vector<std::string>* warnings) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw SchemaError(e.what());
  }
  return parse_results_xml(text, warnings);
}

}  // namespace heterotest::report
