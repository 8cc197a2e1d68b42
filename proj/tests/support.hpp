#pragma once

// Helpers shared by the unit tests and the acceptance binary: scratch
// directories, fixture lookup, and the two brute-force oracles (random
// block graphs and random DSL expressions).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "heterotest/util.hpp"

namespace support {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(HETEROTEST_TEST_DATA); }

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    std::mt19937_64 rng(rd());
    path_ = fs::temp_directory_path() / ("heterotest-" + std::to_string(rng() % 1000000000ULL));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void copy_tree(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

/// A file-journal repository: `HEAD` plus `revisions/<id>/` snapshots.
class JournalRepo {
 public:
  explicit JournalRepo(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_ / "revisions"); }

  const fs::path& dir() const { return dir_; }

  /// Snapshot = previous snapshot (if any) overlaid with `files`; moves HEAD.
  void commit(const std::string& rev, const std::map<std::string, std::string>& files) {
    auto snap = dir_ / "revisions" / rev;
    if (!head_.empty()) copy_tree(dir_ / "revisions" / head_, snap);
    for (const auto& [rel, text] : files) heterotest::write_text_file(snap / rel, text);
    fs::create_directories(snap);
    heterotest::write_text_file(dir_ / "HEAD", rev + "\n");
    head_ = rev;
  }

 private:
  fs::path dir_;
  std::string head_;
};

/// Replaces timestamp and duration attribute values and the matching HTML
/// spans so that two runs can be compared byte for byte.
inline std::string mask_volatile(std::string text) {
  static const std::regex attrs(R"re((timestamp|started_at|duration_ms|generated_at)="[^"]*")re");
  static const std::regex spans(R"re(<span class="(duration|timestamp)">[^<]*</span>)re");
  static const std::regex stamp(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)");
  text = std::regex_replace(text, attrs, "$1=\"*\"");
  text = std::regex_replace(text, spans, "<span class=\"$1\">*</span>");
  return std::regex_replace(text, stamp, "*");
}

/// Drops the coverage element, for comparing runs with and without it.
inline std::string strip_coverage(std::string text) {
  auto begin = text.find("<coverage");
  if (begin == std::string::npos) return text;
  auto end = text.find("</coverage>", begin);
  end = end == std::string::npos ? text.find("/>", begin) + 2 : end + 11;
  auto line_start = text.rfind('\n', begin);
  auto line_end = text.find('\n', end);
  return text.substr(0, line_start) + text.substr(line_end);
}

/// Every href of every page under `dir` that does not resolve to an
/// existing file (and anchor id, when one is given).
inline std::vector<std::string> dangling_links(const fs::path& dir) {
  static const std::regex href(R"re(href="([^"]*)")re");
  std::vector<std::string> dangling;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().extension() != ".html") continue;
    const std::string page = heterotest::read_text_file(entry.path());
    for (std::sregex_iterator it(page.begin(), page.end(), href), end; it != end; ++it) {
      std::string target = (*it)[1];
      std::string anchor;
      if (auto hash = target.find('#'); hash != std::string::npos) {
        anchor = target.substr(hash + 1);
        target = target.substr(0, hash);
      }
      fs::path file = target.empty() ? entry.path() : entry.path().parent_path() / target;
      bool ok = fs::is_regular_file(file);
      if (ok && !anchor.empty()) {
        ok = heterotest::read_text_file(file).find("id=\"" + anchor + "\"") != std::string::npos;
      }
      if (!ok) dangling.push_back(entry.path().filename().string() + " -> " + (*it)[1].str());
    }
  }
  return dangling;
}

/// Number of hrefs in `page` pointing exactly at one of `targets`.
inline int count_links(const std::string& page, const std::vector<std::string>& targets) {
  int n = 0;
  for (const auto& t : targets) {
    const std::string needle = "href=\"" + t + "\"";
    for (auto pos = page.find(needle); pos != std::string::npos; pos = page.find(needle, pos + 1)) ++n;
  }
  return n;
}

// ---------------------------------------------------------------------------
// Random const/gain/sum/product graphs. The oracle composes closures over
// the generated structure and re-evaluates every subexpression from
// scratch, independent of scheduling.

struct RandomGraph {
  std::string model;
  std::map<std::string, double> expected;  // sink id → value
};

inline RandomGraph make_random_graph(std::mt19937_64& rng, int index) {
  std::uniform_int_distribution<int> count(2, 9);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> value(-4.0, 4.0);

  const int n = count(rng);
  std::vector<std::function<double()>> eval(static_cast<std::size_t>(n));
  std::ostringstream blocks, wires;

  for (int i = 0; i < n; ++i) {
    const std::string id = "n" + std::to_string(i);
    int k = i == 0 ? 0 : kind(rng);
    std::uniform_int_distribution<int> pick(0, i > 0 ? i - 1 : 0);
    if (k == 0) {
      double c = value(rng);
      blocks << "  block " << id << " const " << heterotest::format_number(c) << "\n";
      eval[static_cast<std::size_t>(i)] = [c] { return c; };
    } else if (k == 1) {
      double g = value(rng) / 2.0;
      int src = pick(rng);
      blocks << "  block " << id << " gain " << heterotest::format_number(g) << "\n";
      wires << "  wire n" << src << " -> " << id << "\n";
      eval[static_cast<std::size_t>(i)] = [&eval, g, src] { return g * eval[static_cast<std::size_t>(src)](); };
    } else {
      std::uniform_int_distribution<int> arity(1, 3);
      int m = arity(rng);
      std::vector<int> srcs;
      std::string signs;
      for (int j = 0; j < m; ++j) {
        srcs.push_back(pick(rng));
        signs += rng() % 2 ? '+' : '-';
      }
      if (k == 2) {
        blocks << "  block " << id << " sum " << signs << "\n";
      } else {
        blocks << "  block " << id << " product " << m << "\n";
      }
      for (int j = 0; j < m; ++j) {
        std::string port = m == 1 ? "in" : "in" + std::to_string(j + 1);
        wires << "  wire n" << srcs[static_cast<std::size_t>(j)] << " -> " << id << "." << port << "\n";
      }
      if (k == 2) {
        eval[static_cast<std::size_t>(i)] = [&eval, srcs, signs] {
          double acc = 0.0;
          for (std::size_t j = 0; j < srcs.size(); ++j) {
            double v = eval[static_cast<std::size_t>(srcs[j])]();
            acc = signs[j] == '+' ? acc + v : acc - v;
          }
          return acc;
        };
      } else {
        eval[static_cast<std::size_t>(i)] = [&eval, srcs] {
          double acc = 1.0;
          for (int s : srcs) acc *= eval[static_cast<std::size_t>(s)]();
          return acc;
        };
      }
    }
  }

  RandomGraph g;
  std::ostringstream model;
  model << "suite random" << index << "\nsteps 3\n\ntest test_graph {\n" << blocks.str();
  for (int i = 0; i < n; ++i) {
    model << "  block s" << i << " sink\n";
    wires << "  wire n" << i << " -> s" << i << "\n";
    g.expected["s" + std::to_string(i)] = eval[static_cast<std::size_t>(i)]();
  }
  model << "  block z const 0\n  block check assert_eq\n" << wires.str();
  model << "  wire z -> check.actual\n  wire z -> check.expected\n}\n";
  g.model = model.str();
  return g;
}

// ---------------------------------------------------------------------------
// Random DSL expressions with a reference evaluator that works on its own
// tree, rendered fully parenthesized so the DSL's precedence rules are
// exercised only through the parser.

using RefValue = std::variant<std::int64_t, double, bool, std::string>;

struct RefExpr {
  std::string op;  // "lit", "var", or an operator spelling
  RefValue literal;
  std::string name;
  std::vector<RefExpr> kids;
};

struct RefFault {};

inline std::string render_ref(const RefExpr& e) {
  if (e.op == "var") return e.name;
  if (e.op == "lit") {
    if (auto i = std::get_if<std::int64_t>(&e.literal)) return std::to_string(*i);
    if (auto d = std::get_if<double>(&e.literal)) {
      std::ostringstream s;
      s.precision(17);
      s << *d;
      auto text = s.str();
      if (text.find_first_of(".e") == std::string::npos) text += ".0";
      return text;
    }
    if (auto b = std::get_if<bool>(&e.literal)) return *b ? "true" : "false";
    return "\"" + std::get<std::string>(e.literal) + "\"";
  }
  if (e.kids.size() == 1) return "(" + e.op + "(" + render_ref(e.kids[0]) + "))";
  return "(" + render_ref(e.kids[0]) + " " + e.op + " " + render_ref(e.kids[1]) + ")";
}

inline RefExpr random_ref(std::mt19937_64& rng, int depth) {
  static const std::vector<std::string> binary = {"+", "-", "*", "/", "<", "<=", ">", ">=", "==", "!=", "&&", "||"};
  std::uniform_int_distribution<int> coin(0, 99);
  RefExpr e;
  if (depth <= 1 || coin(rng) < 25) {
    int pick = coin(rng);
    if (pick < 8) {
      e.op = "var";
      e.name = pick % 2 ? "x" : "y";
      return e;
    }
    e.op = "lit";
    if (pick < 50) {
      // mostly small, occasionally large enough to overflow
      std::int64_t v = coin(rng) < 10 ? 3037000500LL + coin(rng) : coin(rng) % 12;
      e.literal = v;
    } else if (pick < 72) {
      static const double kDoubles[] = {0.0, 0.5, 1.5, 2.25, 3.0, 10.0, 0.1, 7.75};
      e.literal = kDoubles[coin(rng) % 8];
    } else if (pick < 86) {
      e.literal = coin(rng) % 2 == 0;
    } else {
      static const char* kStrings[] = {"", "a", "ab", "b", "plant"};
      e.literal = std::string(kStrings[coin(rng) % 5]);
    }
    return e;
  }
  if (coin(rng) < 20) {
    e.op = coin(rng) % 2 ? "-" : "!";
    e.kids.push_back(random_ref(rng, depth - 1));
    return e;
  }
  e.op = binary[static_cast<std::size_t>(coin(rng)) % binary.size()];
  e.kids.push_back(random_ref(rng, depth - 1));
  e.kids.push_back(random_ref(rng, depth - 1));
  return e;
}

inline bool ref_truthy(const RefValue& v) {
  if (auto b = std::get_if<bool>(&v)) return *b;
  if (auto i = std::get_if<std::int64_t>(&v)) return *i != 0;
  if (auto d = std::get_if<double>(&v)) return *d != 0.0;
  return !std::get<std::string>(v).empty();
}

/// Throws RefFault wherever the DSL must report a runtime fault.
inline RefValue ref_eval(const RefExpr& e, const std::map<std::string, RefValue>& env) {
  using I = std::int64_t;
  if (e.op == "lit") return e.literal;
  if (e.op == "var") return env.at(e.name);
  if (e.kids.size() == 1) {
    RefValue v = ref_eval(e.kids[0], env);
    if (e.op == "!") return !ref_truthy(v);
    if (auto i = std::get_if<I>(&v)) {
      if (*i == std::numeric_limits<I>::min()) throw RefFault{};
      return -*i;
    }
    if (auto d = std::get_if<double>(&v)) return -*d;
    throw RefFault{};
  }
  if (e.op == "&&") return ref_truthy(ref_eval(e.kids[0], env)) && ref_truthy(ref_eval(e.kids[1], env));
  if (e.op == "||") return ref_truthy(ref_eval(e.kids[0], env)) || ref_truthy(ref_eval(e.kids[1], env));

  RefValue a = ref_eval(e.kids[0], env);
  RefValue b = ref_eval(e.kids[1], env);
  const bool ints = std::holds_alternative<I>(a) && std::holds_alternative<I>(b);
  const bool nums = (std::holds_alternative<I>(a) || std::holds_alternative<double>(a)) &&
                    (std::holds_alternative<I>(b) || std::holds_alternative<double>(b));
  auto dbl = [](const RefValue& v) {
    return std::holds_alternative<I>(v) ? static_cast<double>(std::get<I>(v)) : std::get<double>(v);
  };

  if (e.op == "+" || e.op == "-" || e.op == "*" || e.op == "/") {
    if (e.op == "+" && std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
      return std::get<std::string>(a) + std::get<std::string>(b);
    }
    if (!nums) throw RefFault{};
    if (ints) {
      // widen to 128 bits and range-check instead of using overflow builtins
      __int128 x = std::get<I>(a), y = std::get<I>(b), r = 0;
      if (e.op == "+") r = x + y;
      if (e.op == "-") r = x - y;
      if (e.op == "*") r = x * y;
      if (e.op == "/") {
        if (y == 0) throw RefFault{};
        r = x / y;
      }
      if (r > std::numeric_limits<I>::max() || r < std::numeric_limits<I>::min()) throw RefFault{};
      return static_cast<I>(r);
    }
    double x = dbl(a), y = dbl(b);
    if (e.op == "+") return x + y;
    if (e.op == "-") return x - y;
    if (e.op == "*") return x * y;
    if (y == 0.0) throw RefFault{};
    return x / y;
  }

  auto order = [&](auto x, auto y) -> bool {
    if (e.op == "<") return x < y;
    if (e.op == "<=") return x <= y;
    if (e.op == ">") return x > y;
    if (e.op == ">=") return x >= y;
    if (e.op == "==") return x == y;
    return x != y;
  };
  if (ints) return order(std::get<I>(a), std::get<I>(b));
  if (nums) return order(dbl(a), dbl(b));
  if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    return order(std::get<std::string>(a), std::get<std::string>(b));
  }
  if ((e.op == "==" || e.op == "!=") && std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b)) {
    return order(std::get<bool>(a), std::get<bool>(b));
  }
  throw RefFault{};
}

}  // namespace support
