#include <cctype>
#include <map>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "heterotest/blockmodel.hpp"
#include "heterotest/util.hpp"

namespace heterotest::blockmodel {

namespace {

struct KindName {
  BlockKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {BlockKind::constant, "const"}, {BlockKind::step, "step"},       {BlockKind::sequence, "sequence"},
    {BlockKind::clock, "clock"},    {BlockKind::gain, "gain"},       {BlockKind::sum, "sum"},
    {BlockKind::product, "product"}, {BlockKind::delay, "delay"},    {BlockKind::saturate, "saturate"},
    {BlockKind::sink, "sink"},      {BlockKind::assert_eq, "assert_eq"},
};

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = s.front();
  if (!(std::isalpha(static_cast<unsigned char>(head)) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

// Whitespace-separated words; `#` at the start of a word opens a comment.
std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] == '#') break;
    std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    words.emplace_back(line.substr(start, i - start));
  }
  return words;
}

class Parser {
 public:
  Parser(std::string_view text, fs::path source) : source_(std::move(source)) {
    graph_.source_file = source_;
    lines_ = split_lines(text);
  }

  ModelGraph run() {
    bool saw_suite = false;
    bool saw_steps = false;
    for (line_no_ = 1; line_no_ <= static_cast<int>(lines_.size()); ++line_no_) {
      auto words = tokenize(lines_[line_no_ - 1]);
      if (words.empty()) continue;
      const auto& head = words[0];
      if (head == "suite") {
        expect_count(words, 2, "suite <name>");
        if (saw_suite) fail("duplicate 'suite' directive");
        require_identifier(words[1], "suite name");
        graph_.suite_name = words[1];
        saw_suite = true;
      } else if (head == "steps") {
        expect_count(words, 2, "steps <N>");
        if (saw_steps) fail("duplicate 'steps' directive");
        int n = 0;
        auto [ptr, ec] = std::from_chars(words[1].data(), words[1].data() + words[1].size(), n);
        if (ec != std::errc{} || ptr != words[1].data() + words[1].size() || n <= 0) {
          fail("steps must be a positive integer, got '" + words[1] + "'");
        }
        graph_.steps = n;
        saw_steps = true;
      } else if (head == "sut") {
        if (graph_.sut || graph_.sut_ref) fail("duplicate 'sut' declaration");
        if (words.size() >= 2 && words[1] == "ref") {
          expect_count(words, 3, "sut ref <path>#<name>");
          graph_.sut_ref = parse_ref(words[2]);
        } else {
          expect_open(words, 1, "sut {");
          auto sub = parse_body("sut", Role::sut);
          graph_.sut = std::move(sub);
        }
      } else if (head == "fixture") {
        if (graph_.fixture) fail("duplicate 'fixture' declaration");
        expect_open(words, 1, "fixture {");
        graph_.fixture = parse_body("fixture", Role::fixture);
      } else if (head == "test" || head == "subsystem") {
        if (words.size() < 2) fail("expected '" + head + " <name> {'");
        const auto& name = words[1];
        require_identifier(name, head + " name");
        if (taken_names_.count(name)) fail("duplicate subsystem '" + name + "'");
        taken_names_.insert(name);
        if (head == "subsystem" && words.size() >= 3 && words[2] == "ref") {
          expect_count(words, 4, "subsystem <name> ref <path>#<name>");
          graph_.aliases.emplace_back(name, parse_ref(words[3]));
        } else {
          expect_open(words, 2, head + " <name> {");
          graph_.subsystems.push_back(parse_body(name, Role::plain));
        }
      } else {
        fail("unknown statement '" + head + "'");
      }
    }
    validate(graph_);
    return std::move(graph_);
  }

 private:
  enum class Role { sut, fixture, plain };

  [[noreturn]] void fail(const std::string& message) const { throw ModelError(message, line_no_, source_); }
  [[noreturn]] void fail_at(const std::string& message, int line) const { throw ModelError(message, line, source_); }

  void expect_count(const std::vector<std::string>& words, std::size_t n, std::string_view form) const {
    if (words.size() != n) fail("malformed statement, expected '" + std::string(form) + "'");
  }

  void expect_open(const std::vector<std::string>& words, std::size_t index, std::string_view form) const {
    if (words.size() != index + 1 || words[index] != "{") {
      fail("malformed statement, expected '" + std::string(form) + "'");
    }
  }

  void require_identifier(std::string_view s, std::string_view what) const {
    if (!is_identifier(s)) fail("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }

  SubsystemRef parse_ref(const std::string& word) const {
    auto hash = word.rfind('#');
    if (hash == std::string::npos || hash == 0 || hash + 1 == word.size()) {
      fail("malformed reference '" + word + "', expected <path>#<name>");
    }
    SubsystemRef ref{word.substr(0, hash), word.substr(hash + 1), line_no_};
    require_identifier(ref.name, "referenced subsystem name");
    return ref;
  }

  double parse_number(const std::string& word) const {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
    if (ec != std::errc{} || ptr != word.data() + word.size()) fail("expected a number, got '" + word + "'");
    if (!std::isfinite(value)) fail("parameter '" + word + "' is not finite");
    return value;
  }

  Block parse_block(const std::vector<std::string>& words) const {
    if (words.size() < 3) fail("malformed statement, expected 'block <id> <kind> <params...>'");
    Block block;
    block.id = words[1];
    block.line = line_no_;
    require_identifier(block.id, "block id");
    if (block.id == "sut" || block.id == "fixture") fail("block id '" + block.id + "' is reserved");
    auto kind = parse_kind(words[2]);
    if (!kind) fail("unknown block kind '" + words[2] + "'");
    block.kind = *kind;

    std::vector<std::string> params(words.begin() + 3, words.end());
    auto arity = [&](std::size_t lo, std::size_t hi) {
      if (params.size() < lo || params.size() > hi) {
        fail("block '" + block.id + "' of kind " + words[2] + " takes " +
             (lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi)) +
             " parameter(s), got " + std::to_string(params.size()));
      }
    };

    switch (block.kind) {
      case BlockKind::sum: {
        arity(1, 1);
        const auto& signs = params[0];
        if (!std::all_of(signs.begin(), signs.end(), [](char c) { return c == '+' || c == '-'; })) {
          fail("sum sign string must consist of '+' and '-', got '" + signs + "'");
        }
        block.signs = signs;
        return block;
      }
      case BlockKind::constant:
      case BlockKind::gain: arity(1, 1); break;
      case BlockKind::step:
        if (params.size() != 1 && params.size() != 3) {
          fail("block '" + block.id + "' of kind step takes 1 or 3 parameter(s)");
        }
        break;
      case BlockKind::sequence: arity(1, static_cast<std::size_t>(-1)); break;
      case BlockKind::clock:
      case BlockKind::delay:
      case BlockKind::assert_eq:
      case BlockKind::product: arity(0, 1); break;
      case BlockKind::saturate: arity(2, 2); break;
      case BlockKind::sink: arity(0, 0); break;
    }
    for (const auto& p : params) block.numbers.push_back(parse_number(p));

    if (block.kind == BlockKind::product) {
      double n = block.numbers.empty() ? 2.0 : block.numbers[0];
      if (n < 1.0 || n != std::floor(n)) fail("product input count must be a positive integer");
      block.numbers = {n};
    }
    if (block.kind == BlockKind::saturate && block.numbers[0] > block.numbers[1]) {
      fail("saturate lower bound exceeds upper bound");
    }
    if (block.kind == BlockKind::assert_eq && !block.numbers.empty() && block.numbers[0] < 0.0) {
      fail("assert_eq tolerance must be non-negative");
    }
    return block;
  }

  Endpoint parse_endpoint(const std::string& word) const {
    Endpoint ep;
    auto dot = word.find('.');
    if (dot == std::string::npos) {
      ep.block = word;
    } else {
      ep.block = word.substr(0, dot);
      ep.port = word.substr(dot + 1);
      require_identifier(ep.port, "port name");
    }
    require_identifier(ep.block, "block id");
    return ep;
  }

  Subsystem parse_body(const std::string& name, Role role) {
    Subsystem sub;
    sub.name = name;
    sub.line = line_no_;
    std::set<std::string> ids;
    for (++line_no_; line_no_ <= static_cast<int>(lines_.size()); ++line_no_) {
      auto words = tokenize(lines_[line_no_ - 1]);
      if (words.empty()) continue;
      const auto& head = words[0];
      if (head == "}") {
        expect_count(words, 1, "}");
        check_subsystem(sub, role);
        return sub;
      }
      if (head == "in" || head == "out") {
        expect_count(words, 2, head + " <port>");
        require_identifier(words[1], "port name");
        auto& list = head == "in" ? sub.inputs : sub.outputs;
        if (std::find(list.begin(), list.end(), words[1]) != list.end()) {
          fail("duplicate " + head + " port '" + words[1] + "'");
        }
        // A fixture mirrors the SUT inputs, so it may reuse a name for an
        // input and an output port.
        bool mirrored = role == Role::fixture && head == "out" &&
                        std::find(sub.inputs.begin(), sub.inputs.end(), words[1]) != sub.inputs.end();
        if (!mirrored && ids.count(words[1])) fail("duplicate name '" + words[1] + "'");
        ids.insert(words[1]);
        list.push_back(words[1]);
      } else if (head == "block") {
        auto block = parse_block(words);
        if (ids.count(block.id)) fail("duplicate block id '" + block.id + "'");
        ids.insert(block.id);
        sub.blocks.push_back(std::move(block));
      } else if (head == "wire") {
        if (words.size() != 4 || words[2] != "->") {
          fail("malformed statement, expected 'wire <id>[.<port>] -> <id>[.<port>]'");
        }
        sub.wires.push_back(Wire{parse_endpoint(words[1]), parse_endpoint(words[3]), line_no_});
      } else {
        fail("unknown statement '" + head + "' inside '" + name + "'");
      }
    }
    fail_at("unterminated block for '" + name + "', missing '}'", sub.line);
  }

  // Intra-subsystem invariants: every endpoint exists, every block input
  // and every boundary output is driven exactly once.
  void check_subsystem(Subsystem& sub, Role role) const {
    bool is_test = starts_with(sub.name, "test");
    if (is_test && role == Role::plain && (!sub.inputs.empty() || !sub.outputs.empty())) {
      fail_at("test '" + sub.name + "' cannot declare boundary ports", sub.line);
    }
    std::map<std::string, int> driven;  // "<id>.<port>" → count

    for (auto& wire : sub.wires) {
      auto& src = wire.src;
      if (src.block == "sut") {
        if (role != Role::plain) fail_at("'" + sub.name + "' cannot wire to sut", wire.line);
      } else if (const Block* b = sub.find_block(src.block)) {
        auto outs = b->out_ports();
        if (outs.empty()) fail_at("block '" + b->id + "' has no output port", wire.line);
        if (src.port.empty()) {
          src.port = outs.front();
        } else if (std::find(outs.begin(), outs.end(), src.port) == outs.end()) {
          fail_at("block '" + b->id + "' has no output port '" + src.port + "'", wire.line);
        }
      } else if (std::find(sub.inputs.begin(), sub.inputs.end(), src.block) != sub.inputs.end() &&
                 src.port.empty()) {
        // boundary input
      } else {
        fail_at("wire source references missing block '" + src.block + "'", wire.line);
      }

      auto& dst = wire.dst;
      if (dst.block == "sut") {
        if (role != Role::plain) fail_at("'" + sub.name + "' cannot wire to sut", wire.line);
        continue;  // checked by validate() once the SUT body is known
      }
      if (const Block* b = sub.find_block(dst.block)) {
        auto ins = b->in_ports();
        if (ins.empty()) fail_at("block '" + b->id + "' has no input port", wire.line);
        if (dst.port.empty()) {
          if (ins.size() != 1) {
            fail_at("ambiguous port for block '" + b->id + "', name one of its inputs", wire.line);
          }
          dst.port = ins.front();
        } else if (std::find(ins.begin(), ins.end(), dst.port) == ins.end()) {
          fail_at("block '" + b->id + "' has no input port '" + dst.port + "'", wire.line);
        }
      } else if (std::find(sub.outputs.begin(), sub.outputs.end(), dst.block) != sub.outputs.end() &&
                 dst.port.empty()) {
        // boundary output
      } else {
        fail_at("wire destination references missing block '" + dst.block + "'", wire.line);
      }
      if (++driven[dst.str()] > 1) fail_at("input '" + dst.str() + "' is wired more than once", wire.line);
    }

    for (const auto& block : sub.blocks) {
      for (const auto& port : block.in_ports()) {
        if (!driven.count(block.id + "." + port)) {
          fail_at("input '" + block.id + "." + port + "' is not wired", block.line);
        }
      }
    }
    for (const auto& out : sub.outputs) {
      if (!driven.count(out)) fail_at("output port '" + out + "' of '" + sub.name + "' is not wired", sub.line);
    }
    if (is_test && role == Role::plain) {
      bool has_assert = std::any_of(sub.blocks.begin(), sub.blocks.end(),
                                    [](const Block& b) { return b.kind == BlockKind::assert_eq; });
      if (!has_assert) fail_at("test '" + sub.name + "' contains no assert_eq block", sub.line);
    }
  }

  fs::path source_;
  ModelGraph graph_;
  std::vector<std::string> lines_;
  std::set<std::string> taken_names_;
  int line_no_ = 0;
};

}  // namespace

std::string_view to_string(BlockKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

std::optional<BlockKind> parse_kind(std::string_view text) {
  for (const auto& k : kKindNames) {
    if (k.name == text) return k.kind;
  }
  return std::nullopt;
}

bool is_time_dependent(BlockKind kind) {
  return kind == BlockKind::step || kind == BlockKind::sequence || kind == BlockKind::clock ||
         kind == BlockKind::delay;
}

std::vector<std::string> Block::in_ports() const {
  switch (kind) {
    case BlockKind::constant:
    case BlockKind::step:
    case BlockKind::sequence:
    case BlockKind::clock: return {};
    case BlockKind::gain:
    case BlockKind::delay:
    case BlockKind::saturate:
    case BlockKind::sink: return {"in"};
    case BlockKind::assert_eq: return {"actual", "expected"};
    case BlockKind::sum:
    case BlockKind::product: {
      std::size_t n = kind == BlockKind::sum ? signs.size() : static_cast<std::size_t>(numbers.at(0));
      if (n == 1) return {"in"};
      std::vector<std::string> ports;
      for (std::size_t i = 1; i <= n; ++i) ports.push_back("in" + std::to_string(i));
      return ports;
    }
  }
  return {};
}

std::vector<std::string> Block::out_ports() const {
  if (kind == BlockKind::sink || kind == BlockKind::assert_eq) return {};
  return {"out"};
}

const Block* Subsystem::find_block(std::string_view id) const {
  for (const auto& b : blocks) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

bool Subsystem::references_sut() const {
  return std::any_of(wires.begin(), wires.end(),
                     [](const Wire& w) { return w.src.block == "sut" || w.dst.block == "sut"; });
}

const Subsystem* ModelGraph::find_subsystem(std::string_view name) const {
  for (const auto& s : subsystems) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

ModelError::ModelError(const std::string& message, int line, fs::path file)
    : std::runtime_error([&] {
        std::string prefix;
        if (!file.empty()) prefix = file.generic_string() + ":";
        if (line > 0) prefix += std::to_string(line) + ":";
        return prefix.empty() ? message : prefix + " " + message;
      }()),
      line_(line),
      file_(std::move(file)) {}

ModelGraph parse_model(std::string_view text, const fs::path& source_file) {
  return Parser(text, source_file).run();
}

ModelGraph load_model(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception&) {
    throw ModelError("cannot read model file '" + path.generic_string() + "'");
  }
  return parse_model(text, path);
}

std::vector<std::string> discover_tests(const ModelGraph& graph) {
  std::vector<std::string> names;
  for (const auto& sub : graph.subsystems) {
    if (starts_with(sub.name, "test")) names.push_back(sub.name);
  }
  return names;
}

}  // namespace heterotest::blockmodel
