#include <algorithm>
#include <map>
#include <set>

#include "heterotest/blockmodel.hpp"
#include "heterotest/util.hpp"

namespace heterotest::blockmodel {

namespace {

std::string sorted_join(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ",") + n;
  return out;
}

// Resolves the SUT-side port of a test wire, applying the single-port default.
std::string sut_port(const Subsystem& sut, const Endpoint& ep, bool is_source, int line, const fs::path& file) {
  const auto& ports = is_source ? sut.outputs : sut.inputs;
  const char* what = is_source ? "output" : "input";
  if (ep.port.empty()) {
    if (ports.size() != 1) {
      throw ModelError(std::string("ambiguous sut ") + what + ", name one of its ports", line, file);
    }
    return ports.front();
  }
  if (std::find(ports.begin(), ports.end(), ep.port) == ports.end()) {
    throw ModelError(std::string("sut has no ") + what + " port '" + ep.port + "'", line, file);
  }
  return ep.port;
}

struct Visit {
  fs::path file;
  std::string name;
  bool operator<(const Visit& o) const { return std::tie(file, name) < std::tie(o.file, o.name); }
};

fs::path locate(const std::string& ref_path, const fs::path& from_dir, const std::vector<fs::path>& search_path) {
  fs::path p(ref_path);
  if (p.is_absolute()) return fs::exists(p) ? p : fs::path{};
  std::vector<fs::path> roots;
  roots.push_back(from_dir.empty() ? fs::path(".") : from_dir);
  roots.insert(roots.end(), search_path.begin(), search_path.end());
  for (const auto& root : roots) {
    auto candidate = root / p;
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return {};
}

// Follows `ref` (possibly through aliases and other files' `sut ref`) to an
// inline subsystem.
Subsystem follow(const SubsystemRef& ref, const fs::path& from_file, const std::vector<fs::path>& search_path,
                 std::vector<std::string>& chain, std::set<Visit>& seen) {
  auto path = locate(ref.path, from_file.parent_path(), search_path);
  if (path.empty()) {
    throw ModelError("referenced model file '" + ref.path + "' not found", ref.line, from_file);
  }
  Visit visit{fs::weakly_canonical(path), ref.name};
  chain.push_back(ref.str());
  if (seen.count(visit)) {
    std::string text;
    for (const auto& c : chain) text += (text.empty() ? "" : " -> ") + c;
    throw ModelError("cyclic reference: " + text, ref.line, from_file);
  }
  seen.insert(visit);

  ModelGraph other = load_model(path);
  if (ref.name == "sut") {
    if (other.sut) return *other.sut;
    if (other.sut_ref) return follow(*other.sut_ref, path, search_path, chain, seen);
  }
  if (const Subsystem* sub = other.find_subsystem(ref.name)) return *sub;
  for (const auto& [name, alias] : other.aliases) {
    if (name == ref.name) return follow(alias, path, search_path, chain, seen);
  }
  throw ModelError("subsystem '" + ref.name + "' not found in '" + ref.path + "'", ref.line, from_file);
}

}  // namespace

void validate(const ModelGraph& graph) {
  const auto& file = graph.source_file;
  bool has_sut = graph.sut.has_value() || graph.sut_ref.has_value();
  if (graph.fixture && !has_sut) throw ModelError("fixture declared without a sut", graph.fixture->line, file);

  for (const auto& sub : graph.subsystems) {
    if (!sub.references_sut()) continue;
    if (!has_sut) throw ModelError("'" + sub.name + "' wires to sut but no sut is declared", sub.line, file);
    if (!graph.sut) continue;
    std::map<std::string, int> driven;
    for (const auto& wire : sub.wires) {
      if (wire.src.block == "sut") sut_port(*graph.sut, wire.src, true, wire.line, file);
      if (wire.dst.block == "sut") {
        auto port = sut_port(*graph.sut, wire.dst, false, wire.line, file);
        if (++driven[port] > 1) throw ModelError("input 'sut." + port + "' is wired more than once", wire.line, file);
      }
    }
    for (const auto& in : graph.sut->inputs) {
      if (!driven.count(in)) {
        throw ModelError("sut input '" + in + "' is not wired in '" + sub.name + "'", sub.line, file);
      }
    }
  }

  if (graph.fixture && graph.sut) {
    auto want = sorted_join(graph.sut->inputs);
    if (sorted_join(graph.fixture->inputs) != want || sorted_join(graph.fixture->outputs) != want) {
      throw ModelError("fixture ports must equal the sut input ports (" + want + ")", graph.fixture->line, file);
    }
  }
}

ModelGraph resolve_sut(const ModelGraph& graph, const std::vector<fs::path>& search_path) {
  if (!graph.sut_ref) return graph;
  std::vector<std::string> chain;
  std::set<Visit> seen;
  if (!graph.source_file.empty() && fs::exists(graph.source_file)) {
    // The suite itself is the chain's first element under the name `sut`.
    seen.insert(Visit{fs::weakly_canonical(graph.source_file), "sut"});
    chain.push_back(graph.source_file.filename().generic_string() + "#sut");
  }
  ModelGraph resolved = graph;
  resolved.sut = follow(*graph.sut_ref, graph.source_file, search_path, chain, seen);
  resolved.sut_ref.reset();
  validate(resolved);
  return resolved;
}

ClosedGraph close_graph(const ModelGraph& graph, std::string_view test) {
  const Subsystem* sub = graph.find_subsystem(test);
  if (!sub) throw SimulationError("test '" + std::string(test) + "' not found");

  const bool uses_sut = sub->references_sut();
  if (uses_sut && !graph.sut) {
    if (graph.sut_ref) throw SimulationError("sut reference '" + graph.sut_ref->str() + "' is unresolved");
    throw SimulationError("'" + std::string(test) + "' wires to sut but no sut is declared");
  }

  ClosedGraph closed;
  std::map<std::string, int> index;
  auto add_node = [&](std::string id, std::optional<Block> block, std::size_t n_inputs) {
    index[id] = static_cast<int>(closed.nodes.size());
    closed.nodes.push_back(ClosedGraph::Node{std::move(id), std::move(block), std::vector<int>(n_inputs, -1)});
  };

  auto add_subsystem = [&](const Subsystem& s, const std::string& prefix) {
    for (const auto& in : s.inputs) add_node(prefix + "in:" + in, std::nullopt, 1);
    for (const auto& out : s.outputs) add_node(prefix + "out:" + out, std::nullopt, 1);
    for (const auto& b : s.blocks) add_node(prefix + b.id, b, b.in_ports().size());
  };

  auto connect = [&](int src, const std::string& dst_id, std::size_t port) {
    auto& slot = closed.nodes.at(static_cast<std::size_t>(index.at(dst_id))).inputs.at(port);
    if (slot >= 0) throw SimulationError("input of '" + dst_id + "' is wired more than once");
    slot = src;
  };

  auto wire_subsystem = [&](const Subsystem& s, const std::string& prefix) {
    for (const auto& w : s.wires) {
      int src = -1;
      if (w.src.block == "sut") {
        src = index.at("sut.out:" + sut_port(*graph.sut, w.src, true, w.line, graph.source_file));
      } else if (s.find_block(w.src.block)) {
        src = index.at(prefix + w.src.block);
      } else {
        src = index.at(prefix + "in:" + w.src.block);
      }

      if (w.dst.block == "sut") {
        auto port = sut_port(*graph.sut, w.dst, false, w.line, graph.source_file);
        connect(src, (graph.fixture ? "fixture.in:" : "sut.in:") + port, 0);
      } else if (const Block* b = s.find_block(w.dst.block)) {
        auto ports = b->in_ports();
        auto name = w.dst.port.empty() ? ports.front() : w.dst.port;
        auto pos = static_cast<std::size_t>(std::find(ports.begin(), ports.end(), name) - ports.begin());
        connect(src, prefix + b->id, pos);
      } else {
        connect(src, prefix + "out:" + w.dst.block, 0);
      }
    }
  };

  try {
    add_subsystem(*sub, "");
    if (uses_sut) {
      add_subsystem(*graph.sut, "sut.");
      if (graph.fixture) add_subsystem(*graph.fixture, "fixture.");
    }
    wire_subsystem(*sub, "");
    if (uses_sut) {
      wire_subsystem(*graph.sut, "sut.");
      if (graph.fixture) {
        wire_subsystem(*graph.fixture, "fixture.");
        for (const auto& port : graph.fixture->outputs) {
          connect(index.at("fixture.out:" + port), "sut.in:" + port, 0);
        }
      }
    }
  } catch (const ModelError& e) {
    throw SimulationError(e.what());
  } catch (const std::out_of_range&) {
    throw SimulationError("test '" + std::string(test) + "' references an undefined port");
  }

  for (const auto& node : closed.nodes) {
    for (std::size_t i = 0; i < node.inputs.size(); ++i) {
      if (node.inputs[i] < 0) {
        std::string port = node.block ? node.block->in_ports()[i] : "in";
        throw SimulationError("input '" + node.id + "." + port + "' is not wired");
      }
    }
  }
  return closed;
}

bool is_time_invariant(const ModelGraph& graph, std::string_view test) {
  ClosedGraph closed = close_graph(graph, test);
  std::vector<bool> visited(closed.nodes.size(), false);
  std::vector<int> stack;
  for (std::size_t i = 0; i < closed.nodes.size(); ++i) {
    const auto& b = closed.nodes[i].block;
    if (b && (b->kind == BlockKind::assert_eq || b->kind == BlockKind::sink)) {
      stack.push_back(static_cast<int>(i));
      visited[i] = true;
    }
  }
  while (!stack.empty()) {
    const auto& node = closed.nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (node.block && is_time_dependent(node.block->kind)) return false;
    for (int src : node.inputs) {
      if (!visited[static_cast<std::size_t>(src)]) {
        visited[static_cast<std::size_t>(src)] = true;
        stack.push_back(src);
      }
    }
  }
  return true;
}

}  // namespace heterotest::blockmodel
