#pragma once

// Block-diagram model language: parser, SUT resolution, and a fixed-step
// synchronous simulator.
//
// A `.bdm` file holds one statement per line:
//
//   suite <name>
//   steps <N>
//   sut { ... }                  | sut ref <path>#<name>
//   fixture { ... }
//   test <name> { ... }          | subsystem <name> { ... }
//   subsystem <name> ref <path>#<name>
//
// and inside braces `in <port>`, `out <port>`, `block <id> <kind> <params...>`
// and `wire <id>[.<port>] -> <id>[.<port>]`.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heterotest::blockmodel {

namespace fs = std::filesystem;

enum class BlockKind {
  constant,
  step,
  sequence,
  clock,
  gain,
  sum,
  product,
  delay,
  saturate,
  sink,
  assert_eq,
};

std::string_view to_string(BlockKind kind);
std::optional<BlockKind> parse_kind(std::string_view text);

/// Kinds whose output depends on the step index.
bool is_time_dependent(BlockKind kind);

struct Block {
  std::string id;
  BlockKind kind = BlockKind::constant;
  std::vector<double> numbers;
  std::string signs;  // sum only
  int line = 0;

  std::vector<std::string> in_ports() const;
  std::vector<std::string> out_ports() const;
};

struct Endpoint {
  std::string block;
  std::string port;  // empty: the block's single port

  std::string str() const { return port.empty() ? block : block + "." + port; }
};

struct Wire {
  Endpoint src;
  Endpoint dst;
  int line = 0;
};

struct Subsystem {
  std::string name;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<Block> blocks;
  std::vector<Wire> wires;
  int line = 0;

  const Block* find_block(std::string_view id) const;
  bool references_sut() const;
};

struct SubsystemRef {
  std::string path;
  std::string name;
  int line = 0;

  std::string str() const { return path + "#" + name; }
};

struct ModelGraph {
  std::string suite_name;  // empty when the file has no `suite` directive
  fs::path source_file;
  int steps = 10;
  std::optional<Subsystem> sut;
  std::optional<SubsystemRef> sut_ref;
  std::optional<Subsystem> fixture;
  /// `test` and `subsystem` declarations in file order.
  std::vector<Subsystem> subsystems;
  std::vector<std::pair<std::string, SubsystemRef>> aliases;

  bool is_suite() const { return !suite_name.empty(); }
  const Subsystem* find_subsystem(std::string_view name) const;
};

/// Error with a 1-based line number (0 when not tied to a line).
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& message, int line = 0, fs::path file = {});

  int line() const { return line_; }
  const fs::path& file() const { return file_; }

 private:
  int line_;
  fs::path file_;
};

ModelGraph parse_model(std::string_view text, const fs::path& source_file = {});
ModelGraph load_model(const fs::path& path);

/// Checks the cross-subsystem invariants that need the SUT body: test wires
/// into/out of `sut` name existing ports, and the fixture mirrors the SUT
/// inputs. A no-op for parts that are still unresolved references.
void validate(const ModelGraph& graph);

/// Replaces an external SUT reference by the referenced subsystem, reading
/// the referenced files anew on every call. Relative paths are tried
/// against the referencing file's directory first, then `search_path`.
ModelGraph resolve_sut(const ModelGraph& graph, const std::vector<fs::path>& search_path);

/// Names of subsystems whose name starts with `test`, in file order.
std::vector<std::string> discover_tests(const ModelGraph& graph);

// ---------------------------------------------------------------------------
// Simulation

struct AssertionOutcome {
  std::string block;
  int step = 0;
  double actual = 0.0;
  double expected = 0.0;
  bool passed = true;

  friend bool operator==(const AssertionOutcome&, const AssertionOutcome&) = default;
};

struct SimTrace {
  int steps = 0;
  /// Sink block id → one value per executed step, ordered by block id.
  std::map<std::string, std::vector<double>> sinks;
  std::vector<AssertionOutcome> outcomes;

  bool failed() const;
  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

/// Fault that turns a test into an `error` verdict.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A test subsystem together with the fixture and SUT it drives, flattened
/// into one block list. Ids of fixture/SUT blocks carry a `fixture.` or
/// `sut.` prefix; boundary ports become pass-through nodes.
struct ClosedGraph {
  struct Node {
    std::string id;
    std::optional<Block> block;  // empty: boundary pass-through
    std::vector<int> inputs;     // driving node per input port
  };
  std::vector<Node> nodes;
};

/// Throws SimulationError for unwired inputs or a missing/unresolved SUT.
ClosedGraph close_graph(const ModelGraph& graph, std::string_view test);

/// True iff no step/sequence/clock/delay block has a forward path into an
/// assert_eq or sink of the test's closed graph.
bool is_time_invariant(const ModelGraph& graph, std::string_view test);

struct SimOptions {
  /// Run a single step when the test is time-invariant.
  bool minimize = true;
};

/// Synchronous fixed-step execution. Throws SimulationError on algebraic
/// loops, non-finite values, or an ill-formed closed graph.
SimTrace simulate(const ModelGraph& graph, std::string_view test, int steps, SimOptions options = {});

}  // namespace heterotest::blockmodel
