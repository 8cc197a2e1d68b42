#pragma once

// C-family test DSL: suites are classes deriving from `TestSuite`, test
// methods are `void test*()` bodies of declarations, assertion macros and
// expression statements. The DSL is interpreted.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "heterotest/blockmodel.hpp"
#include "heterotest/result.hpp"

namespace heterotest::testdsl {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// AST

enum class UnaryOp { negate, logical_not };
enum class BinaryOp { add, sub, mul, div, lt, le, gt, ge, eq, ne, logical_and, logical_or };

std::string_view spelling(UnaryOp op);
std::string_view spelling(BinaryOp op);

struct Expr {
  enum class Kind { int_lit, float_lit, bool_lit, string_lit, variable, unary, binary, call, field };

  Kind kind = Kind::int_lit;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  bool bool_value = false;
  /// String literal contents, variable/function/field name.
  std::string text;
  UnaryOp unary_op = UnaryOp::negate;
  BinaryOp binary_op = BinaryOp::add;
  /// Unary: 1 operand. Binary: 2. Call: arguments. Field: the object.
  std::vector<Expr> operands;
  int line = 0;
  int column = 0;

  static Expr integer(std::int64_t v);
  static Expr floating(double v);
  static Expr boolean(bool v);
  static Expr string(std::string v);
  static Expr variable(std::string name);
  static Expr unary(UnaryOp op, Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr call(std::string name, std::vector<Expr> args);
  static Expr field(Expr object, std::string name);

  /// Structural equality; source positions are ignored.
  friend bool operator==(const Expr& a, const Expr& b);
};

enum class DeclType { int_type, double_type, bool_type, string_type, auto_type };

std::string_view spelling(DeclType type);

struct Stmt {
  enum class Kind { declaration, assert_true, assert_equals, assert_delta, fail, expression };

  Kind kind = Kind::expression;
  DeclType decl_type = DeclType::auto_type;
  std::string name;         // declarations
  std::vector<Expr> args;   // initializer / macro arguments / expression
  int line = 0;

  friend bool operator==(const Stmt& a, const Stmt& b);
};

struct TestMethod {
  std::string name;
  std::vector<Stmt> body;
  int line = 0;

  bool runnable() const { return name.rfind("test", 0) == 0; }
  friend bool operator==(const TestMethod& a, const TestMethod& b);
};

struct SuiteDecl {
  std::string name;
  std::string source_file;
  std::vector<TestMethod> methods;
  int line = 0;

  const TestMethod* find_method(std::string_view name) const;
  friend bool operator==(const SuiteDecl& a, const SuiteDecl& b);
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, int line, int column, const std::string& file = {});

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Suites in source order. Classes not deriving from `TestSuite` are
/// skipped; preprocessor lines are ignored.
std::vector<SuiteDecl> parse_suite_file(std::string_view text, const std::string& source_file = {});

/// Parses a single expression (used by tests and the REPL-style helpers).
Expr parse_expression(std::string_view text);

// Pretty printing. Output re-parses to a structurally equal AST.
std::string to_source(const Expr& expr);
std::string to_source(const Stmt& stmt);
std::string to_source(const SuiteDecl& suite);

// ---------------------------------------------------------------------------
// Values and evaluation

struct StatusRecord {
  std::int64_t status = 0;  // 0 passed, 1 failed, 2 error
  std::string output;

  friend bool operator==(const StatusRecord&, const StatusRecord&) = default;
};

using Value = std::variant<std::int64_t, double, bool, std::string, StatusRecord>;

/// Rendering used by `print` and assertion messages (strings unquoted).
std::string format_value(const Value& value);

/// Runtime fault inside a DSL test (status=error).
class RuntimeFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Environment = std::map<std::string, Value, std::less<>>;

/// Builtin function hook; receives evaluated arguments.
using BuiltinHandler = std::function<Value(std::string_view name, const std::vector<Value>& args)>;

/// Side-effect-free evaluation. Throws RuntimeFault on unbound variables,
/// division by zero, integer overflow, type mismatches and unknown calls.
Value eval_expr(const Expr& expr, const Environment& env, const BuiltinHandler& builtins = {});

/// Truthiness used by TS_ASSERT, `!`, `&&` and `||`.
bool truthy(const Value& value);

// ---------------------------------------------------------------------------
// Model engine shared by all tests of a runner execution

class ModelEngine {
 public:
  explicit ModelEngine(std::vector<fs::path> search_path = {});

  /// Global fixture setup; must be called once before the first test.
  void initialize();
  bool initialized() const;
  int init_count() const;

  /// Runs one model test case. Each suite file is parsed and resolved at
  /// most once per engine; later calls reuse the cached graph.
  StatusRecord run(const fs::path& suite_path, std::string_view test);

  /// Number of suite file parses performed, in total and per file.
  int load_count() const;
  int load_count(const fs::path& suite_path) const;

 private:
  struct Entry {
    std::optional<blockmodel::ModelGraph> graph;
    std::string load_error;
    std::string resolve_error;
    int loads = 0;
  };

  std::vector<fs::path> search_path_;
  mutable std::mutex mutex_;
  std::map<fs::path, Entry> cache_;
  int init_count_ = 0;
  int loads_ = 0;
};

// ---------------------------------------------------------------------------
// Test execution

struct ExecContext {
  /// Path recorded in messages and coverage probes.
  std::string file;
  /// Directory against which `slunit_run` suite paths are resolved.
  fs::path base_dir;
  ModelEngine* engine = nullptr;
  /// Called with (file, line) before each statement executes.
  std::function<void(const std::string&, int)> probe;
};

/// Runs a method body. The first failing assertion aborts the method with
/// status=failed; runtime faults yield status=error. Never throws.
TestCaseResult exec_test(const TestMethod& method, const ExecContext& context);

}  // namespace heterotest::testdsl
