#include <chrono>
#include <cmath>
#include <limits>

#include "heterotest/testdsl.hpp"
#include "heterotest/util.hpp"

namespace heterotest::testdsl {

namespace {

using Int = std::int64_t;

std::string type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "int";
    case 1: return "double";
    case 2: return "bool";
    case 3: return "string";
    default: return "status record";
  }
}

bool is_number(const Value& v) { return std::holds_alternative<Int>(v) || std::holds_alternative<double>(v); }

double as_double(const Value& v) {
  if (const auto* i = std::get_if<Int>(&v)) return static_cast<double>(*i);
  return std::get<double>(v);
}

[[noreturn]] void mismatch(std::string_view op, const Value& a, const Value& b) {
  throw RuntimeFault("type mismatch: " + type_name(a) + " " + std::string(op) + " " + type_name(b));
}

Value arithmetic(BinaryOp op, const Value& a, const Value& b) {
  if (op == BinaryOp::add && std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    return std::get<std::string>(a) + std::get<std::string>(b);
  }
  if (!is_number(a) || !is_number(b)) mismatch(spelling(op), a, b);

  if (std::holds_alternative<Int>(a) && std::holds_alternative<Int>(b)) {
    Int x = std::get<Int>(a);
    Int y = std::get<Int>(b);
    Int r = 0;
    bool overflow = false;
    switch (op) {
      case BinaryOp::add: overflow = __builtin_add_overflow(x, y, &r); break;
      case BinaryOp::sub: overflow = __builtin_sub_overflow(x, y, &r); break;
      case BinaryOp::mul: overflow = __builtin_mul_overflow(x, y, &r); break;
      case BinaryOp::div:
        if (y == 0) throw RuntimeFault("division by zero");
        if (x == std::numeric_limits<Int>::min() && y == -1) overflow = true;
        else r = x / y;
        break;
      default: break;
    }
    if (overflow) throw RuntimeFault("integer overflow");
    return r;
  }

  double x = as_double(a);
  double y = as_double(b);
  switch (op) {
    case BinaryOp::add: return x + y;
    case BinaryOp::sub: return x - y;
    case BinaryOp::mul: return x * y;
    case BinaryOp::div:
      if (y == 0.0) throw RuntimeFault("division by zero");
      return x / y;
    default: return 0.0;
  }
}

template <typename T>
bool ordered(BinaryOp op, const T& x, const T& y) {
  switch (op) {
    case BinaryOp::lt: return x < y;
    case BinaryOp::le: return x <= y;
    case BinaryOp::gt: return x > y;
    case BinaryOp::ge: return x >= y;
    case BinaryOp::eq: return x == y;
    case BinaryOp::ne: return x != y;
    default: return false;
  }
}

bool compare(BinaryOp op, const Value& a, const Value& b) {
  if (std::holds_alternative<Int>(a) && std::holds_alternative<Int>(b)) {
    return ordered(op, std::get<Int>(a), std::get<Int>(b));
  }
  if (is_number(a) && is_number(b)) return ordered(op, as_double(a), as_double(b));
  if (std::holds_alternative<std::string>(a) && std::holds_alternative<std::string>(b)) {
    return ordered(op, std::get<std::string>(a), std::get<std::string>(b));
  }
  bool equality = op == BinaryOp::eq || op == BinaryOp::ne;
  if (equality && std::holds_alternative<bool>(a) && std::holds_alternative<bool>(b)) {
    return ordered(op, std::get<bool>(a), std::get<bool>(b));
  }
  if (equality && std::holds_alternative<StatusRecord>(a) && std::holds_alternative<StatusRecord>(b)) {
    bool same = std::get<StatusRecord>(a) == std::get<StatusRecord>(b);
    return op == BinaryOp::eq ? same : !same;
  }
  mismatch(spelling(op), a, b);
}

Value eval(const Expr& e, const Environment& env, const BuiltinHandler& builtins) {
  switch (e.kind) {
    case Expr::Kind::int_lit: return e.int_value;
    case Expr::Kind::float_lit: return e.float_value;
    case Expr::Kind::bool_lit: return e.bool_value;
    case Expr::Kind::string_lit: return e.text;
    case Expr::Kind::variable: {
      auto it = env.find(e.text);
      if (it == env.end()) throw RuntimeFault("unbound variable '" + e.text + "'");
      return it->second;
    }
    case Expr::Kind::unary: {
      Value v = eval(e.operands[0], env, builtins);
      if (e.unary_op == UnaryOp::logical_not) return !truthy(v);
      if (const auto* i = std::get_if<Int>(&v)) {
        if (*i == std::numeric_limits<Int>::min()) throw RuntimeFault("integer overflow");
        return -*i;
      }
      if (const auto* d = std::get_if<double>(&v)) return -*d;
      throw RuntimeFault("type mismatch: -" + type_name(v));
    }
    case Expr::Kind::binary: {
      if (e.binary_op == BinaryOp::logical_and || e.binary_op == BinaryOp::logical_or) {
        bool lhs = truthy(eval(e.operands[0], env, builtins));
        if (e.binary_op == BinaryOp::logical_and && !lhs) return false;
        if (e.binary_op == BinaryOp::logical_or && lhs) return true;
        return truthy(eval(e.operands[1], env, builtins));
      }
      Value a = eval(e.operands[0], env, builtins);
      Value b = eval(e.operands[1], env, builtins);
      switch (e.binary_op) {
        case BinaryOp::add:
        case BinaryOp::sub:
        case BinaryOp::mul:
        case BinaryOp::div: return arithmetic(e.binary_op, a, b);
        default: return compare(e.binary_op, a, b);
      }
    }
    case Expr::Kind::call: {
      std::vector<Value> args;
      for (const auto& arg : e.operands) args.push_back(eval(arg, env, builtins));
      if (!builtins) throw RuntimeFault("unknown function '" + e.text + "'");
      return builtins(e.text, args);
    }
    case Expr::Kind::field: {
      Value obj = eval(e.operands[0], env, builtins);
      const auto* rec = std::get_if<StatusRecord>(&obj);
      if (!rec) throw RuntimeFault("type mismatch: field '" + e.text + "' of " + type_name(obj));
      if (e.text == "status") return rec->status;
      if (e.text == "output") return rec->output;
      throw RuntimeFault("status record has no field '" + e.text + "'");
    }
  }
  throw RuntimeFault("malformed expression");
}

std::string quoted(const Value& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return "\"" + *s + "\"";
  return format_value(v);
}

// Equality used by TS_ASSERT_EQUALS: int/double promote, other kinds must match.
bool assert_equal(const Value& a, const Value& b) { return compare(BinaryOp::eq, a, b); }

struct AssertionFailure {
  std::string text;
};

Value coerce(DeclType type, Value v, const std::string& name) {
  auto bad = [&] {
    return RuntimeFault("type mismatch: cannot initialize " + std::string(spelling(type)) + " '" + name + "' with " +
                        type_name(v));
  };
  switch (type) {
    case DeclType::auto_type: return v;
    case DeclType::int_type:
      if (!std::holds_alternative<Int>(v)) throw bad();
      return v;
    case DeclType::double_type:
      if (!is_number(v)) throw bad();
      return as_double(v);
    case DeclType::bool_type:
      if (!std::holds_alternative<bool>(v)) throw bad();
      return v;
    case DeclType::string_type:
      if (!std::holds_alternative<std::string>(v)) throw bad();
      return v;
  }
  return v;
}

}  // namespace

bool truthy(const Value& value) {
  return std::visit(
      [](const auto& v) -> bool {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) return v;
        else if constexpr (std::is_same_v<T, Int>) return v != 0;
        else if constexpr (std::is_same_v<T, double>) return v != 0.0;
        else if constexpr (std::is_same_v<T, std::string>) return !v.empty();
        else throw RuntimeFault("type mismatch: status record used as a condition");
      },
      value);
}

std::string format_value(const Value& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, Int>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) {
          auto s = format_number(v);
          if (s.find_first_of(".ein") == std::string::npos) s += ".0";
          return s;
        } else if constexpr (std::is_same_v<T, std::string>) return v;
        else return "{status: " + std::to_string(v.status) + ", output: \"" + v.output + "\"}";
      },
      value);
}

Value eval_expr(const Expr& expr, const Environment& env, const BuiltinHandler& builtins) {
  return eval(expr, env, builtins);
}

TestCaseResult exec_test(const TestMethod& method, const ExecContext& context) {
  const auto start = std::chrono::steady_clock::now();
  TestCaseResult result;
  result.name = method.name;
  Environment env;

  BuiltinHandler builtins = [&](std::string_view name, const std::vector<Value>& args) -> Value {
    if (name == "print") {
      if (args.size() != 1) throw RuntimeFault("print expects 1 argument");
      result.output += format_value(args[0]);
      result.output += '\n';
      return args[0];
    }
    if (name == "slunit_run") {
      if (args.size() != 2 || !std::holds_alternative<std::string>(args[0]) ||
          !std::holds_alternative<std::string>(args[1])) {
        throw RuntimeFault("slunit_run expects (string, string)");
      }
      StatusRecord record;
      if (!context.engine) {
        record = StatusRecord{2, "model engine not available"};
      } else if (!context.engine->initialized()) {
        record = StatusRecord{2, "model engine not initialized"};
      } else {
        fs::path suite = std::get<std::string>(args[0]);
        if (suite.is_relative()) suite = context.base_dir / suite;
        record = context.engine->run(suite, std::get<std::string>(args[1]));
      }
      // forwarded into the calling test's output
      if (!record.output.empty()) result.output += record.output + "\n";
      return record;
    }
    throw RuntimeFault("unknown function '" + std::string(name) + "'");
  };

  auto report = [&](TestStatus status, std::string text, int line) {
    result.status = status;
    Message m;
    m.text = "line " + std::to_string(line) + ": " + text;
    m.file = context.file;
    m.line = line;
    result.messages.push_back(std::move(m));
  };

  for (const auto& stmt : method.body) {
    if (context.probe) context.probe(context.file, stmt.line);
    try {
      auto arg = [&](std::size_t i) { return eval(stmt.args.at(i), env, builtins); };
      switch (stmt.kind) {
        case Stmt::Kind::declaration: {
          if (env.count(stmt.name)) throw RuntimeFault("variable '" + stmt.name + "' already declared");
          Value v = coerce(stmt.decl_type, arg(0), stmt.name);
          env.emplace(stmt.name, std::move(v));
          break;
        }
        case Stmt::Kind::assert_true:
          if (!truthy(arg(0))) throw AssertionFailure{to_source(stmt) + " failed"};
          break;
        case Stmt::Kind::assert_equals: {
          Value a = arg(0);
          Value b = arg(1);
          if (!assert_equal(a, b)) {
            throw AssertionFailure{to_source(stmt) + " failed: " + quoted(a) + " != " + quoted(b)};
          }
          break;
        }
        case Stmt::Kind::assert_delta: {
          Value a = arg(0);
          Value b = arg(1);
          Value t = arg(2);
          if (!is_number(a) || !is_number(b) || !is_number(t)) {
            throw RuntimeFault("type mismatch: TS_ASSERT_DELTA expects numbers");
          }
          if (!(std::fabs(as_double(a) - as_double(b)) <= as_double(t))) {
            throw AssertionFailure{to_source(stmt) + " failed: |" + format_value(a) + " - " + format_value(b) +
                                   "| > " + format_value(t)};
          }
          break;
        }
        case Stmt::Kind::fail: throw AssertionFailure{"TS_FAIL: " + format_value(arg(0))};
        case Stmt::Kind::expression: arg(0); break;
      }
    } catch (const AssertionFailure& f) {
      report(TestStatus::failed, f.text, stmt.line);
      break;
    } catch (const std::exception& e) {
      report(TestStatus::error, e.what(), stmt.line);
      break;
    }
  }
  result.duration_ms = elapsed_ms(start);
  return result;
}

}  // namespace heterotest::testdsl
