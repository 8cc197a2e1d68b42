#include <sstream>

#include "heterotest/testdsl.hpp"
#include "heterotest/util.hpp"

namespace heterotest::testdsl {

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::unary: return e.unary_op == UnaryOp::negate ? 7 : 3;
    case Expr::Kind::binary:
      switch (e.binary_op) {
        case BinaryOp::logical_or: return 1;
        case BinaryOp::logical_and: return 2;
        case BinaryOp::lt:
        case BinaryOp::le:
        case BinaryOp::gt:
        case BinaryOp::ge:
        case BinaryOp::eq:
        case BinaryOp::ne: return 4;
        case BinaryOp::add:
        case BinaryOp::sub: return 5;
        case BinaryOp::mul:
        case BinaryOp::div: return 6;
      }
      return 0;
    case Expr::Kind::field: return 8;
    default: return 9;
  }
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string print(const Expr& e, int min_prec);

std::string raw(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::int_lit: return std::to_string(e.int_value);
    case Expr::Kind::float_lit: {
      auto s = format_number(e.float_value);
      if (s.find_first_of(".e") == std::string::npos) s += ".0";
      return s;
    }
    case Expr::Kind::bool_lit: return e.bool_value ? "true" : "false";
    case Expr::Kind::string_lit: return quote(e.text);
    case Expr::Kind::variable: return e.text;
    case Expr::Kind::unary:
      return std::string(spelling(e.unary_op)) + print(e.operands[0], precedence(e));
    case Expr::Kind::binary: {
      int p = precedence(e);
      return print(e.operands[0], p) + " " + std::string(spelling(e.binary_op)) + " " + print(e.operands[1], p + 1);
    }
    case Expr::Kind::call: {
      std::string out = e.text + "(";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        if (i > 0) out += ", ";
        out += print(e.operands[i], 1);
      }
      return out + ")";
    }
    case Expr::Kind::field: return print(e.operands[0], 8) + "." + e.text;
  }
  return {};
}

std::string print(const Expr& e, int min_prec) {
  auto s = raw(e);
  return precedence(e) < min_prec ? "(" + s + ")" : s;
}

}  // namespace

std::string_view spelling(UnaryOp op) { return op == UnaryOp::negate ? "-" : "!"; }

std::string_view spelling(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
    case BinaryOp::logical_and: return "&&";
    case BinaryOp::logical_or: return "||";
  }
  return "?";
}

std::string_view spelling(DeclType type) {
  switch (type) {
    case DeclType::int_type: return "int";
    case DeclType::double_type: return "double";
    case DeclType::bool_type: return "bool";
    case DeclType::string_type: return "string";
    case DeclType::auto_type: return "auto";
  }
  return "auto";
}

std::string to_source(const Expr& expr) { return print(expr, 0); }

std::string to_source(const Stmt& stmt) {
  auto args = [&] {
    std::string out;
    for (std::size_t i = 0; i < stmt.args.size(); ++i) {
      if (i > 0) out += ", ";
      out += to_source(stmt.args[i]);
    }
    return out;
  };
  switch (stmt.kind) {
    case Stmt::Kind::declaration:
      return std::string(spelling(stmt.decl_type)) + " " + stmt.name + " = " + to_source(stmt.args[0]) + ";";
    case Stmt::Kind::assert_true: return "TS_ASSERT(" + args() + ");";
    case Stmt::Kind::assert_equals: return "TS_ASSERT_EQUALS(" + args() + ");";
    case Stmt::Kind::assert_delta: return "TS_ASSERT_DELTA(" + args() + ");";
    case Stmt::Kind::fail: return "TS_FAIL(" + args() + ");";
    case Stmt::Kind::expression: return to_source(stmt.args[0]) + ";";
  }
  return {};
}

std::string to_source(const SuiteDecl& suite) {
  std::ostringstream out;
  out << "class " << suite.name << " : public CxxTest::TestSuite\n{\npublic:\n";
  for (std::size_t i = 0; i < suite.methods.size(); ++i) {
    const auto& m = suite.methods[i];
    if (i > 0) out << "\n";
    out << "    void " << m.name << "()\n    {\n";
    for (const auto& s : m.body) out << "        " << to_source(s) << "\n";
    out << "    }\n";
  }
  out << "};\n";
  return out.str();
}

}  // namespace heterotest::testdsl
