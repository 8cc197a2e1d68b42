#include <algorithm>

#include "heterotest/testdsl.hpp"
#include "lexer.hpp"

namespace heterotest::testdsl {

namespace {

struct MacroShape {
  std::string_view name;
  Stmt::Kind kind;
  std::size_t arity;
};

constexpr MacroShape kMacros[] = {
    {"TS_ASSERT", Stmt::Kind::assert_true, 1},
    {"TS_ASSERT_EQUALS", Stmt::Kind::assert_equals, 2},
    {"TS_ASSERT_DELTA", Stmt::Kind::assert_delta, 3},
    {"TS_FAIL", Stmt::Kind::fail, 1},
};

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::string file) : toks_(std::move(tokens)), file_(std::move(file)) {}

  std::vector<SuiteDecl> file() {
    std::vector<SuiteDecl> suites;
    while (!at_end()) {
      if (is_ident("class") || is_ident("struct")) {
        if (auto suite = class_decl()) suites.push_back(std::move(*suite));
      } else {
        fail_here("expected a class declaration");
      }
    }
    return suites;
  }

  Expr expression_only() {
    Expr e = expr();
    if (!at_end()) fail_here("unexpected '" + peek().text + "' after expression");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::end; }
  const Token& next() {
    const Token& t = peek();
    if (!at_end()) ++pos_;
    return t;
  }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::punct && peek(ahead).text == p;
  }
  bool is_ident(std::string_view s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Token::Kind::identifier && peek(ahead).text == s;
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail_here(const std::string& message) const {
    throw SyntaxError(message, peek().line, peek().column, file_);
  }

  std::string describe(const Token& t) const {
    switch (t.kind) {
      case Token::Kind::end: return "end of input";
      case Token::Kind::string: return "string literal";
      default: return "'" + t.text + "'";
    }
  }

  void expect(std::string_view p) {
    if (!accept(p)) fail_here("expected '" + std::string(p) + "' but found " + describe(peek()));
  }

  std::string identifier(std::string_view what) {
    if (peek().kind != Token::Kind::identifier) {
      fail_here("expected " + std::string(what) + " but found " + describe(peek()));
    }
    return next().text;
  }

  std::optional<SuiteDecl> class_decl() {
    const Token& kw = next();
    SuiteDecl suite;
    suite.line = kw.line;
    suite.source_file = file_;
    suite.name = identifier("class name");

    bool is_suite = false;
    if (accept(":")) {
      if (is_ident("public") || is_ident("private") || is_ident("protected")) next();
      std::string base = identifier("base class name");
      while (accept("::")) base += "::" + identifier("base class name");
      is_suite = base == "TestSuite" || base == "CxxTest::TestSuite";
    }

    if (!is_suite) {
      skip_braced_body();
      accept(";");
      return std::nullopt;
    }

    expect("{");
    while (!accept("}")) {
      if (at_end()) fail_here("unterminated class '" + suite.name + "'");
      if ((is_ident("public") || is_ident("private") || is_ident("protected")) && is_punct(":", 1)) {
        next();
        next();
        continue;
      }
      suite.methods.push_back(method());
    }
    expect(";");
    return suite;
  }

  void skip_braced_body() {
    expect("{");
    int depth = 1;
    while (depth > 0) {
      if (at_end()) fail_here("unterminated class body");
      const Token& t = next();
      if (t.kind == Token::Kind::punct && t.text == "{") ++depth;
      if (t.kind == Token::Kind::punct && t.text == "}") --depth;
    }
  }

  TestMethod method() {
    if (!is_ident("void")) fail_here("expected a method declaration 'void <name>()'");
    TestMethod m;
    m.line = next().line;
    m.name = identifier("method name");
    expect("(");
    if (is_ident("void")) next();
    expect(")");
    expect("{");
    while (!accept("}")) {
      if (at_end()) fail_here("unterminated method '" + m.name + "'");
      m.body.push_back(statement());
    }
    accept(";");
    return m;
  }

  std::optional<DeclType> decl_type() {
    static const std::pair<std::string_view, DeclType> kTypes[] = {
        {"int", DeclType::int_type},       {"double", DeclType::double_type}, {"bool", DeclType::bool_type},
        {"string", DeclType::string_type}, {"auto", DeclType::auto_type},
    };
    if (is_ident("std") && is_punct("::", 1) && is_ident("string", 2) &&
        peek(3).kind == Token::Kind::identifier) {
      next();
      next();
      next();
      return DeclType::string_type;
    }
    for (const auto& [name, type] : kTypes) {
      if (is_ident(name) && peek(1).kind == Token::Kind::identifier) {
        next();
        return type;
      }
    }
    return std::nullopt;
  }

  Stmt statement() {
    Stmt s;
    s.line = peek().line;
    if (auto type = decl_type()) {
      s.kind = Stmt::Kind::declaration;
      s.decl_type = *type;
      s.name = identifier("variable name");
      expect("=");
      s.args.push_back(expr());
      expect(";");
      return s;
    }
    if (peek().kind == Token::Kind::identifier && is_punct("(", 1)) {
      for (const auto& macro : kMacros) {
        if (peek().text != macro.name) continue;
        next();
        expect("(");
        s.kind = macro.kind;
        for (std::size_t i = 0; i < macro.arity; ++i) {
          if (i > 0) expect(",");
          s.args.push_back(expr());
        }
        expect(")");
        expect(";");
        return s;
      }
    }
    s.kind = Stmt::Kind::expression;
    s.args.push_back(expr());
    expect(";");
    return s;
  }

  // Precedence, loosest first: || && ! comparisons +- */ unary-minus.

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (is_punct("||")) {
      const Token& op = next();
      lhs = positioned(Expr::binary(BinaryOp::logical_or, std::move(lhs), and_expr()), op);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = not_expr();
    while (is_punct("&&")) {
      const Token& op = next();
      lhs = positioned(Expr::binary(BinaryOp::logical_and, std::move(lhs), not_expr()), op);
    }
    return lhs;
  }

  Expr not_expr() {
    if (is_punct("!")) {
      const Token& op = next();
      return positioned(Expr::unary(UnaryOp::logical_not, not_expr()), op);
    }
    return comparison();
  }

  Expr comparison() {
    static const std::pair<std::string_view, BinaryOp> kOps[] = {
        {"<", BinaryOp::lt}, {"<=", BinaryOp::le}, {">", BinaryOp::gt},
        {">=", BinaryOp::ge}, {"==", BinaryOp::eq}, {"!=", BinaryOp::ne},
    };
    Expr lhs = additive();
    while (true) {
      auto it = std::find_if(std::begin(kOps), std::end(kOps), [&](const auto& o) { return is_punct(o.first); });
      if (it == std::end(kOps)) return lhs;
      const Token& op = next();
      lhs = positioned(Expr::binary(it->second, std::move(lhs), additive()), op);
    }
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (is_punct("+") || is_punct("-")) {
      const Token& op = next();
      auto kind = op.text == "+" ? BinaryOp::add : BinaryOp::sub;
      lhs = positioned(Expr::binary(kind, std::move(lhs), multiplicative()), op);
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (is_punct("*") || is_punct("/")) {
      const Token& op = next();
      auto kind = op.text == "*" ? BinaryOp::mul : BinaryOp::div;
      lhs = positioned(Expr::binary(kind, std::move(lhs), unary()), op);
    }
    return lhs;
  }

  Expr unary() {
    if (is_punct("-")) {
      const Token& op = next();
      return positioned(Expr::unary(UnaryOp::negate, unary()), op);
    }
    if (is_punct("!")) {
      // `!` binds looser than comparisons even inside a tighter operand.
      const Token& op = next();
      return positioned(Expr::unary(UnaryOp::logical_not, not_expr()), op);
    }
    return postfix();
  }

  Expr postfix() {
    Expr e = primary();
    while (is_punct(".")) {
      const Token& dot = next();
      e = positioned(Expr::field(std::move(e), identifier("field name")), dot);
    }
    return e;
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case Token::Kind::integer: next(); return positioned(Expr::integer(t.int_value), t);
      case Token::Kind::floating: next(); return positioned(Expr::floating(t.float_value), t);
      case Token::Kind::string: next(); return positioned(Expr::string(t.text), t);
      case Token::Kind::identifier: {
        next();
        if (t.text == "true" || t.text == "false") return positioned(Expr::boolean(t.text == "true"), t);
        if (accept("(")) {
          std::vector<Expr> args;
          if (!accept(")")) {
            do {
              args.push_back(expr());
            } while (accept(","));
            expect(")");
          }
          return positioned(Expr::call(t.text, std::move(args)), t);
        }
        return positioned(Expr::variable(t.text), t);
      }
      case Token::Kind::punct:
        if (t.text == "(") {
          next();
          Expr inner = expr();
          expect(")");
          return inner;
        }
        break;
      case Token::Kind::end: break;
    }
    fail_here("expected an expression but found " + describe(t));
  }

  static Expr positioned(Expr e, const Token& t) {
    e.line = t.line;
    e.column = t.column;
    return e;
  }

  std::vector<Token> toks_;
  std::string file_;
  std::size_t pos_ = 0;
};

bool same_exprs(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

SyntaxError::SyntaxError(const std::string& message, int line, int column, const std::string& file)
    : std::runtime_error((file.empty() ? std::string() : file + ":") + std::to_string(line) + ":" +
                         std::to_string(column) + ": syntax error: " + message),
      line_(line),
      column_(column) {}

std::vector<SuiteDecl> parse_suite_file(std::string_view text, const std::string& source_file) {
  return Parser(lex(text, source_file), source_file).file();
}

Expr parse_expression(std::string_view text) { return Parser(lex(text, {}), {}).expression_only(); }

Expr Expr::integer(std::int64_t v) {
  Expr e;
  e.kind = Kind::int_lit;
  e.int_value = v;
  return e;
}

Expr Expr::floating(double v) {
  Expr e;
  e.kind = Kind::float_lit;
  e.float_value = v;
  return e;
}

Expr Expr::boolean(bool v) {
  Expr e;
  e.kind = Kind::bool_lit;
  e.bool_value = v;
  return e;
}

Expr Expr::string(std::string v) {
  Expr e;
  e.kind = Kind::string_lit;
  e.text = std::move(v);
  return e;
}

Expr Expr::variable(std::string name) {
  Expr e;
  e.kind = Kind::variable;
  e.text = std::move(name);
  return e;
}

Expr Expr::unary(UnaryOp op, Expr operand) {
  Expr e;
  e.kind = Kind::unary;
  e.unary_op = op;
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = Kind::binary;
  e.binary_op = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

Expr Expr::call(std::string name, std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::call;
  e.text = std::move(name);
  e.operands = std::move(args);
  return e;
}

Expr Expr::field(Expr object, std::string name) {
  Expr e;
  e.kind = Kind::field;
  e.text = std::move(name);
  e.operands.push_back(std::move(object));
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::int_lit: return a.int_value == b.int_value;
    case Expr::Kind::float_lit: return a.float_value == b.float_value;
    case Expr::Kind::bool_lit: return a.bool_value == b.bool_value;
    case Expr::Kind::string_lit:
    case Expr::Kind::variable: return a.text == b.text;
    case Expr::Kind::unary: return a.unary_op == b.unary_op && same_exprs(a.operands, b.operands);
    case Expr::Kind::binary: return a.binary_op == b.binary_op && same_exprs(a.operands, b.operands);
    case Expr::Kind::call:
    case Expr::Kind::field: return a.text == b.text && same_exprs(a.operands, b.operands);
  }
  return false;
}

bool operator==(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || !same_exprs(a.args, b.args)) return false;
  if (a.kind == Stmt::Kind::declaration) return a.decl_type == b.decl_type && a.name == b.name;
  return true;
}

bool operator==(const TestMethod& a, const TestMethod& b) { return a.name == b.name && a.body == b.body; }

bool operator==(const SuiteDecl& a, const SuiteDecl& b) { return a.name == b.name && a.methods == b.methods; }

const TestMethod* SuiteDecl::find_method(std::string_view name) const {
  for (const auto& m : methods) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

}  // namespace heterotest::testdsl
