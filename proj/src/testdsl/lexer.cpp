#include "lexer.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "heterotest/testdsl.hpp"

namespace heterotest::testdsl {

namespace {

constexpr std::string_view kTwoCharPuncts[] = {"::", "&&", "||", "==", "!=", "<=", ">="};
constexpr std::string_view kOneCharPuncts = "{}();,.:<>+-*/!=";

}  // namespace

std::vector<Token> lex(std::string_view src, const std::string& file) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  bool line_start = true;

  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
        line_start = true;
      } else {
        ++col;
      }
    }
  };
  auto fail = [&](const std::string& message) { throw SyntaxError(message, line, col, file); };

  while (i < src.size()) {
    char c = src[i];
    if (c == '\n' || std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '#' && line_start) {
      // Preprocessor line, e.g. the include preamble.
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    line_start = false;
    if (src.substr(i, 2) == "//") {
      while (i < src.size() && src[i] != '\n') advance();
      continue;
    }
    if (src.substr(i, 2) == "/*") {
      int start_line = line;
      int start_col = col;
      auto end = src.find("*/", i + 2);
      if (end == std::string_view::npos) throw SyntaxError("unterminated comment", start_line, start_col, file);
      advance(end + 2 - i);
      line_start = false;
      continue;
    }

    Token tok;
    tok.line = line;
    tok.column = col;

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < src.size() && (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) advance();
      tok.kind = Token::Kind::identifier;
      tok.text = std::string(src.substr(start, i - start));
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = i;
      bool is_float = false;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance();
      if (i < src.size() && src[i] == '.') {
        is_float = true;
        advance();
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance();
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          is_float = true;
          advance(j - i);
          while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) advance();
        }
      }
      if (i < src.size() && (std::isalpha(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        fail("malformed number");
      }
      auto text = src.substr(start, i - start);
      tok.text = std::string(text);
      if (is_float) {
        tok.kind = Token::Kind::floating;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), tok.float_value);
        if (ec != std::errc{} || !std::isfinite(tok.float_value)) {
          throw SyntaxError("number out of range '" + tok.text + "'", tok.line, tok.column, file);
        }
      } else {
        tok.kind = Token::Kind::integer;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), tok.int_value);
        if (ec != std::errc{}) throw SyntaxError("integer out of range '" + tok.text + "'", tok.line, tok.column, file);
      }
    } else if (c == '"') {
      advance();
      tok.kind = Token::Kind::string;
      while (true) {
        if (i >= src.size() || src[i] == '\n') {
          throw SyntaxError("unterminated string literal", tok.line, tok.column, file);
        }
        char ch = src[i];
        if (ch == '"') {
          advance();
          break;
        }
        if (ch == '\\') {
          advance();
          if (i >= src.size()) fail("unterminated string literal");
          switch (src[i]) {
            case 'n': tok.text += '\n'; break;
            case 't': tok.text += '\t'; break;
            case '\\': tok.text += '\\'; break;
            case '"': tok.text += '"'; break;
            default: fail(std::string("unknown escape sequence '\\") + src[i] + "'");
          }
          advance();
          continue;
        }
        tok.text += ch;
        advance();
      }
    } else {
      tok.kind = Token::Kind::punct;
      for (auto p : kTwoCharPuncts) {
        if (src.substr(i, 2) == p) {
          tok.text = std::string(p);
          break;
        }
      }
      if (tok.text.empty()) {
        if (kOneCharPuncts.find(c) == std::string_view::npos) fail(std::string("unexpected character '") + c + "'");
        tok.text = std::string(1, c);
      }
      advance(tok.text.size());
    }
    tokens.push_back(std::move(tok));
  }

  Token end;
  end.kind = Token::Kind::end;
  end.line = line;
  end.column = col;
  tokens.push_back(end);
  return tokens;
}

}  // namespace heterotest::testdsl
