#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace heterotest::testdsl {

struct Token {
  enum class Kind { identifier, integer, floating, string, punct, end };

  Kind kind = Kind::end;
  std::string text;  // identifier/punct spelling, decoded string contents
  std::int64_t int_value = 0;
  double float_value = 0.0;
  int line = 0;
  int column = 0;
};

/// Throws SyntaxError on malformed input.
std::vector<Token> lex(std::string_view source, const std::string& file);

}  // namespace heterotest::testdsl
