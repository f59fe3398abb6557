#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsim/value.hpp"

namespace qsim::sql {

enum class TokenKind {
    Keyword,
    Identifier,       // unquoted
    QuotedIdentifier, // "..."
    IntegerLiteral,
    FloatLiteral,
    StringLiteral,    // '...'
    Operator,         // symbols: + - * / % = != <> < <= > >= ( ) , .
    End,
};

struct Token {
    TokenKind kind;
    std::string text;  // keywords upper-cased; identifiers as written
    int line = 1;
    int column = 1;
    int64_t int_value = 0;
    double float_value = 0;
};

/// Tokenize one statement. Keywords are case-insensitive; -- and /* */
/// comments are skipped. Throws ParseError on bad input.
std::vector<Token> tokenize(const std::string& sql);

bool is_keyword(const std::string& upper);

} // namespace qsim::sql
