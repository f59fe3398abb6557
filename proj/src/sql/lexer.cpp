#include "qsim/sql/lexer.hpp"

#include <cctype>
#include <charconv>
#include <unordered_set>

#include "qsim/error.hpp"

namespace qsim::sql {

namespace {

const std::unordered_set<std::string>& keyword_set() {
    static const std::unordered_set<std::string> kw = {
        "SELECT", "FROM", "WHERE", "GROUP", "BY", "HAVING", "ORDER", "LIMIT",
        "UNION", "ALL", "DISTINCT", "AS", "WITH", "INSERT", "INTO", "CREATE",
        "TABLE", "DELETE", "JOIN", "INNER", "LEFT", "RIGHT", "FULL", "CROSS",
        "OUTER", "ON", "AND", "OR", "NOT", "IS", "NULL", "IN", "CAST", "TRUE",
        "FALSE", "ASC", "DESC", "OVER", "PARTITION",
        // Recognized but unsupported; reserving them turns misuse into a
        // clear error instead of a silent mis-parse.
        "BETWEEN", "LIKE", "EXISTS", "CASE", "WHEN", "THEN", "ELSE", "END",
        "LATERAL", "NATURAL", "USING", "UPDATE", "SET", "DROP", "VALUES",
    };
    return kw;
}

std::string to_upper(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return out;
}

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

} // namespace

bool is_keyword(const std::string& upper) { return keyword_set().count(upper) > 0; }

std::vector<Token> tokenize(const std::string& sql) {
    std::vector<Token> out;
    size_t i = 0;
    int line = 1, col = 1;

    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k) {
            if (sql[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += n;
    };

    while (i < sql.size()) {
        char c = sql[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        // -- line comment
        if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
            while (i < sql.size() && sql[i] != '\n') advance(1);
            continue;
        }
        // /* block comment */
        if (c == '/' && i + 1 < sql.size() && sql[i + 1] == '*') {
            int start_line = line, start_col = col;
            advance(2);
            while (i + 1 < sql.size() && !(sql[i] == '*' && sql[i + 1] == '/')) advance(1);
            if (i + 1 >= sql.size()) {
                throw ParseError(start_line, start_col, "unterminated block comment");
            }
            advance(2);
            continue;
        }

        Token tok;
        tok.line = line;
        tok.column = col;

        if (ident_start(c)) {
            size_t start = i;
            while (i < sql.size() && ident_char(sql[i])) advance(1);
            std::string word = sql.substr(start, i - start);
            std::string upper = to_upper(word);
            if (is_keyword(upper)) {
                tok.kind = TokenKind::Keyword;
                tok.text = upper;
            } else {
                tok.kind = TokenKind::Identifier;
                tok.text = word;
            }
            out.push_back(std::move(tok));
            continue;
        }

        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i + 1])))) {
            size_t start = i;
            bool is_float = false;
            while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) advance(1);
            if (i < sql.size() && sql[i] == '.') {
                is_float = true;
                advance(1);
                while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) advance(1);
            }
            if (i < sql.size() && (sql[i] == 'e' || sql[i] == 'E')) {
                size_t save = i;
                advance(1);
                if (i < sql.size() && (sql[i] == '+' || sql[i] == '-')) advance(1);
                if (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) {
                    is_float = true;
                    while (i < sql.size() && std::isdigit(static_cast<unsigned char>(sql[i]))) advance(1);
                } else {
                    // not an exponent, back off (e.g. "1e" as ident boundary)
                    col -= static_cast<int>(i - save);
                    i = save;
                }
            }
            std::string text = sql.substr(start, i - start);
            if (is_float) {
                tok.kind = TokenKind::FloatLiteral;
                tok.float_value = std::stod(text);
            } else {
                tok.kind = TokenKind::IntegerLiteral;
                auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), tok.int_value);
                if (ec != std::errc()) {
                    tok.kind = TokenKind::FloatLiteral;
                    tok.float_value = std::stod(text);
                }
            }
            tok.text = std::move(text);
            out.push_back(std::move(tok));
            continue;
        }

        if (c == '\'') {
            std::string text;
            advance(1);
            bool closed = false;
            while (i < sql.size()) {
                if (sql[i] == '\'') {
                    if (i + 1 < sql.size() && sql[i + 1] == '\'') { // escaped quote
                        text.push_back('\'');
                        advance(2);
                        continue;
                    }
                    advance(1);
                    closed = true;
                    break;
                }
                text.push_back(sql[i]);
                advance(1);
            }
            if (!closed) throw ParseError(tok.line, tok.column, "unterminated string literal");
            tok.kind = TokenKind::StringLiteral;
            tok.text = std::move(text);
            out.push_back(std::move(tok));
            continue;
        }

        if (c == '"') {
            std::string text;
            advance(1);
            bool closed = false;
            while (i < sql.size()) {
                if (sql[i] == '"') {
                    if (i + 1 < sql.size() && sql[i + 1] == '"') {
                        text.push_back('"');
                        advance(2);
                        continue;
                    }
                    advance(1);
                    closed = true;
                    break;
                }
                text.push_back(sql[i]);
                advance(1);
            }
            if (!closed) throw ParseError(tok.line, tok.column, "unterminated quoted identifier");
            if (text.empty()) throw ParseError(tok.line, tok.column, "empty quoted identifier");
            tok.kind = TokenKind::QuotedIdentifier;
            tok.text = std::move(text);
            out.push_back(std::move(tok));
            continue;
        }

        // multi-char operators first
        auto two = sql.substr(i, 2);
        if (two == "<=" || two == ">=" || two == "!=" || two == "<>" || two == "||") {
            tok.kind = TokenKind::Operator;
            tok.text = two;
            advance(2);
            out.push_back(std::move(tok));
            continue;
        }
        static const std::string singles = "+-*/%=<>(),.;";
        if (singles.find(c) != std::string::npos) {
            tok.kind = TokenKind::Operator;
            tok.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(tok));
            continue;
        }

        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }

    Token end;
    end.kind = TokenKind::End;
    end.line = line;
    end.column = col;
    out.push_back(end);
    return out;
}

} // namespace qsim::sql
