#include "qsim/sql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "qsim/error.hpp"
#include "qsim/sql/lexer.hpp"

namespace qsim::sql {

namespace {

std::string fold(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

// Constructs that the grammar recognizes but the toolkit does not model.
const std::unordered_set<std::string>& unsupported_keywords() {
    static const std::unordered_set<std::string> kw = {
        "BETWEEN", "LIKE", "EXISTS", "CASE", "WHEN", "THEN", "ELSE", "END",
        "LATERAL", "NATURAL", "USING", "UPDATE", "SET", "DROP", "VALUES",
    };
    return kw;
}

class Parser {
public:
    explicit Parser(const std::string& sql) : tokens_(tokenize(sql)) {}

    Statement parse_statement() {
        Statement stmt;
        const Token& t = peek();
        if (is_kw("SELECT") || is_kw("WITH")) {
            stmt.kind = StatementKind::Select;
            stmt.query = parse_query();
        } else if (is_kw("INSERT")) {
            next();
            expect_kw("INTO");
            stmt.kind = StatementKind::InsertInto;
            stmt.target = expect_identifier("target table");
            stmt.query = parse_query();
        } else if (is_kw("CREATE")) {
            next();
            expect_kw("TABLE");
            stmt.kind = StatementKind::CreateTableAs;
            stmt.target = expect_identifier("target table");
            expect_kw("AS");
            stmt.query = parse_query();
        } else if (is_kw("DELETE")) {
            next();
            expect_kw("FROM");
            stmt.kind = StatementKind::Delete;
            stmt.target = expect_identifier("target table");
            if (accept_kw("WHERE")) stmt.delete_where = parse_expr();
        } else if (t.kind == TokenKind::Keyword && unsupported_keywords().count(t.text)) {
            throw Error(ErrorCode::UnsupportedFeature,
                        t.text + " statements are not supported");
        } else {
            throw err("expected SELECT, WITH, INSERT, CREATE TABLE AS or DELETE");
        }
        accept_op(";");
        if (peek().kind != TokenKind::End) throw err("expected end of statement");
        return stmt;
    }

private:
    // ---- token plumbing -------------------------------------------------

    const Token& peek(size_t ahead = 0) const {
        size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[idx];
    }

    const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

    bool is_kw(const char* kw, size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Keyword && t.text == kw;
    }

    bool is_op(const char* op, size_t ahead = 0) const {
        const Token& t = peek(ahead);
        return t.kind == TokenKind::Operator && t.text == op;
    }

    bool accept_kw(const char* kw) {
        if (is_kw(kw)) {
            next();
            return true;
        }
        return false;
    }

    bool accept_op(const char* op) {
        if (is_op(op)) {
            next();
            return true;
        }
        return false;
    }

    void expect_kw(const char* kw) {
        if (!accept_kw(kw)) throw err(std::string("expected ") + kw);
    }

    void expect_op(const char* op) {
        if (!accept_op(op)) throw err(std::string("expected '") + op + "'");
    }

    ParseError err(const std::string& expected) const {
        const Token& t = peek();
        std::string found;
        switch (t.kind) {
            case TokenKind::End: found = "end of input"; break;
            case TokenKind::StringLiteral: found = "string literal"; break;
            default: found = "'" + t.text + "'"; break;
        }
        return ParseError(t.line, t.column, expected + ", found " + found);
    }

    [[noreturn]] void unsupported(const std::string& what) const {
        throw Error(ErrorCode::UnsupportedFeature, what);
    }

    Identifier expect_identifier(const char* what) {
        const Token& t = peek();
        if (t.kind == TokenKind::Identifier) {
            next();
            return Identifier{t.text, false};
        }
        if (t.kind == TokenKind::QuotedIdentifier) {
            next();
            return Identifier{t.text, true};
        }
        throw err(std::string("expected ") + what);
    }

    // ---- query structure ------------------------------------------------

    QueryPtr parse_query() {
        auto q = std::make_shared<Query>();
        if (accept_kw("WITH")) {
            while (true) {
                WithItem item;
                item.alias = expect_identifier("WITH alias");
                expect_kw("AS");
                expect_op("(");
                item.query = parse_query();
                expect_op(")");
                q->with.push_back(std::move(item));
                if (!accept_op(",")) break;
            }
        }
        q->branches.push_back(parse_select_core());
        while (is_kw("UNION")) {
            next();
            if (!accept_kw("ALL")) unsupported("UNION DISTINCT (only UNION ALL is supported)");
            q->branches.push_back(parse_select_core());
        }
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            q->order_by = parse_order_items();
        }
        if (accept_kw("LIMIT")) {
            const Token& t = peek();
            if (t.kind != TokenKind::IntegerLiteral) throw err("expected integer after LIMIT");
            next();
            q->limit = t.int_value;
        }
        return q;
    }

    SelectCore parse_select_core() {
        expect_kw("SELECT");
        SelectCore core;
        core.distinct = accept_kw("DISTINCT");
        if (is_op("*")) {
            next();
            core.star = true;
        } else {
            while (true) {
                SelectItem item;
                item.expr = parse_expr();
                if (accept_kw("AS")) {
                    item.alias = expect_identifier("alias");
                } else if (peek().kind == TokenKind::Identifier ||
                           peek().kind == TokenKind::QuotedIdentifier) {
                    item.alias = expect_identifier("alias");
                }
                core.items.push_back(std::move(item));
                if (!accept_op(",")) break;
            }
        }
        if (accept_kw("FROM")) core.from = parse_from();
        if (accept_kw("WHERE")) core.where = parse_expr();
        if (accept_kw("GROUP")) {
            expect_kw("BY");
            while (true) {
                core.group_by.push_back(parse_expr());
                if (!accept_op(",")) break;
            }
        }
        if (accept_kw("HAVING")) core.having = parse_expr();
        return core;
    }

    FromClause parse_from() {
        FromClause from;
        from.first = parse_table_ref();
        while (true) {
            JoinStep step;
            if (is_kw("NATURAL")) unsupported("NATURAL JOIN");
            if (is_kw("JOIN") || is_kw("INNER")) {
                accept_kw("INNER");
                expect_kw("JOIN");
                step.kind = JoinKind::Inner;
            } else if (is_kw("LEFT")) {
                next();
                accept_kw("OUTER");
                expect_kw("JOIN");
                step.kind = JoinKind::Left;
            } else if (is_kw("RIGHT")) {
                next();
                accept_kw("OUTER");
                expect_kw("JOIN");
                step.kind = JoinKind::Right;
            } else if (is_kw("FULL")) {
                next();
                accept_kw("OUTER");
                expect_kw("JOIN");
                step.kind = JoinKind::Full;
            } else if (is_kw("CROSS")) {
                next();
                expect_kw("JOIN");
                step.kind = JoinKind::Cross;
            } else {
                break;
            }
            step.right = parse_table_ref();
            if (step.kind != JoinKind::Cross) {
                if (is_kw("USING")) unsupported("JOIN ... USING");
                expect_kw("ON");
                step.condition = parse_expr();
            }
            from.joins.push_back(std::move(step));
        }
        return from;
    }

    TableRef parse_table_ref() {
        TableRef ref;
        if (accept_op("(")) {
            ref.subquery = parse_query();
            expect_op(")");
            accept_kw("AS");
            ref.alias = expect_identifier("subquery alias");
            return ref;
        }
        ref.name = expect_identifier("table name");
        if (accept_kw("AS")) {
            ref.alias = expect_identifier("alias");
        } else if (peek().kind == TokenKind::Identifier ||
                   peek().kind == TokenKind::QuotedIdentifier) {
            ref.alias = expect_identifier("alias");
        }
        return ref;
    }

    std::vector<OrderItem> parse_order_items() {
        std::vector<OrderItem> items;
        while (true) {
            OrderItem item;
            item.expr = parse_expr();
            if (accept_kw("ASC")) {
                item.ascending = true;
            } else if (accept_kw("DESC")) {
                item.ascending = false;
            }
            items.push_back(std::move(item));
            if (!accept_op(",")) break;
        }
        return items;
    }

    // ---- expressions ----------------------------------------------------

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr left = parse_and();
        while (is_kw("OR")) {
            next();
            left = make_binary("OR", left, parse_and());
        }
        return left;
    }

    ExprPtr parse_and() {
        ExprPtr left = parse_not();
        while (is_kw("AND")) {
            next();
            left = make_binary("AND", left, parse_not());
        }
        return left;
    }

    ExprPtr parse_not() {
        if (is_kw("NOT")) {
            next();
            return make_unary("NOT", parse_not());
        }
        return parse_comparison();
    }

    ExprPtr parse_comparison() {
        ExprPtr left = parse_additive();
        while (true) {
            if (peek().kind == TokenKind::Operator) {
                const std::string& op = peek().text;
                if (op == "=" || op == "!=" || op == "<>" || op == "<" || op == "<=" ||
                    op == ">" || op == ">=") {
                    next();
                    left = make_binary(op == "<>" ? "!=" : op, left, parse_additive());
                    continue;
                }
            }
            if (is_kw("IS")) {
                next();
                bool negated = accept_kw("NOT");
                expect_kw("NULL");
                left = make_is_null(left, negated);
                continue;
            }
            bool negated = false;
            if (is_kw("NOT") && is_kw("IN", 1)) {
                next();
                negated = true;
            }
            if (is_kw("IN")) {
                next();
                expect_op("(");
                if (is_kw("SELECT") || is_kw("WITH")) {
                    QueryPtr sub = parse_query();
                    expect_op(")");
                    left = make_in_subquery(left, sub, negated);
                } else {
                    std::vector<ExprPtr> elems;
                    while (true) {
                        elems.push_back(parse_expr());
                        if (!accept_op(",")) break;
                    }
                    expect_op(")");
                    left = make_in_list(left, std::move(elems), negated);
                }
                continue;
            }
            if (peek().kind == TokenKind::Keyword && unsupported_keywords().count(peek().text)) {
                unsupported(peek().text + " expressions are not supported");
            }
            break;
        }
        return left;
    }

    ExprPtr parse_additive() {
        ExprPtr left = parse_multiplicative();
        while (is_op("+") || is_op("-") || is_op("||")) {
            std::string op = next().text;
            left = make_binary(op, left, parse_multiplicative());
        }
        return left;
    }

    ExprPtr parse_multiplicative() {
        ExprPtr left = parse_unary();
        while (is_op("*") || is_op("/") || is_op("%")) {
            std::string op = next().text;
            left = make_binary(op, left, parse_unary());
        }
        return left;
    }

    ExprPtr parse_unary() {
        if (is_op("-")) {
            next();
            return make_unary("-", parse_unary());
        }
        if (is_op("+")) {
            next();
            return parse_unary();
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::IntegerLiteral:
                next();
                return make_literal(Value::int64(t.int_value));
            case TokenKind::FloatLiteral:
                next();
                return make_literal(Value::float64(t.float_value));
            case TokenKind::StringLiteral:
                next();
                return make_literal(Value::string(t.text));
            case TokenKind::Keyword: {
                if (t.text == "NULL") {
                    next();
                    return make_literal(Value::null());
                }
                if (t.text == "TRUE") {
                    next();
                    return make_literal(Value::boolean(true));
                }
                if (t.text == "FALSE") {
                    next();
                    return make_literal(Value::boolean(false));
                }
                if (t.text == "CAST") {
                    next();
                    expect_op("(");
                    ExprPtr operand = parse_expr();
                    expect_kw("AS");
                    Identifier type_name = expect_identifier("type name");
                    auto type = logical_type_from_name(type_name.text);
                    if (!type) unsupported("CAST to type " + type_name.text);
                    expect_op(")");
                    return make_cast(operand, *type);
                }
                if (unsupported_keywords().count(t.text)) {
                    unsupported(t.text + " expressions are not supported");
                }
                throw err("expected expression");
            }
            case TokenKind::Identifier:
            case TokenKind::QuotedIdentifier: {
                Identifier first{t.text, t.kind == TokenKind::QuotedIdentifier};
                next();
                if (is_op("(")) return parse_call(first);
                if (accept_op(".")) {
                    Identifier second = expect_identifier("column name");
                    return make_column(first, second);
                }
                return make_column(std::nullopt, first);
            }
            case TokenKind::Operator:
                if (t.text == "(") {
                    next();
                    if (is_kw("SELECT") || is_kw("WITH")) {
                        QueryPtr sub = parse_query();
                        expect_op(")");
                        return make_scalar_subquery(sub);
                    }
                    ExprPtr inner = parse_expr();
                    expect_op(")");
                    return inner;
                }
                throw err("expected expression");
            case TokenKind::End:
                throw err("expected expression");
        }
        throw err("expected expression");
    }

    ExprPtr parse_call(const Identifier& name) {
        expect_op("(");
        auto call = std::make_shared<Expr>();
        call->kind = ExprKind::FunctionCall;
        call->func_name = fold(name.text);
        if (!is_op(")")) {
            call->distinct_arg = accept_kw("DISTINCT");
            if (is_op("*")) {
                next();
                call->args.push_back(make_star());
            } else {
                while (true) {
                    call->args.push_back(parse_expr());
                    if (!accept_op(",")) break;
                }
            }
            if (accept_kw("ORDER")) {
                expect_kw("BY");
                call->agg_order_by = parse_order_items();
            }
        }
        expect_op(")");
        if (accept_kw("OVER")) {
            expect_op("(");
            WindowSpec window;
            if (accept_kw("PARTITION")) {
                expect_kw("BY");
                while (true) {
                    window.partition_by.push_back(parse_expr());
                    if (!accept_op(",")) break;
                }
            }
            if (accept_kw("ORDER")) {
                expect_kw("BY");
                window.order_by = parse_order_items();
            }
            expect_op(")");
            call->window = std::move(window);
        }
        return call;
    }

    std::vector<Token> tokens_;
    size_t pos_ = 0;
};

} // namespace

Statement parse(const std::string& sql) {
    Parser p(sql);
    return p.parse_statement();
}

} // namespace qsim::sql
