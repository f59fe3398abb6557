#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qsim/value.hpp"

namespace qsim::sql {

/// Identifier as written in the source. Unquoted identifiers compare and
/// resolve case-insensitively; quoted ones are exact. Display text keeps
/// the original spelling in both cases.
struct Identifier {
    std::string text;
    bool quoted = false;

    std::string folded() const;
    bool operator==(const Identifier&) const = default;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

enum class ExprKind {
    Literal,
    ColumnRef,
    Star,        // lone '*' as a function argument, e.g. count(*)
    FunctionCall,
    Unary,       // - + NOT
    Binary,      // arithmetic, comparison, AND/OR
    IsNull,      // IS [NOT] NULL
    Cast,
    ScalarSubquery,
    InSubquery,
    InList,
};

struct OrderItem {
    ExprPtr expr;
    bool ascending = true;
};

struct WindowSpec {
    std::vector<ExprPtr> partition_by;
    std::vector<OrderItem> order_by;
};

struct Expr {
    ExprKind kind;

    // Literal
    Value literal;

    // ColumnRef
    std::optional<Identifier> qualifier;
    Identifier column;

    // FunctionCall: name stored case-folded, arity implied by args.
    std::string func_name;
    bool distinct_arg = false;
    std::vector<ExprPtr> args;
    std::vector<OrderItem> agg_order_by; // e.g. array_agg(x ORDER BY y)
    std::optional<WindowSpec> window;

    // Unary/Binary
    std::string op;
    ExprPtr left;
    ExprPtr right;

    // IsNull / InSubquery / InList
    bool negated = false;

    // Cast
    LogicalType cast_type = LogicalType::Varchar;

    // ScalarSubquery / InSubquery
    QueryPtr subquery;

    // InList
    std::vector<ExprPtr> in_list;
};

ExprPtr make_literal(Value v);
ExprPtr make_column(std::optional<Identifier> qualifier, Identifier column);
ExprPtr make_star();
ExprPtr make_call(std::string name, std::vector<ExprPtr> args);
ExprPtr make_unary(std::string op, ExprPtr operand);
ExprPtr make_binary(std::string op, ExprPtr left, ExprPtr right);
ExprPtr make_is_null(ExprPtr operand, bool negated);
ExprPtr make_cast(ExprPtr operand, LogicalType type);
ExprPtr make_scalar_subquery(QueryPtr q);
ExprPtr make_in_subquery(ExprPtr probe, QueryPtr q, bool negated);
ExprPtr make_in_list(ExprPtr probe, std::vector<ExprPtr> elems, bool negated);

enum class JoinKind { Inner, Left, Right, Full, Cross };

const char* join_kind_name(JoinKind k);

struct TableRef {
    // Either a named table or a parenthesized subquery with alias.
    Identifier name;
    QueryPtr subquery;
    std::optional<Identifier> alias;

    bool is_subquery() const { return subquery != nullptr; }
};

struct JoinStep {
    JoinKind kind = JoinKind::Inner;
    TableRef right;
    ExprPtr condition; // absent for CROSS
};

struct FromClause {
    TableRef first;
    std::vector<JoinStep> joins;
};

struct SelectItem {
    ExprPtr expr;
    std::optional<Identifier> alias;
};

struct SelectCore {
    bool distinct = false;
    bool star = false; // select list is exactly '*'
    std::vector<SelectItem> items;
    std::optional<FromClause> from;
    ExprPtr where;
    std::vector<ExprPtr> group_by;
    ExprPtr having;
};

struct WithItem {
    Identifier alias;
    QueryPtr query;
};

/// A full query: WITH list, one or more UNION ALL branches, then the
/// ordering clauses that apply to the whole chain.
struct Query {
    std::vector<WithItem> with;
    std::vector<SelectCore> branches;
    std::vector<OrderItem> order_by;
    std::optional<int64_t> limit;
};

enum class StatementKind { Select, InsertInto, CreateTableAs, Delete };

struct Statement {
    StatementKind kind = StatementKind::Select;
    QueryPtr query;       // Select / InsertInto / CreateTableAs
    Identifier target;    // InsertInto / CreateTableAs / Delete
    ExprPtr delete_where; // Delete
};

// Structural equality, used by the round-trip tests and the rewriter.
bool equal(const Expr& a, const Expr& b);
bool equal(const Query& a, const Query& b);
bool equal(const Statement& a, const Statement& b);

} // namespace qsim::sql
