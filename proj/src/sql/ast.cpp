#include "qsim/sql/ast.hpp"

#include <cctype>

namespace qsim::sql {

std::string Identifier::folded() const {
    if (quoted) return text;
    std::string out;
    out.reserve(text.size());
    for (char c : text) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

const char* join_kind_name(JoinKind k) {
    switch (k) {
        case JoinKind::Inner: return "JOIN";
        case JoinKind::Left: return "LEFT JOIN";
        case JoinKind::Right: return "RIGHT JOIN";
        case JoinKind::Full: return "FULL JOIN";
        case JoinKind::Cross: return "CROSS JOIN";
    }
    return "JOIN";
}

ExprPtr make_literal(Value v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Literal;
    e->literal = std::move(v);
    return e;
}

ExprPtr make_column(std::optional<Identifier> qualifier, Identifier column) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::ColumnRef;
    e->qualifier = std::move(qualifier);
    e->column = std::move(column);
    return e;
}

ExprPtr make_star() {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Star;
    return e;
}

ExprPtr make_call(std::string name, std::vector<ExprPtr> args) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::FunctionCall;
    e->func_name = std::move(name);
    e->args = std::move(args);
    return e;
}

ExprPtr make_unary(std::string op, ExprPtr operand) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Unary;
    e->op = std::move(op);
    e->right = std::move(operand);
    return e;
}

ExprPtr make_binary(std::string op, ExprPtr left, ExprPtr right) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Binary;
    e->op = std::move(op);
    e->left = std::move(left);
    e->right = std::move(right);
    return e;
}

ExprPtr make_is_null(ExprPtr operand, bool negated) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::IsNull;
    e->left = std::move(operand);
    e->negated = negated;
    return e;
}

ExprPtr make_cast(ExprPtr operand, LogicalType type) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Cast;
    e->left = std::move(operand);
    e->cast_type = type;
    return e;
}

ExprPtr make_scalar_subquery(QueryPtr q) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::ScalarSubquery;
    e->subquery = std::move(q);
    return e;
}

ExprPtr make_in_subquery(ExprPtr probe, QueryPtr q, bool negated) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::InSubquery;
    e->left = std::move(probe);
    e->subquery = std::move(q);
    e->negated = negated;
    return e;
}

ExprPtr make_in_list(ExprPtr probe, std::vector<ExprPtr> elems, bool negated) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::InList;
    e->left = std::move(probe);
    e->in_list = std::move(elems);
    e->negated = negated;
    return e;
}

namespace {

bool equal_ptr(const ExprPtr& a, const ExprPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}

bool equal_query_ptr(const QueryPtr& a, const QueryPtr& b) {
    if (!a || !b) return !a && !b;
    return equal(*a, *b);
}

bool equal_order(const std::vector<OrderItem>& a, const std::vector<OrderItem>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].ascending != b[i].ascending || !equal_ptr(a[i].expr, b[i].expr)) return false;
    }
    return true;
}

bool equal_exprs(const std::vector<ExprPtr>& a, const std::vector<ExprPtr>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (!equal_ptr(a[i], b[i])) return false;
    }
    return true;
}

bool equal_table_ref(const TableRef& a, const TableRef& b) {
    if (a.is_subquery() != b.is_subquery()) return false;
    if (a.alias != b.alias) return false;
    if (a.is_subquery()) return equal_query_ptr(a.subquery, b.subquery);
    return a.name == b.name;
}

bool equal_core(const SelectCore& a, const SelectCore& b) {
    if (a.distinct != b.distinct || a.star != b.star) return false;
    if (a.items.size() != b.items.size()) return false;
    for (size_t i = 0; i < a.items.size(); ++i) {
        if (a.items[i].alias != b.items[i].alias) return false;
        if (!equal_ptr(a.items[i].expr, b.items[i].expr)) return false;
    }
    if (a.from.has_value() != b.from.has_value()) return false;
    if (a.from) {
        if (!equal_table_ref(a.from->first, b.from->first)) return false;
        if (a.from->joins.size() != b.from->joins.size()) return false;
        for (size_t i = 0; i < a.from->joins.size(); ++i) {
            const auto& ja = a.from->joins[i];
            const auto& jb = b.from->joins[i];
            if (ja.kind != jb.kind || !equal_table_ref(ja.right, jb.right) ||
                !equal_ptr(ja.condition, jb.condition)) {
                return false;
            }
        }
    }
    return equal_ptr(a.where, b.where) && equal_exprs(a.group_by, b.group_by) &&
           equal_ptr(a.having, b.having);
}

} // namespace

bool equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case ExprKind::Literal: return a.literal == b.literal;
        case ExprKind::ColumnRef: return a.qualifier == b.qualifier && a.column == b.column;
        case ExprKind::Star: return true;
        case ExprKind::FunctionCall: {
            if (a.func_name != b.func_name || a.distinct_arg != b.distinct_arg) return false;
            if (!equal_exprs(a.args, b.args)) return false;
            if (!equal_order(a.agg_order_by, b.agg_order_by)) return false;
            if (a.window.has_value() != b.window.has_value()) return false;
            if (a.window) {
                if (!equal_exprs(a.window->partition_by, b.window->partition_by)) return false;
                if (!equal_order(a.window->order_by, b.window->order_by)) return false;
            }
            return true;
        }
        case ExprKind::Unary: return a.op == b.op && equal_ptr(a.right, b.right);
        case ExprKind::Binary:
            return a.op == b.op && equal_ptr(a.left, b.left) && equal_ptr(a.right, b.right);
        case ExprKind::IsNull: return a.negated == b.negated && equal_ptr(a.left, b.left);
        case ExprKind::Cast: return a.cast_type == b.cast_type && equal_ptr(a.left, b.left);
        case ExprKind::ScalarSubquery: return equal_query_ptr(a.subquery, b.subquery);
        case ExprKind::InSubquery:
            return a.negated == b.negated && equal_ptr(a.left, b.left) &&
                   equal_query_ptr(a.subquery, b.subquery);
        case ExprKind::InList:
            return a.negated == b.negated && equal_ptr(a.left, b.left) &&
                   equal_exprs(a.in_list, b.in_list);
    }
    return false;
}

bool equal(const Query& a, const Query& b) {
    if (a.with.size() != b.with.size()) return false;
    for (size_t i = 0; i < a.with.size(); ++i) {
        if (a.with[i].alias != b.with[i].alias) return false;
        if (!equal_query_ptr(a.with[i].query, b.with[i].query)) return false;
    }
    if (a.branches.size() != b.branches.size()) return false;
    for (size_t i = 0; i < a.branches.size(); ++i) {
        if (!equal_core(a.branches[i], b.branches[i])) return false;
    }
    return equal_order(a.order_by, b.order_by) && a.limit == b.limit;
}

bool equal(const Statement& a, const Statement& b) {
    if (a.kind != b.kind || a.target != b.target) return false;
    if (!equal_query_ptr(a.query, b.query)) return false;
    if (!a.delete_where != !b.delete_where) return false;
    if (a.delete_where && !equal(*a.delete_where, *b.delete_where)) return false;
    return true;
}

} // namespace qsim::sql
