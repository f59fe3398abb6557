#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "qsim/sql/ast.hpp"

namespace qsim::sql {

enum class PlanKind {
    TableScan,
    ValuesRow, // single empty row; the source of a FROM-less SELECT
    Project,
    Filter,
    Aggregate,
    Join,
    Sort,
    Limit,
    Distinct,
    UnionAll,
    WithBinding,
    InsertInto,
    CreateTableAs,
    Delete,
};

struct PlanNode;
using PlanPtr = std::shared_ptr<const PlanNode>;

struct PlanNode {
    PlanKind kind;
    std::vector<PlanPtr> children;

    // TableScan
    Identifier table;
    std::optional<Identifier> alias;
    bool is_with_alias = false; // resolved against the WITH scope at lowering

    // Project
    std::vector<SelectItem> items;
    bool star = false;

    // Filter (and Delete predicate)
    ExprPtr predicate;

    // Aggregate: keys + the aggregate calls collected from the select list
    // and HAVING; the HAVING predicate itself folds in here.
    std::vector<ExprPtr> group_keys;
    std::vector<ExprPtr> aggregates;
    ExprPtr having;

    // Join
    JoinKind join_kind = JoinKind::Inner;
    ExprPtr condition;

    // Sort
    std::vector<OrderItem> sort_keys;

    // Limit
    int64_t limit = 0;

    // WithBinding: bindings in declaration order; body is children[0].
    std::vector<std::pair<Identifier, PlanPtr>> bindings;

    // InsertInto / CreateTableAs / Delete
    Identifier target;

    // Scalar/IN subqueries appearing in this node's expressions, lowered at
    // statement-lowering time (so WITH aliases resolve lexically), in
    // left-to-right traversal order. Keyed by AST node identity.
    std::vector<std::pair<const Expr*, PlanPtr>> subplans;
};

} // namespace qsim::sql
