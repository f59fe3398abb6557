#pragma once

#include "qsim/sql/ast.hpp"
#include "qsim/sql/plan.hpp"

namespace qsim::sql {

/// Deterministic lowering of a parsed statement into a logical plan tree.
/// Joins nest left in syntactic order; GROUP BY/aggregates and HAVING fold
/// into one Aggregate node sitting above the Project of the select list.
/// Throws SEMANTIC_ERROR for duplicate WITH aliases.
PlanPtr lower(const Statement& stmt);
PlanPtr lower(const Query& q);

/// True when the expression contains an aggregate function call outside of
/// any nested subquery.
bool contains_aggregate(const Expr& e);
bool is_aggregate_function(const std::string& folded_name);

} // namespace qsim::sql
