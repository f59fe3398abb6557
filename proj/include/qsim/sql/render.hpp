#pragma once

#include <string>

#include "qsim/sql/ast.hpp"

namespace qsim::sql {

/// Stable single-line rendering; render(parse(sql)) reparses to a
/// structurally identical AST.
std::string render(const Statement& stmt);
std::string render(const Query& q);
std::string render(const Expr& e);

std::string render_identifier(const Identifier& id);

} // namespace qsim::sql
