#pragma once

#include <string>

#include "qsim/sql/ast.hpp"

namespace qsim::sql {

/// Parse a single statement in the supported subset (see docs/grammar.md).
/// Throws ParseError (SYNTAX_ERROR) with line/column and an expected-token
/// hint, or UNSUPPORTED_FEATURE for recognized-but-unimplemented SQL.
Statement parse(const std::string& sql);

} // namespace qsim::sql
