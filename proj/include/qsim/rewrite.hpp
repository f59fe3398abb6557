#pragma once

#include <string>
#include <vector>

#include "qsim/sql/ast.hpp"

namespace qsim {

enum class RewriteKind { ReadChecksum, WriteRedirected };

enum class NondetCategory { Time, Random, OrderDependent, Approximate, FloatSensitive };

const char* nondet_category_name(NondetCategory c);

struct NondetLabel {
    NondetCategory category;
    std::string construct; // function/operator name
    std::string location;  // expression path, e.g. "select[0]" or "where"
    // FLOAT_SENSITIVE needs schema knowledge; without it the label is
    // emitted conservatively and marked speculative.
    bool speculative = false;
};

/// The aggregate the checksum rewrite injects; the reference engine computes
/// it as ARRAY[xor_hash, row_count, column_count] over its whole input.
inline constexpr const char* kDigestFunction = "result_digest";
inline constexpr const char* kDigestSubqueryAlias = "sim_digest_src";
inline constexpr const char* kTempPrefix = "sim_tmp_";

struct RewriteOutcome {
    sql::Statement rewritten;
    // Setup statements, executed before `rewritten` (e.g. the preparatory
    // CTAS that materializes an INSERT target's schema under the temp name).
    std::vector<sql::Statement> companions;
    RewriteKind kind = RewriteKind::ReadChecksum;
    std::vector<std::string> temp_objects;
    std::vector<NondetLabel> labels;
};

/// Rewrites a SELECT-form query so it produces only the digest of its
/// result set. Throws NOT_A_READ for DML, ALREADY_REWRITTEN when the input
/// is already a digest query.
RewriteOutcome wrap_checksum(const sql::Statement& stmt);

/// Redirects the write target of INSERT/CTAS/DELETE into the
/// "sim_tmp_<session>_" namespace; reads stay untouched. Throws NOT_A_WRITE
/// for pure reads, ALREADY_REWRITTEN when the target already carries the
/// temp prefix.
RewriteOutcome redirect_writes(const sql::Statement& stmt, const std::string& session);

std::vector<NondetLabel> label_nondeterminism(const sql::Statement& stmt);

std::string temp_table_name(const std::string& session, const std::string& original_folded);

/// Write targets of a statement (used to verify namespace containment).
std::vector<std::string> write_targets(const sql::Statement& stmt);

} // namespace qsim
