#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsim/sql/plan.hpp"

namespace qsim {

struct SignatureOptions {
    bool include_tables = false;
    bool mask_dates = false;
    std::string date_placeholder = "X";
};

/// Compact plan fingerprint over the operator alphabet
/// {S, S[*], G, J, LJ, RJ, FJ, CJ, O, E, U, I, CT, D, WS, A, T}.
struct QuerySignature {
    std::string body;
    std::vector<std::string> sources;       // masked, sorted, de-duplicated
    std::optional<std::string> destination; // masked DML target
    bool include_tables = false;

    /// "body" or "body SRC1,SRC2->DST" when table suffixes are requested.
    std::string rendered() const;
};

QuerySignature signature_of(const sql::PlanPtr& plan, const SignatureOptions& opts = {});

/// Replaces each maximal date-like token (YYYY-MM-DD, YYYY_MM_DD, YYYYMMDD,
/// YYYY-MM, YYYYMM, 10/13-digit epoch runs) with the placeholder. Idempotent;
/// non-date digits are untouched.
std::string mask_identifier(const std::string& name, const std::string& placeholder = "X");

struct TableSets {
    std::vector<std::string> sources; // distinct base table names, sorted
    std::optional<std::string> destination;
};

/// Base tables read and written by a plan, excluding WITH aliases.
TableSets tables_of(const sql::PlanPtr& plan);

} // namespace qsim
