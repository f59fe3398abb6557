#include "qsim/engine/engine.hpp"

#include <cctype>
#include <cmath>
#include <mutex>

#include "executor.hpp"
#include "qsim/error.hpp"
#include "qsim/rewrite.hpp"
#include "qsim/signature.hpp"
#include "qsim/sql/lower.hpp"
#include "qsim/sql/parser.hpp"

namespace qsim::engine {

namespace {

std::string fold_name(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

bool is_dml(const sql::Statement& stmt) { return stmt.kind != sql::StatementKind::Select; }

// The signature body the customer would see: digest wrapping is peeled off,
// and write redirection leaves the body untouched anyway.
std::string customer_visible_body(const sql::Statement& stmt, const sql::PlanPtr& plan) {
    if (stmt.kind == sql::StatementKind::Select && stmt.query->branches.size() == 1) {
        const sql::SelectCore& core = stmt.query->branches[0];
        if (!core.star && core.items.size() == 1 &&
            core.items[0].expr->kind == sql::ExprKind::FunctionCall &&
            core.items[0].expr->func_name == kDigestFunction && core.from &&
            core.from->first.is_subquery() && core.from->joins.empty()) {
            sql::Statement inner;
            inner.kind = sql::StatementKind::Select;
            inner.query = core.from->first.subquery;
            return signature_of(sql::lower(inner)).body;
        }
    }
    return signature_of(plan).body;
}

} // namespace

void ReferenceEngine::load_table(const std::string& name, std::vector<ColumnDef> columns,
                                 std::vector<Row> rows, size_t partition_size) {
    for (const auto& row : rows) {
        if (row.size() != columns.size()) {
            throw Error(ErrorCode::ArityMismatch,
                        "table " + name + ": row arity " + std::to_string(row.size()) +
                            " differs from column count " + std::to_string(columns.size()));
        }
    }
    auto table = std::make_shared<TableData>();
    table->name = name;
    table->columns = std::move(columns);
    table->rows = std::move(rows);
    table->partition_size = partition_size == 0 ? kDefaultPartitionSize : partition_size;
    put_table(std::move(table));
}

void ReferenceEngine::put_table(TablePtr table) {
    std::unique_lock lock(mutex_);
    catalog_[fold_name(table->name)] = std::move(table);
}

std::map<std::string, TablePtr> ReferenceEngine::snapshot_catalog() const {
    std::shared_lock lock(mutex_);
    return catalog_;
}

ExecutionResult ReferenceEngine::execute(const sql::PlanPtr& plan, const FaultConfig* faults) {
    detail::ExecInput input{*this, snapshot_catalog(), faults, options_.digest};
    return detail::run_plan(std::move(input), plan);
}

ExecutionResult ReferenceEngine::execute_sql_with_faults(const std::string& sql,
                                                         const FaultConfig* faults) {
    sql::Statement stmt = sql::parse(sql);
    sql::PlanPtr plan = sql::lower(stmt);

    ExecutionResult result;
    if (is_dml(stmt)) {
        // Loads and DML are serialized: the catalog has one writer at a time.
        std::scoped_lock dml_lock(dml_mutex_);
        result = execute(plan, faults);
    } else {
        result = execute(plan, faults);
    }

    if (faults && !(faults->latency_multiplier.empty() && faults->scan_amplify.empty())) {
        std::string body = customer_visible_body(stmt, plan);
        auto lit = faults->latency_multiplier.find(body);
        if (lit != faults->latency_multiplier.end()) {
            result.metrics.wall_ms *= lit->second;
        }
        auto sit = faults->scan_amplify.find(body);
        if (sit != faults->scan_amplify.end()) {
            result.metrics.partitions_scanned = static_cast<uint64_t>(std::ceil(
                static_cast<double>(result.metrics.partitions_scanned) * sit->second));
        }
    }
    return result;
}

ExecutionResult ReferenceEngine::execute_sql(const std::string& sql, std::string_view session) {
    (void)session; // reserved for adapters that hold per-session state
    return execute_sql_with_faults(sql, nullptr);
}

ExecutionResult FaultyEngine::execute_sql(const std::string& sql, std::string_view session) {
    (void)session;
    return inner_->execute_sql_with_faults(sql, &config_);
}

std::shared_ptr<FaultyEngine> with_faults(std::shared_ptr<ReferenceEngine> engine,
                                          FaultConfig config) {
    return std::make_shared<FaultyEngine>(std::move(engine), std::move(config));
}

} // namespace qsim::engine
