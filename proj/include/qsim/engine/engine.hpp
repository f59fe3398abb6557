#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "qsim/engine/adapter.hpp"
#include "qsim/engine/faults.hpp"
#include "qsim/engine/table.hpp"
#include "qsim/sql/plan.hpp"
#include "qsim/value.hpp"

namespace qsim::engine {

struct EngineOptions {
    DigestOptions digest; // applied by the result_digest aggregate
};

/// Reference in-process executor for the supported SQL subset with
/// schema-on-read coercion. Reported wall_ms comes from a deterministic
/// cost model so repeated runs and different worker counts produce
/// identical reports.
///
/// Concurrency: the catalog maps names to immutable table snapshots; each
/// execution captures a consistent snapshot, reads run concurrently, and
/// loads/DML swap snapshots under an exclusive lock.
class ReferenceEngine : public EngineAdapter {
public:
    explicit ReferenceEngine(EngineOptions options = {}) : options_(options) {}

    std::string name() const override { return "ref"; }

    ExecutionResult execute_sql(const std::string& sql, std::string_view session) override;

    /// Registers a table; re-loading a name replaces it. Throws
    /// ARITY_MISMATCH when a row's width differs from the column list.
    void load_table(const std::string& name, std::vector<ColumnDef> columns,
                    std::vector<Row> rows, size_t partition_size = kDefaultPartitionSize);

    ExecutionResult execute(const sql::PlanPtr& plan, const FaultConfig* faults = nullptr);
    ExecutionResult execute_sql_with_faults(const std::string& sql, const FaultConfig* faults);

    const EngineOptions& options() const { return options_; }

    // catalog mutation (internal use by the executor)
    void put_table(TablePtr table);

private:
    std::map<std::string, TablePtr> snapshot_catalog() const;

    EngineOptions options_;
    mutable std::shared_mutex mutex_;
    mutable std::mutex dml_mutex_; // loads and DML are single-writer
    std::map<std::string, TablePtr> catalog_; // keyed by folded (lowercased) name
};

/// The reference engine plus configured deviations: the stand-in for a
/// candidate "test cluster" version.
class FaultyEngine : public EngineAdapter {
public:
    FaultyEngine(std::shared_ptr<ReferenceEngine> inner, FaultConfig config)
        : inner_(std::move(inner)), config_(std::move(config)) {}

    std::string name() const override { return "ref+faults"; }

    ExecutionResult execute_sql(const std::string& sql, std::string_view session) override;

    ReferenceEngine& inner() { return *inner_; }
    const FaultConfig& config() const { return config_; }

private:
    std::shared_ptr<ReferenceEngine> inner_;
    FaultConfig config_;
};

/// Adapter with configured fault deviations over this engine's catalog.
std::shared_ptr<FaultyEngine> with_faults(std::shared_ptr<ReferenceEngine> engine,
                                          FaultConfig config);

} // namespace qsim::engine
