#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qsim/value.hpp"

namespace qsim::engine {

struct ColumnDef {
    std::string name;
    LogicalType type = LogicalType::Varchar;
};

inline constexpr size_t kDefaultPartitionSize = 1000;

/// In-memory table. Rows hold physical values that may disagree with the
/// declared column types; coercion happens at scan time (schema-on-read).
struct TableData {
    std::string name; // display name; catalog key is the folded form
    std::vector<ColumnDef> columns;
    std::vector<Row> rows;
    size_t partition_size = kDefaultPartitionSize; // rows per simulated partition
};

using TablePtr = std::shared_ptr<const TableData>;

struct Metrics {
    double wall_ms = 0;
    uint64_t rows_scanned = 0;
    uint64_t partitions_scanned = 0;
    uint64_t rows_output = 0;
    uint64_t peak_rows_in_memory = 0;
};

struct ExecutionResult {
    std::vector<ColumnDef> columns;
    std::vector<Row> rows;
    Metrics metrics;
};

} // namespace qsim::engine
