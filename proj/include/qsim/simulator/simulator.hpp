#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsim/engine/adapter.hpp"
#include "qsim/rewrite.hpp"
#include "qsim/value.hpp"
#include "qsim/workload.hpp"

namespace qsim::sim {

/// One adapter's outcome for one benchmark entry.
struct SideResult {
    bool ok = false;
    std::optional<ResultDigest> digest;
    std::string error; // error code + message when !ok
    double wall_ms = 0;
    uint64_t partitions_scanned = 0;
    uint64_t rows_scanned = 0;

    bool operator==(const SideResult&) const = default;
};

struct RawQueryResult {
    std::string query_id;
    std::string signature;
    std::string sql; // original query text
    std::vector<NondetLabel> labels;
    SideResult control;
    SideResult test;
    // every statement sent to the adapters, in execution order (the privacy
    // containment check re-extracts write targets from these)
    std::vector<std::string> executed_sql;
};

struct RawResults {
    std::string benchmark_id;
    std::string control_name;
    std::string test_name;
    TimeRange time_range;
    std::string session;
    std::vector<RawQueryResult> queries; // sorted by query_id
};

/// Replays a benchmark against both adapters: label, rewrite (checksum wrap
/// for reads, write redirection + digest-after-write for DML), execute with
/// at most `parallelism` in-flight queries per adapter. Per-query failures
/// are recorded, never fatal; a missing adapter aborts.
RawResults run_simulation(const Benchmark& bench, engine::EngineAdapter* control,
                          engine::EngineAdapter* test, int parallelism,
                          const std::string& session, int repeat = 1);

} // namespace qsim::sim
