#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qsim/signature.hpp"
#include "qsim/value.hpp"

namespace qsim {

/// One historical query execution. Unknown input fields are preserved in
/// extras, never dropped.
struct QueryLogRecord {
    int64_t time = 0; // epoch seconds
    std::string query_id;
    std::string account_id;
    std::string engine;
    std::string query;
    std::string status;
    std::optional<int64_t> duration_ms;
    std::optional<int64_t> cpu_ms;
    std::optional<int64_t> peak_memory_bytes;
    std::optional<int64_t> rows_read;
    std::optional<int64_t> rows_written;
    std::optional<int64_t> partitions_read;
    std::map<std::string, Value> extras;
};

class Workload {
public:
    void add(QueryLogRecord rec) { records_.push_back(std::move(rec)); }
    void count_skipped() { ++skipped_; }

    const std::vector<QueryLogRecord>& records() const { return records_; }
    size_t size() const { return records_.size(); }
    size_t skipped_lines() const { return skipped_; }
    bool empty() const { return records_.empty(); }

private:
    std::vector<QueryLogRecord> records_;
    size_t skipped_ = 0;
};

/// Tolerant JSON-lines ingest: known fields are coerced to their declared
/// types (schema escalation: a duration arriving as "1234" becomes 1234),
/// unknown fields land in extras, malformed lines are counted and skipped.
Workload ingest(std::istream& source);
Workload ingest_file(const std::filesystem::path& path); // throws IO_ERROR

/// Inclusive time interval in epoch seconds.
struct TimeRange {
    int64_t from = 0;
    int64_t to = 0;
};

inline constexpr int64_t kDefaultHistoryDays = 7;
inline constexpr int64_t kFullCoverageDays = 30;

struct ClusterMember {
    std::string query_id;
    int64_t time = 0;
    std::optional<int64_t> duration_ms;
    std::string query;
};

struct QueryCluster {
    std::string key;       // grouping key (rendered signature, template id, or text hash)
    std::string signature; // rendered signature of the representative shape
    std::vector<ClusterMember> members;
    int64_t first_seen = 0;
    int64_t last_seen = 0;
    int distinct_days = 0; // distinct UTC calendar days

    bool recurrent() const { return distinct_days >= 2; }
};

struct ClusterOptions {
    SignatureOptions signature;
    // Queries carrying extras["template_id"] group by it; signature
    // clustering is the unsupervised fallback for the rest.
    bool use_template_id = true;
};

/// Clusters parsed in-range queries by rendered signature; unparseable SQL
/// goes to reserved UNPARSED clusters keyed by a normalized text hash.
/// Result is sorted by member count descending.
std::vector<QueryCluster> cluster(const Workload& w, const ClusterOptions& opts, TimeRange range);

/// Fraction of queries (not clusters) that belong to recurrent clusters —
/// those spanning at least two distinct UTC days.
double recurrence_ratio(std::span<const QueryCluster> clusters);

enum class Selection { Latest, Longest };

struct DurationStats {
    std::optional<double> median_ms;
    std::optional<double> mad_ms;
    uint64_t sample_count = 0;
};

struct BenchmarkEntry {
    std::string signature;
    std::string query;
    std::string query_id;
    uint64_t member_count = 0;
    DurationStats baseline;
};

struct Benchmark {
    std::string id;
    std::vector<BenchmarkEntry> entries;
    TimeRange built_from;
    SignatureOptions options;
};

/// One representative per cluster: the latest member by default, or the
/// longest-running one.
Benchmark build_benchmark(std::span<const QueryCluster> clusters, Selection selection,
                          TimeRange built_from = {}, SignatureOptions options = {});

void save_benchmark(const Benchmark& bench, const std::filesystem::path& path);
Benchmark load_benchmark(const std::filesystem::path& path);

std::string benchmark_to_json(const Benchmark& bench);
Benchmark benchmark_from_json(const std::string& text);

} // namespace qsim
