#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsim/simulator/simulator.hpp"

namespace qsim::sim {

enum class DigestMatch { Match, Mismatch, SkippedNondet, Error };

const char* digest_match_name(DigestMatch m);

struct Thresholds {
    double perf_ratio = 1.5;   // slower requires ratio strictly above this
    double min_delta_ms = 100; // and at least this absolute slowdown
    int64_t scan_diff = 1;     // scan regression requires diff strictly above
};

struct QueryComparison {
    std::string query_id;
    std::string signature;
    std::vector<NondetLabel> labels;
    SideResult control;
    SideResult test;
    DigestMatch digest_match = DigestMatch::Error;
    double perf_ratio = 0;
    bool slower = false;
    int64_t scan_diff = 0;
    bool scan_regressed = false;
    std::string sql; // included in rendered output only on request
};

struct Summary {
    uint64_t total = 0;
    uint64_t matched = 0;
    uint64_t mismatched = 0;
    uint64_t skipped_nondet = 0;
    uint64_t errored = 0;
    uint64_t slower = 0;
    uint64_t scan_regressed = 0;
};

struct SimulationReport {
    int version = 1;
    std::string generated_at; // the one nondeterministic field
    std::string benchmark_id;
    std::string control;
    std::string test;
    std::string session;
    TimeRange time_range;
    Thresholds thresholds;
    Summary summary;
    std::vector<QueryComparison> comparisons; // sorted by query_id
    std::vector<std::string> slower_ids;      // perf_ratio descending

    /// True when any mismatch, slowdown, scan regression, or one-sided
    /// error was observed (drives the CLI exit code).
    bool has_regressions() const;
};

/// Classifies raw results. A digest mismatch on a labeled query is demoted
/// to SKIPPED_NONDET rather than counted as a failure.
SimulationReport compare(const RawResults& raw, Thresholds thresholds = {});

std::string render_report_json(const SimulationReport& report, bool show_sql = false);
SimulationReport report_from_json(const std::string& text);
std::string render_report_markdown(const SimulationReport& report, bool show_sql = false);

bool report_equal(const SimulationReport& a, const SimulationReport& b,
                  bool ignore_generated_at = true);

} // namespace qsim::sim
