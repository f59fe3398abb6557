#include "qsim/simulator/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "qsim/error.hpp"

namespace qsim::sim {

using nlohmann::json;

namespace {

std::string iso8601_utc_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

uint64_t parse_hex64(const std::string& s) {
    return std::strtoull(s.c_str(), nullptr, 16);
}

NondetCategory category_from_name(const std::string& name) {
    if (name == "TIME") return NondetCategory::Time;
    if (name == "RANDOM") return NondetCategory::Random;
    if (name == "ORDER_DEPENDENT") return NondetCategory::OrderDependent;
    if (name == "APPROXIMATE") return NondetCategory::Approximate;
    if (name == "FLOAT_SENSITIVE") return NondetCategory::FloatSensitive;
    throw Error(ErrorCode::IoError, "unknown label category: " + name);
}

DigestMatch match_from_name(const std::string& name) {
    if (name == "MATCH") return DigestMatch::Match;
    if (name == "MISMATCH") return DigestMatch::Mismatch;
    if (name == "SKIPPED_NONDET") return DigestMatch::SkippedNondet;
    if (name == "ERROR") return DigestMatch::Error;
    throw Error(ErrorCode::IoError, "unknown digest_match: " + name);
}

json labels_to_json(const std::vector<NondetLabel>& labels) {
    json out = json::array();
    for (const auto& l : labels) {
        out.push_back(json{{"category", nondet_category_name(l.category)},
                           {"construct", l.construct},
                           {"location", l.location},
                           {"speculative", l.speculative}});
    }
    return out;
}

std::vector<NondetLabel> labels_from_json(const json& j) {
    std::vector<NondetLabel> out;
    for (const auto& l : j) {
        out.push_back({category_from_name(l.value("category", "")), l.value("construct", ""),
                       l.value("location", ""), l.value("speculative", false)});
    }
    return out;
}

json side_to_json(const SideResult& side) {
    json out{{"status", side.ok ? "ok" : "error"},
             {"wall_ms", side.wall_ms},
             {"partitions_scanned", side.partitions_scanned},
             {"rows_scanned", side.rows_scanned}};
    if (side.ok && side.digest) {
        out["digest"] = json{{"xor_hash", hex64(side.digest->xor_hash)},
                             {"row_count", side.digest->row_count},
                             {"column_count", side.digest->column_count}};
    } else {
        out["error"] = side.error;
    }
    return out;
}

SideResult side_from_json(const json& j) {
    SideResult side;
    side.ok = j.value("status", "") == "ok";
    side.wall_ms = j.value("wall_ms", 0.0);
    side.partitions_scanned = j.value("partitions_scanned", uint64_t(0));
    side.rows_scanned = j.value("rows_scanned", uint64_t(0));
    if (j.contains("digest")) {
        ResultDigest d;
        d.xor_hash = parse_hex64(j["digest"].value("xor_hash", "0"));
        d.row_count = j["digest"].value("row_count", uint64_t(0));
        d.column_count = j["digest"].value("column_count", uint64_t(0));
        side.digest = d;
    }
    side.error = j.value("error", "");
    return side;
}

} // namespace

const char* digest_match_name(DigestMatch m) {
    switch (m) {
        case DigestMatch::Match: return "MATCH";
        case DigestMatch::Mismatch: return "MISMATCH";
        case DigestMatch::SkippedNondet: return "SKIPPED_NONDET";
        case DigestMatch::Error: return "ERROR";
    }
    return "ERROR";
}

bool SimulationReport::has_regressions() const {
    if (summary.mismatched > 0 || summary.slower > 0 || summary.scan_regressed > 0) return true;
    for (const auto& c : comparisons) {
        if (c.control.ok != c.test.ok) return true; // one-sided failure
    }
    return false;
}

SimulationReport compare(const RawResults& raw, Thresholds thresholds) {
    SimulationReport report;
    report.generated_at = iso8601_utc_now();
    report.benchmark_id = raw.benchmark_id;
    report.control = raw.control_name;
    report.test = raw.test_name;
    report.session = raw.session;
    report.time_range = raw.time_range;
    report.thresholds = thresholds;

    for (const auto& q : raw.queries) {
        QueryComparison c;
        c.query_id = q.query_id;
        c.signature = q.signature;
        c.labels = q.labels;
        c.control = q.control;
        c.test = q.test;
        c.sql = q.sql;

        if (q.control.ok && q.test.ok) {
            if (q.control.digest == q.test.digest) {
                c.digest_match = DigestMatch::Match;
            } else if (!q.labels.empty()) {
                // a mismatch on a labeled query is noted, not failed
                c.digest_match = DigestMatch::SkippedNondet;
            } else {
                c.digest_match = DigestMatch::Mismatch;
            }
            c.perf_ratio = q.control.wall_ms > 0 ? q.test.wall_ms / q.control.wall_ms : 0.0;
            c.slower = c.perf_ratio > thresholds.perf_ratio &&
                       (q.test.wall_ms - q.control.wall_ms) >= thresholds.min_delta_ms;
            c.scan_diff = static_cast<int64_t>(q.test.partitions_scanned) -
                          static_cast<int64_t>(q.control.partitions_scanned);
            c.scan_regressed = c.scan_diff > thresholds.scan_diff;
        } else {
            c.digest_match = DigestMatch::Error;
        }

        report.summary.total += 1;
        switch (c.digest_match) {
            case DigestMatch::Match: report.summary.matched += 1; break;
            case DigestMatch::Mismatch: report.summary.mismatched += 1; break;
            case DigestMatch::SkippedNondet: report.summary.skipped_nondet += 1; break;
            case DigestMatch::Error: report.summary.errored += 1; break;
        }
        if (c.slower) report.summary.slower += 1;
        if (c.scan_regressed) report.summary.scan_regressed += 1;
        report.comparisons.push_back(std::move(c));
    }

    std::vector<const QueryComparison*> slower;
    for (const auto& c : report.comparisons) {
        if (c.slower) slower.push_back(&c);
    }
    std::sort(slower.begin(), slower.end(), [](const QueryComparison* a, const QueryComparison* b) {
        if (a->perf_ratio != b->perf_ratio) return a->perf_ratio > b->perf_ratio;
        return a->query_id < b->query_id;
    });
    for (const QueryComparison* c : slower) report.slower_ids.push_back(c->query_id);
    return report;
}

std::string render_report_json(const SimulationReport& report, bool show_sql) {
    json comparisons = json::array();
    for (const auto& c : report.comparisons) {
        json jc{{"query_id", c.query_id},
                {"signature", c.signature},
                {"labels", labels_to_json(c.labels)},
                {"control", side_to_json(c.control)},
                {"test", side_to_json(c.test)},
                {"digest_match", digest_match_name(c.digest_match)},
                {"perf_ratio", c.perf_ratio},
                {"slower", c.slower},
                {"scan_diff", c.scan_diff},
                {"scan_regressed", c.scan_regressed}};
        if (show_sql) jc["sql"] = c.sql;
        comparisons.push_back(std::move(jc));
    }
    json doc{
        {"version", report.version},
        {"generated_at", report.generated_at},
        {"benchmark_id", report.benchmark_id},
        {"control", report.control},
        {"test", report.test},
        {"session", report.session},
        {"time_range", {{"from", report.time_range.from}, {"to", report.time_range.to}}},
        {"thresholds",
         {{"perf_ratio", report.thresholds.perf_ratio},
          {"min_delta_ms", report.thresholds.min_delta_ms},
          {"scan_diff", report.thresholds.scan_diff}}},
        {"summary",
         {{"total", report.summary.total},
          {"matched", report.summary.matched},
          {"mismatched", report.summary.mismatched},
          {"skipped_nondet", report.summary.skipped_nondet},
          {"errored", report.summary.errored},
          {"slower", report.summary.slower},
          {"scan_regressed", report.summary.scan_regressed}}},
        {"comparisons", std::move(comparisons)},
        {"slower", report.slower_ids},
    };
    return doc.dump(2);
}

SimulationReport report_from_json(const std::string& text) try {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::IoError, "report is not valid JSON");
    }
    SimulationReport report;
    report.version = doc.value("version", 1);
    report.generated_at = doc.value("generated_at", "");
    report.benchmark_id = doc.value("benchmark_id", "");
    report.control = doc.value("control", "");
    report.test = doc.value("test", "");
    report.session = doc.value("session", "");
    if (doc.contains("time_range")) {
        report.time_range.from = doc["time_range"].value("from", int64_t(0));
        report.time_range.to = doc["time_range"].value("to", int64_t(0));
    }
    if (doc.contains("thresholds")) {
        report.thresholds.perf_ratio = doc["thresholds"].value("perf_ratio", 1.5);
        report.thresholds.min_delta_ms = doc["thresholds"].value("min_delta_ms", 100.0);
        report.thresholds.scan_diff = doc["thresholds"].value("scan_diff", int64_t(1));
    }
    if (doc.contains("summary")) {
        const json& s = doc["summary"];
        report.summary.total = s.value("total", uint64_t(0));
        report.summary.matched = s.value("matched", uint64_t(0));
        report.summary.mismatched = s.value("mismatched", uint64_t(0));
        report.summary.skipped_nondet = s.value("skipped_nondet", uint64_t(0));
        report.summary.errored = s.value("errored", uint64_t(0));
        report.summary.slower = s.value("slower", uint64_t(0));
        report.summary.scan_regressed = s.value("scan_regressed", uint64_t(0));
    }
    for (const auto& jc : doc.value("comparisons", json::array())) {
        QueryComparison c;
        c.query_id = jc.value("query_id", "");
        c.signature = jc.value("signature", "");
        c.labels = labels_from_json(jc.value("labels", json::array()));
        c.control = side_from_json(jc.value("control", json::object()));
        c.test = side_from_json(jc.value("test", json::object()));
        c.digest_match = match_from_name(jc.value("digest_match", "ERROR"));
        c.perf_ratio = jc.value("perf_ratio", 0.0);
        c.slower = jc.value("slower", false);
        c.scan_diff = jc.value("scan_diff", int64_t(0));
        c.scan_regressed = jc.value("scan_regressed", false);
        c.sql = jc.value("sql", "");
        report.comparisons.push_back(std::move(c));
    }
    for (const auto& id : doc.value("slower", json::array())) {
        report.slower_ids.push_back(id.get<std::string>());
    }
    return report;
} catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed report: ") + e.what());
}

std::string render_report_markdown(const SimulationReport& report, bool show_sql) {
    std::string out;
    auto line = [&](const std::string& s) {
        out += s;
        out += "\n";
    };
    char buf[256];

    line("# Query Simulation Report");
    line("");
    line("- benchmark: `" + report.benchmark_id + "`");
    line("- control: `" + report.control + "`  test: `" + report.test + "`");
    std::snprintf(buf, sizeof(buf), "- time range: %lld .. %lld",
                  static_cast<long long>(report.time_range.from),
                  static_cast<long long>(report.time_range.to));
    line(buf);
    line("- generated: " + report.generated_at);
    line("");

    line("## Summary");
    line("");
    line("| total | matched | mismatched | skipped (nondet) | errored | slower | scan regressed |");
    line("|------:|--------:|-----------:|-----------------:|--------:|-------:|---------------:|");
    std::snprintf(buf, sizeof(buf), "| %llu | %llu | %llu | %llu | %llu | %llu | %llu |",
                  static_cast<unsigned long long>(report.summary.total),
                  static_cast<unsigned long long>(report.summary.matched),
                  static_cast<unsigned long long>(report.summary.mismatched),
                  static_cast<unsigned long long>(report.summary.skipped_nondet),
                  static_cast<unsigned long long>(report.summary.errored),
                  static_cast<unsigned long long>(report.summary.slower),
                  static_cast<unsigned long long>(report.summary.scan_regressed));
    line(buf);
    line("");

    line("## Slower queries");
    line("");
    if (report.slower_ids.empty()) {
        line("None.");
    } else {
        line("| query_id | signature | ratio | control ms | test ms | delta ms |");
        line("|----------|-----------|------:|-----------:|--------:|---------:|");
        for (const auto& id : report.slower_ids) {
            for (const auto& c : report.comparisons) {
                if (c.query_id != id) continue;
                std::snprintf(buf, sizeof(buf), "| %s | `%s` | %.2f | %.1f | %.1f | %.1f |",
                              c.query_id.c_str(), c.signature.c_str(), c.perf_ratio,
                              c.control.wall_ms, c.test.wall_ms,
                              c.test.wall_ms - c.control.wall_ms);
                line(buf);
            }
        }
    }
    line("");

    line("## Correctness mismatches");
    line("");
    bool any_mismatch = false;
    for (const auto& c : report.comparisons) {
        if (c.digest_match != DigestMatch::Mismatch && c.digest_match != DigestMatch::Error) {
            continue;
        }
        if (!any_mismatch) {
            line("| query_id | signature | status | detail |");
            line("|----------|-----------|--------|--------|");
            any_mismatch = true;
        }
        std::string detail;
        if (c.digest_match == DigestMatch::Error) {
            detail = !c.control.ok ? "control: " + c.control.error : "test: " + c.test.error;
        } else {
            detail = "digest differs";
        }
        // keep table cells single-line
        for (char& ch : detail) {
            if (ch == '\n' || ch == '|') ch = ' ';
        }
        line("| " + c.query_id + " | `" + c.signature + "` | " +
             digest_match_name(c.digest_match) + " | " + detail + " |");
    }
    if (!any_mismatch) line("None.");
    line("");

    line("## Non-determinism appendix");
    line("");
    bool any_labels = false;
    for (const auto& c : report.comparisons) {
        if (c.labels.empty()) continue;
        if (!any_labels) {
            line("| query_id | labels |");
            line("|----------|--------|");
            any_labels = true;
        }
        std::string labels;
        for (const auto& l : c.labels) {
            if (!labels.empty()) labels += ", ";
            labels += std::string(nondet_category_name(l.category)) + "(" + l.construct + ")";
            if (l.speculative) labels += "?";
        }
        line("| " + c.query_id + " | " + labels + " |");
    }
    if (!any_labels) line("None.");

    if (show_sql) {
        line("");
        line("## Statements");
        line("");
        for (const auto& c : report.comparisons) {
            line("- `" + c.query_id + "`: " + c.sql);
        }
    }
    return out;
}

bool report_equal(const SimulationReport& a, const SimulationReport& b, bool ignore_generated_at) {
    SimulationReport x = a;
    SimulationReport y = b;
    if (ignore_generated_at) {
        x.generated_at.clear();
        y.generated_at.clear();
    }
    return render_report_json(x, true) == render_report_json(y, true);
}

} // namespace qsim::sim
