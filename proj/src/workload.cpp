#include "qsim/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "qsim/error.hpp"
#include "qsim/perfstats.hpp"
#include "qsim/sql/lower.hpp"
#include "qsim/sql/parser.hpp"

namespace qsim {

namespace {

using nlohmann::json;

Value json_to_value(const json& j) {
    switch (j.type()) {
        case json::value_t::null: return Value::null();
        case json::value_t::boolean: return Value::boolean(j.get<bool>());
        case json::value_t::number_integer: return Value::int64(j.get<int64_t>());
        case json::value_t::number_unsigned: {
            uint64_t u = j.get<uint64_t>();
            if (u <= static_cast<uint64_t>(INT64_MAX)) return Value::int64(static_cast<int64_t>(u));
            return Value::float64(static_cast<double>(u));
        }
        case json::value_t::number_float: return Value::float64(j.get<double>());
        case json::value_t::string: return Value::string(j.get<std::string>());
        case json::value_t::array: {
            Value::Array arr;
            for (const auto& e : j) arr.push_back(json_to_value(e));
            return Value::array(std::move(arr));
        }
        case json::value_t::object: {
            Value::Map m;
            for (auto it = j.begin(); it != j.end(); ++it) m.emplace(it.key(), json_to_value(it.value()));
            return Value::map(std::move(m));
        }
        default: return Value::null();
    }
}

std::optional<int64_t> coerce_int_field(const json& j) {
    Value v = coerce(json_to_value(j), LogicalType::Bigint);
    if (v.is_null()) return std::nullopt;
    return v.as_int64();
}

std::optional<std::string> coerce_string_field(const json& j) {
    Value v = coerce(json_to_value(j), LogicalType::Varchar);
    if (v.is_null()) return std::nullopt;
    return v.as_string();
}

// Known field names; everything else is preserved in extras.
bool parse_record(const std::string& line, QueryLogRecord& rec) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return false;

    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& val = it.value();
        if (key == "time") {
            auto v = coerce_int_field(val);
            if (!v) return false;
            rec.time = *v;
        } else if (key == "query_id") {
            auto v = coerce_string_field(val);
            if (!v) return false;
            rec.query_id = *v;
        } else if (key == "account_id") {
            rec.account_id = coerce_string_field(val).value_or("");
        } else if (key == "engine") {
            rec.engine = coerce_string_field(val).value_or("");
        } else if (key == "query") {
            auto v = coerce_string_field(val);
            if (!v) return false;
            rec.query = *v;
        } else if (key == "status") {
            rec.status = coerce_string_field(val).value_or("");
        } else if (key == "duration_ms") {
            rec.duration_ms = coerce_int_field(val);
        } else if (key == "cpu_ms") {
            rec.cpu_ms = coerce_int_field(val);
        } else if (key == "peak_memory_bytes") {
            rec.peak_memory_bytes = coerce_int_field(val);
        } else if (key == "rows_read") {
            rec.rows_read = coerce_int_field(val);
        } else if (key == "rows_written") {
            rec.rows_written = coerce_int_field(val);
        } else if (key == "partitions_read") {
            rec.partitions_read = coerce_int_field(val);
        } else {
            rec.extras.emplace(key, json_to_value(val));
        }
    }

    if (rec.time <= 0 || rec.query_id.empty() || rec.query.empty()) return false;
    if (rec.duration_ms && *rec.duration_ms < 0) return false;
    return true;
}

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string normalized_text_hash(const std::string& sql) {
    std::string norm;
    norm.reserve(sql.size());
    bool in_space = false;
    for (char c : sql) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !norm.empty()) norm.push_back(' ');
        in_space = false;
        norm.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(norm)));
    return std::string(buf);
}

int64_t utc_day(int64_t epoch_seconds) {
    // negative times do not occur (time > 0 invariant)
    return epoch_seconds / 86400;
}

json time_range_to_json(const TimeRange& r) { return json{{"from", r.from}, {"to", r.to}}; }

json options_to_json(const SignatureOptions& o) {
    return json{{"include_tables", o.include_tables},
                {"mask_dates", o.mask_dates},
                {"date_placeholder", o.date_placeholder}};
}

} // namespace

Workload ingest(std::istream& source) {
    Workload w;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    while (std::getline(source, line)) {
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            w.count_skipped();
            continue;
        }
        QueryLogRecord rec;
        if (!parse_record(line, rec) || !seen_ids.insert(rec.query_id).second) {
            w.count_skipped();
            continue;
        }
        w.add(std::move(rec));
    }
    return w;
}

Workload ingest_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return ingest(in);
}

std::vector<QueryCluster> cluster(const Workload& w, const ClusterOptions& opts, TimeRange range) {
    struct Bucket {
        QueryCluster cluster;
        std::set<int64_t> days;
    };
    std::unordered_map<std::string, Bucket> buckets;
    std::vector<std::string> key_order; // first-seen order for stable ties

    for (const auto& rec : w.records()) {
        if (rec.time < range.from || rec.time > range.to) continue;

        std::string key;
        std::string sig_text;
        try {
            auto plan = sql::lower(sql::parse(rec.query));
            sig_text = signature_of(plan, opts.signature).rendered();
        } catch (const Error&) {
            sig_text = "UNPARSED#" + normalized_text_hash(rec.query);
        }

        if (opts.use_template_id) {
            auto it = rec.extras.find("template_id");
            if (it != rec.extras.end()) {
                Value id = coerce(it->second, LogicalType::Varchar);
                if (!id.is_null() && !id.as_string().empty()) key = "template:" + id.as_string();
            }
        }
        if (key.empty()) key = sig_text; // signature or UNPARSED hash

        auto [it, inserted] = buckets.try_emplace(key);
        if (inserted) {
            key_order.push_back(key);
            it->second.cluster.key = key;
            it->second.cluster.signature = sig_text;
            it->second.cluster.first_seen = rec.time;
            it->second.cluster.last_seen = rec.time;
        }
        Bucket& b = it->second;
        b.cluster.members.push_back({rec.query_id, rec.time, rec.duration_ms, rec.query});
        b.cluster.first_seen = std::min(b.cluster.first_seen, rec.time);
        b.cluster.last_seen = std::max(b.cluster.last_seen, rec.time);
        b.days.insert(utc_day(rec.time));
    }

    std::vector<QueryCluster> out;
    out.reserve(buckets.size());
    for (const auto& key : key_order) {
        Bucket& b = buckets.at(key);
        b.cluster.distinct_days = static_cast<int>(b.days.size());
        out.push_back(std::move(b.cluster));
    }
    std::stable_sort(out.begin(), out.end(), [](const QueryCluster& a, const QueryCluster& b) {
        if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
        return a.key < b.key;
    });
    return out;
}

double recurrence_ratio(std::span<const QueryCluster> clusters) {
    uint64_t total = 0;
    uint64_t recurrent = 0;
    for (const auto& c : clusters) {
        total += c.members.size();
        if (c.recurrent()) recurrent += c.members.size();
    }
    if (total == 0) return 0.0;
    return static_cast<double>(recurrent) / static_cast<double>(total);
}

Benchmark build_benchmark(std::span<const QueryCluster> clusters, Selection selection,
                          TimeRange built_from, SignatureOptions options) {
    Benchmark bench;
    bench.built_from = built_from;
    bench.options = options;

    for (const auto& c : clusters) {
        if (c.members.empty()) continue;
        const ClusterMember* rep = &c.members.front();
        for (const auto& m : c.members) {
            if (selection == Selection::Latest) {
                if (m.time > rep->time || (m.time == rep->time && m.query_id > rep->query_id)) rep = &m;
            } else {
                int64_t best = rep->duration_ms.value_or(-1);
                int64_t cur = m.duration_ms.value_or(-1);
                if (cur > best || (cur == best && m.time > rep->time)) rep = &m;
            }
        }
        BenchmarkEntry entry;
        entry.signature = c.signature;
        entry.query = rep->query;
        entry.query_id = rep->query_id;
        entry.member_count = c.members.size();
        std::vector<double> durations;
        for (const auto& m : c.members) {
            if (m.duration_ms) durations.push_back(static_cast<double>(*m.duration_ms));
        }
        entry.baseline.sample_count = durations.size();
        if (!durations.empty()) {
            entry.baseline.median_ms = median(durations);
            entry.baseline.mad_ms = mad(durations);
        }
        bench.entries.push_back(std::move(entry));
    }

    // Content-derived id so reports can reference the exact benchmark.
    std::string blob;
    for (const auto& e : bench.entries) {
        blob += e.signature;
        blob += '\x1f';
        blob += e.query_id;
        blob += '\x1e';
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "bench-%08llx",
                  static_cast<unsigned long long>(fnv1a(blob) & 0xffffffffULL));
    bench.id = buf;
    return bench;
}

std::string benchmark_to_json(const Benchmark& bench) {
    json entries = json::array();
    for (const auto& e : bench.entries) {
        json je{{"signature", e.signature},
                {"query", e.query},
                {"query_id", e.query_id},
                {"member_count", e.member_count},
                {"baseline", {{"sample_count", e.baseline.sample_count}}}};
        if (e.baseline.median_ms) je["baseline"]["median_ms"] = *e.baseline.median_ms;
        if (e.baseline.mad_ms) je["baseline"]["mad_ms"] = *e.baseline.mad_ms;
        entries.push_back(std::move(je));
    }
    json doc{{"version", 1},
             {"id", bench.id},
             {"built_from", time_range_to_json(bench.built_from)},
             {"options", options_to_json(bench.options)},
             {"entries", std::move(entries)}};
    return doc.dump(2);
}

Benchmark benchmark_from_json(const std::string& text) try {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(ErrorCode::IoError, "benchmark file is not valid JSON");
    }
    if (doc.value("version", 0) != 1) {
        throw Error(ErrorCode::IoError, "unsupported benchmark file version");
    }
    Benchmark bench;
    bench.id = doc.value("id", "");
    if (doc.contains("built_from")) {
        bench.built_from.from = doc["built_from"].value("from", int64_t(0));
        bench.built_from.to = doc["built_from"].value("to", int64_t(0));
    }
    if (doc.contains("options")) {
        const auto& o = doc["options"];
        bench.options.include_tables = o.value("include_tables", false);
        bench.options.mask_dates = o.value("mask_dates", false);
        bench.options.date_placeholder = o.value("date_placeholder", "X");
    }
    for (const auto& je : doc.value("entries", json::array())) {
        BenchmarkEntry e;
        e.signature = je.value("signature", "");
        e.query = je.value("query", "");
        e.query_id = je.value("query_id", "");
        e.member_count = je.value("member_count", uint64_t(0));
        if (je.contains("baseline")) {
            const auto& b = je["baseline"];
            e.baseline.sample_count = b.value("sample_count", uint64_t(0));
            if (b.contains("median_ms")) e.baseline.median_ms = b["median_ms"].get<double>();
            if (b.contains("mad_ms")) e.baseline.mad_ms = b["mad_ms"].get<double>();
        }
        bench.entries.push_back(std::move(e));
    }
    return bench;
} catch (const json::exception& e) {
    throw Error(ErrorCode::IoError, std::string("malformed benchmark file: ") + e.what());
}

void save_benchmark(const Benchmark& bench, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << benchmark_to_json(bench) << "\n";
}

Benchmark load_benchmark(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return benchmark_from_json(ss.str());
}

} // namespace qsim
