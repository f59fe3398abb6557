#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "qsim/engine/engine.hpp"
#include "qsim/engine/loader.hpp"
#include "qsim/error.hpp"
#include "qsim/perfstats.hpp"
#include "qsim/rewrite.hpp"
#include "qsim/signature.hpp"
#include "qsim/simulator/report.hpp"
#include "qsim/simulator/simulator.hpp"
#include "qsim/sql/lower.hpp"
#include "qsim/sql/parser.hpp"
#include "qsim/sql/render.hpp"
#include "qsim/workload.hpp"

namespace {

using namespace qsim;

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") {
        std::stringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// epoch seconds, or YYYY-MM-DD interpreted as UTC midnight
int64_t parse_time(const std::string& text, bool end_of_day) {
    if (text.find('-') == std::string::npos) return std::stoll(text);
    std::tm tm{};
    if (sscanf(text.c_str(), "%d-%d-%d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday) != 3) {
        throw Error(ErrorCode::IoError, "cannot parse time: " + text);
    }
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    int64_t t = timegm(&tm);
    return end_of_day ? t + 86399 : t;
}

// Defaults follow the release practice: a 7-day history window for routine
// runs, 30 days (--days 30) when full monthly coverage is needed.
TimeRange resolve_range(const Workload& w, const std::string& from, const std::string& to,
                        int64_t days) {
    TimeRange range;
    int64_t max_time = 0;
    for (const auto& rec : w.records()) max_time = std::max(max_time, rec.time);
    range.to = to.empty() ? max_time : parse_time(to, true);
    range.from = from.empty() ? range.to - days * 86400 + 1 : parse_time(from, false);
    return range;
}

std::shared_ptr<engine::EngineAdapter> make_adapter(const std::string& spec,
                                                    const std::string& fallback_data_dir,
                                                    std::string* data_dir_out) {
    auto load_ref = [](const std::string& dir) {
        auto eng = std::make_shared<engine::ReferenceEngine>();
        engine::load_data_dir(*eng, dir);
        return eng;
    };
    if (spec.rfind("ref:", 0) == 0) {
        std::string dir = spec.substr(4);
        if (data_dir_out) *data_dir_out = dir;
        return load_ref(dir);
    }
    if (spec.rfind("ref+faults:", 0) == 0) {
        std::string rest = spec.substr(11);
        std::string config_path = rest;
        std::string dir = fallback_data_dir;
        size_t colon = rest.find(':');
        if (colon != std::string::npos) {
            config_path = rest.substr(0, colon);
            dir = rest.substr(colon + 1);
        }
        if (dir.empty()) {
            throw Error(ErrorCode::AdapterUnavailable,
                        "ref+faults needs a data dir (give the control as ref:<dir> or use "
                        "ref+faults:<config>:<dir>)");
        }
        engine::FaultConfig cfg = engine::load_fault_config(config_path);
        return engine::with_faults(load_ref(dir), std::move(cfg));
    }
    throw Error(ErrorCode::AdapterUnavailable, "unknown engine spec: " + spec);
}

SignatureOptions signature_options(bool tables, bool mask_dates, const std::string& placeholder) {
    SignatureOptions opts;
    opts.include_tables = tables;
    opts.mask_dates = mask_dates;
    if (!placeholder.empty()) opts.date_placeholder = placeholder;
    return opts;
}

int cmd_sig(const std::string& input, bool tables, bool mask_dates,
            const std::string& placeholder) {
    std::string sql = read_input(input);
    auto plan = sql::lower(sql::parse(sql));
    QuerySignature sig = signature_of(plan, signature_options(tables, mask_dates, placeholder));
    std::cout << sig.rendered() << "\n";
    return 0;
}

int cmd_cluster(const std::string& log_path, const std::string& from, const std::string& to,
                int64_t days, bool tables, bool mask_dates, const std::string& placeholder) {
    Workload w = ingest_file(log_path);
    TimeRange range = resolve_range(w, from, to, days);
    ClusterOptions opts;
    opts.signature = signature_options(tables, mask_dates, placeholder);
    auto clusters = cluster(w, opts, range);

    size_t in_range = 0;
    std::printf("%-8s %-10s %-6s %s\n", "members", "days", "recur", "signature");
    for (const auto& c : clusters) {
        in_range += c.members.size();
        std::printf("%-8zu %-10d %-6s %s\n", c.members.size(), c.distinct_days,
                    c.recurrent() ? "yes" : "no", c.signature.c_str());
    }
    std::printf("-- %zu clusters, %zu queries in range, %zu skipped lines, recurrence %.4f\n",
                clusters.size(), in_range, w.skipped_lines(), recurrence_ratio(clusters));
    return 0;
}

int cmd_bench(const std::string& log_path, const std::string& from, const std::string& to,
              int64_t days, bool tables, bool mask_dates, const std::string& placeholder,
              const std::string& select, const std::string& out_path) {
    Workload w = ingest_file(log_path);
    TimeRange range = resolve_range(w, from, to, days);
    ClusterOptions opts;
    opts.signature = signature_options(tables, mask_dates, placeholder);
    auto clusters = cluster(w, opts, range);
    Selection selection = select == "longest" ? Selection::Longest : Selection::Latest;
    Benchmark bench = build_benchmark(clusters, selection, range, opts.signature);
    if (out_path.empty()) {
        std::cout << benchmark_to_json(bench) << "\n";
    } else {
        save_benchmark(bench, out_path);
        std::fprintf(stderr, "wrote %zu entries to %s\n", bench.entries.size(), out_path.c_str());
    }
    return 0;
}

int cmd_slo(const std::string& log_path, const std::string& from, const std::string& to,
            int64_t days, bool tables, bool mask_dates, const std::string& placeholder) {
    Workload w = ingest_file(log_path);
    TimeRange range = resolve_range(w, from, to, days);
    ClusterOptions opts;
    opts.signature = signature_options(tables, mask_dates, placeholder);
    auto clusters = cluster(w, opts, range);

    std::printf("%-6s %-10s %-10s %-8s %-22s %-8s %-9s %s\n", "n", "median", "mad", "cov",
                "range", "trusted", "last_run", "signature");
    for (const auto& c : clusters) {
        std::vector<double> durations;
        const ClusterMember* latest = nullptr;
        for (const auto& m : c.members) {
            if (m.duration_ms) durations.push_back(static_cast<double>(*m.duration_ms));
            if (!latest || m.time > latest->time) latest = &m;
        }
        if (durations.empty()) continue;
        SloRange r = slo_range(durations);
        char range_buf[64];
        std::snprintf(range_buf, sizeof(range_buf), "[%.0f, %.0f]", r.lower_ms, r.upper_ms);
        std::string last = "-";
        if (latest && latest->duration_ms && r.trusted) {
            last = is_violation(r, static_cast<double>(*latest->duration_ms)) ? "VIOLATION" : "ok";
        }
        std::printf("%-6llu %-10.1f %-10.1f %-8.3f %-22s %-8s %-9s %s\n",
                    static_cast<unsigned long long>(r.sample_count), r.median_ms, r.mad_ms, r.cov,
                    range_buf, r.trusted ? "yes" : "no", last.c_str(), c.signature.c_str());
    }
    return 0;
}

int cmd_rewrite(const std::string& input, const std::string& session) {
    std::string sql_text = read_input(input);
    sql::Statement stmt = sql::parse(sql_text);
    RewriteOutcome outcome;
    if (stmt.kind == sql::StatementKind::Select) {
        outcome = wrap_checksum(stmt);
    } else {
        outcome = redirect_writes(stmt, session);
    }
    for (const auto& companion : outcome.companions) {
        std::cout << sql::render(companion) << "\n";
    }
    std::cout << sql::render(outcome.rewritten) << "\n";
    if (!outcome.labels.empty()) {
        std::cout << "-- labels:";
        for (const auto& l : outcome.labels) {
            std::cout << " " << nondet_category_name(l.category) << "(" << l.construct << ")";
            if (l.speculative) std::cout << "?";
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_simulate(const std::string& bench_path, const std::string& control_spec,
                 const std::string& test_spec, int parallelism, int repeat, double ratio_threshold,
                 double min_delta_ms, int64_t scan_diff_threshold, const std::string& format,
                 const std::string& out_path, bool show_sql, const std::string& session) {
    Benchmark bench = load_benchmark(bench_path);

    std::string control_dir;
    auto control = make_adapter(control_spec, "", &control_dir);
    auto test = make_adapter(test_spec, control_dir, nullptr);

    sim::RawResults raw =
        sim::run_simulation(bench, control.get(), test.get(), parallelism, session, repeat);
    sim::Thresholds thresholds{ratio_threshold, min_delta_ms, scan_diff_threshold};
    sim::SimulationReport report = sim::compare(raw, thresholds);

    std::string rendered = format == "markdown" ? sim::render_report_markdown(report, show_sql)
                                                : sim::render_report_json(report, show_sql);
    if (out_path.empty()) {
        std::cout << rendered << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + out_path);
        out << rendered << "\n";
        std::fprintf(stderr, "report written to %s\n", out_path.c_str());
    }

    std::fprintf(stderr,
                 "total=%llu matched=%llu mismatched=%llu skipped_nondet=%llu errored=%llu "
                 "slower=%llu scan_regressed=%llu\n",
                 static_cast<unsigned long long>(report.summary.total),
                 static_cast<unsigned long long>(report.summary.matched),
                 static_cast<unsigned long long>(report.summary.mismatched),
                 static_cast<unsigned long long>(report.summary.skipped_nondet),
                 static_cast<unsigned long long>(report.summary.errored),
                 static_cast<unsigned long long>(report.summary.slower),
                 static_cast<unsigned long long>(report.summary.scan_regressed));
    return report.has_regressions() ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"query-fleet regression toolkit"};
    app.require_subcommand(1);

    // sig
    auto* sig = app.add_subcommand("sig", "print the query signature of a SQL statement");
    std::string sig_input = "-";
    bool sig_tables = false, sig_mask = false;
    std::string sig_placeholder = "X";
    sig->add_option("input", sig_input, "SQL file, or - for stdin");
    sig->add_flag("--tables", sig_tables, "append source/destination table suffixes");
    sig->add_flag("--mask-dates", sig_mask, "mask date patterns in table names");
    sig->add_option("--placeholder", sig_placeholder, "date mask placeholder (default X)");

    // cluster
    auto* clu = app.add_subcommand("cluster", "cluster a query log by signature");
    std::string clu_log, clu_from, clu_to, clu_placeholder = "X";
    int64_t clu_days = kDefaultHistoryDays;
    bool clu_tables = false, clu_mask = false;
    clu->add_option("--log", clu_log, "JSON-lines query log")->required();
    clu->add_option("--from", clu_from, "range start (epoch seconds or YYYY-MM-DD)");
    clu->add_option("--to", clu_to, "range end (epoch seconds or YYYY-MM-DD)");
    clu->add_option("--days", clu_days, std::string("history window when --from is omitted (default ") +
                    std::to_string(kDefaultHistoryDays) + ", " +
                    std::to_string(kFullCoverageDays) + " for full monthly coverage)");
    clu->add_flag("--tables", clu_tables, "cluster by signature with table suffixes");
    clu->add_flag("--mask-dates", clu_mask, "mask date patterns in table names");
    clu->add_option("--placeholder", clu_placeholder, "date mask placeholder");

    // bench
    auto* ben = app.add_subcommand("bench", "build a benchmark from a query log");
    std::string ben_log, ben_from, ben_to, ben_placeholder = "X", ben_select = "latest", ben_out;
    int64_t ben_days = kDefaultHistoryDays;
    bool ben_tables = false, ben_mask = false;
    ben->add_option("--log", ben_log, "JSON-lines query log")->required();
    ben->add_option("--from", ben_from, "range start (epoch seconds or YYYY-MM-DD)");
    ben->add_option("--to", ben_to, "range end (epoch seconds or YYYY-MM-DD)");
    ben->add_option("--days", ben_days, std::string("history window when --from is omitted (default ") +
                    std::to_string(kDefaultHistoryDays) + ", " +
                    std::to_string(kFullCoverageDays) + " for full monthly coverage)");
    ben->add_flag("--tables", ben_tables, "cluster by signature with table suffixes");
    ben->add_flag("--mask-dates", ben_mask, "mask date patterns in table names");
    ben->add_option("--placeholder", ben_placeholder, "date mask placeholder");
    ben->add_option("--select", ben_select, "representative selection: latest|longest")
        ->check(CLI::IsMember({"latest", "longest"}));
    ben->add_option("--out", ben_out, "benchmark output file (stdout when omitted)");

    // slo
    auto* slo = app.add_subcommand("slo", "per-signature implicit SLO table");
    std::string slo_log, slo_from, slo_to, slo_placeholder = "X";
    int64_t slo_days = kDefaultHistoryDays;
    bool slo_tables = false, slo_mask = false;
    slo->add_option("--log", slo_log, "JSON-lines query log")->required();
    slo->add_option("--from", slo_from, "range start (epoch seconds or YYYY-MM-DD)");
    slo->add_option("--to", slo_to, "range end (epoch seconds or YYYY-MM-DD)");
    slo->add_option("--days", slo_days, std::string("history window when --from is omitted (default ") +
                    std::to_string(kDefaultHistoryDays) + ", " +
                    std::to_string(kFullCoverageDays) + " for full monthly coverage)");
    slo->add_flag("--tables", slo_tables, "cluster by signature with table suffixes");
    slo->add_flag("--mask-dates", slo_mask, "mask date patterns in table names");
    slo->add_option("--placeholder", slo_placeholder, "date mask placeholder");

    // rewrite
    auto* rew = app.add_subcommand("rewrite", "print the privacy-preserving simulation form");
    std::string rew_input = "-", rew_session = "s1";
    rew->add_option("input", rew_input, "SQL file, or - for stdin");
    rew->add_option("--session", rew_session, "session id scoping temp objects");

    // simulate
    auto* simc = app.add_subcommand("simulate", "replay a benchmark on control/test engines");
    std::string sim_bench, sim_control, sim_test, sim_format = "json", sim_out, sim_session = "sim";
    int sim_parallelism = 4, sim_repeat = 1;
    double sim_ratio = 1.5, sim_delta = 100;
    int64_t sim_scan_diff = 1;
    bool sim_show_sql = false;
    simc->add_option("--bench", sim_bench, "benchmark file")->required();
    simc->add_option("--control", sim_control, "engine spec: ref:<data-dir>")->required();
    simc->add_option("--test", sim_test,
                     "engine spec: ref:<data-dir> or ref+faults:<config-file>[:<data-dir>]")
        ->required();
    simc->add_option("--parallelism", sim_parallelism, "max in-flight queries per adapter")
        ->check(CLI::PositiveNumber);
    simc->add_option("--repeat", sim_repeat, "runs per query; wall time is the median")
        ->check(CLI::PositiveNumber);
    simc->add_option("--ratio-threshold", sim_ratio, "slower requires ratio above this");
    simc->add_option("--min-delta-ms", sim_delta, "slower requires at least this delta");
    simc->add_option("--scan-diff-threshold", sim_scan_diff,
                     "scan regression requires partition diff above this");
    simc->add_option("--format", sim_format, "json|markdown")
        ->check(CLI::IsMember({"json", "markdown"}));
    simc->add_option("--out", sim_out, "write the report here instead of stdout");
    simc->add_flag("--show-sql", sim_show_sql, "include raw SQL in the report");
    simc->add_option("--session", sim_session, "session id scoping temp objects");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sig) return cmd_sig(sig_input, sig_tables, sig_mask, sig_placeholder);
        if (*clu) {
            return cmd_cluster(clu_log, clu_from, clu_to, clu_days, clu_tables, clu_mask,
                               clu_placeholder);
        }
        if (*ben) {
            return cmd_bench(ben_log, ben_from, ben_to, ben_days, ben_tables, ben_mask,
                             ben_placeholder, ben_select, ben_out);
        }
        if (*slo) {
            return cmd_slo(slo_log, slo_from, slo_to, slo_days, slo_tables, slo_mask,
                           slo_placeholder);
        }
        if (*rew) return cmd_rewrite(rew_input, rew_session);
        if (*simc) {
            return cmd_simulate(sim_bench, sim_control, sim_test, sim_parallelism, sim_repeat,
                                sim_ratio, sim_delta, sim_scan_diff, sim_format, sim_out,
                                sim_show_sql, sim_session);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 2;
    }
    return 0;
}
