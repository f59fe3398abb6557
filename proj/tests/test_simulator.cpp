#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qsim/engine/engine.hpp"
#include "qsim/error.hpp"
#include "qsim/rewrite.hpp"
#include "qsim/simulator/report.hpp"
#include "qsim/simulator/simulator.hpp"
#include "qsim/sql/lower.hpp"
#include "qsim/sql/parser.hpp"
#include "support/corpus.hpp"

using namespace qsim;
using namespace qsim::sim;

namespace {

Benchmark slice(const Benchmark& bench, size_t count, size_t stride = 1) {
    Benchmark out;
    out.id = bench.id + "-slice";
    out.options = bench.options;
    out.built_from = bench.built_from;
    for (size_t i = 0; i < bench.entries.size() && out.entries.size() < count; i += stride) {
        out.entries.push_back(bench.entries[i]);
    }
    return out;
}

SimulationReport run_with_faults(const Benchmark& bench, const engine::FaultConfig& faults,
                                 int parallelism = 4, Thresholds thresholds = {}) {
    const auto& corpus = test::regression_corpus();
    auto control = corpus.make_engine();
    auto faulty = engine::with_faults(corpus.make_engine(), faults);
    RawResults raw =
        run_simulation(bench, control.get(), faulty.get(), parallelism, "sim", 1);
    return compare(raw, thresholds);
}

std::string normalized_json(const SimulationReport& report) {
    SimulationReport copy = report;
    copy.generated_at = "T";
    return render_report_json(copy, true);
}

} // namespace

TEST_CASE("self-comparison matches everywhere") {
    Benchmark bench = slice(test::regression_corpus().bench, 60, 9);
    SimulationReport report = run_with_faults(bench, engine::FaultConfig{});
    CHECK(report.summary.total == bench.entries.size());
    CHECK(report.summary.mismatched == 0);
    CHECK(report.summary.errored == 0);
    CHECK(report.summary.slower == 0);
    CHECK(report.summary.scan_regressed == 0);
    CHECK(report.summary.matched + report.summary.skipped_nondet == report.summary.total);
    CHECK_FALSE(report.has_regressions());
    // classification partition
    CHECK(report.summary.matched + report.summary.mismatched + report.summary.skipped_nondet +
              report.summary.errored ==
          report.summary.total);
}

TEST_CASE("coercion bug mismatches exactly the escalated entries in the slice") {
    const auto& corpus = test::regression_corpus();
    // a slice that contains escalated and non-escalated queries
    Benchmark bench = slice(corpus.bench, 500, 1);
    bench.entries.resize(480); // trim tail to keep this unit test fast
    SimulationReport report =
        run_with_faults(bench, corpus.coercion_fault(), /*parallelism=*/8);
    std::set<std::string> mismatched;
    for (const auto& c : report.comparisons) {
        if (c.digest_match == DigestMatch::Mismatch) mismatched.insert(c.query_id);
    }
    std::set<std::string> expected;
    for (const auto& entry : bench.entries) {
        if (corpus.escalated_ids.count(entry.query_id)) expected.insert(entry.query_id);
    }
    CHECK(mismatched == expected);
    CHECK(report.has_regressions());
}

TEST_CASE("per-query engine errors are recorded, not fatal") {
    Benchmark bench;
    bench.id = "err";
    BenchmarkEntry good{"S(T) f00", "SELECT id FROM f00", "q1", 1, {}};
    BenchmarkEntry missing{"S(T) nope", "SELECT x FROM missing_table", "q2", 1, {}};
    BenchmarkEntry unparsed{"UNPARSED#1", "THIS IS NOT SQL", "q3", 1, {}};
    bench.entries = {good, missing, unparsed};

    SimulationReport report = run_with_faults(bench, engine::FaultConfig{});
    REQUIRE(report.summary.total == 3);
    CHECK(report.summary.matched == 1);
    CHECK(report.summary.errored == 2);
    for (const auto& c : report.comparisons) {
        if (c.query_id == "q2") {
            CHECK(c.digest_match == DigestMatch::Error);
            CHECK(c.control.error.find("UNKNOWN_TABLE") != std::string::npos);
        }
        if (c.query_id == "q3") {
            CHECK(c.digest_match == DigestMatch::Error);
        }
    }
    // symmetric errors are not regressions
    CHECK_FALSE(report.has_regressions());
}

TEST_CASE("labeled mismatches demote to SKIPPED_NONDET") {
    const auto& corpus = test::regression_corpus();
    // max_by entries are ORDER_DEPENDENT-labeled; tie flipping changes digests
    Benchmark bench;
    bench.id = "ties";
    for (const auto& entry : corpus.bench.entries) {
        if (entry.query.find("max_by") != std::string::npos && bench.entries.size() < 6) {
            bench.entries.push_back(entry);
        }
    }
    REQUIRE(bench.entries.size() == 6);
    engine::FaultConfig flip;
    flip.tie_break_flip = true;
    SimulationReport report = run_with_faults(bench, flip);
    CHECK(report.summary.mismatched == 0);
    // ties may or may not exist per table; any digest difference lands in
    // skipped_nondet, everything else matches
    CHECK(report.summary.matched + report.summary.skipped_nondet == report.summary.total);

    // the same fault on an unlabeled corpus yields no false mismatches
    Benchmark plain = slice(corpus.bench, 20, 3);
    SimulationReport plain_report = run_with_faults(plain, flip);
    CHECK(plain_report.summary.mismatched == 0);
}

TEST_CASE("float-order fault lands on labeled queries as SKIPPED_NONDET") {
    // sum over a double column carries a FLOAT_SENSITIVE label, so an
    // accumulation-order change is noted rather than failed
    auto control = std::make_shared<engine::ReferenceEngine>();
    auto faulty_inner = std::make_shared<engine::ReferenceEngine>();
    for (auto* eng : {control.get(), faulty_inner.get()}) {
        eng->load_table("m", {{"x", LogicalType::Double}},
                        {{Value::float64(1.0)},
                         {Value::float64(1e100)},
                         {Value::float64(1.0)},
                         {Value::float64(-1e100)}});
    }
    engine::FaultConfig cfg;
    cfg.float_reverse_sum = true;
    auto faulty = engine::with_faults(faulty_inner, cfg);

    Benchmark bench;
    bench.id = "float";
    bench.entries.push_back({"G(S(T)) m", "SELECT sum(x) FROM m", "q1", 1, {}});
    RawResults raw = run_simulation(bench, control.get(), faulty.get(), 1, "s", 1);
    SimulationReport report = compare(raw, {});
    REQUIRE(report.summary.total == 1);
    CHECK(report.summary.mismatched == 0);
    CHECK(report.summary.skipped_nondet == 1);
    REQUIRE(report.comparisons[0].labels.size() == 1);
    CHECK(report.comparisons[0].labels[0].category == NondetCategory::FloatSensitive);
}

TEST_CASE("threshold rules for slower classification") {
    RawResults raw;
    raw.benchmark_id = "t";
    auto mk = [](const char* id, double control_ms, double test_ms) {
        RawQueryResult q;
        q.query_id = id;
        q.signature = "S(T)";
        q.control.ok = true;
        q.control.digest = ResultDigest{1, 1, 1};
        q.control.wall_ms = control_ms;
        q.test.ok = true;
        q.test.digest = ResultDigest{1, 1, 1};
        q.test.wall_ms = test_ms;
        return q;
    };
    raw.queries.push_back(mk("q1", 1000, 1400));  // ratio 1.4: not slower
    raw.queries.push_back(mk("q2", 100, 180));    // ratio 1.8 but delta 80 < 100
    raw.queries.push_back(mk("q3", 200, 400));    // ratio 2.0, delta 200: slower
    raw.queries.push_back(mk("q4", 100, 151));    // ratio 1.51 but delta 51: not slower
    raw.queries.push_back(mk("q5", 300, 900));    // ratio 3.0, delta 600: slower

    SimulationReport report = compare(raw, Thresholds{});
    CHECK(report.summary.slower == 2);
    REQUIRE(report.slower_ids.size() == 2);
    CHECK(report.slower_ids[0] == "q5"); // ordered by ratio descending
    CHECK(report.slower_ids[1] == "q3");
}

TEST_CASE("scan_diff rule") {
    RawResults raw;
    RawQueryResult q;
    q.query_id = "q1";
    q.control.ok = q.test.ok = true;
    q.control.digest = q.test.digest = ResultDigest{};
    q.control.wall_ms = q.test.wall_ms = 10;
    q.control.partitions_scanned = 4;
    q.test.partitions_scanned = 5; // diff 1 is not above the threshold
    raw.queries.push_back(q);
    q.query_id = "q2";
    q.test.partitions_scanned = 6; // diff 2 is
    raw.queries.push_back(q);
    SimulationReport report = compare(raw, Thresholds{});
    CHECK_FALSE(report.comparisons[0].scan_regressed);
    CHECK(report.comparisons[1].scan_regressed);
    CHECK(report.summary.scan_regressed == 1);
}

TEST_CASE("error asymmetry counts as a regression") {
    RawResults raw;
    RawQueryResult q;
    q.query_id = "q1";
    q.control.ok = true;
    q.control.digest = ResultDigest{};
    q.test.ok = false;
    q.test.error = "TYPE_ERROR: boom";
    raw.queries.push_back(q);
    SimulationReport report = compare(raw, Thresholds{});
    CHECK(report.summary.errored == 1);
    CHECK(report.comparisons[0].digest_match == DigestMatch::Error);
    CHECK(report.has_regressions());
}

TEST_CASE("empty benchmark yields a valid zero report") {
    const auto& corpus = test::regression_corpus();
    auto control = corpus.make_engine();
    auto test_eng = corpus.make_engine();
    Benchmark bench;
    bench.id = "empty";
    RawResults raw = run_simulation(bench, control.get(), test_eng.get(), 2, "s", 1);
    SimulationReport report = compare(raw, {});
    CHECK(report.summary.total == 0);
    CHECK_FALSE(report.has_regressions());
    CHECK_NOTHROW(render_report_json(report));
    CHECK_NOTHROW(render_report_markdown(report));
}

TEST_CASE("missing adapters abort") {
    Benchmark bench;
    CHECK_THROWS_WITH_AS(run_simulation(bench, nullptr, nullptr, 1, "s", 1),
                         doctest::Contains("ADAPTER_UNAVAILABLE"), qsim::Error);
}

TEST_CASE("json report round-trips to an equal value") {
    Benchmark bench = slice(test::regression_corpus().bench, 25, 17);
    SimulationReport report = run_with_faults(bench, engine::FaultConfig{});
    std::string json = render_report_json(report, /*show_sql=*/true);
    SimulationReport parsed = report_from_json(json);
    CHECK(report_equal(report, parsed, /*ignore_generated_at=*/false));
    CHECK(render_report_json(parsed, true) == json);
}

TEST_CASE("reports are deterministic across runs and parallelism") {
    Benchmark bench = slice(test::regression_corpus().bench, 40, 11);
    SimulationReport a = run_with_faults(bench, engine::FaultConfig{}, 1);
    SimulationReport b = run_with_faults(bench, engine::FaultConfig{}, 16);
    SimulationReport c = run_with_faults(bench, engine::FaultConfig{}, 4);
    CHECK(normalized_json(a) == normalized_json(b));
    CHECK(normalized_json(a) == normalized_json(c));
}

TEST_CASE("markdown report contains the expected sections") {
    const auto& corpus = test::regression_corpus();
    Benchmark bench = slice(corpus.bench, 120, 4);
    SimulationReport report =
        run_with_faults(bench, corpus.latency_fault(), 4, Thresholds{});
    std::string md = render_report_markdown(report);
    CHECK(md.find("# Query Simulation Report") != std::string::npos);
    CHECK(md.find("## Summary") != std::string::npos);
    CHECK(md.find("## Slower queries") != std::string::npos);
    CHECK(md.find("## Correctness mismatches") != std::string::npos);
    CHECK(md.find("## Non-determinism appendix") != std::string::npos);
    // raw SQL stays out unless asked for
    CHECK(md.find("SELECT") == std::string::npos);
    std::string with_sql = render_report_markdown(report, /*show_sql=*/true);
    CHECK(with_sql.find("SELECT") != std::string::npos);
}

TEST_CASE("repeat takes the median wall time") {
    const auto& corpus = test::regression_corpus();
    Benchmark bench = slice(corpus.bench, 5, 1);
    auto control = corpus.make_engine();
    auto test_eng = corpus.make_engine();
    RawResults raw = run_simulation(bench, control.get(), test_eng.get(), 2, "s", 3);
    // deterministic engines: the median of identical walls equals one run
    RawResults raw_once = run_simulation(bench, control.get(), test_eng.get(), 2, "s", 1);
    for (size_t i = 0; i < raw.queries.size(); ++i) {
        CHECK(raw.queries[i].control.wall_ms == raw_once.queries[i].control.wall_ms);
    }
}

TEST_CASE("privacy containment across executed statements") {
    const auto& corpus = test::regression_corpus();
    // all DML entries plus a few reads
    Benchmark bench;
    bench.id = "dml";
    for (const auto& entry : corpus.bench.entries) {
        sql::Statement stmt = sql::parse(entry.query);
        if (stmt.kind != sql::StatementKind::Select || bench.entries.size() < 45) {
            bench.entries.push_back(entry);
        }
    }
    auto control = corpus.make_engine();
    auto test_eng = corpus.make_engine();
    RawResults raw = run_simulation(bench, control.get(), test_eng.get(), 4, "priv", 1);
    size_t writes_seen = 0;
    for (const auto& q : raw.queries) {
        for (const auto& sql_text : q.executed_sql) {
            for (const auto& target : write_targets(sql::parse(sql_text))) {
                ++writes_seen;
                CHECK(target.rfind("sim_tmp_priv_", 0) == 0);
            }
        }
    }
    CHECK(writes_seen > 0);
}
