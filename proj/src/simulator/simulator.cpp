#include "qsim/simulator/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "qsim/error.hpp"
#include "qsim/perfstats.hpp"
#include "qsim/signature.hpp"
#include "qsim/sql/lower.hpp"
#include "qsim/sql/parser.hpp"
#include "qsim/sql/render.hpp"

namespace qsim::sim {

namespace {

using sql::Statement;

std::string error_text(const Error& e) { return e.what(); }

std::string digest_read_sql(const std::string& temp_table) {
    // SELECT result_digest(*) FROM (SELECT * FROM <temp>) sim_digest_src
    auto inner = std::make_shared<sql::Query>();
    sql::SelectCore core;
    core.star = true;
    sql::FromClause from;
    from.first.name = sql::Identifier{temp_table, false};
    core.from = std::move(from);
    inner->branches.push_back(std::move(core));

    Statement stmt;
    stmt.kind = sql::StatementKind::Select;
    stmt.query = inner;
    return sql::render(wrap_checksum(stmt).rewritten);
}

ResultDigest digest_from_result(const engine::ExecutionResult& result) {
    if (result.rows.size() != 1 || result.rows[0].size() != 1 ||
        result.rows[0][0].kind() != ValueKind::Array) {
        throw Error(ErrorCode::TypeError, "digest query did not return a digest row");
    }
    const auto& arr = result.rows[0][0].as_array();
    if (arr.size() != 3 || arr[0].kind() != ValueKind::Int64 ||
        arr[1].kind() != ValueKind::Int64 || arr[2].kind() != ValueKind::Int64) {
        throw Error(ErrorCode::TypeError, "malformed digest row");
    }
    ResultDigest d;
    d.xor_hash = static_cast<uint64_t>(arr[0].as_int64());
    d.row_count = static_cast<uint64_t>(arr[1].as_int64());
    d.column_count = static_cast<uint64_t>(arr[2].as_int64());
    return d;
}

// The statements one benchmark entry turns into.
struct EntryPlan {
    bool ok = false;
    std::string error;
    std::vector<NondetLabel> labels;
    std::vector<std::string> setup_sql; // companions, in order
    std::string main_sql;
    std::string digest_sql; // separate digest read (DML only); empty for reads
};

EntryPlan plan_entry(const BenchmarkEntry& entry, const std::string& session) {
    EntryPlan plan;
    Statement stmt;
    try {
        stmt = sql::parse(entry.query);
    } catch (const Error& e) {
        plan.error = error_text(e);
        return plan;
    }

    try {
        plan.labels = label_nondeterminism(stmt);
        if (stmt.kind == sql::StatementKind::Select) {
            plan.main_sql = sql::render(wrap_checksum(stmt).rewritten);
        } else {
            RewriteOutcome redirect = redirect_writes(stmt, session);
            for (const auto& companion : redirect.companions) {
                plan.setup_sql.push_back(sql::render(companion));
            }
            plan.main_sql = sql::render(redirect.rewritten);
            plan.digest_sql = digest_read_sql(redirect.temp_objects.front());

            // The scoped-write contract is enforced before anything is sent:
            // every write target must live inside the session namespace.
            std::string prefix = temp_table_name(session, "");
            auto check = [&](const Statement& s) {
                for (const auto& target : write_targets(s)) {
                    if (target.rfind(prefix, 0) != 0) {
                        throw Error(ErrorCode::SemanticError,
                                    "rewritten statement writes outside the simulation "
                                    "namespace: " + target);
                    }
                }
            };
            for (const auto& companion : redirect.companions) check(companion);
            check(redirect.rewritten);
        }
        plan.ok = true;
    } catch (const Error& e) {
        plan.error = error_text(e);
    } catch (const std::exception& e) {
        plan.error = std::string("INTERNAL: ") + e.what();
    }
    return plan;
}

SideResult execute_entry(engine::EngineAdapter& adapter, const EntryPlan& plan,
                         const std::string& session, int repeat) {
    SideResult side;
    try {
        for (const auto& setup : plan.setup_sql) adapter.execute_sql(setup, session);

        engine::ExecutionResult main = adapter.execute_sql(plan.main_sql, session);
        side.wall_ms = main.metrics.wall_ms;
        if (repeat > 1 && plan.digest_sql.empty()) {
            std::vector<double> walls{main.metrics.wall_ms};
            for (int i = 1; i < repeat; ++i) {
                walls.push_back(adapter.execute_sql(plan.main_sql, session).metrics.wall_ms);
            }
            side.wall_ms = median(walls);
        }
        side.partitions_scanned = main.metrics.partitions_scanned;
        side.rows_scanned = main.metrics.rows_scanned;

        if (plan.digest_sql.empty()) {
            side.digest = digest_from_result(main);
        } else {
            side.digest = digest_from_result(adapter.execute_sql(plan.digest_sql, session));
        }
        side.ok = true;
    } catch (const Error& e) {
        side.ok = false;
        side.error = error_text(e);
    } catch (const std::exception& e) {
        side.ok = false;
        side.error = std::string("INTERNAL: ") + e.what();
    }
    return side;
}

std::string entry_session(const std::string& base, const std::string& query_id) {
    return base + "_" + query_id;
}

} // namespace

RawResults run_simulation(const Benchmark& bench, engine::EngineAdapter* control,
                          engine::EngineAdapter* test, int parallelism,
                          const std::string& session, int repeat) {
    if (control == nullptr || test == nullptr) {
        throw Error(ErrorCode::AdapterUnavailable, "control and test adapters are required");
    }
    if (parallelism < 1) {
        throw Error(ErrorCode::AdapterUnavailable, "parallelism must be >= 1");
    }

    RawResults raw;
    raw.benchmark_id = bench.id;
    raw.control_name = control->name();
    raw.test_name = test->name();
    raw.time_range = bench.built_from;
    raw.session = session;
    raw.queries.resize(bench.entries.size());

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= bench.entries.size()) break;
            const BenchmarkEntry& entry = bench.entries[i];
            RawQueryResult& out = raw.queries[i];
            out.query_id = entry.query_id;
            out.signature = entry.signature;
            out.sql = entry.query;

            std::string qsession = entry_session(session, entry.query_id);
            EntryPlan plan = plan_entry(entry, qsession);
            out.labels = plan.labels;
            if (!plan.ok) {
                out.control.error = plan.error;
                out.test.error = plan.error;
                continue;
            }
            out.executed_sql = plan.setup_sql;
            out.executed_sql.push_back(plan.main_sql);
            if (!plan.digest_sql.empty()) out.executed_sql.push_back(plan.digest_sql);

            out.control = execute_entry(*control, plan, qsession, repeat);
            out.test = execute_entry(*test, plan, qsession, repeat);
        }
    };

    size_t threads = std::min<size_t>(static_cast<size_t>(parallelism), bench.entries.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // assembly order is deterministic regardless of completion order
    std::sort(raw.queries.begin(), raw.queries.end(),
              [](const RawQueryResult& a, const RawQueryResult& b) {
                  return a.query_id < b.query_id;
              });
    return raw;
}

} // namespace qsim::sim
