#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qsim/error.hpp"
#include "qsim/rewrite.hpp"
#include "qsim/signature.hpp"
#include "qsim/sql/lower.hpp"
#include "qsim/sql/parser.hpp"
#include "qsim/sql/render.hpp"

using namespace qsim;
using namespace qsim::sql;

namespace {

std::vector<NondetLabel> labels_of(const std::string& sql_text) {
    return label_nondeterminism(parse(sql_text));
}

std::vector<std::string> tables_of_sql(const std::string& sql_text) {
    return tables_of(lower(parse(sql_text))).sources;
}

bool has_label(const std::vector<NondetLabel>& labels, NondetCategory cat,
               const std::string& construct) {
    for (const auto& l : labels) {
        if (l.category == cat && l.construct == construct) return true;
    }
    return false;
}

} // namespace

TEST_CASE("wrap_checksum builds a digest query over the original") {
    RewriteOutcome out = wrap_checksum(parse("SELECT c FROM A"));
    CHECK(out.kind == RewriteKind::ReadChecksum);
    CHECK(out.temp_objects.empty());
    CHECK(out.companions.empty());
    std::string rendered = render(out.rewritten);
    CHECK(rendered == "SELECT result_digest(*) FROM (SELECT c FROM A) AS sim_digest_src");
    CHECK_NOTHROW(parse(rendered)); // stays inside the grammar
}

TEST_CASE("wrap_checksum keeps ORDER BY and WITH inside the subquery") {
    RewriteOutcome out =
        wrap_checksum(parse("WITH w AS (SELECT a FROM t) SELECT * FROM w ORDER BY 1 LIMIT 5"));
    std::string rendered = render(out.rewritten);
    CHECK(rendered.find("WITH w AS") != std::string::npos);
    CHECK(rendered.find("ORDER BY") != std::string::npos);
    CHECK_NOTHROW(parse(rendered));
}

TEST_CASE("wrap_checksum rejects DML and double wrapping") {
    CHECK_THROWS_WITH_AS(wrap_checksum(parse("INSERT INTO a SELECT 1")),
                         doctest::Contains("NOT_A_READ"), Error);
    RewriteOutcome once = wrap_checksum(parse("SELECT c FROM a"));
    CHECK_THROWS_WITH_AS(wrap_checksum(once.rewritten), doctest::Contains("ALREADY_REWRITTEN"),
                         Error);
}

TEST_CASE("redirect_writes: insert gets a schema-copy companion") {
    RewriteOutcome out = redirect_writes(parse("INSERT INTO A SELECT * FROM B"), "s1");
    CHECK(out.kind == RewriteKind::WriteRedirected);
    REQUIRE(out.temp_objects.size() == 1);
    CHECK(out.temp_objects[0] == "sim_tmp_s1_a");
    REQUIRE(out.companions.size() == 1);
    CHECK(render(out.companions[0]) == "CREATE TABLE sim_tmp_s1_a AS SELECT * FROM A LIMIT 0");
    CHECK(render(out.rewritten) == "INSERT INTO sim_tmp_s1_a SELECT * FROM B");
}

TEST_CASE("redirect_writes: ctas renames the target only") {
    RewriteOutcome out = redirect_writes(parse("CREATE TABLE x AS SELECT 1"), "s1");
    CHECK(out.companions.empty());
    CHECK(render(out.rewritten) == "CREATE TABLE sim_tmp_s1_x AS SELECT 1");
    CHECK(out.temp_objects == std::vector<std::string>{"sim_tmp_s1_x"});
}

TEST_CASE("redirect_writes: delete operates on a temp copy") {
    RewriteOutcome out = redirect_writes(parse("DELETE FROM t WHERE a < 3"), "s2");
    REQUIRE(out.companions.size() == 1);
    CHECK(render(out.companions[0]) == "CREATE TABLE sim_tmp_s2_t AS SELECT * FROM t");
    CHECK(render(out.rewritten) == "DELETE FROM sim_tmp_s2_t WHERE (a < 3)");
}

TEST_CASE("redirect_writes: sessions are isolated and sanitized") {
    auto a = redirect_writes(parse("INSERT INTO x SELECT 1"), "s1");
    auto b = redirect_writes(parse("INSERT INTO x SELECT 1"), "s2");
    CHECK(a.temp_objects[0] != b.temp_objects[0]);

    auto odd = redirect_writes(parse("INSERT INTO x SELECT 1"), "Run 7/B");
    CHECK(odd.temp_objects[0] == "sim_tmp_run_7_b_x");
}

TEST_CASE("redirect_writes rejects reads and already-redirected statements") {
    CHECK_THROWS_WITH_AS(redirect_writes(parse("SELECT 1"), "s"), doctest::Contains("NOT_A_WRITE"),
                         Error);
    auto once = redirect_writes(parse("INSERT INTO x SELECT 1"), "s");
    CHECK_THROWS_WITH_AS(redirect_writes(once.rewritten, "s"),
                         doctest::Contains("ALREADY_REWRITTEN"), Error);
}

TEST_CASE("read purity: wrapping does not change the base tables read") {
    auto before = tables_of_sql("SELECT a.x FROM a JOIN b ON a.i = b.i WHERE a.x IN (SELECT y FROM c)");
    RewriteOutcome out = wrap_checksum(
        parse("SELECT a.x FROM a JOIN b ON a.i = b.i WHERE a.x IN (SELECT y FROM c)"));
    auto after = tables_of_sql(render(out.rewritten));
    CHECK(before == after);
}

TEST_CASE("namespace containment: every temp object carries the session prefix") {
    const char* statements[] = {
        "INSERT INTO orders SELECT * FROM src",
        "CREATE TABLE snapshot AS SELECT a FROM t",
        "DELETE FROM logs WHERE day < 10",
    };
    for (const char* text : statements) {
        RewriteOutcome out = redirect_writes(parse(text), "sess9");
        for (const auto& name : out.temp_objects) {
            CHECK(name.rfind("sim_tmp_sess9_", 0) == 0);
        }
        // re-extract write targets from the rewritten statements
        for (const auto& target : write_targets(out.rewritten)) {
            CHECK(target.rfind("sim_tmp_sess9_", 0) == 0);
        }
        for (const auto& companion : out.companions) {
            for (const auto& target : write_targets(companion)) {
                CHECK(target.rfind("sim_tmp_sess9_", 0) == 0);
            }
        }
    }
}

TEST_CASE("labels: time, random, order-dependent, approximate") {
    CHECK(has_label(labels_of("SELECT now()"), NondetCategory::Time, "now"));
    CHECK(has_label(labels_of("SELECT current_timestamp()"), NondetCategory::Time,
                    "current_timestamp"));
    CHECK(has_label(labels_of("SELECT random() FROM t"), NondetCategory::Random, "random"));
    CHECK(has_label(labels_of("SELECT uuid() FROM t"), NondetCategory::Random, "uuid"));
    CHECK(has_label(labels_of("SELECT max_by(u, t) FROM e"), NondetCategory::OrderDependent,
                    "max_by"));
    CHECK(has_label(labels_of("SELECT arbitrary(x) FROM t"), NondetCategory::OrderDependent,
                    "arbitrary"));
    CHECK(has_label(labels_of("SELECT approx_distinct(x) FROM t"), NondetCategory::Approximate,
                    "approx_distinct"));
    CHECK(has_label(labels_of("SELECT approx_percentile(x, 0.5) FROM t"),
                    NondetCategory::Approximate, "approx_percentile"));
}

TEST_CASE("labels: array_agg and windows depend on explicit ordering") {
    CHECK(has_label(labels_of("SELECT array_agg(x) FROM t"), NondetCategory::OrderDependent,
                    "array_agg"));
    CHECK_FALSE(has_label(labels_of("SELECT array_agg(x ORDER BY y) FROM t"),
                          NondetCategory::OrderDependent, "array_agg"));
    CHECK(has_label(labels_of("SELECT sum(a) OVER (PARTITION BY b) FROM t"),
                    NondetCategory::OrderDependent, "over"));
    CHECK_FALSE(has_label(labels_of("SELECT sum(a) OVER (PARTITION BY b ORDER BY c) FROM t"),
                          NondetCategory::OrderDependent, "over"));
}

TEST_CASE("labels: limit without order by") {
    CHECK(has_label(labels_of("SELECT a FROM t LIMIT 10"), NondetCategory::OrderDependent,
                    "limit"));
    CHECK_FALSE(has_label(labels_of("SELECT a FROM t ORDER BY a LIMIT 10"),
                          NondetCategory::OrderDependent, "limit"));
    // nested subquery limits are found too
    CHECK(has_label(labels_of("SELECT x FROM (SELECT a AS x FROM t LIMIT 5) z ORDER BY x"),
                    NondetCategory::OrderDependent, "limit"));
}

TEST_CASE("labels: float sensitivity uses the static type when available") {
    auto spec = labels_of("SELECT sum(price) FROM t");
    REQUIRE(spec.size() == 1);
    CHECK(spec[0].category == NondetCategory::FloatSensitive);
    CHECK(spec[0].speculative); // column type unknown without a schema

    auto known = labels_of("SELECT sum(CAST(price AS DOUBLE)) FROM t");
    REQUIRE(known.size() == 1);
    CHECK_FALSE(known[0].speculative);

    CHECK(labels_of("SELECT sum(CAST(price AS BIGINT)) FROM t").empty());
    CHECK(labels_of("SELECT avg(x * 1.5) FROM t").size() == 1);
    CHECK_FALSE(labels_of("SELECT avg(x * 1.5) FROM t")[0].speculative);
}

TEST_CASE("deterministic queries carry no labels") {
    CHECK(labels_of("SELECT count(*) FROM t").empty());
    CHECK(labels_of("SELECT a, b FROM t WHERE a > 1 ORDER BY a").empty());
    CHECK(labels_of("INSERT INTO x SELECT a FROM t WHERE a IS NOT NULL").empty());
    CHECK(labels_of("SELECT min(a), max(a) FROM t GROUP BY b").empty());
}

TEST_CASE("labels carry locations") {
    auto labels = labels_of("SELECT a, now() FROM t WHERE random() > 0.5");
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].location == "select[1]");
    CHECK(labels[1].location == "where");
}
