#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "qsim/error.hpp"
#include "qsim/value.hpp"

using namespace qsim;

namespace {

// Independent FNV-1a 64 used as the oracle for row_hash.
uint64_t fnv1a_oracle(const std::vector<uint8_t>& bytes) {
    uint64_t h = 14695981039346656037ULL;
    for (uint8_t b : bytes) {
        h = (h ^ b) * 1099511628211ULL;
    }
    return h;
}

Value random_scalar(std::mt19937_64& rng) {
    switch (rng() % 5) {
        case 0: return Value::null();
        case 1: return Value::boolean(rng() % 2 == 0);
        case 2: return Value::int64(static_cast<int64_t>(rng() % 10000) - 5000);
        case 3: return Value::float64(static_cast<double>(rng() % 100000) / 7.0);
        default: return Value::string("s" + std::to_string(rng() % 1000));
    }
}

std::vector<Row> random_rows(std::mt19937_64& rng, size_t n, size_t arity) {
    std::vector<Row> rows;
    rows.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        Row row;
        for (size_t c = 0; c < arity; ++c) row.push_back(random_scalar(rng));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

TEST_CASE("coerce string to bigint") {
    CHECK(coerce(Value::string("100"), LogicalType::Bigint) == Value::int64(100));
    CHECK(coerce(Value::string("abc"), LogicalType::Bigint) == Value::null());
    CHECK(coerce(Value::int64(7), LogicalType::Bigint) == Value::int64(7));
    CHECK(coerce(Value::string("  -42 "), LogicalType::Bigint) == Value::int64(-42));
    CHECK(coerce(Value::string("100.5"), LogicalType::Bigint) == Value::null());
    CHECK(coerce(Value::string(""), LogicalType::Bigint) == Value::null());
}

TEST_CASE("coerce string to double") {
    CHECK(coerce(Value::string("1.5"), LogicalType::Double) == Value::float64(1.5));
    CHECK(coerce(Value::string("1e3"), LogicalType::Double) == Value::float64(1000.0));
    CHECK(coerce(Value::string("inf"), LogicalType::Double) == Value::null());
    CHECK(coerce(Value::string("nan"), LogicalType::Double) == Value::null());
    CHECK(coerce(Value::string("x1"), LogicalType::Double) == Value::null());
}

TEST_CASE("coerce bigint/double conversions") {
    CHECK(coerce(Value::int64(3), LogicalType::Double) == Value::float64(3.0));
    // 2^53 + 1 is not representable in a double
    CHECK(coerce(Value::int64((int64_t(1) << 53) + 1), LogicalType::Double) == Value::null());
    // floats with a fraction truncate toward zero
    CHECK(coerce(Value::float64(3.9), LogicalType::Bigint) == Value::int64(3));
    CHECK(coerce(Value::float64(-3.9), LogicalType::Bigint) == Value::int64(-3));
    CHECK(coerce(Value::float64(1e300), LogicalType::Bigint) == Value::null());
}

TEST_CASE("coerce renders strings canonically") {
    CHECK(coerce(Value::int64(42), LogicalType::Varchar) == Value::string("42"));
    CHECK(coerce(Value::boolean(true), LogicalType::Varchar) == Value::string("true"));
    CHECK(coerce(Value::boolean(false), LogicalType::Varchar) == Value::string("false"));
    CHECK(coerce(Value::float64(1.5), LogicalType::Varchar) == Value::string("1.5"));
}

TEST_CASE("coerce null and impossible cases") {
    CHECK(coerce(Value::null(), LogicalType::Bigint) == Value::null());
    CHECK(coerce(Value::boolean(true), LogicalType::Bigint) == Value::null());
    CHECK(coerce(Value::array({Value::int64(1)}), LogicalType::Varchar) == Value::null());
    CHECK(coerce(Value::string("true"), LogicalType::Boolean) == Value::null());
}

TEST_CASE("coercion is idempotent and total") {
    std::mt19937_64 rng(7);
    const std::pair<LogicalType, ValueKind> types[] = {
        {LogicalType::Boolean, ValueKind::Bool},   {LogicalType::Bigint, ValueKind::Int64},
        {LogicalType::Double, ValueKind::Float64}, {LogicalType::Varchar, ValueKind::String},
        {LogicalType::Array, ValueKind::Array},    {LogicalType::Map, ValueKind::Map},
    };
    for (int i = 0; i < 2000; ++i) {
        Value v = random_scalar(rng);
        for (const auto& [t, kind] : types) {
            Value once = coerce(v, t);
            // output variant is the target's or NULL, and re-coercion is a no-op
            CHECK((once.is_null() || once.kind() == kind));
            CHECK(coerce(once, t) == once);
        }
    }
}

TEST_CASE("canonical encoding fixed tags") {
    CHECK(canonical_encode(Value::null()) == std::vector<uint8_t>{0x00});
    CHECK(canonical_encode(Value::boolean(true)) == std::vector<uint8_t>{0x01, 0x01});
    CHECK(canonical_encode(Value::boolean(false)) == std::vector<uint8_t>{0x01, 0x00});
    CHECK(canonical_encode(Value::int64(1)) ==
          std::vector<uint8_t>{0x02, 0, 0, 0, 0, 0, 0, 0, 1});
}

TEST_CASE("canonical encoding normalizes floats") {
    CHECK(canonical_encode(Value::float64(0.0)) == canonical_encode(Value::float64(-0.0)));
    double nan1 = std::nan("");
    double nan2 = std::nan("0x123");
    CHECK(canonical_encode(Value::float64(nan1)) == canonical_encode(Value::float64(nan2)));
    std::vector<uint8_t> nan_bytes = canonical_encode(Value::float64(nan1));
    CHECK(nan_bytes == std::vector<uint8_t>{0x03, 0x7f, 0xf8, 0, 0, 0, 0, 0, 0});
}

TEST_CASE("canonical encoding sorts map keys") {
    Value m = Value::map({{"b", Value::int64(2)}, {"a", Value::int64(1)}});
    std::vector<uint8_t> bytes = canonical_encode(m);
    // tag, 4-byte count, 4-byte key length, then "a" before "b"
    CHECK(bytes[0] == 0x06);
    CHECK(bytes[9] == 'a');
}

TEST_CASE("encoding injectivity on small scalar sets") {
    std::vector<Value> values = {
        Value::null(),          Value::boolean(false),   Value::boolean(true),
        Value::int64(0),        Value::int64(1),         Value::int64(-1),
        Value::float64(0.0),    Value::float64(1.0),     Value::string(""),
        Value::string("0"),     Value::string("1"),      Value::int64(256),
        Value::array({}),       Value::map({}),          Value::string("a"),
        Value::array({Value::int64(1)}),
	Value::map({{"a", Value::int64(1)}}),
    };
    for (size_t i = 0; i < values.size(); ++i) {
        for (size_t j = i + 1; j < values.size(); ++j) {
            CHECK(canonical_encode(values[i]) != canonical_encode(values[j]));
        }
    }
}

TEST_CASE("row_hash matches an independent FNV-1a") {
    Row row{Value::null()};
    CHECK(row_hash(row) == fnv1a_oracle({0x00}));

    Row row2{Value::int64(1), Value::string("x")};
    std::vector<uint8_t> bytes;
    canonical_encode(row2[0], bytes);
    canonical_encode(row2[1], bytes);
    CHECK(row_hash(row2) == fnv1a_oracle(bytes));
}

TEST_CASE("row_hash distinguishes int 1 from string 1 and is deterministic") {
    Row a{Value::int64(1)};
    Row b{Value::string("1")};
    CHECK(row_hash(a) != row_hash(b));
    CHECK(row_hash(a) == row_hash(a));
}

TEST_CASE("digest basics") {
    CHECK(digest({}) == ResultDigest{0, 0, 0});

    std::vector<Row> ab = {{Value::int64(1)}, {Value::int64(2)}};
    std::vector<Row> ba = {{Value::int64(2)}, {Value::int64(1)}};
    CHECK(digest(ab) == digest(ba));

    std::vector<Row> aa = {{Value::int64(1)}, {Value::int64(1)}};
    ResultDigest d = digest(aa);
    CHECK(d.xor_hash == 0); // duplicate rows cancel under XOR
    CHECK(d.row_count == 2);
    CHECK(d.column_count == 1);
}

TEST_CASE("digest arity mismatch") {
    DigestAccumulator acc;
    acc.add(Row{Value::int64(1), Value::int64(2)});
    CHECK_THROWS_AS(acc.add(Row{Value::int64(1)}), Error);
}

TEST_CASE("digest permutation invariance over random row sets") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        auto rows = random_rows(rng, 1 + rng() % 40, 1 + rng() % 4);
        ResultDigest base = digest(rows);
        auto shuffled = rows;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(digest(shuffled) == base);
    }
}

TEST_CASE("digest single-cell sensitivity: no observed collisions") {
    std::mt19937_64 rng(11);
    int trials = 10000;
    int collisions = 0;
    for (int trial = 0; trial < trials; ++trial) {
        auto rows = random_rows(rng, 1 + rng() % 20, 1 + rng() % 3);
        ResultDigest base = digest(rows);
        size_t r = rng() % rows.size();
        size_t c = rng() % rows[r].size();
        Value original = rows[r][c];
        Value mutated = Value::int64(static_cast<int64_t>(rng()));
        if (mutated == original) continue;
        rows[r][c] = mutated;
        if (digest(rows).xor_hash == base.xor_hash) ++collisions;
    }
    CHECK(collisions == 0);
}

TEST_CASE("float rounding mode tolerates small drift") {
    DigestOptions rounded = DigestOptions::rounded();
    std::vector<Row> a = {{Value::float64(1.00000000001)}};
    std::vector<Row> b = {{Value::float64(1.00000000002)}};
    CHECK(digest(a) != digest(b));
    CHECK(digest(a, rounded) == digest(b, rounded));
    // rounding reaches floats nested inside arrays
    std::vector<Row> na = {{Value::array({Value::float64(2.000000000001)})}};
    std::vector<Row> nb = {{Value::array({Value::float64(2.000000000002)})}};
    CHECK(digest(na, rounded) == digest(nb, rounded));
}

TEST_CASE("round_to_significant_digits") {
    CHECK(round_to_significant_digits(123456789.0, 3) == doctest::Approx(123000000.0));
    CHECK(round_to_significant_digits(0.0, 9) == 0.0);
    CHECK(round_to_significant_digits(-1.23456e-7, 3) == doctest::Approx(-1.23e-7));
}
