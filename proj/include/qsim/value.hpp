#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qsim {

enum class ValueKind : uint8_t {
    Null = 0,
    Bool = 1,
    Int64 = 2,
    Float64 = 3,
    String = 4,
    Array = 5,
    Map = 6,
};

enum class LogicalType {
    Boolean,
    Bigint,
    Double,
    Varchar,
    Array,
    Map,
};

const char* logical_type_name(LogicalType t);
std::optional<LogicalType> logical_type_from_name(const std::string& name);

/// Self-describing scalar: every value carries its physical type tag. The
/// unit of schema-on-read — conversion to a declared logical type happens
/// at read time via coerce().
class Value {
public:
    using Array = std::vector<Value>;
    using Map = std::map<std::string, Value>;

    Value() : v_(std::monostate{}) {}

    static Value null() { return Value(); }
    static Value boolean(bool b) { return Value(Storage(b)); }
    static Value int64(int64_t i) { return Value(Storage(i)); }
    static Value float64(double d) { return Value(Storage(d)); }
    static Value string(std::string s) { return Value(Storage(std::move(s))); }
    static Value array(Array a) { return Value(Storage(std::move(a))); }
    static Value map(Map m) { return Value(Storage(std::move(m))); }

    ValueKind kind() const { return static_cast<ValueKind>(v_.index()); }
    bool is_null() const { return kind() == ValueKind::Null; }

    bool as_bool() const { return std::get<bool>(v_); }
    int64_t as_int64() const { return std::get<int64_t>(v_); }
    double as_float64() const { return std::get<double>(v_); }
    const std::string& as_string() const { return std::get<std::string>(v_); }
    const Array& as_array() const { return std::get<Array>(v_); }
    const Map& as_map() const { return std::get<Map>(v_); }

    bool operator==(const Value& other) const { return v_ == other.v_; }
    bool operator!=(const Value& other) const { return !(*this == other); }

    /// Human-readable rendering (debug output, CSV cells, CLI tables).
    std::string to_string() const;

private:
    using Storage =
        std::variant<std::monostate, bool, int64_t, double, std::string, Array, Map>;

    explicit Value(Storage v) : v_(std::move(v)) {}

    Storage v_;
};

using Row = std::vector<Value>;

/// Schema-on-read conversion. Total: impossible conversions yield NULL,
/// never an error.
Value coerce(const Value& v, LogicalType target);

/// Deterministic byte encoding used for hashing and multiset comparison.
/// -0.0 and NaN payloads are normalized so semantically equal outputs
/// encode equally; map keys are emitted in lexicographic byte order.
void canonical_encode(const Value& v, std::vector<uint8_t>& out);
std::vector<uint8_t> canonical_encode(const Value& v);

struct DigestOptions {
    // When set, FLOAT64 cells (recursively) are rounded to this many
    // significant decimal digits before hashing, tolerating benign
    // cross-version rounding drift. Off by default.
    std::optional<int> float_significant_digits;

    static DigestOptions rounded() { return DigestOptions{9}; }
};

double round_to_significant_digits(double v, int digits);

uint64_t row_hash(std::span<const Value> row, const DigestOptions& opts = {});

struct ResultDigest {
    uint64_t xor_hash = 0;
    uint64_t row_count = 0;
    uint64_t column_count = 0;

    bool operator==(const ResultDigest&) const = default;
};

/// Streaming order-insensitive digest: XOR of per-row hashes plus counts.
/// Throws ARITY_MISMATCH when a row's arity differs from the first row's.
class DigestAccumulator {
public:
    explicit DigestAccumulator(DigestOptions opts = {}) : opts_(opts) {}

    void add(std::span<const Value> row);
    ResultDigest finish() const { return digest_; }

private:
    DigestOptions opts_;
    ResultDigest digest_;
    bool saw_row_ = false;
};

ResultDigest digest(const std::vector<Row>& rows, DigestOptions opts = {});

} // namespace qsim
