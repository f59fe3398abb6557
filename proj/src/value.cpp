#include "qsim/value.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string_view>

#include "qsim/error.hpp"

namespace qsim {

namespace {

constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
constexpr uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr uint64_t kCanonicalNan = 0x7ff8000000000000ULL;

void put_u32_be(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u64_be(std::vector<uint8_t>& out, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<uint8_t>(v >> shift));
    }
}

std::string_view trimmed(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    size_t end = s.find_last_not_of(" \t\r\n");
    return std::string_view(s).substr(begin, end - begin + 1);
}

std::optional<int64_t> parse_int64(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int64_t out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (s.empty()) return std::nullopt;
    double out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    if (!std::isfinite(out)) return std::nullopt;
    return out;
}

std::string render_double(double d) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), d);
    return std::string(buf, ptr);
}

// Exact only: the round trip through double must reproduce the integer.
std::optional<double> int64_to_double_exact(int64_t v) {
    double d = static_cast<double>(v);
    if (d < -9223372036854775808.0 || d >= 9223372036854775808.0) return std::nullopt;
    if (static_cast<int64_t>(d) != v) return std::nullopt;
    return d;
}

// Truncation toward zero, NULL when non-finite or out of int64 range.
std::optional<int64_t> double_to_int64(double d) {
    if (!std::isfinite(d)) return std::nullopt;
    double t = std::trunc(d);
    if (t < -9223372036854775808.0 || t >= 9223372036854775808.0) return std::nullopt;
    return static_cast<int64_t>(t);
}

} // namespace

const char* logical_type_name(LogicalType t) {
    switch (t) {
        case LogicalType::Boolean: return "BOOLEAN";
        case LogicalType::Bigint: return "BIGINT";
        case LogicalType::Double: return "DOUBLE";
        case LogicalType::Varchar: return "VARCHAR";
        case LogicalType::Array: return "ARRAY";
        case LogicalType::Map: return "MAP";
    }
    return "UNKNOWN";
}

std::optional<LogicalType> logical_type_from_name(const std::string& name) {
    std::string up;
    up.reserve(name.size());
    for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (up == "BOOLEAN" || up == "BOOL") return LogicalType::Boolean;
    if (up == "BIGINT" || up == "INT" || up == "INTEGER" || up == "LONG") return LogicalType::Bigint;
    if (up == "DOUBLE" || up == "FLOAT") return LogicalType::Double;
    if (up == "VARCHAR" || up == "STRING" || up == "TEXT") return LogicalType::Varchar;
    if (up == "ARRAY") return LogicalType::Array;
    if (up == "MAP") return LogicalType::Map;
    return std::nullopt;
}

std::string Value::to_string() const {
    switch (kind()) {
        case ValueKind::Null: return "null";
        case ValueKind::Bool: return as_bool() ? "true" : "false";
        case ValueKind::Int64: return std::to_string(as_int64());
        case ValueKind::Float64: return render_double(as_float64());
        case ValueKind::String: return as_string();
        case ValueKind::Array: {
            std::string out = "[";
            const auto& a = as_array();
            for (size_t i = 0; i < a.size(); ++i) {
                if (i) out += ",";
                out += a[i].to_string();
            }
            out += "]";
            return out;
        }
        case ValueKind::Map: {
            std::string out = "{";
            bool first = true;
            for (const auto& [k, v] : as_map()) {
                if (!first) out += ",";
                first = false;
                out += k + ":" + v.to_string();
            }
            out += "}";
            return out;
        }
    }
    return "null";
}

Value coerce(const Value& v, LogicalType target) {
    if (v.is_null()) return Value::null();
    switch (target) {
        case LogicalType::Boolean:
            if (v.kind() == ValueKind::Bool) return v;
            return Value::null();
        case LogicalType::Bigint:
            switch (v.kind()) {
                case ValueKind::Int64: return v;
                case ValueKind::String: {
                    auto i = parse_int64(trimmed(v.as_string()));
                    return i ? Value::int64(*i) : Value::null();
                }
                case ValueKind::Float64: {
                    // Floats with a fraction truncate toward zero.
                    auto i = double_to_int64(v.as_float64());
                    return i ? Value::int64(*i) : Value::null();
                }
                default: return Value::null();
            }
        case LogicalType::Double:
            switch (v.kind()) {
                case ValueKind::Float64: return v;
                case ValueKind::Int64: {
                    auto d = int64_to_double_exact(v.as_int64());
                    return d ? Value::float64(*d) : Value::null();
                }
                case ValueKind::String: {
                    auto d = parse_double(trimmed(v.as_string()));
                    return d ? Value::float64(*d) : Value::null();
                }
                default: return Value::null();
            }
        case LogicalType::Varchar:
            switch (v.kind()) {
                case ValueKind::String: return v;
                case ValueKind::Int64: return Value::string(std::to_string(v.as_int64()));
                case ValueKind::Float64: return Value::string(render_double(v.as_float64()));
                case ValueKind::Bool: return Value::string(v.as_bool() ? "true" : "false");
                default: return Value::null();
            }
        case LogicalType::Array:
            if (v.kind() == ValueKind::Array) return v;
            return Value::null();
        case LogicalType::Map:
            if (v.kind() == ValueKind::Map) return v;
            return Value::null();
    }
    return Value::null();
}

void canonical_encode(const Value& v, std::vector<uint8_t>& out) {
    switch (v.kind()) {
        case ValueKind::Null:
            out.push_back(0x00);
            return;
        case ValueKind::Bool:
            out.push_back(0x01);
            out.push_back(v.as_bool() ? 0x01 : 0x00);
            return;
        case ValueKind::Int64:
            out.push_back(0x02);
            put_u64_be(out, static_cast<uint64_t>(v.as_int64()));
            return;
        case ValueKind::Float64: {
            out.push_back(0x03);
            double d = v.as_float64();
            uint64_t bits;
            if (std::isnan(d)) {
                bits = kCanonicalNan;
            } else {
                if (d == 0.0) d = 0.0; // normalizes -0.0
                bits = std::bit_cast<uint64_t>(d);
            }
            put_u64_be(out, bits);
            return;
        }
        case ValueKind::String: {
            const auto& s = v.as_string();
            out.push_back(0x04);
            put_u32_be(out, static_cast<uint32_t>(s.size()));
            out.insert(out.end(), s.begin(), s.end());
            return;
        }
        case ValueKind::Array: {
            const auto& a = v.as_array();
            out.push_back(0x05);
            put_u32_be(out, static_cast<uint32_t>(a.size()));
            for (const auto& e : a) canonical_encode(e, out);
            return;
        }
        case ValueKind::Map: {
            const auto& m = v.as_map(); // std::map iterates keys in byte order
            out.push_back(0x06);
            put_u32_be(out, static_cast<uint32_t>(m.size()));
            for (const auto& [k, val] : m) {
                put_u32_be(out, static_cast<uint32_t>(k.size()));
                out.insert(out.end(), k.begin(), k.end());
                canonical_encode(val, out);
            }
            return;
        }
    }
}

std::vector<uint8_t> canonical_encode(const Value& v) {
    std::vector<uint8_t> out;
    canonical_encode(v, out);
    return out;
}

double round_to_significant_digits(double v, int digits) {
    if (!std::isfinite(v) || v == 0.0) return v;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, v);
    double out = v;
    std::sscanf(buf, "%lf", &out);
    return out;
}

namespace {

Value round_floats(const Value& v, int digits) {
    switch (v.kind()) {
        case ValueKind::Float64:
            return Value::float64(round_to_significant_digits(v.as_float64(), digits));
        case ValueKind::Array: {
            Value::Array out;
            out.reserve(v.as_array().size());
            for (const auto& e : v.as_array()) out.push_back(round_floats(e, digits));
            return Value::array(std::move(out));
        }
        case ValueKind::Map: {
            Value::Map out;
            for (const auto& [k, e] : v.as_map()) out.emplace(k, round_floats(e, digits));
            return Value::map(std::move(out));
        }
        default: return v;
    }
}

} // namespace

uint64_t row_hash(std::span<const Value> row, const DigestOptions& opts) {
    std::vector<uint8_t> bytes;
    for (const auto& cell : row) {
        if (opts.float_significant_digits) {
            canonical_encode(round_floats(cell, *opts.float_significant_digits), bytes);
        } else {
            canonical_encode(cell, bytes);
        }
    }
    uint64_t h = kFnvOffsetBasis;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= kFnvPrime;
    }
    return h;
}

void DigestAccumulator::add(std::span<const Value> row) {
    if (!saw_row_) {
        digest_.column_count = row.size();
        saw_row_ = true;
    } else if (row.size() != digest_.column_count) {
        throw Error(ErrorCode::ArityMismatch,
                    "row arity " + std::to_string(row.size()) + " differs from first row arity " +
                        std::to_string(digest_.column_count));
    }
    digest_.xor_hash ^= row_hash(row, opts_);
    digest_.row_count += 1;
}

ResultDigest digest(const std::vector<Row>& rows, DigestOptions opts) {
    DigestAccumulator acc(opts);
    for (const auto& row : rows) acc.add(row);
    return acc.finish();
}

} // namespace qsim
