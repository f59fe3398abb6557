#include "executor.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>

#include "qsim/error.hpp"
#include "qsim/sql/lower.hpp"

namespace qsim::engine::detail {

using namespace qsim::sql;

namespace {

// Deterministic cost model (milliseconds). Reported wall time must be
// reproducible across runs and thread counts, so it is derived from work
// done rather than measured.
constexpr double kCostBase = 1.0;
constexpr double kCostScanRow = 0.03;
constexpr double kCostPartition = 1.0;
constexpr double kCostEvalRow = 0.005;
constexpr double kCostJoinPair = 0.001;
constexpr double kCostHashRow = 0.004;
constexpr double kCostAggRow = 0.01;
constexpr double kCostGroup = 0.01;
constexpr double kCostSortRow = 0.004;
constexpr double kCostOutputRow = 0.001;
constexpr double kCostWriteRow = 0.02;

std::string lower_ascii(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

struct RelColumn {
    std::string qualifier; // display text; empty for derived columns
    std::string name;      // display text
    LogicalType type = LogicalType::Varchar;
};

struct Relation {
    std::vector<RelColumn> columns;
    std::vector<Row> rows;
};

bool ident_matches(const Identifier& id, const std::string& display) {
    if (id.quoted) return id.text == display;
    return lower_ascii(id.text) == lower_ascii(display);
}

struct Exec {
    Exec(ReferenceEngine& eng, std::map<std::string, TablePtr> cat, const FaultConfig* f,
         DigestOptions d)
        : engine(eng), catalog(std::move(cat)), faults(f), digest(d) {}

    ReferenceEngine& engine;
    std::map<std::string, TablePtr> catalog;
    const FaultConfig* faults = nullptr;
    DigestOptions digest;

    Metrics metrics;
    double cost = 0;
    // folded table name -> (rows scanned, partition size)
    std::map<std::string, std::pair<uint64_t, size_t>> table_rows;
    std::map<std::string, Relation> bindings; // folded WITH alias -> materialized
    std::unordered_map<const Expr*, PlanPtr> subplan_index;
    std::unordered_map<const PlanNode*, Relation> subquery_cache;

    void note_memory(size_t rows) {
        metrics.peak_rows_in_memory = std::max<uint64_t>(metrics.peak_rows_in_memory, rows);
    }
};

void index_subplans(Exec& ctx, const PlanPtr& node) {
    for (const auto& [expr, plan] : node->subplans) {
        ctx.subplan_index.emplace(expr, plan);
        index_subplans(ctx, plan);
    }
    for (const auto& child : node->children) index_subplans(ctx, child);
    for (const auto& [alias, plan] : node->bindings) index_subplans(ctx, plan);
}

Value engine_coerce(const Exec& ctx, const Value& v, LogicalType target) {
    if (ctx.faults && ctx.faults->coercion_bug && v.kind() == ValueKind::String &&
        target == LogicalType::Bigint) {
        return Value::null();
    }
    return coerce(v, target);
}

// ---- random/time scalars ----------------------------------------------------

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

uint64_t next_random() {
    static std::atomic<uint64_t> counter{
        static_cast<uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
    return splitmix64(counter.fetch_add(0x9e3779b97f4a7c15ULL));
}

int64_t epoch_seconds_now() {
    return static_cast<int64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                    std::chrono::system_clock::now().time_since_epoch())
                                    .count());
}

// ---- value operations -------------------------------------------------------

bool is_numeric(const Value& v) {
    return v.kind() == ValueKind::Int64 || v.kind() == ValueKind::Float64;
}

double numeric_as_double(const Value& v) {
    return v.kind() == ValueKind::Int64 ? static_cast<double>(v.as_int64()) : v.as_float64();
}

[[noreturn]] void type_error(const std::string& msg) { throw Error(ErrorCode::TypeError, msg); }

// Total order used by comparisons and sorting; NULL handled by callers.
int compare_values(const Value& a, const Value& b) {
    if (is_numeric(a) && is_numeric(b)) {
        if (a.kind() == ValueKind::Int64 && b.kind() == ValueKind::Int64) {
            int64_t x = a.as_int64(), y = b.as_int64();
            return x < y ? -1 : x > y ? 1 : 0;
        }
        double x = numeric_as_double(a), y = numeric_as_double(b);
        return x < y ? -1 : x > y ? 1 : 0;
    }
    if (a.kind() != b.kind()) {
        type_error("cannot compare " + a.to_string() + " with " + b.to_string());
    }
    switch (a.kind()) {
        case ValueKind::String: {
            int c = a.as_string().compare(b.as_string());
            return c < 0 ? -1 : c > 0 ? 1 : 0;
        }
        case ValueKind::Bool: return int(a.as_bool()) - int(b.as_bool());
        case ValueKind::Array: {
            const auto& x = a.as_array();
            const auto& y = b.as_array();
            for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
                if (x[i].is_null() || y[i].is_null()) type_error("cannot compare null array elements");
                int c = compare_values(x[i], y[i]);
                if (c != 0) return c;
            }
            return x.size() < y.size() ? -1 : x.size() > y.size() ? 1 : 0;
        }
        default: type_error("values are not comparable");
    }
}

Value bool3(bool b) { return Value::boolean(b); }

Value logical_and(const Value& a, const Value& b) {
    if (!a.is_null() && a.kind() != ValueKind::Bool) type_error("AND expects booleans");
    if (!b.is_null() && b.kind() != ValueKind::Bool) type_error("AND expects booleans");
    if (!a.is_null() && !a.as_bool()) return bool3(false);
    if (!b.is_null() && !b.as_bool()) return bool3(false);
    if (a.is_null() || b.is_null()) return Value::null();
    return bool3(true);
}

Value logical_or(const Value& a, const Value& b) {
    if (!a.is_null() && a.kind() != ValueKind::Bool) type_error("OR expects booleans");
    if (!b.is_null() && b.kind() != ValueKind::Bool) type_error("OR expects booleans");
    if (!a.is_null() && a.as_bool()) return bool3(true);
    if (!b.is_null() && b.as_bool()) return bool3(true);
    if (a.is_null() || b.is_null()) return Value::null();
    return bool3(false);
}

Value arithmetic(const std::string& op, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return Value::null();
    if (!is_numeric(a) || !is_numeric(b)) {
        type_error("operator " + op + " expects numeric operands");
    }
    if (a.kind() == ValueKind::Float64 || b.kind() == ValueKind::Float64) {
        double x = numeric_as_double(a), y = numeric_as_double(b);
        if (op == "+") return Value::float64(x + y);
        if (op == "-") return Value::float64(x - y);
        if (op == "*") return Value::float64(x * y);
        if (op == "/") return Value::float64(x / y);
        if (op == "%") return Value::float64(std::fmod(x, y));
    } else {
        int64_t x = a.as_int64(), y = b.as_int64();
        auto wrap = [](uint64_t v) { return static_cast<int64_t>(v); };
        if (op == "+") return Value::int64(wrap(uint64_t(x) + uint64_t(y)));
        if (op == "-") return Value::int64(wrap(uint64_t(x) - uint64_t(y)));
        if (op == "*") return Value::int64(wrap(uint64_t(x) * uint64_t(y)));
        if (op == "/") {
            if (y == 0) type_error("division by zero");
            return Value::int64(x / y);
        }
        if (op == "%") {
            if (y == 0) type_error("division by zero");
            return Value::int64(x % y);
        }
    }
    type_error("unknown operator " + op);
}

Value comparison(const std::string& op, const Value& a, const Value& b) {
    if (a.is_null() || b.is_null()) return Value::null();
    if (op == "=" || op == "!=") {
        bool eq;
        if (is_numeric(a) && is_numeric(b) && a.kind() != b.kind()) {
            eq = numeric_as_double(a) == numeric_as_double(b);
        } else if (a.kind() != b.kind()) {
            type_error("cannot compare values of different types");
        } else {
            eq = a == b;
        }
        return bool3(op == "=" ? eq : !eq);
    }
    int c = compare_values(a, b);
    if (op == "<") return bool3(c < 0);
    if (op == "<=") return bool3(c <= 0);
    if (op == ">") return bool3(c > 0);
    if (op == ">=") return bool3(c >= 0);
    type_error("unknown comparison " + op);
}

// ---- type inference for result schemas -------------------------------------

LogicalType infer_type(const Expr& e, const std::vector<RelColumn>& cols);

LogicalType infer_call_type(const Expr& e, const std::vector<RelColumn>& cols) {
    const std::string& f = e.func_name;
    if (f == "count" || f == "approx_distinct" || f == "length" || f == "now" ||
        f == "current_timestamp" || f == "current_date") {
        return LogicalType::Bigint;
    }
    if (f == "avg" || f == "random" || f == "rand" || f == "approx_percentile") {
        return LogicalType::Double;
    }
    if (f == "lower" || f == "upper" || f == "concat" || f == "uuid") return LogicalType::Varchar;
    if (f == "array_agg" || f == "result_digest") return LogicalType::Array;
    if (f == "sum" || f == "min" || f == "max" || f == "abs" || f == "arbitrary" ||
        f == "any_value" || f == "max_by" || f == "min_by" || f == "coalesce") {
        return e.args.empty() || e.args[0]->kind == ExprKind::Star
                   ? LogicalType::Bigint
                   : infer_type(*e.args[0], cols);
    }
    return LogicalType::Varchar;
}

LogicalType infer_type(const Expr& e, const std::vector<RelColumn>& cols) {
    switch (e.kind) {
        case ExprKind::Literal:
            switch (e.literal.kind()) {
                case ValueKind::Bool: return LogicalType::Boolean;
                case ValueKind::Int64: return LogicalType::Bigint;
                case ValueKind::Float64: return LogicalType::Double;
                case ValueKind::Array: return LogicalType::Array;
                case ValueKind::Map: return LogicalType::Map;
                default: return LogicalType::Varchar;
            }
        case ExprKind::ColumnRef:
            for (const auto& c : cols) {
                if (ident_matches(e.column, c.name) &&
                    (!e.qualifier || ident_matches(*e.qualifier, c.qualifier))) {
                    return c.type;
                }
            }
            return LogicalType::Varchar;
        case ExprKind::Cast: return e.cast_type;
        case ExprKind::Unary:
            if (e.op == "NOT") return LogicalType::Boolean;
            return e.right ? infer_type(*e.right, cols) : LogicalType::Bigint;
        case ExprKind::Binary: {
            if (e.op == "AND" || e.op == "OR" || e.op == "=" || e.op == "!=" || e.op == "<" ||
                e.op == "<=" || e.op == ">" || e.op == ">=") {
                return LogicalType::Boolean;
            }
            if (e.op == "||") return LogicalType::Varchar;
            LogicalType l = e.left ? infer_type(*e.left, cols) : LogicalType::Bigint;
            LogicalType r = e.right ? infer_type(*e.right, cols) : LogicalType::Bigint;
            if (l == LogicalType::Double || r == LogicalType::Double) return LogicalType::Double;
            return LogicalType::Bigint;
        }
        case ExprKind::IsNull:
        case ExprKind::InSubquery:
        case ExprKind::InList: return LogicalType::Boolean;
        case ExprKind::FunctionCall: return infer_call_type(e, cols);
        case ExprKind::ScalarSubquery: return LogicalType::Varchar; // resolved at runtime
        case ExprKind::Star: return LogicalType::Varchar;
    }
    return LogicalType::Varchar;
}

// ---- expression evaluation --------------------------------------------------

Relation exec_plan(Exec& ctx, const PlanPtr& node, std::optional<int64_t> limit_hint);

struct EvalScope {
    Exec& ctx;
    const std::vector<RelColumn>& cols;
};

const Relation& subquery_relation(Exec& ctx, const Expr& e) {
    auto pit = ctx.subplan_index.find(&e);
    if (pit == ctx.subplan_index.end()) {
        throw Error(ErrorCode::SemanticError, "subquery was not lowered with its statement");
    }
    const PlanPtr& plan = pit->second;
    auto it = ctx.subquery_cache.find(plan.get());
    if (it == ctx.subquery_cache.end()) {
        Relation rel = exec_plan(ctx, plan, std::nullopt);
        it = ctx.subquery_cache.emplace(plan.get(), std::move(rel)).first;
    }
    return it->second;
}

size_t resolve_column(const std::vector<RelColumn>& cols, const Expr& e) {
    size_t found = cols.size();
    int matches = 0;
    for (size_t i = 0; i < cols.size(); ++i) {
        if (!ident_matches(e.column, cols[i].name)) continue;
        if (e.qualifier && !ident_matches(*e.qualifier, cols[i].qualifier)) continue;
        found = i;
        ++matches;
    }
    if (matches == 0) {
        std::string name = e.qualifier ? e.qualifier->text + "." + e.column.text : e.column.text;
        throw Error(ErrorCode::UnknownColumn, "column not found: " + name);
    }
    if (matches > 1) {
        throw Error(ErrorCode::UnknownColumn, "ambiguous column: " + e.column.text);
    }
    return found;
}

Value eval_expr(const EvalScope& scope, const Row& row, const Expr& e);

Value eval_scalar_call(const EvalScope& scope, const Row& row, const Expr& e) {
    const std::string& f = e.func_name;
    if (e.window) {
        throw Error(ErrorCode::UnsupportedFeature, "window functions are not executable");
    }
    if (is_aggregate_function(f)) {
        type_error("aggregate function " + f + " outside aggregation context");
    }
    auto arg = [&](size_t i) { return eval_expr(scope, row, *e.args[i]); };
    auto need_args = [&](size_t n) {
        if (e.args.size() != n) type_error(f + " expects " + std::to_string(n) + " arguments");
    };

    if (f == "abs") {
        need_args(1);
        Value v = arg(0);
        if (v.is_null()) return v;
        if (v.kind() == ValueKind::Int64) return Value::int64(std::abs(v.as_int64()));
        if (v.kind() == ValueKind::Float64) return Value::float64(std::fabs(v.as_float64()));
        type_error("abs expects a numeric argument");
    }
    if (f == "length") {
        need_args(1);
        Value v = arg(0);
        if (v.is_null()) return v;
        if (v.kind() == ValueKind::String) {
            return Value::int64(static_cast<int64_t>(v.as_string().size()));
        }
        if (v.kind() == ValueKind::Array) {
            return Value::int64(static_cast<int64_t>(v.as_array().size()));
        }
        type_error("length expects a string or array");
    }
    if (f == "lower" || f == "upper") {
        need_args(1);
        Value v = arg(0);
        if (v.is_null()) return v;
        if (v.kind() != ValueKind::String) type_error(f + " expects a string");
        std::string s = v.as_string();
        for (char& c : s) {
            c = f == "lower" ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                             : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        }
        return Value::string(std::move(s));
    }
    if (f == "concat") {
        std::string out;
        for (size_t i = 0; i < e.args.size(); ++i) {
            Value v = arg(i);
            if (v.is_null()) return Value::null();
            Value s = coerce(v, LogicalType::Varchar);
            if (s.is_null()) type_error("concat argument is not a string");
            out += s.as_string();
        }
        return Value::string(std::move(out));
    }
    if (f == "coalesce") {
        for (size_t i = 0; i < e.args.size(); ++i) {
            Value v = arg(i);
            if (!v.is_null()) return v;
        }
        return Value::null();
    }
    if (f == "now" || f == "current_timestamp") return Value::int64(epoch_seconds_now());
    if (f == "current_date") return Value::int64(epoch_seconds_now() / 86400 * 86400);
    if (f == "random" || f == "rand") {
        return Value::float64(static_cast<double>(next_random() >> 11) * 0x1.0p-53);
    }
    if (f == "uuid") {
        char buf[40];
        uint64_t a = next_random(), b = next_random();
        std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                      static_cast<unsigned>(a >> 32), static_cast<unsigned>((a >> 16) & 0xffff),
                      static_cast<unsigned>(a & 0xffff), static_cast<unsigned>(b >> 48),
                      static_cast<unsigned long long>(b & 0xffffffffffffULL));
        return Value::string(buf);
    }
    throw Error(ErrorCode::UnsupportedFeature, "unknown function: " + f);
}

Value eval_expr(const EvalScope& scope, const Row& row, const Expr& e) {
    switch (e.kind) {
        case ExprKind::Literal: return e.literal;
        case ExprKind::ColumnRef: return row[resolve_column(scope.cols, e)];
        case ExprKind::Star: type_error("'*' is only valid as an aggregate argument");
        case ExprKind::FunctionCall: return eval_scalar_call(scope, row, e);
        case ExprKind::Unary: {
            Value v = eval_expr(scope, row, *e.right);
            if (e.op == "-") {
                if (v.is_null()) return v;
                if (v.kind() == ValueKind::Int64) return Value::int64(-v.as_int64());
                if (v.kind() == ValueKind::Float64) return Value::float64(-v.as_float64());
                type_error("unary minus expects a number");
            }
            if (e.op == "NOT") {
                if (v.is_null()) return v;
                if (v.kind() != ValueKind::Bool) type_error("NOT expects a boolean");
                return bool3(!v.as_bool());
            }
            type_error("unknown unary operator " + e.op);
        }
        case ExprKind::Binary: {
            if (e.op == "AND") {
                return logical_and(eval_expr(scope, row, *e.left), eval_expr(scope, row, *e.right));
            }
            if (e.op == "OR") {
                return logical_or(eval_expr(scope, row, *e.left), eval_expr(scope, row, *e.right));
            }
            Value a = eval_expr(scope, row, *e.left);
            Value b = eval_expr(scope, row, *e.right);
            if (e.op == "+" || e.op == "-" || e.op == "*" || e.op == "/" || e.op == "%") {
                return arithmetic(e.op, a, b);
            }
            if (e.op == "||") {
                if (a.is_null() || b.is_null()) return Value::null();
                Value x = coerce(a, LogicalType::Varchar);
                Value y = coerce(b, LogicalType::Varchar);
                if (x.is_null() || y.is_null()) type_error("|| expects strings");
                return Value::string(x.as_string() + y.as_string());
            }
            return comparison(e.op, a, b);
        }
        case ExprKind::IsNull: {
            Value v = eval_expr(scope, row, *e.left);
            return bool3(e.negated ? !v.is_null() : v.is_null());
        }
        case ExprKind::Cast:
            return engine_coerce(scope.ctx, eval_expr(scope, row, *e.left), e.cast_type);
        case ExprKind::ScalarSubquery: {
            const Relation& rel = subquery_relation(scope.ctx, e);
            if (rel.columns.size() != 1) type_error("scalar subquery must return one column");
            if (rel.rows.empty()) return Value::null();
            if (rel.rows.size() > 1) type_error("scalar subquery returned more than one row");
            return rel.rows[0][0];
        }
        case ExprKind::InSubquery: {
            const Relation& rel = subquery_relation(scope.ctx, e);
            if (rel.columns.size() != 1) type_error("IN subquery must return one column");
            Value probe = eval_expr(scope, row, *e.left);
            if (rel.rows.empty()) return bool3(e.negated);
            if (probe.is_null()) return Value::null();
            bool saw_null = false;
            for (const auto& r : rel.rows) {
                if (r[0].is_null()) {
                    saw_null = true;
                    continue;
                }
                Value eq = comparison("=", probe, r[0]);
                if (!eq.is_null() && eq.as_bool()) return bool3(!e.negated);
            }
            if (saw_null) return Value::null();
            return bool3(e.negated);
        }
        case ExprKind::InList: {
            Value probe = eval_expr(scope, row, *e.left);
            if (e.in_list.empty()) return bool3(e.negated);
            if (probe.is_null()) return Value::null();
            bool saw_null = false;
            for (const auto& el : e.in_list) {
                Value v = eval_expr(scope, row, *el);
                if (v.is_null()) {
                    saw_null = true;
                    continue;
                }
                Value eq = comparison("=", probe, v);
                if (!eq.is_null() && eq.as_bool()) return bool3(!e.negated);
            }
            if (saw_null) return Value::null();
            return bool3(e.negated);
        }
    }
    type_error("unknown expression kind");
}

bool is_true(const Value& v) { return v.kind() == ValueKind::Bool && v.as_bool(); }

// ---- aggregation ------------------------------------------------------------

std::string encode_key(const Row& values) {
    std::vector<uint8_t> bytes;
    for (const auto& v : values) canonical_encode(v, bytes);
    return std::string(bytes.begin(), bytes.end());
}

Value compute_aggregate(const EvalScope& scope, const std::vector<const Row*>& group,
                        const Expr& call) {
    const std::string& f = call.func_name;
    bool flip_ties = scope.ctx.faults && scope.ctx.faults->tie_break_flip;
    bool reverse_floats = scope.ctx.faults && scope.ctx.faults->float_reverse_sum;

    auto eval_arg = [&](const Row* row, size_t i) { return eval_expr(scope, *row, *call.args[i]); };

    if (f == "count") {
        if (call.args.empty() || call.args[0]->kind == ExprKind::Star) {
            return Value::int64(static_cast<int64_t>(group.size()));
        }
        if (call.distinct_arg) {
            std::set<std::string> seen;
            for (const Row* row : group) {
                Value v = eval_arg(row, 0);
                if (!v.is_null()) seen.insert(encode_key({v}));
            }
            return Value::int64(static_cast<int64_t>(seen.size()));
        }
        int64_t n = 0;
        for (const Row* row : group) {
            if (!eval_arg(row, 0).is_null()) ++n;
        }
        return Value::int64(n);
    }
    if (call.distinct_arg && f != "approx_distinct") {
        throw Error(ErrorCode::UnsupportedFeature, "DISTINCT is only supported for count()");
    }
    if (f == "sum" || f == "avg") {
        std::vector<Value> vals;
        bool any_float = false;
        for (const Row* row : group) {
            Value v = eval_arg(row, 0);
            if (v.is_null()) continue;
            if (!is_numeric(v)) type_error(f + " expects numeric values");
            if (v.kind() == ValueKind::Float64) any_float = true;
            vals.push_back(std::move(v));
        }
        if (vals.empty()) return Value::null();
        if (f == "avg" || any_float) {
            double sum = 0;
            if (reverse_floats) {
                for (auto it = vals.rbegin(); it != vals.rend(); ++it) sum += numeric_as_double(*it);
            } else {
                for (const auto& v : vals) sum += numeric_as_double(v);
            }
            if (f == "avg") return Value::float64(sum / static_cast<double>(vals.size()));
            return Value::float64(sum);
        }
        uint64_t acc = 0;
        for (const auto& v : vals) acc += static_cast<uint64_t>(v.as_int64());
        return Value::int64(static_cast<int64_t>(acc));
    }
    if (f == "min" || f == "max") {
        std::optional<Value> best;
        for (const Row* row : group) {
            Value v = eval_arg(row, 0);
            if (v.is_null()) continue;
            if (!best) {
                best = std::move(v);
                continue;
            }
            int c = compare_values(v, *best);
            if ((f == "min" && c < 0) || (f == "max" && c > 0)) best = std::move(v);
        }
        return best ? *best : Value::null();
    }
    if (f == "max_by" || f == "min_by") {
        if (call.args.size() != 2) type_error(f + " expects two arguments");
        std::optional<Value> best_key;
        Value best_val;
        for (const Row* row : group) {
            Value key = eval_arg(row, 1);
            if (key.is_null()) continue;
            if (!best_key) {
                best_key = key;
                best_val = eval_arg(row, 0);
                continue;
            }
            int c = compare_values(key, *best_key);
            bool better = f == "max_by" ? c > 0 : c < 0;
            // ties keep the first row encountered; the fault variant keeps
            // replacing, so the last tie wins instead
            if (better || (c == 0 && flip_ties)) {
                best_key = key;
                best_val = eval_arg(row, 0);
            }
        }
        return best_key ? best_val : Value::null();
    }
    if (f == "arbitrary" || f == "any_value") {
        for (const Row* row : group) {
            Value v = eval_arg(row, 0);
            if (!v.is_null()) return v;
        }
        return Value::null();
    }
    if (f == "array_agg") {
        std::vector<size_t> order(group.size());
        for (size_t i = 0; i < group.size(); ++i) order[i] = i;
        if (!call.agg_order_by.empty()) {
            std::vector<Row> keys(group.size());
            for (size_t i = 0; i < group.size(); ++i) {
                for (const auto& k : call.agg_order_by) {
                    keys[i].push_back(eval_expr(scope, *group[i], *k.expr));
                }
            }
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                for (size_t k = 0; k < call.agg_order_by.size(); ++k) {
                    const Value& x = keys[a][k];
                    const Value& y = keys[b][k];
                    bool asc = call.agg_order_by[k].ascending;
                    if (x.is_null() && y.is_null()) continue;
                    if (x.is_null()) return !asc; // null sorts as largest
                    if (y.is_null()) return asc;
                    int c = compare_values(x, y);
                    if (c != 0) return asc ? c < 0 : c > 0;
                }
                return false;
            });
        }
        Value::Array out;
        out.reserve(group.size());
        for (size_t i : order) out.push_back(eval_arg(group[i], 0));
        return Value::array(std::move(out));
    }
    if (f == "approx_distinct") {
        std::set<std::string> seen;
        for (const Row* row : group) {
            Value v = eval_arg(row, 0);
            if (!v.is_null()) seen.insert(encode_key({v}));
        }
        return Value::int64(static_cast<int64_t>(seen.size()));
    }
    if (f == "approx_percentile") {
        if (call.args.size() != 2) type_error("approx_percentile expects two arguments");
        std::vector<double> vals;
        for (const Row* row : group) {
            Value v = eval_arg(row, 0);
            if (v.is_null()) continue;
            if (!is_numeric(v)) type_error("approx_percentile expects numeric values");
            vals.push_back(numeric_as_double(v));
        }
        if (vals.empty()) return Value::null();
        Value q = eval_arg(group[0], 1);
        if (q.is_null() || !is_numeric(q)) type_error("approx_percentile quantile must be numeric");
        double frac = std::clamp(numeric_as_double(q), 0.0, 1.0);
        std::sort(vals.begin(), vals.end());
        size_t rank = static_cast<size_t>(std::ceil(frac * static_cast<double>(vals.size())));
        rank = std::clamp<size_t>(rank, 1, vals.size());
        return Value::float64(vals[rank - 1]);
    }
    if (f == "result_digest") {
        DigestAccumulator acc(scope.ctx.digest);
        for (const Row* row : group) acc.add(*row);
        ResultDigest d = acc.finish();
        uint64_t cols = group.empty() ? scope.cols.size() : d.column_count;
        Value::Array out;
        out.push_back(Value::int64(static_cast<int64_t>(d.xor_hash)));
        out.push_back(Value::int64(static_cast<int64_t>(d.row_count)));
        out.push_back(Value::int64(static_cast<int64_t>(cols)));
        return Value::array(std::move(out));
    }
    throw Error(ErrorCode::UnsupportedFeature, "unknown aggregate: " + f);
}

// Evaluates a select-list expression in group context: aggregates compute
// over the group, everything else evaluates against the group's first row.
Value eval_group_expr(const EvalScope& scope, const std::vector<const Row*>& group,
                      const Row& fallback_row, const Expr& e) {
    switch (e.kind) {
        case ExprKind::FunctionCall:
            if (e.window) {
                throw Error(ErrorCode::UnsupportedFeature, "window functions are not executable");
            }
            if (is_aggregate_function(e.func_name)) {
                return compute_aggregate(scope, group, e);
            }
            return eval_expr(scope, group.empty() ? fallback_row : *group[0], e);
        case ExprKind::Unary: {
            Value v = eval_group_expr(scope, group, fallback_row, *e.right);
            if (e.op == "-") {
                if (v.is_null()) return v;
                if (v.kind() == ValueKind::Int64) return Value::int64(-v.as_int64());
                if (v.kind() == ValueKind::Float64) return Value::float64(-v.as_float64());
                type_error("unary minus expects a number");
            }
            if (e.op == "NOT") {
                if (v.is_null()) return v;
                if (v.kind() != ValueKind::Bool) type_error("NOT expects a boolean");
                return bool3(!v.as_bool());
            }
            type_error("unknown unary operator " + e.op);
        }
        case ExprKind::Binary: {
            if (e.op == "AND") {
                return logical_and(eval_group_expr(scope, group, fallback_row, *e.left),
                                   eval_group_expr(scope, group, fallback_row, *e.right));
            }
            if (e.op == "OR") {
                return logical_or(eval_group_expr(scope, group, fallback_row, *e.left),
                                  eval_group_expr(scope, group, fallback_row, *e.right));
            }
            Value a = eval_group_expr(scope, group, fallback_row, *e.left);
            Value b = eval_group_expr(scope, group, fallback_row, *e.right);
            if (e.op == "+" || e.op == "-" || e.op == "*" || e.op == "/" || e.op == "%") {
                return arithmetic(e.op, a, b);
            }
            if (e.op == "||") {
                if (a.is_null() || b.is_null()) return Value::null();
                Value x = coerce(a, LogicalType::Varchar);
                Value y = coerce(b, LogicalType::Varchar);
                if (x.is_null() || y.is_null()) type_error("|| expects strings");
                return Value::string(x.as_string() + y.as_string());
            }
            return comparison(e.op, a, b);
        }
        case ExprKind::IsNull: {
            Value v = eval_group_expr(scope, group, fallback_row, *e.left);
            return bool3(e.negated ? !v.is_null() : v.is_null());
        }
        case ExprKind::Cast:
            return engine_coerce(scope.ctx, eval_group_expr(scope, group, fallback_row, *e.left),
                                 e.cast_type);
        case ExprKind::InList: {
            Value probe = eval_group_expr(scope, group, fallback_row, *e.left);
            if (e.in_list.empty()) return bool3(e.negated);
            if (probe.is_null()) return Value::null();
            bool saw_null = false;
            for (const auto& el : e.in_list) {
                Value v = eval_group_expr(scope, group, fallback_row, *el);
                if (v.is_null()) {
                    saw_null = true;
                    continue;
                }
                Value eq = comparison("=", probe, v);
                if (!eq.is_null() && eq.as_bool()) return bool3(!e.negated);
            }
            if (saw_null) return Value::null();
            return bool3(e.negated);
        }
        case ExprKind::InSubquery: {
            const Relation& rel = subquery_relation(scope.ctx, e);
            if (rel.columns.size() != 1) type_error("IN subquery must return one column");
            Value probe = eval_group_expr(scope, group, fallback_row, *e.left);
            if (rel.rows.empty()) return bool3(e.negated);
            if (probe.is_null()) return Value::null();
            bool saw_null = false;
            for (const auto& r : rel.rows) {
                if (r[0].is_null()) {
                    saw_null = true;
                    continue;
                }
                Value eq = comparison("=", probe, r[0]);
                if (!eq.is_null() && eq.as_bool()) return bool3(!e.negated);
            }
            if (saw_null) return Value::null();
            return bool3(e.negated);
        }
        default:
            return eval_expr(scope, group.empty() ? fallback_row : *group[0], e);
    }
}

// ---- plan execution ---------------------------------------------------------

std::pair<std::string, TablePtr> lookup_table(const Exec& ctx, const Identifier& name) {
    if (name.quoted) {
        for (const auto& [key, table] : ctx.catalog) {
            if (table->name == name.text) return {key, table};
        }
        // fall through to the folded lookup so quoted lowercase names work
    }
    auto it = ctx.catalog.find(lower_ascii(name.text));
    if (it != ctx.catalog.end()) return {it->first, it->second};
    throw Error(ErrorCode::UnknownTable, "table not found: " + name.text);
}

std::string output_name(const SelectItem& item, size_t index) {
    if (item.alias) return item.alias->text;
    if (item.expr->kind == ExprKind::ColumnRef) return item.expr->column.text;
    return "_col" + std::to_string(index);
}

Relation exec_scan(Exec& ctx, const PlanNode& node, std::optional<int64_t> limit_hint) {
    std::string qualifier = node.alias ? node.alias->text : node.table.text;

    if (node.is_with_alias) {
        auto it = ctx.bindings.find(node.table.folded());
        if (it == ctx.bindings.end()) {
            throw Error(ErrorCode::SemanticError, "unbound WITH alias: " + node.table.text);
        }
        Relation rel = it->second; // re-reads of a materialized binding are free
        for (auto& c : rel.columns) c.qualifier = qualifier;
        if (limit_hint && rel.rows.size() > static_cast<size_t>(*limit_hint)) {
            rel.rows.resize(static_cast<size_t>(*limit_hint));
        }
        return rel;
    }

    auto [key, table] = lookup_table(ctx, node.table);
    size_t to_read = table->rows.size();
    if (limit_hint && *limit_hint >= 0) {
        to_read = std::min(to_read, static_cast<size_t>(*limit_hint));
    }

    Relation rel;
    rel.columns.reserve(table->columns.size());
    for (const auto& col : table->columns) {
        rel.columns.push_back({qualifier, col.name, col.type});
    }
    rel.rows.reserve(to_read);
    for (size_t r = 0; r < to_read; ++r) {
        const Row& phys = table->rows[r];
        Row row;
        row.reserve(phys.size());
        for (size_t c = 0; c < phys.size(); ++c) {
            row.push_back(engine_coerce(ctx, phys[c], table->columns[c].type));
        }
        rel.rows.push_back(std::move(row));
    }

    ctx.metrics.rows_scanned += to_read;
    auto& entry = ctx.table_rows[key];
    entry.first += to_read;
    entry.second = table->partition_size;
    ctx.cost += static_cast<double>(to_read) * kCostScanRow;
    ctx.note_memory(rel.rows.size());
    return rel;
}

Relation exec_join(Exec& ctx, const PlanNode& node) {
    Relation left = exec_plan(ctx, node.children[0], std::nullopt);
    Relation right = exec_plan(ctx, node.children[1], std::nullopt);

    Relation out;
    out.columns = left.columns;
    out.columns.insert(out.columns.end(), right.columns.begin(), right.columns.end());
    ctx.note_memory(left.rows.size() + right.rows.size());

    size_t lw = left.columns.size();
    size_t rw = right.columns.size();
    auto emit = [&](const Row* l, const Row* r) {
        Row row;
        row.reserve(lw + rw);
        if (l) row.insert(row.end(), l->begin(), l->end());
        else row.insert(row.end(), lw, Value::null());
        if (r) row.insert(row.end(), r->begin(), r->end());
        else row.insert(row.end(), rw, Value::null());
        out.rows.push_back(std::move(row));
    };

    if (node.join_kind == JoinKind::Cross) {
        for (const auto& l : left.rows) {
            for (const auto& r : right.rows) emit(&l, &r);
        }
        ctx.cost += static_cast<double>(left.rows.size()) * static_cast<double>(right.rows.size()) *
                    kCostJoinPair;
        ctx.note_memory(out.rows.size());
        return out;
    }

    // Hash path for a single side-exclusive equality; nested loop otherwise.
    const Expr* lkey = nullptr;
    const Expr* rkey = nullptr;
    if (node.condition && node.condition->kind == ExprKind::Binary && node.condition->op == "=" &&
        node.condition->left && node.condition->right) {
        // A key expression is usable on one side only when every column
        // reference binds uniquely there and touches nothing on the other
        // side; anything ambiguous falls back to the nested loop, which
        // resolves in the combined scope and reports the ambiguity.
        auto hits = [](const Expr& x, const std::vector<RelColumn>& cols) {
            int n = 0;
            for (const auto& c : cols) {
                if (ident_matches(x.column, c.name) &&
                    (!x.qualifier || ident_matches(*x.qualifier, c.qualifier))) {
                    ++n;
                }
            }
            return n;
        };
        auto exclusive = [&](const Expr& e, const std::vector<RelColumn>& own,
                             const std::vector<RelColumn>& other) {
            std::function<bool(const Expr&)> walk = [&](const Expr& x) -> bool {
                if (x.kind == ExprKind::ColumnRef) {
                    return hits(x, own) == 1 && hits(x, other) == 0;
                }
                if (x.kind == ExprKind::ScalarSubquery || x.kind == ExprKind::InSubquery ||
                    x.kind == ExprKind::Star) {
                    return false;
                }
                if (x.left && !walk(*x.left)) return false;
                if (x.right && !walk(*x.right)) return false;
                for (const auto& a : x.args) {
                    if (!walk(*a)) return false;
                }
                for (const auto& el : x.in_list) {
                    if (!walk(*el)) return false;
                }
                return true;
            };
            return walk(e);
        };
        const Expr& cl = *node.condition->left;
        const Expr& cr = *node.condition->right;
        if (exclusive(cl, left.columns, right.columns) &&
            exclusive(cr, right.columns, left.columns)) {
            lkey = &cl;
            rkey = &cr;
        } else if (exclusive(cr, left.columns, right.columns) &&
                   exclusive(cl, right.columns, left.columns)) {
            lkey = &cr;
            rkey = &cl;
        }
    }

    std::vector<bool> right_matched(right.rows.size(), false);

    if (lkey) {
        EvalScope lscope{ctx, left.columns};
        EvalScope rscope{ctx, right.columns};
        std::unordered_map<std::string, std::vector<size_t>> index;
        for (size_t i = 0; i < right.rows.size(); ++i) {
            Value key = eval_expr(rscope, right.rows[i], *rkey);
            if (key.is_null()) continue;
            index[encode_key({key})].push_back(i);
        }
        for (const auto& l : left.rows) {
            Value key = eval_expr(lscope, l, *lkey);
            bool matched = false;
            if (!key.is_null()) {
                auto it = index.find(encode_key({key}));
                if (it != index.end()) {
                    for (size_t ri : it->second) {
                        emit(&l, &right.rows[ri]);
                        right_matched[ri] = true;
                        matched = true;
                    }
                }
            }
            if (!matched && (node.join_kind == JoinKind::Left || node.join_kind == JoinKind::Full)) {
                emit(&l, nullptr);
            }
        }
        ctx.cost += (static_cast<double>(left.rows.size()) +
                     static_cast<double>(right.rows.size())) *
                        kCostHashRow +
                    static_cast<double>(out.rows.size()) * kCostOutputRow;
    } else {
        EvalScope scope{ctx, out.columns};
        for (const auto& l : left.rows) {
            bool matched = false;
            for (size_t ri = 0; ri < right.rows.size(); ++ri) {
                Row combined;
                combined.reserve(lw + rw);
                combined.insert(combined.end(), l.begin(), l.end());
                combined.insert(combined.end(), right.rows[ri].begin(), right.rows[ri].end());
                Value cond =
                    node.condition ? eval_expr(scope, combined, *node.condition) : bool3(true);
                if (is_true(cond)) {
                    out.rows.push_back(std::move(combined));
                    right_matched[ri] = true;
                    matched = true;
                }
            }
            if (!matched &&
                (node.join_kind == JoinKind::Left || node.join_kind == JoinKind::Full)) {
                emit(&l, nullptr);
            }
        }
        ctx.cost += static_cast<double>(left.rows.size()) * static_cast<double>(right.rows.size()) *
                    kCostJoinPair;
    }

    if (node.join_kind == JoinKind::Right || node.join_kind == JoinKind::Full) {
        for (size_t i = 0; i < right.rows.size(); ++i) {
            if (!right_matched[i]) emit(nullptr, &right.rows[i]);
        }
    }
    ctx.note_memory(out.rows.size());
    return out;
}

Relation exec_project(Exec& ctx, const PlanNode& node, std::optional<int64_t> limit_hint) {
    if (node.star) {
        Relation rel = exec_plan(ctx, node.children[0], limit_hint);
        ctx.cost += static_cast<double>(rel.rows.size()) * kCostOutputRow;
        return rel;
    }
    Relation input = exec_plan(ctx, node.children[0], limit_hint);
    EvalScope scope{ctx, input.columns};

    Relation out;
    out.columns.reserve(node.items.size());
    for (size_t i = 0; i < node.items.size(); ++i) {
        out.columns.push_back(
            {"", output_name(node.items[i], i), infer_type(*node.items[i].expr, input.columns)});
    }
    out.rows.reserve(input.rows.size());
    for (const auto& row : input.rows) {
        Row result;
        result.reserve(node.items.size());
        for (const auto& item : node.items) result.push_back(eval_expr(scope, row, *item.expr));
        out.rows.push_back(std::move(result));
    }
    ctx.cost += static_cast<double>(input.rows.size()) * static_cast<double>(node.items.size()) *
                kCostEvalRow;
    ctx.note_memory(out.rows.size() + input.rows.size());
    return out;
}

Relation exec_aggregate(Exec& ctx, const PlanNode& node) {
    const PlanNode& project = *node.children[0];
    if (project.kind != PlanKind::Project) {
        throw Error(ErrorCode::SemanticError, "aggregate requires a projection below it");
    }
    Relation input = exec_plan(ctx, project.children[0], std::nullopt);
    EvalScope scope{ctx, input.columns};

    // resolve group keys; integer literals are 1-based select-list ordinals
    std::vector<const Expr*> keys;
    for (const auto& k : node.group_keys) {
        if (k->kind == ExprKind::Literal && k->literal.kind() == ValueKind::Int64) {
            int64_t ord = k->literal.as_int64();
            if (ord < 1 || ord > static_cast<int64_t>(project.items.size())) {
                throw Error(ErrorCode::SemanticError,
                            "GROUP BY ordinal out of range: " + std::to_string(ord));
            }
            keys.push_back(project.items[static_cast<size_t>(ord - 1)].expr.get());
        } else {
            keys.push_back(k.get());
        }
    }

    std::vector<std::vector<const Row*>> groups;
    if (keys.empty()) {
        groups.emplace_back();
        for (const auto& row : input.rows) groups[0].push_back(&row);
    } else {
        std::unordered_map<std::string, size_t> index;
        for (const auto& row : input.rows) {
            Row key_vals;
            key_vals.reserve(keys.size());
            for (const Expr* k : keys) key_vals.push_back(eval_expr(scope, row, *k));
            auto [it, inserted] = index.try_emplace(encode_key(key_vals), groups.size());
            if (inserted) groups.emplace_back();
            groups[it->second].push_back(&row);
        }
    }

    Relation out;
    out.columns.reserve(project.items.size());
    for (size_t i = 0; i < project.items.size(); ++i) {
        out.columns.push_back({"", output_name(project.items[i], i),
                               infer_type(*project.items[i].expr, input.columns)});
    }

    Row empty_row(input.columns.size(), Value::null());
    for (const auto& group : groups) {
        if (node.having && !is_true(eval_group_expr(scope, group, empty_row, *node.having))) {
            continue;
        }
        Row result;
        result.reserve(project.items.size());
        for (const auto& item : project.items) {
            result.push_back(eval_group_expr(scope, group, empty_row, *item.expr));
        }
        out.rows.push_back(std::move(result));
    }

    ctx.cost += static_cast<double>(input.rows.size()) * kCostAggRow +
                static_cast<double>(groups.size()) * kCostGroup;
    ctx.note_memory(input.rows.size() + out.rows.size());
    return out;
}

// Finds the projection that produced a relation, looking through the nodes
// that preserve output columns. ORDER BY may reference select items
// structurally (e.g. ORDER BY count(*)).
const PlanNode* projection_below(const PlanNode& node) {
    switch (node.kind) {
        case PlanKind::Project: return &node;
        case PlanKind::Aggregate:
        case PlanKind::Distinct:
        case PlanKind::Limit:
        case PlanKind::Sort:
        case PlanKind::WithBinding: return projection_below(*node.children[0]);
        default: return nullptr;
    }
}

Relation exec_sort(Exec& ctx, const PlanNode& node) {
    Relation rel = exec_plan(ctx, node.children[0], std::nullopt);
    EvalScope scope{ctx, rel.columns};
    const PlanNode* projection = projection_below(*node.children[0]);

    // map each key to an output ordinal when possible, else evaluate it
    std::vector<int> key_ordinal(node.sort_keys.size(), -1);
    for (size_t k = 0; k < node.sort_keys.size(); ++k) {
        const Expr& e = *node.sort_keys[k].expr;
        if (e.kind == ExprKind::Literal && e.literal.kind() == ValueKind::Int64) {
            int64_t ord = e.literal.as_int64();
            if (ord < 1 || ord > static_cast<int64_t>(rel.columns.size())) {
                throw Error(ErrorCode::SemanticError,
                            "ORDER BY ordinal out of range: " + std::to_string(ord));
            }
            key_ordinal[k] = static_cast<int>(ord - 1);
        } else if (projection && !projection->star) {
            for (size_t i = 0; i < projection->items.size(); ++i) {
                if (equal(e, *projection->items[i].expr)) {
                    key_ordinal[k] = static_cast<int>(i);
                    break;
                }
            }
        }
    }

    std::vector<Row> keys(rel.rows.size());
    for (size_t r = 0; r < rel.rows.size(); ++r) {
        for (size_t k = 0; k < node.sort_keys.size(); ++k) {
            if (key_ordinal[k] >= 0) {
                keys[r].push_back(rel.rows[r][static_cast<size_t>(key_ordinal[k])]);
            } else {
                keys[r].push_back(eval_expr(scope, rel.rows[r], *node.sort_keys[k].expr));
            }
        }
    }

    std::vector<size_t> order(rel.rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        for (size_t k = 0; k < node.sort_keys.size(); ++k) {
            const Value& x = keys[a][k];
            const Value& y = keys[b][k];
            bool asc = node.sort_keys[k].ascending;
            if (x.is_null() && y.is_null()) continue;
            if (x.is_null()) return !asc; // null sorts as largest
            if (y.is_null()) return asc;
            int c = compare_values(x, y);
            if (c != 0) return asc ? c < 0 : c > 0;
        }
        return false;
    });

    Relation out;
    out.columns = rel.columns;
    out.rows.reserve(rel.rows.size());
    for (size_t i : order) out.rows.push_back(std::move(rel.rows[i]));
    double n = static_cast<double>(out.rows.size());
    ctx.cost += n * std::log2(n + 2.0) * kCostSortRow;
    ctx.note_memory(out.rows.size());
    return out;
}

Relation exec_dml(Exec& ctx, const PlanNode& node) {
    auto count_result = [](int64_t n) {
        Relation rel;
        rel.columns.push_back({"", "rows", LogicalType::Bigint});
        rel.rows.push_back({Value::int64(n)});
        return rel;
    };

    switch (node.kind) {
        case PlanKind::InsertInto: {
            auto [key, table] = lookup_table(ctx, node.target);
            Relation child = exec_plan(ctx, node.children[0], std::nullopt);
            if (child.columns.size() != table->columns.size()) {
                throw Error(ErrorCode::TypeError,
                            "INSERT column count mismatch: query produces " +
                                std::to_string(child.columns.size()) + ", table has " +
                                std::to_string(table->columns.size()));
            }
            auto updated = std::make_shared<TableData>(*table);
            int64_t n = static_cast<int64_t>(child.rows.size());
            for (auto& row : child.rows) updated->rows.push_back(std::move(row));
            ctx.engine.put_table(std::move(updated));
            ctx.cost += static_cast<double>(n) * kCostWriteRow;
            return count_result(n);
        }
        case PlanKind::CreateTableAs: {
            Relation child = exec_plan(ctx, node.children[0], std::nullopt);
            auto table = std::make_shared<TableData>();
            table->name = node.target.text;
            for (const auto& c : child.columns) table->columns.push_back({c.name, c.type});
            table->rows = std::move(child.rows);
            int64_t n = static_cast<int64_t>(table->rows.size());
            ctx.engine.put_table(std::move(table));
            ctx.cost += static_cast<double>(n) * kCostWriteRow;
            return count_result(n);
        }
        case PlanKind::Delete: {
            auto [key, table] = lookup_table(ctx, node.target);
            // predicate evaluates over the coerced view; removal applies to
            // the physical rows at the same positions
            Relation view = exec_plan(ctx, node.children[0], std::nullopt);
            EvalScope scope{ctx, view.columns};
            auto updated = std::make_shared<TableData>(*table);
            std::vector<Row> kept;
            int64_t deleted = 0;
            for (size_t r = 0; r < view.rows.size(); ++r) {
                bool remove = true;
                if (node.predicate) remove = is_true(eval_expr(scope, view.rows[r], *node.predicate));
                if (remove) {
                    ++deleted;
                } else {
                    kept.push_back(table->rows[r]);
                }
            }
            updated->rows = std::move(kept);
            ctx.engine.put_table(std::move(updated));
            ctx.cost += static_cast<double>(deleted) * kCostWriteRow;
            return count_result(deleted);
        }
        default:
            throw Error(ErrorCode::SemanticError, "not a DML node");
    }
}

Relation exec_node(Exec& ctx, const PlanPtr& node, std::optional<int64_t> limit_hint) {
    switch (node->kind) {
        case PlanKind::TableScan:
            return exec_scan(ctx, *node, limit_hint);
        case PlanKind::ValuesRow: {
            Relation rel;
            rel.rows.emplace_back();
            return rel;
        }
        case PlanKind::Filter: {
            Relation input = exec_plan(ctx, node->children[0], std::nullopt);
            EvalScope scope{ctx, input.columns};
            Relation out;
            out.columns = input.columns;
            for (auto& row : input.rows) {
                if (limit_hint && out.rows.size() >= static_cast<size_t>(*limit_hint)) break;
                if (is_true(eval_expr(scope, row, *node->predicate))) {
                    out.rows.push_back(std::move(row));
                }
            }
            ctx.cost += static_cast<double>(input.rows.size()) * kCostEvalRow;
            ctx.note_memory(input.rows.size());
            return out;
        }
        case PlanKind::Project:
            return exec_project(ctx, *node, limit_hint);
        case PlanKind::Aggregate:
            return exec_aggregate(ctx, *node);
        case PlanKind::Join:
            return exec_join(ctx, *node);
        case PlanKind::Sort:
            return exec_sort(ctx, *node);
        case PlanKind::Limit: {
            int64_t n = node->limit;
            if (limit_hint) n = std::min(n, *limit_hint);
            Relation rel = exec_plan(ctx, node->children[0], n);
            if (rel.rows.size() > static_cast<size_t>(n)) {
                rel.rows.resize(static_cast<size_t>(n));
            }
            return rel;
        }
        case PlanKind::Distinct: {
            Relation input = exec_plan(ctx, node->children[0], std::nullopt);
            Relation out;
            out.columns = input.columns;
            std::set<std::string> seen;
            for (auto& row : input.rows) {
                if (limit_hint && out.rows.size() >= static_cast<size_t>(*limit_hint)) break;
                if (seen.insert(encode_key(row)).second) out.rows.push_back(std::move(row));
            }
            ctx.cost += static_cast<double>(input.rows.size()) * kCostEvalRow;
            ctx.note_memory(input.rows.size());
            return out;
        }
        case PlanKind::UnionAll: {
            Relation out;
            bool first = true;
            for (const auto& child : node->children) {
                std::optional<int64_t> remaining;
                if (limit_hint) {
                    remaining = *limit_hint - static_cast<int64_t>(out.rows.size());
                    if (*remaining <= 0) break;
                }
                Relation rel = exec_plan(ctx, child, remaining);
                if (first) {
                    out.columns = rel.columns;
                    first = false;
                } else if (rel.columns.size() != out.columns.size()) {
                    throw Error(ErrorCode::TypeError, "UNION ALL branches differ in column count");
                }
                for (auto& row : rel.rows) out.rows.push_back(std::move(row));
            }
            ctx.note_memory(out.rows.size());
            return out;
        }
        case PlanKind::WithBinding: {
            std::vector<std::pair<std::string, std::optional<Relation>>> saved;
            for (const auto& [alias, plan] : node->bindings) {
                std::string key = alias.folded();
                auto it = ctx.bindings.find(key);
                saved.emplace_back(key, it == ctx.bindings.end() ? std::nullopt
                                                                 : std::make_optional(it->second));
                ctx.bindings[key] = exec_plan(ctx, plan, std::nullopt);
            }
            Relation out = exec_plan(ctx, node->children[0], limit_hint);
            for (auto& [key, prev] : saved) {
                if (prev) ctx.bindings[key] = std::move(*prev);
                else ctx.bindings.erase(key);
            }
            return out;
        }
        case PlanKind::InsertInto:
        case PlanKind::CreateTableAs:
        case PlanKind::Delete:
            return exec_dml(ctx, *node);
    }
    throw Error(ErrorCode::SemanticError, "unknown plan node");
}

Relation exec_plan(Exec& ctx, const PlanPtr& node, std::optional<int64_t> limit_hint) {
    Relation rel = exec_node(ctx, node, limit_hint);
    // a FROM alias on a subquery re-qualifies its output columns
    if (node->alias && node->kind != PlanKind::TableScan) {
        for (auto& c : rel.columns) c.qualifier = node->alias->text;
    }
    return rel;
}

} // namespace

ExecutionResult run_plan(ExecInput input, const sql::PlanPtr& plan) {
    Exec ctx{input.engine, std::move(input.catalog), input.faults, input.digest};
    ctx.cost = kCostBase;
    index_subplans(ctx, plan);

    Relation rel = exec_plan(ctx, plan, std::nullopt);

    for (const auto& [key, entry] : ctx.table_rows) {
        size_t psize = entry.second == 0 ? kDefaultPartitionSize : entry.second;
        ctx.metrics.partitions_scanned += (entry.first + psize - 1) / psize;
    }
    ctx.cost += static_cast<double>(ctx.metrics.partitions_scanned) * kCostPartition;
    ctx.metrics.rows_output = rel.rows.size();
    ctx.metrics.wall_ms = ctx.cost;

    ExecutionResult result;
    result.columns.reserve(rel.columns.size());
    for (const auto& c : rel.columns) result.columns.push_back({c.name, c.type});
    result.rows = std::move(rel.rows);
    result.metrics = ctx.metrics;
    return result;
}

} // namespace qsim::engine::detail
