#include "support/naive_eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <optional>
#include <set>
#include <stdexcept>

namespace qsim::test {

using namespace qsim::sql;

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("naive_eval: " + msg);
}

std::string lc(const std::string& s) {
    std::string out;
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

struct Col {
    std::string qualifier; // lowercase
    std::string name;      // lowercase
};

struct Rel {
    std::vector<Col> cols;
    std::vector<Row> rows;
};

struct Env {
    const NaiveCatalog* catalog;
    std::map<std::string, Rel> withs; // lowercase alias -> materialized
};

bool matches(const Identifier& id, const std::string& stored_lc) {
    return lc(id.text) == stored_lc; // quoted-vs-exact is immaterial for generated names
}

size_t find_col(const Rel& rel, const Expr& e) {
    int hits = 0;
    size_t at = 0;
    for (size_t i = 0; i < rel.cols.size(); ++i) {
        if (!matches(e.column, rel.cols[i].name)) continue;
        if (e.qualifier && !matches(*e.qualifier, rel.cols[i].qualifier)) continue;
        ++hits;
        at = i;
    }
    if (hits != 1) fail("column resolution: " + e.column.text + " hits=" + std::to_string(hits));
    return at;
}

bool numeric(const Value& v) {
    return v.kind() == ValueKind::Int64 || v.kind() == ValueKind::Float64;
}

double dval(const Value& v) {
    return v.kind() == ValueKind::Int64 ? double(v.as_int64()) : v.as_float64();
}

int cmp(const Value& a, const Value& b) {
    if (numeric(a) && numeric(b)) {
        if (a.kind() == ValueKind::Int64 && b.kind() == ValueKind::Int64) {
            return a.as_int64() < b.as_int64() ? -1 : a.as_int64() > b.as_int64() ? 1 : 0;
        }
        return dval(a) < dval(b) ? -1 : dval(a) > dval(b) ? 1 : 0;
    }
    if (a.kind() != b.kind()) fail("comparing different kinds");
    if (a.kind() == ValueKind::String) return a.as_string().compare(b.as_string());
    if (a.kind() == ValueKind::Bool) return int(a.as_bool()) - int(b.as_bool());
    fail("uncomparable kinds");
}

Rel eval_query(const Query& q, Env env);

Value eval_expr(const Env& env, const Rel& rel, const Row& row, const Expr& e);

Value eval_agg(const Env& env, const Rel& rel, const std::vector<size_t>& group, const Expr& call) {
    const std::string& f = call.func_name;
    if (f == "count") {
        if (call.args.empty() || call.args[0]->kind == ExprKind::Star) {
            return Value::int64(int64_t(group.size()));
        }
        if (call.distinct_arg) {
            std::set<std::string> seen;
            for (size_t r : group) {
                Value v = eval_expr(env, rel, rel.rows[r], *call.args[0]);
                if (!v.is_null()) {
                    auto enc = canonical_encode(v);
                    seen.insert(std::string(enc.begin(), enc.end()));
                }
            }
            return Value::int64(int64_t(seen.size()));
        }
        int64_t n = 0;
        for (size_t r : group) {
            if (!eval_expr(env, rel, rel.rows[r], *call.args[0]).is_null()) ++n;
        }
        return Value::int64(n);
    }
    if (f == "sum" || f == "avg") {
        uint64_t iacc = 0;
        double dacc = 0;
        bool any_float = false;
        int64_t n = 0;
        for (size_t r : group) {
            Value v = eval_expr(env, rel, rel.rows[r], *call.args[0]);
            if (v.is_null()) continue;
            if (!numeric(v)) fail("sum over non-number");
            if (v.kind() == ValueKind::Float64) any_float = true;
            iacc += uint64_t(v.kind() == ValueKind::Int64 ? v.as_int64() : 0);
            dacc += dval(v);
            ++n;
        }
        if (n == 0) return Value::null();
        if (f == "avg") return Value::float64(dacc / double(n));
        if (any_float) return Value::float64(dacc);
        return Value::int64(int64_t(iacc));
    }
    if (f == "min" || f == "max") {
        std::optional<Value> best;
        for (size_t r : group) {
            Value v = eval_expr(env, rel, rel.rows[r], *call.args[0]);
            if (v.is_null()) continue;
            if (!best || (f == "min" ? cmp(v, *best) < 0 : cmp(v, *best) > 0)) best = v;
        }
        return best ? *best : Value::null();
    }
    if (f == "approx_distinct") {
        std::set<std::string> seen;
        for (size_t r : group) {
            Value v = eval_expr(env, rel, rel.rows[r], *call.args[0]);
            if (!v.is_null()) {
                auto enc = canonical_encode(v);
                seen.insert(std::string(enc.begin(), enc.end()));
            }
        }
        return Value::int64(int64_t(seen.size()));
    }
    fail("unsupported aggregate " + f);
}

bool is_agg_name(const std::string& f) {
    return f == "count" || f == "sum" || f == "avg" || f == "min" || f == "max" ||
           f == "approx_distinct";
}

bool has_agg(const Expr& e) {
    if (e.kind == ExprKind::FunctionCall && is_agg_name(e.func_name)) return true;
    if (e.left && has_agg(*e.left)) return true;
    if (e.right && has_agg(*e.right)) return true;
    for (const auto& a : e.args) {
        if (has_agg(*a)) return true;
    }
    return false;
}

Value eval_group(const Env& env, const Rel& rel, const std::vector<size_t>& group, const Expr& e) {
    if (e.kind == ExprKind::FunctionCall && is_agg_name(e.func_name)) {
        return eval_agg(env, rel, group, e);
    }
    switch (e.kind) {
        case ExprKind::Binary:
        case ExprKind::Unary:
        case ExprKind::IsNull:
        case ExprKind::Cast: {
            if (has_agg(e)) {
                // evaluate operands in group context, then combine them via
                // a one-row relation
                if (e.kind == ExprKind::Binary) {
                    Value a = eval_group(env, rel, group, *e.left);
                    Value b = eval_group(env, rel, group, *e.right);
                    Rel tiny;
                    tiny.cols = {{"", "_a"}, {"", "_b"}};
                    tiny.rows = {{a, b}};
                    Expr combined = e;
                    combined.left = make_column(std::nullopt, Identifier{"_a", false});
                    combined.right = make_column(std::nullopt, Identifier{"_b", false});
                    return eval_expr(env, tiny, tiny.rows[0], combined);
                }
                const Expr& operand = e.left ? *e.left : *e.right;
                Value a = eval_group(env, rel, group, operand);
                Rel tiny;
                tiny.cols = {{"", "_a"}};
                tiny.rows = {{a}};
                Expr combined = e;
                auto ref = make_column(std::nullopt, Identifier{"_a", false});
                if (e.left) combined.left = ref;
                else combined.right = ref;
                return eval_expr(env, tiny, tiny.rows[0], combined);
            }
            break;
        }
        default: break;
    }
    if (group.empty()) {
        Row nulls(rel.cols.size(), Value::null());
        return eval_expr(env, rel, nulls, e);
    }
    return eval_expr(env, rel, rel.rows[group[0]], e);
}

Value eval_expr(const Env& env, const Rel& rel, const Row& row, const Expr& e) {
    switch (e.kind) {
        case ExprKind::Literal: return e.literal;
        case ExprKind::ColumnRef: return row[find_col(rel, e)];
        case ExprKind::Unary: {
            Value v = eval_expr(env, rel, row, *e.right);
            if (e.op == "NOT") {
                if (v.is_null()) return v;
                return Value::boolean(!v.as_bool());
            }
            if (v.is_null()) return v;
            if (v.kind() == ValueKind::Int64) return Value::int64(-v.as_int64());
            return Value::float64(-v.as_float64());
        }
        case ExprKind::Binary: {
            const std::string& op = e.op;
            if (op == "AND" || op == "OR") {
                Value a = eval_expr(env, rel, row, *e.left);
                Value b = eval_expr(env, rel, row, *e.right);
                bool af = !a.is_null() && !a.as_bool();
                bool bf = !b.is_null() && !b.as_bool();
                bool at = !a.is_null() && a.as_bool();
                bool bt = !b.is_null() && b.as_bool();
                if (op == "AND") {
                    if (af || bf) return Value::boolean(false);
                    if (a.is_null() || b.is_null()) return Value::null();
                    return Value::boolean(true);
                }
                if (at || bt) return Value::boolean(true);
                if (a.is_null() || b.is_null()) return Value::null();
                return Value::boolean(false);
            }
            Value a = eval_expr(env, rel, row, *e.left);
            Value b = eval_expr(env, rel, row, *e.right);
            if (a.is_null() || b.is_null()) return Value::null();
            if (op == "+" || op == "-" || op == "*" || op == "/" || op == "%") {
                if (a.kind() == ValueKind::Float64 || b.kind() == ValueKind::Float64) {
                    double x = dval(a), y = dval(b);
                    if (op == "+") return Value::float64(x + y);
                    if (op == "-") return Value::float64(x - y);
                    if (op == "*") return Value::float64(x * y);
                    if (op == "/") return Value::float64(x / y);
                    return Value::float64(std::fmod(x, y));
                }
                uint64_t x = uint64_t(a.as_int64()), y = uint64_t(b.as_int64());
                if (op == "+") return Value::int64(int64_t(x + y));
                if (op == "-") return Value::int64(int64_t(x - y));
                if (op == "*") return Value::int64(int64_t(x * y));
                if (b.as_int64() == 0) fail("division by zero");
                if (op == "/") return Value::int64(a.as_int64() / b.as_int64());
                return Value::int64(a.as_int64() % b.as_int64());
            }
            if (op == "=" || op == "!=") {
                bool eq;
                if (numeric(a) && numeric(b) && a.kind() != b.kind()) {
                    eq = dval(a) == dval(b);
                } else if (a.kind() != b.kind()) {
                    fail("eq on different kinds");
                } else {
                    eq = a == b;
                }
                return Value::boolean(op == "=" ? eq : !eq);
            }
            int c = cmp(a, b);
            if (op == "<") return Value::boolean(c < 0);
            if (op == "<=") return Value::boolean(c <= 0);
            if (op == ">") return Value::boolean(c > 0);
            if (op == ">=") return Value::boolean(c >= 0);
            fail("op " + op);
        }
        case ExprKind::IsNull:
            return Value::boolean(e.negated ? !eval_expr(env, rel, row, *e.left).is_null()
                                            : eval_expr(env, rel, row, *e.left).is_null());
        case ExprKind::Cast: return coerce(eval_expr(env, rel, row, *e.left), e.cast_type);
        case ExprKind::InList: {
            Value probe = eval_expr(env, rel, row, *e.left);
            if (e.in_list.empty()) return Value::boolean(e.negated);
            if (probe.is_null()) return Value::null();
            bool saw_null = false;
            for (const auto& el : e.in_list) {
                Value v = eval_expr(env, rel, row, *el);
                if (v.is_null()) {
                    saw_null = true;
                    continue;
                }
                bool eq = numeric(probe) && numeric(v) ? dval(probe) == dval(v)
                          : probe.kind() == v.kind()   ? probe == v
                                                       : false;
                if (eq) return Value::boolean(!e.negated);
            }
            if (saw_null) return Value::null();
            return Value::boolean(e.negated);
        }
        case ExprKind::InSubquery: {
            Rel sub = eval_query(*e.subquery, env);
            if (sub.cols.size() != 1) fail("IN subquery width");
            Value probe = eval_expr(env, rel, row, *e.left);
            if (sub.rows.empty()) return Value::boolean(e.negated);
            if (probe.is_null()) return Value::null();
            bool saw_null = false;
            for (const auto& r : sub.rows) {
                if (r[0].is_null()) {
                    saw_null = true;
                    continue;
                }
                bool eq = numeric(probe) && numeric(r[0]) ? dval(probe) == dval(r[0])
                          : probe.kind() == r[0].kind()   ? probe == r[0]
                                                          : false;
                if (eq) return Value::boolean(!e.negated);
            }
            if (saw_null) return Value::null();
            return Value::boolean(e.negated);
        }
        case ExprKind::ScalarSubquery: {
            Rel sub = eval_query(*e.subquery, env);
            if (sub.cols.size() != 1) fail("scalar subquery width");
            if (sub.rows.empty()) return Value::null();
            if (sub.rows.size() > 1) fail("scalar subquery rows");
            return sub.rows[0][0];
        }
        case ExprKind::FunctionCall: {
            const std::string& f = e.func_name;
            if (f == "abs") {
                Value v = eval_expr(env, rel, row, *e.args[0]);
                if (v.is_null()) return v;
                if (v.kind() == ValueKind::Int64) return Value::int64(std::abs(v.as_int64()));
                return Value::float64(std::fabs(v.as_float64()));
            }
            if (f == "lower" || f == "upper") {
                Value v = eval_expr(env, rel, row, *e.args[0]);
                if (v.is_null()) return v;
                std::string s = v.as_string();
                for (char& c : s) {
                    c = f == "lower"
                            ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                            : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
                }
                return Value::string(s);
            }
            if (f == "length") {
                Value v = eval_expr(env, rel, row, *e.args[0]);
                if (v.is_null()) return v;
                return Value::int64(int64_t(v.as_string().size()));
            }
            if (f == "coalesce") {
                for (const auto& a : e.args) {
                    Value v = eval_expr(env, rel, row, *a);
                    if (!v.is_null()) return v;
                }
                return Value::null();
            }
            fail("unsupported function " + f);
        }
        default: fail("unsupported expression kind");
    }
}

Rel scan(const Env& env, const TableRef& ref) {
    if (ref.is_subquery()) {
        Rel rel = eval_query(*ref.subquery, env);
        std::string q = lc(ref.alias->text);
        for (auto& c : rel.cols) c.qualifier = q;
        return rel;
    }
    std::string name = lc(ref.name.text);
    std::string qual = ref.alias ? lc(ref.alias->text) : name;
    auto wit = env.withs.find(name);
    if (wit != env.withs.end()) {
        Rel rel = wit->second;
        for (auto& c : rel.cols) c.qualifier = qual;
        return rel;
    }
    auto it = env.catalog->find(name);
    if (it == env.catalog->end()) fail("unknown table " + name);
    Rel rel;
    for (const auto& col : it->second.columns) rel.cols.push_back({qual, lc(col.name)});
    for (const auto& phys : it->second.rows) {
        Row row;
        for (size_t c = 0; c < phys.size(); ++c) {
            row.push_back(coerce(phys[c], it->second.columns[c].type));
        }
        rel.rows.push_back(std::move(row));
    }
    return rel;
}

bool truthy(const Value& v) { return v.kind() == ValueKind::Bool && v.as_bool(); }

Rel join(const Env& env, Rel left, const JoinStep& step) {
    Rel right = scan(env, step.right);
    Rel out;
    out.cols = left.cols;
    out.cols.insert(out.cols.end(), right.cols.begin(), right.cols.end());

    std::vector<bool> rmatch(right.rows.size(), false);
    for (const auto& l : left.rows) {
        bool matched = false;
        for (size_t ri = 0; ri < right.rows.size(); ++ri) {
            Row combined = l;
            combined.insert(combined.end(), right.rows[ri].begin(), right.rows[ri].end());
            bool ok = step.kind == JoinKind::Cross ||
                      truthy(eval_expr(env, out, combined, *step.condition));
            if (ok) {
                out.rows.push_back(std::move(combined));
                rmatch[ri] = true;
                matched = true;
            }
        }
        if (!matched && (step.kind == JoinKind::Left || step.kind == JoinKind::Full)) {
            Row combined = l;
            combined.insert(combined.end(), right.cols.size(), Value::null());
            out.rows.push_back(std::move(combined));
        }
    }
    if (step.kind == JoinKind::Right || step.kind == JoinKind::Full) {
        for (size_t ri = 0; ri < right.rows.size(); ++ri) {
            if (rmatch[ri]) continue;
            Row combined(left.cols.size(), Value::null());
            combined.insert(combined.end(), right.rows[ri].begin(), right.rows[ri].end());
            out.rows.push_back(std::move(combined));
        }
    }
    return out;
}

std::string group_key(const Env& env, const Rel& rel, const Row& row,
                      const std::vector<ExprPtr>& keys) {
    std::vector<uint8_t> bytes;
    for (const auto& k : keys) canonical_encode(eval_expr(env, rel, row, *k), bytes);
    return std::string(bytes.begin(), bytes.end());
}

Rel eval_core(const SelectCore& core, const Env& env) {
    Rel input;
    if (core.from) {
        input = scan(env, core.from->first);
        for (const auto& step : core.from->joins) input = join(env, std::move(input), step);
    } else {
        input.rows.emplace_back();
    }

    if (core.where) {
        Rel filtered;
        filtered.cols = input.cols;
        for (auto& row : input.rows) {
            if (truthy(eval_expr(env, input, row, *core.where))) {
                filtered.rows.push_back(std::move(row));
            }
        }
        input = std::move(filtered);
    }

    bool aggregated = !core.group_by.empty();
    if (!aggregated) {
        for (const auto& item : core.items) {
            if (has_agg(*item.expr)) aggregated = true;
        }
        if (core.having && has_agg(*core.having)) aggregated = true;
    }

    Rel out;
    if (core.star) {
        out = std::move(input);
    } else if (aggregated) {
        std::vector<std::vector<size_t>> groups;
        if (core.group_by.empty()) {
            groups.emplace_back();
            for (size_t r = 0; r < input.rows.size(); ++r) groups[0].push_back(r);
        } else {
            std::map<std::string, size_t> idx;
            for (size_t r = 0; r < input.rows.size(); ++r) {
                std::string key = group_key(env, input, input.rows[r], core.group_by);
                auto [it, inserted] = idx.try_emplace(key, groups.size());
                if (inserted) groups.emplace_back();
                groups[it->second].push_back(r);
            }
        }
        for (size_t i = 0; i < core.items.size(); ++i) {
            const auto& item = core.items[i];
            std::string name = item.alias ? lc(item.alias->text)
                               : item.expr->kind == ExprKind::ColumnRef
                                   ? lc(item.expr->column.text)
                                   : "_col" + std::to_string(i);
            out.cols.push_back({"", name});
        }
        for (const auto& g : groups) {
            if (core.having && !truthy(eval_group(env, input, g, *core.having))) continue;
            Row row;
            for (const auto& item : core.items) row.push_back(eval_group(env, input, g, *item.expr));
            out.rows.push_back(std::move(row));
        }
    } else {
        for (size_t i = 0; i < core.items.size(); ++i) {
            const auto& item = core.items[i];
            std::string name = item.alias ? lc(item.alias->text)
                               : item.expr->kind == ExprKind::ColumnRef
                                   ? lc(item.expr->column.text)
                                   : "_col" + std::to_string(i);
            out.cols.push_back({"", name});
        }
        for (const auto& row : input.rows) {
            Row result;
            for (const auto& item : core.items) {
                result.push_back(eval_expr(env, input, row, *item.expr));
            }
            out.rows.push_back(std::move(result));
        }
    }

    if (core.distinct) {
        std::set<std::string> seen;
        Rel dedup;
        dedup.cols = out.cols;
        for (auto& row : out.rows) {
            std::vector<uint8_t> bytes;
            for (const auto& v : row) canonical_encode(v, bytes);
            if (seen.insert(std::string(bytes.begin(), bytes.end())).second) {
                dedup.rows.push_back(std::move(row));
            }
        }
        out = std::move(dedup);
    }
    return out;
}

Rel eval_query(const Query& q, Env env) {
    for (const auto& item : q.with) {
        env.withs[lc(item.alias.text)] = eval_query(*item.query, env);
    }
    Rel out = eval_core(q.branches[0], env);
    for (size_t b = 1; b < q.branches.size(); ++b) {
        Rel next = eval_core(q.branches[b], env);
        if (next.cols.size() != out.cols.size()) fail("union width");
        for (auto& row : next.rows) out.rows.push_back(std::move(row));
    }
    // ORDER BY is irrelevant under multiset comparison; LIMIT is not
    // generated without a total order, so applying it in input order after
    // an exact sort of encodings keeps the oracle deterministic.
    if (q.limit) {
        if (out.rows.size() > size_t(*q.limit)) out.rows.resize(size_t(*q.limit));
    }
    return out;
}

} // namespace

std::vector<Row> naive_eval(const sql::Statement& stmt, const NaiveCatalog& catalog) {
    if (stmt.kind != StatementKind::Select) fail("only SELECT is supported");
    Env env{&catalog, {}};
    return eval_query(*stmt.query, env).rows;
}

std::vector<std::string> multiset_fingerprint(const std::vector<Row>& rows) {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<uint8_t> bytes;
        for (const auto& v : row) canonical_encode(v, bytes);
        out.emplace_back(bytes.begin(), bytes.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace qsim::test
