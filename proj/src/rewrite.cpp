#include "qsim/rewrite.hpp"

#include <cctype>
#include <functional>

#include "qsim/error.hpp"

namespace qsim {

using namespace sql;

namespace {

std::string sanitize_session(const std::string& session) {
    std::string out;
    out.reserve(session.size());
    for (char c : session) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            out.push_back('_');
        }
    }
    return out.empty() ? "s" : out;
}

bool is_digest_wrap(const Query& q) {
    if (q.branches.size() != 1) return false;
    const SelectCore& core = q.branches[0];
    if (core.star || core.items.size() != 1) return false;
    const Expr& e = *core.items[0].expr;
    return e.kind == ExprKind::FunctionCall && e.func_name == kDigestFunction;
}

// ---- non-determinism labeling ----------------------------------------------

enum class TypeGuess { Bigint, Double, Varchar, Boolean, Other, Unknown };

TypeGuess guess_type(const Expr& e);

TypeGuess guess_call_type(const Expr& e) {
    const std::string& f = e.func_name;
    if (f == "count" || f == "approx_distinct" || f == "length" || f == "now") {
        return TypeGuess::Bigint;
    }
    if (f == "avg" || f == "random" || f == "rand" || f == "approx_percentile") {
        return TypeGuess::Double;
    }
    if (f == "lower" || f == "upper" || f == "concat" || f == "uuid") return TypeGuess::Varchar;
    if (f == "sum" || f == "min" || f == "max" || f == "abs" || f == "arbitrary" ||
        f == "any_value") {
        return e.args.empty() ? TypeGuess::Unknown : guess_type(*e.args[0]);
    }
    if (f == "max_by" || f == "min_by") {
        return e.args.empty() ? TypeGuess::Unknown : guess_type(*e.args[0]);
    }
    if (f == "coalesce") {
        for (const auto& a : e.args) {
            TypeGuess g = guess_type(*a);
            if (g != TypeGuess::Unknown) return g;
        }
        return TypeGuess::Unknown;
    }
    return TypeGuess::Unknown;
}

TypeGuess guess_type(const Expr& e) {
    switch (e.kind) {
        case ExprKind::Literal:
            switch (e.literal.kind()) {
                case ValueKind::Int64: return TypeGuess::Bigint;
                case ValueKind::Float64: return TypeGuess::Double;
                case ValueKind::String: return TypeGuess::Varchar;
                case ValueKind::Bool: return TypeGuess::Boolean;
                default: return TypeGuess::Unknown;
            }
        case ExprKind::Cast:
            switch (e.cast_type) {
                case LogicalType::Bigint: return TypeGuess::Bigint;
                case LogicalType::Double: return TypeGuess::Double;
                case LogicalType::Varchar: return TypeGuess::Varchar;
                case LogicalType::Boolean: return TypeGuess::Boolean;
                default: return TypeGuess::Other;
            }
        case ExprKind::Unary:
            if (e.op == "NOT") return TypeGuess::Boolean;
            return e.right ? guess_type(*e.right) : TypeGuess::Unknown;
        case ExprKind::Binary: {
            if (e.op == "AND" || e.op == "OR" || e.op == "=" || e.op == "!=" || e.op == "<" ||
                e.op == "<=" || e.op == ">" || e.op == ">=") {
                return TypeGuess::Boolean;
            }
            if (e.op == "||") return TypeGuess::Varchar;
            TypeGuess l = e.left ? guess_type(*e.left) : TypeGuess::Unknown;
            TypeGuess r = e.right ? guess_type(*e.right) : TypeGuess::Unknown;
            if (l == TypeGuess::Double || r == TypeGuess::Double) return TypeGuess::Double;
            if (l == TypeGuess::Bigint && r == TypeGuess::Bigint) return TypeGuess::Bigint;
            return TypeGuess::Unknown;
        }
        case ExprKind::IsNull:
        case ExprKind::InSubquery:
        case ExprKind::InList: return TypeGuess::Boolean;
        case ExprKind::FunctionCall: return guess_call_type(e);
        default: return TypeGuess::Unknown;
    }
}

struct Labeler {
    std::vector<NondetLabel> labels;

    void add(NondetCategory cat, std::string construct, const std::string& loc,
             bool speculative = false) {
        labels.push_back({cat, std::move(construct), loc, speculative});
    }

    void visit_expr(const Expr& e, const std::string& loc) {
        switch (e.kind) {
            case ExprKind::FunctionCall: {
                const std::string& f = e.func_name;
                if (f == "now" || f == "current_timestamp" || f == "current_date") {
                    add(NondetCategory::Time, f, loc);
                } else if (f == "random" || f == "rand" || f == "uuid") {
                    add(NondetCategory::Random, f, loc);
                } else if (f == "max_by" || f == "min_by" || f == "arbitrary" ||
                           f == "any_value") {
                    add(NondetCategory::OrderDependent, f, loc);
                } else if (f == "array_agg" && e.agg_order_by.empty()) {
                    add(NondetCategory::OrderDependent, f, loc);
                } else if (f == "approx_distinct" || f == "approx_percentile") {
                    add(NondetCategory::Approximate, f, loc);
                } else if (f == "sum" || f == "avg") {
                    TypeGuess g = e.args.empty() ? TypeGuess::Unknown : guess_type(*e.args[0]);
                    if (g == TypeGuess::Double) {
                        add(NondetCategory::FloatSensitive, f, loc);
                    } else if (g == TypeGuess::Unknown) {
                        add(NondetCategory::FloatSensitive, f, loc, /*speculative=*/true);
                    }
                }
                if (e.window && e.window->order_by.empty()) {
                    add(NondetCategory::OrderDependent, "over", loc);
                }
                for (size_t i = 0; i < e.args.size(); ++i) {
                    visit_expr(*e.args[i], loc + ".arg[" + std::to_string(i) + "]");
                }
                if (e.window) {
                    for (size_t i = 0; i < e.window->partition_by.size(); ++i) {
                        visit_expr(*e.window->partition_by[i],
                                   loc + ".partition[" + std::to_string(i) + "]");
                    }
                    for (size_t i = 0; i < e.window->order_by.size(); ++i) {
                        visit_expr(*e.window->order_by[i].expr,
                                   loc + ".worder[" + std::to_string(i) + "]");
                    }
                }
                return;
            }
            case ExprKind::Unary:
                if (e.right) visit_expr(*e.right, loc);
                return;
            case ExprKind::Binary:
                if (e.left) visit_expr(*e.left, loc);
                if (e.right) visit_expr(*e.right, loc);
                return;
            case ExprKind::IsNull:
            case ExprKind::Cast:
                if (e.left) visit_expr(*e.left, loc);
                return;
            case ExprKind::ScalarSubquery:
                visit_query(*e.subquery, loc + ".subquery");
                return;
            case ExprKind::InSubquery:
                if (e.left) visit_expr(*e.left, loc);
                visit_query(*e.subquery, loc + ".subquery");
                return;
            case ExprKind::InList:
                if (e.left) visit_expr(*e.left, loc);
                for (const auto& el : e.in_list) visit_expr(*el, loc);
                return;
            default: return;
        }
    }

    void visit_table_ref(const TableRef& ref, const std::string& loc) {
        if (ref.is_subquery()) visit_query(*ref.subquery, loc);
    }

    void visit_query(const Query& q, const std::string& prefix) {
        auto at = [&](const std::string& part) {
            return prefix.empty() ? part : prefix + "." + part;
        };
        for (const auto& item : q.with) {
            visit_query(*item.query, at("with[" + item.alias.text + "]"));
        }
        for (size_t bi = 0; bi < q.branches.size(); ++bi) {
            const SelectCore& core = q.branches[bi];
            std::string base = q.branches.size() > 1 ? "branch[" + std::to_string(bi) + "]." : "";
            for (size_t i = 0; i < core.items.size(); ++i) {
                visit_expr(*core.items[i].expr, at(base + "select[" + std::to_string(i) + "]"));
            }
            if (core.from) {
                visit_table_ref(core.from->first, at(base + "from"));
                for (size_t i = 0; i < core.from->joins.size(); ++i) {
                    const auto& join = core.from->joins[i];
                    visit_table_ref(join.right, at(base + "join[" + std::to_string(i) + "]"));
                    if (join.condition) {
                        visit_expr(*join.condition, at(base + "join[" + std::to_string(i) + "].on"));
                    }
                }
            }
            if (core.where) visit_expr(*core.where, at(base + "where"));
            for (size_t i = 0; i < core.group_by.size(); ++i) {
                visit_expr(*core.group_by[i], at(base + "group_by[" + std::to_string(i) + "]"));
            }
            if (core.having) visit_expr(*core.having, at(base + "having"));
        }
        for (size_t i = 0; i < q.order_by.size(); ++i) {
            visit_expr(*q.order_by[i].expr, at("order_by[" + std::to_string(i) + "]"));
        }
        // An under-specified result set: the first n rows of an unordered
        // relation are whatever the engine happened to produce first.
        if (q.limit && q.order_by.empty()) {
            add(NondetCategory::OrderDependent, "limit", at("limit"));
        }
    }
};

Statement make_ctas(const Identifier& target, QueryPtr query) {
    Statement s;
    s.kind = StatementKind::CreateTableAs;
    s.target = target;
    s.query = std::move(query);
    return s;
}

QueryPtr select_star_from(const Identifier& table, std::optional<int64_t> limit) {
    auto q = std::make_shared<Query>();
    SelectCore core;
    core.star = true;
    FromClause from;
    from.first.name = table;
    core.from = std::move(from);
    q->branches.push_back(std::move(core));
    q->limit = limit;
    return q;
}

} // namespace

const char* nondet_category_name(NondetCategory c) {
    switch (c) {
        case NondetCategory::Time: return "TIME";
        case NondetCategory::Random: return "RANDOM";
        case NondetCategory::OrderDependent: return "ORDER_DEPENDENT";
        case NondetCategory::Approximate: return "APPROXIMATE";
        case NondetCategory::FloatSensitive: return "FLOAT_SENSITIVE";
    }
    return "UNKNOWN";
}

std::string temp_table_name(const std::string& session, const std::string& original_folded) {
    return kTempPrefix + sanitize_session(session) + "_" + original_folded;
}

std::vector<NondetLabel> label_nondeterminism(const Statement& stmt) {
    Labeler labeler;
    if (stmt.query) labeler.visit_query(*stmt.query, "");
    if (stmt.delete_where) labeler.visit_expr(*stmt.delete_where, "where");
    return std::move(labeler.labels);
}

RewriteOutcome wrap_checksum(const Statement& stmt) {
    if (stmt.kind != StatementKind::Select) {
        throw Error(ErrorCode::NotARead, "checksum wrapping applies to SELECT queries only");
    }
    if (is_digest_wrap(*stmt.query)) {
        throw Error(ErrorCode::AlreadyRewritten, "query is already a digest query");
    }

    RewriteOutcome out;
    out.kind = RewriteKind::ReadChecksum;
    out.labels = label_nondeterminism(stmt);

    auto q = std::make_shared<Query>();
    SelectCore core;
    core.items.push_back(SelectItem{make_call(kDigestFunction, {make_star()}), std::nullopt});
    FromClause from;
    from.first.subquery = stmt.query;
    from.first.alias = Identifier{kDigestSubqueryAlias, false};
    core.from = std::move(from);
    q->branches.push_back(std::move(core));

    out.rewritten.kind = StatementKind::Select;
    out.rewritten.query = std::move(q);
    return out;
}

RewriteOutcome redirect_writes(const Statement& stmt, const std::string& session) {
    if (stmt.kind == StatementKind::Select) {
        throw Error(ErrorCode::NotAWrite, "write redirection applies to DML statements only");
    }
    std::string folded = stmt.target.folded();
    if (folded.rfind(kTempPrefix, 0) == 0) {
        throw Error(ErrorCode::AlreadyRewritten,
                    "target already inside the simulation namespace: " + folded);
    }

    RewriteOutcome out;
    out.kind = RewriteKind::WriteRedirected;
    out.labels = label_nondeterminism(stmt);

    Identifier temp{temp_table_name(session, folded), false};
    out.temp_objects.push_back(temp.text);

    switch (stmt.kind) {
        case StatementKind::InsertInto: {
            // Materialize the target's schema (no rows) under the temp name
            // so the insert has a destination of identical shape.
            out.companions.push_back(make_ctas(temp, select_star_from(stmt.target, 0)));
            out.rewritten.kind = StatementKind::InsertInto;
            out.rewritten.target = temp;
            out.rewritten.query = stmt.query;
            break;
        }
        case StatementKind::CreateTableAs: {
            out.rewritten.kind = StatementKind::CreateTableAs;
            out.rewritten.target = temp;
            out.rewritten.query = stmt.query;
            break;
        }
        case StatementKind::Delete: {
            // Deletes operate on a private copy of the target.
            out.companions.push_back(make_ctas(temp, select_star_from(stmt.target, std::nullopt)));
            out.rewritten.kind = StatementKind::Delete;
            out.rewritten.target = temp;
            out.rewritten.delete_where = stmt.delete_where;
            break;
        }
        default: break;
    }
    return out;
}

std::vector<std::string> write_targets(const Statement& stmt) {
    switch (stmt.kind) {
        case StatementKind::InsertInto:
        case StatementKind::CreateTableAs:
        case StatementKind::Delete: return {stmt.target.folded()};
        case StatementKind::Select: return {};
    }
    return {};
}

} // namespace qsim
