#include "qsim/sql/render.hpp"

#include <cctype>
#include <charconv>

#include "qsim/sql/lexer.hpp"

namespace qsim::sql {

namespace {

std::string render_string_literal(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out.push_back(c);
    }
    out += "'";
    return out;
}

std::string render_value(const Value& v) {
    switch (v.kind()) {
        case ValueKind::Null: return "NULL";
        case ValueKind::Bool: return v.as_bool() ? "TRUE" : "FALSE";
        case ValueKind::Int64: return std::to_string(v.as_int64());
        case ValueKind::Float64: {
            char buf[64];
            auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v.as_float64());
            std::string s(buf, p);
            // keep float literals reparseable as floats
            if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
                s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
                s += ".0";
            }
            return s;
        }
        case ValueKind::String: return render_string_literal(v.as_string());
        default: return "NULL"; // arrays/maps have no literal syntax
    }
}

void render_order(std::string& out, const std::vector<OrderItem>& items) {
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += render(*items[i].expr);
        if (!items[i].ascending) out += " DESC";
    }
}

void render_query(std::string& out, const Query& q);

void render_expr(std::string& out, const Expr& e) {
    switch (e.kind) {
        case ExprKind::Literal:
            out += render_value(e.literal);
            return;
        case ExprKind::ColumnRef:
            if (e.qualifier) {
                out += render_identifier(*e.qualifier);
                out += ".";
            }
            out += render_identifier(e.column);
            return;
        case ExprKind::Star:
            out += "*";
            return;
        case ExprKind::FunctionCall: {
            out += e.func_name;
            out += "(";
            if (e.distinct_arg) out += "DISTINCT ";
            for (size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                render_expr(out, *e.args[i]);
            }
            if (!e.agg_order_by.empty()) {
                out += " ORDER BY ";
                render_order(out, e.agg_order_by);
            }
            out += ")";
            if (e.window) {
                out += " OVER (";
                if (!e.window->partition_by.empty()) {
                    out += "PARTITION BY ";
                    for (size_t i = 0; i < e.window->partition_by.size(); ++i) {
                        if (i) out += ", ";
                        render_expr(out, *e.window->partition_by[i]);
                    }
                }
                if (!e.window->order_by.empty()) {
                    if (!e.window->partition_by.empty()) out += " ";
                    out += "ORDER BY ";
                    render_order(out, e.window->order_by);
                }
                out += ")";
            }
            return;
        }
        case ExprKind::Unary:
            out += e.op == "NOT" ? "NOT " : e.op;
            out += "(";
            render_expr(out, *e.right);
            out += ")";
            return;
        case ExprKind::Binary:
            out += "(";
            render_expr(out, *e.left);
            out += " ";
            out += e.op;
            out += " ";
            render_expr(out, *e.right);
            out += ")";
            return;
        case ExprKind::IsNull:
            out += "(";
            render_expr(out, *e.left);
            out += e.negated ? " IS NOT NULL" : " IS NULL";
            out += ")";
            return;
        case ExprKind::Cast:
            out += "CAST(";
            render_expr(out, *e.left);
            out += " AS ";
            out += logical_type_name(e.cast_type);
            out += ")";
            return;
        case ExprKind::ScalarSubquery:
            out += "(";
            render_query(out, *e.subquery);
            out += ")";
            return;
        case ExprKind::InSubquery:
            out += "(";
            render_expr(out, *e.left);
            out += e.negated ? " NOT IN (" : " IN (";
            render_query(out, *e.subquery);
            out += "))";
            return;
        case ExprKind::InList:
            out += "(";
            render_expr(out, *e.left);
            out += e.negated ? " NOT IN (" : " IN (";
            for (size_t i = 0; i < e.in_list.size(); ++i) {
                if (i) out += ", ";
                render_expr(out, *e.in_list[i]);
            }
            out += "))";
            return;
    }
}

void render_table_ref(std::string& out, const TableRef& ref) {
    if (ref.is_subquery()) {
        out += "(";
        render_query(out, *ref.subquery);
        out += ") AS ";
        out += render_identifier(*ref.alias);
        return;
    }
    out += render_identifier(ref.name);
    if (ref.alias) {
        out += " AS ";
        out += render_identifier(*ref.alias);
    }
}

void render_core(std::string& out, const SelectCore& core) {
    out += "SELECT ";
    if (core.distinct) out += "DISTINCT ";
    if (core.star) {
        out += "*";
    } else {
        for (size_t i = 0; i < core.items.size(); ++i) {
            if (i) out += ", ";
            render_expr(out, *core.items[i].expr);
            if (core.items[i].alias) {
                out += " AS ";
                out += render_identifier(*core.items[i].alias);
            }
        }
    }
    if (core.from) {
        out += " FROM ";
        render_table_ref(out, core.from->first);
        for (const auto& join : core.from->joins) {
            out += " ";
            out += join_kind_name(join.kind);
            out += " ";
            render_table_ref(out, join.right);
            if (join.condition) {
                out += " ON ";
                render_expr(out, *join.condition);
            }
        }
    }
    if (core.where) {
        out += " WHERE ";
        render_expr(out, *core.where);
    }
    if (!core.group_by.empty()) {
        out += " GROUP BY ";
        for (size_t i = 0; i < core.group_by.size(); ++i) {
            if (i) out += ", ";
            render_expr(out, *core.group_by[i]);
        }
    }
    if (core.having) {
        out += " HAVING ";
        render_expr(out, *core.having);
    }
}

void render_query(std::string& out, const Query& q) {
    if (!q.with.empty()) {
        out += "WITH ";
        for (size_t i = 0; i < q.with.size(); ++i) {
            if (i) out += ", ";
            out += render_identifier(q.with[i].alias);
            out += " AS (";
            render_query(out, *q.with[i].query);
            out += ")";
        }
        out += " ";
    }
    for (size_t i = 0; i < q.branches.size(); ++i) {
        if (i) out += " UNION ALL ";
        render_core(out, q.branches[i]);
    }
    if (!q.order_by.empty()) {
        out += " ORDER BY ";
        render_order(out, q.order_by);
    }
    if (q.limit) {
        out += " LIMIT ";
        out += std::to_string(*q.limit);
    }
}

} // namespace

std::string render_identifier(const Identifier& id) {
    bool needs_quotes = id.quoted;
    if (!needs_quotes) {
        if (id.text.empty() || std::isdigit(static_cast<unsigned char>(id.text[0]))) {
            needs_quotes = true;
        } else {
            for (char c : id.text) {
                if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) {
                    needs_quotes = true;
                    break;
                }
            }
            std::string upper;
            for (char c : id.text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
            if (is_keyword(upper)) needs_quotes = true;
        }
    }
    if (!needs_quotes) return id.text;
    std::string out = "\"";
    for (char c : id.text) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string render(const Expr& e) {
    std::string out;
    render_expr(out, e);
    return out;
}

std::string render(const Query& q) {
    std::string out;
    render_query(out, q);
    return out;
}

std::string render(const Statement& stmt) {
    std::string out;
    switch (stmt.kind) {
        case StatementKind::Select:
            render_query(out, *stmt.query);
            break;
        case StatementKind::InsertInto:
            out += "INSERT INTO ";
            out += render_identifier(stmt.target);
            out += " ";
            render_query(out, *stmt.query);
            break;
        case StatementKind::CreateTableAs:
            out += "CREATE TABLE ";
            out += render_identifier(stmt.target);
            out += " AS ";
            render_query(out, *stmt.query);
            break;
        case StatementKind::Delete:
            out += "DELETE FROM ";
            out += render_identifier(stmt.target);
            if (stmt.delete_where) {
                out += " WHERE ";
                render_expr(out, *stmt.delete_where);
            }
            break;
    }
    return out;
}

} // namespace qsim::sql
