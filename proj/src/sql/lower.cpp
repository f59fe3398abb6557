#include "qsim/sql/lower.hpp"

#include <set>
#include <unordered_set>

#include "qsim/error.hpp"

namespace qsim::sql {

namespace {

const std::unordered_set<std::string>& aggregate_functions() {
    static const std::unordered_set<std::string> fns = {
        "count", "sum", "avg", "min", "max", "max_by", "min_by",
        "array_agg", "approx_distinct", "arbitrary", "any_value",
        "approx_percentile", "result_digest",
    };
    return fns;
}

struct Scope {
    const Scope* parent = nullptr;
    std::set<std::string> aliases; // folded WITH alias names

    bool resolves(const std::string& folded) const {
        if (aliases.count(folded)) return true;
        return parent ? parent->resolves(folded) : false;
    }
};

PlanPtr lower_query(const Query& q, const Scope* scope);

// Lower scalar/IN subqueries against the lexical WITH scope and attach them
// to the plan node owning the expression.
void attach_subplans(const Expr& e, const Scope* scope, PlanNode& node) {
    switch (e.kind) {
        case ExprKind::ScalarSubquery:
        case ExprKind::InSubquery:
            if (e.left) attach_subplans(*e.left, scope, node);
            node.subplans.emplace_back(&e, lower_query(*e.subquery, scope));
            return;
        case ExprKind::FunctionCall:
            for (const auto& a : e.args) attach_subplans(*a, scope, node);
            if (e.window) {
                for (const auto& p : e.window->partition_by) attach_subplans(*p, scope, node);
                for (const auto& o : e.window->order_by) attach_subplans(*o.expr, scope, node);
            }
            return;
        case ExprKind::Unary:
            if (e.right) attach_subplans(*e.right, scope, node);
            return;
        case ExprKind::Binary:
            if (e.left) attach_subplans(*e.left, scope, node);
            if (e.right) attach_subplans(*e.right, scope, node);
            return;
        case ExprKind::IsNull:
        case ExprKind::Cast:
            if (e.left) attach_subplans(*e.left, scope, node);
            return;
        case ExprKind::InList:
            if (e.left) attach_subplans(*e.left, scope, node);
            for (const auto& el : e.in_list) attach_subplans(*el, scope, node);
            return;
        default: return;
    }
}

void collect_aggregates(const Expr& e, std::vector<ExprPtr>& out) {
    switch (e.kind) {
        case ExprKind::FunctionCall:
            if (!e.window && is_aggregate_function(e.func_name)) {
                out.push_back(std::make_shared<Expr>(e));
                return;
            }
            for (const auto& a : e.args) collect_aggregates(*a, out);
            return;
        case ExprKind::Unary:
            if (e.right) collect_aggregates(*e.right, out);
            return;
        case ExprKind::Binary:
            if (e.left) collect_aggregates(*e.left, out);
            if (e.right) collect_aggregates(*e.right, out);
            return;
        case ExprKind::IsNull:
        case ExprKind::Cast:
            if (e.left) collect_aggregates(*e.left, out);
            return;
        case ExprKind::InList:
            if (e.left) collect_aggregates(*e.left, out);
            for (const auto& el : e.in_list) collect_aggregates(*el, out);
            return;
        default: return;
    }
}

std::shared_ptr<PlanNode> node(PlanKind kind) {
    auto n = std::make_shared<PlanNode>();
    n->kind = kind;
    return n;
}

PlanPtr lower_table_ref(const TableRef& ref, const Scope* scope) {
    if (ref.is_subquery()) {
        PlanPtr sub = lower_query(*ref.subquery, scope);
        // keep the FROM alias on the subplan root for column qualification
        auto aliased = std::make_shared<PlanNode>(*sub);
        aliased->alias = ref.alias;
        return aliased;
    }
    auto scan = node(PlanKind::TableScan);
    scan->table = ref.name;
    scan->alias = ref.alias;
    scan->is_with_alias = scope && scope->resolves(ref.name.folded());
    return scan;
}

PlanPtr lower_core(const SelectCore& core, const Scope* scope) {
    PlanPtr base;
    if (core.from) {
        base = lower_table_ref(core.from->first, scope);
        for (const auto& join : core.from->joins) {
            auto j = node(PlanKind::Join);
            j->join_kind = join.kind;
            j->condition = join.condition;
            if (join.condition) attach_subplans(*join.condition, scope, *j);
            j->children.push_back(base);
            j->children.push_back(lower_table_ref(join.right, scope));
            base = j;
        }
    } else {
        base = node(PlanKind::ValuesRow);
    }

    if (core.where) {
        auto f = node(PlanKind::Filter);
        f->predicate = core.where;
        attach_subplans(*core.where, scope, *f);
        f->children.push_back(base);
        base = f;
    }

    auto proj = node(PlanKind::Project);
    proj->star = core.star;
    proj->items = core.items;
    for (const auto& item : core.items) attach_subplans(*item.expr, scope, *proj);
    proj->children.push_back(base);
    base = proj;

    bool has_aggregates = false;
    for (const auto& item : core.items) {
        if (contains_aggregate(*item.expr)) has_aggregates = true;
    }
    if (core.having && contains_aggregate(*core.having)) has_aggregates = true;

    if (!core.group_by.empty() || has_aggregates) {
        if (core.star) {
            throw Error(ErrorCode::SemanticError, "SELECT * cannot be combined with aggregation");
        }
        auto agg = node(PlanKind::Aggregate);
        agg->group_keys = core.group_by;
        agg->having = core.having;
        for (const auto& item : core.items) collect_aggregates(*item.expr, agg->aggregates);
        if (core.having) collect_aggregates(*core.having, agg->aggregates);
        for (const auto& k : core.group_by) attach_subplans(*k, scope, *agg);
        if (core.having) attach_subplans(*core.having, scope, *agg);
        agg->children.push_back(base);
        base = agg;
    } else if (core.having) {
        throw Error(ErrorCode::SemanticError, "HAVING requires GROUP BY or aggregates");
    }

    if (core.distinct) {
        auto d = node(PlanKind::Distinct);
        d->children.push_back(base);
        base = d;
    }
    return base;
}

PlanPtr lower_query(const Query& q, const Scope* scope) {
    Scope local;
    local.parent = scope;

    std::vector<std::pair<Identifier, PlanPtr>> bindings;
    for (const auto& item : q.with) {
        std::string folded = item.alias.folded();
        if (local.aliases.count(folded)) {
            throw Error(ErrorCode::SemanticError, "duplicate WITH alias: " + item.alias.text);
        }
        // Bindings come into scope in order; later ones may reference earlier.
        bindings.emplace_back(item.alias, lower_query(*item.query, &local));
        local.aliases.insert(folded);
    }
    const Scope* inner = q.with.empty() ? scope : &local;

    PlanPtr body;
    if (q.branches.size() == 1) {
        body = lower_core(q.branches[0], inner);
    } else {
        auto u = node(PlanKind::UnionAll);
        for (const auto& branch : q.branches) u->children.push_back(lower_core(branch, inner));
        body = u;
    }

    if (!q.order_by.empty()) {
        auto s = node(PlanKind::Sort);
        s->sort_keys = q.order_by;
        for (const auto& k : q.order_by) attach_subplans(*k.expr, inner, *s);
        s->children.push_back(body);
        body = s;
    }
    if (q.limit) {
        auto l = node(PlanKind::Limit);
        l->limit = *q.limit;
        l->children.push_back(body);
        body = l;
    }

    if (!bindings.empty()) {
        auto w = node(PlanKind::WithBinding);
        w->bindings = std::move(bindings);
        w->children.push_back(body);
        body = w;
    }
    return body;
}

} // namespace

bool is_aggregate_function(const std::string& folded_name) {
    return aggregate_functions().count(folded_name) > 0;
}

bool contains_aggregate(const Expr& e) {
    switch (e.kind) {
        case ExprKind::FunctionCall:
            if (!e.window && is_aggregate_function(e.func_name)) return true;
            for (const auto& a : e.args) {
                if (contains_aggregate(*a)) return true;
            }
            return false;
        case ExprKind::Unary: return e.right && contains_aggregate(*e.right);
        case ExprKind::Binary:
            return (e.left && contains_aggregate(*e.left)) ||
                   (e.right && contains_aggregate(*e.right));
        case ExprKind::IsNull:
        case ExprKind::Cast: return e.left && contains_aggregate(*e.left);
        case ExprKind::InList:
            if (e.left && contains_aggregate(*e.left)) return true;
            for (const auto& el : e.in_list) {
                if (contains_aggregate(*el)) return true;
            }
            return false;
        case ExprKind::InSubquery: return e.left && contains_aggregate(*e.left);
        default: return false; // literals, columns, star, scalar subqueries
    }
}

PlanPtr lower(const Query& q) { return lower_query(q, nullptr); }

PlanPtr lower(const Statement& stmt) {
    switch (stmt.kind) {
        case StatementKind::Select:
            return lower(*stmt.query);
        case StatementKind::InsertInto: {
            auto n = node(PlanKind::InsertInto);
            n->target = stmt.target;
            n->children.push_back(lower(*stmt.query));
            return n;
        }
        case StatementKind::CreateTableAs: {
            auto n = node(PlanKind::CreateTableAs);
            n->target = stmt.target;
            n->children.push_back(lower(*stmt.query));
            return n;
        }
        case StatementKind::Delete: {
            auto n = node(PlanKind::Delete);
            n->target = stmt.target;
            n->predicate = stmt.delete_where;
            if (stmt.delete_where) attach_subplans(*stmt.delete_where, nullptr, *n);
            auto scan = node(PlanKind::TableScan);
            scan->table = stmt.target;
            n->children.push_back(scan);
            return n;
        }
    }
    throw Error(ErrorCode::SemanticError, "unknown statement kind");
}

} // namespace qsim::sql
