#include "qsim/signature.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "qsim/sql/lower.hpp"

namespace qsim {

using sql::PlanKind;
using sql::PlanNode;
using sql::PlanPtr;

namespace {

// ---- date masking ---------------------------------------------------------

int to_int(std::string_view s) {
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

bool valid_year(std::string_view s) { return to_int(s) >= 1970 && to_int(s) <= 2099; }
bool valid_month(std::string_view s) { return to_int(s) >= 1 && to_int(s) <= 12; }
bool valid_day(std::string_view s) { return to_int(s) >= 1 && to_int(s) <= 31; }

// ---- signature rendering --------------------------------------------------

struct Renderer {
    SignatureOptions opts;

    std::string mask(const std::string& name) const {
        return opts.mask_dates ? mask_identifier(name, opts.date_placeholder) : name;
    }

    // Rendered signatures of this node's expression subqueries; these become
    // extra children of the enclosing S.
    void own_subqueries(const PlanPtr& node, std::vector<std::string>& out) const {
        for (const auto& [expr, plan] : node->subplans) out.push_back(render(plan, {}));
    }

    // Subqueries in the filter/join region below a Project belong to that
    // Project's S. The walk stops at nested query bodies.
    void region_subqueries(const PlanPtr& node, std::vector<std::string>& out) const {
        switch (node->kind) {
            case PlanKind::Filter:
                own_subqueries(node, out);
                region_subqueries(node->children[0], out);
                return;
            case PlanKind::Join:
                own_subqueries(node, out);
                region_subqueries(node->children[0], out);
                region_subqueries(node->children[1], out);
                return;
            default: return;
        }
    }

    bool is_trivial_alias_passthrough(
        PlanPtr body, const std::vector<std::pair<sql::Identifier, PlanPtr>>& bindings) const {
        while (body->kind == PlanKind::Limit) body = body->children[0];
        if (body->kind != PlanKind::Project || !body->star) return false;
        const PlanPtr& child = body->children[0];
        if (child->kind != PlanKind::TableScan || !child->is_with_alias) return false;
        for (const auto& [alias, plan] : bindings) {
            if (alias.folded() == child->table.folded()) return true;
        }
        return false;
    }

    std::string join_children(const std::vector<std::string>& parts) const {
        std::string out;
        for (const auto& p : parts) {
            if (p.empty()) continue;
            if (!out.empty()) out += ",";
            out += p;
        }
        return out;
    }

    // `inherited` carries subquery signatures pushed down from an enclosing
    // node (Aggregate keys/HAVING, ORDER BY) to the next S on the spine.
    std::string render(const PlanPtr& node, std::vector<std::string> inherited) const {
        switch (node->kind) {
            case PlanKind::TableScan:
                return "T";
            case PlanKind::ValuesRow:
                return "";
            case PlanKind::Filter:
                // no letter of its own; folds into the enclosing S
                return render(node->children[0], std::move(inherited));
            case PlanKind::Project: {
                std::vector<std::string> subs = std::move(inherited);
                own_subqueries(node, subs);
                region_subqueries(node->children[0], subs);
                std::vector<std::string> parts{render(node->children[0], {})};
                parts.insert(parts.end(), subs.begin(), subs.end());
                return (node->star ? std::string("S[*]") : std::string("S")) + "(" +
                       join_children(parts) + ")";
            }
            case PlanKind::Aggregate: {
                std::vector<std::string> down = std::move(inherited);
                own_subqueries(node, down);
                return "G(" + render(node->children[0], std::move(down)) + ")";
            }
            case PlanKind::Join: {
                std::string letter;
                switch (node->join_kind) {
                    case sql::JoinKind::Inner: letter = "J"; break;
                    case sql::JoinKind::Left: letter = "LJ"; break;
                    case sql::JoinKind::Right: letter = "RJ"; break;
                    case sql::JoinKind::Full: letter = "FJ"; break;
                    case sql::JoinKind::Cross: letter = "CJ"; break;
                }
                return letter + "(" +
                       join_children({render(node->children[0], {}), render(node->children[1], {})}) +
                       ")";
            }
            case PlanKind::Sort: {
                std::vector<std::string> down = std::move(inherited);
                own_subqueries(node, down);
                return "O(" + render(node->children[0], std::move(down)) + ")";
            }
            case PlanKind::Limit:
                // omitted so pagination variants cluster together
                return render(node->children[0], std::move(inherited));
            case PlanKind::Distinct:
                return "E(" + render(node->children[0], std::move(inherited)) + ")";
            case PlanKind::UnionAll: {
                std::vector<std::string> parts;
                for (const auto& c : node->children) parts.push_back(render(c, {}));
                parts.insert(parts.end(), inherited.begin(), inherited.end());
                return "U(" + join_children(parts) + ")";
            }
            case PlanKind::WithBinding: {
                std::string out = "WS[";
                for (size_t i = 0; i < node->bindings.size(); ++i) {
                    if (i) out += ",";
                    out += "A(" + mask(node->bindings[i].first.text) + "," +
                           render(node->bindings[i].second, {}) + ")";
                }
                out += "]";
                if (!is_trivial_alias_passthrough(node->children[0], node->bindings)) {
                    out += "(" + render(node->children[0], std::move(inherited)) + ")";
                }
                return out;
            }
            case PlanKind::InsertInto:
                return "I(" + render(node->children[0], std::move(inherited)) + ")";
            case PlanKind::CreateTableAs:
                return "CT(" + render(node->children[0], std::move(inherited)) + ")";
            case PlanKind::Delete: {
                std::vector<std::string> parts{"T"};
                own_subqueries(node, parts);
                return "D(" + join_children(parts) + ")";
            }
        }
        return "";
    }
};

// ---- table collection -----------------------------------------------------

void collect_tables(const PlanPtr& node, std::set<std::string>& sources,
                    std::optional<std::string>& destination) {
    switch (node->kind) {
        case PlanKind::TableScan:
            if (!node->is_with_alias) sources.insert(node->table.text);
            return;
        case PlanKind::InsertInto:
        case PlanKind::CreateTableAs:
        case PlanKind::Delete:
            destination = node->target.text;
            break;
        default: break;
    }
    for (const auto& c : node->children) collect_tables(c, sources, destination);
    for (const auto& [alias, plan] : node->bindings) collect_tables(plan, sources, destination);
    for (const auto& [expr, plan] : node->subplans) {
        std::optional<std::string> ignored;
        collect_tables(plan, sources, ignored);
    }
}

} // namespace

std::string mask_identifier(const std::string& name, const std::string& placeholder) {
    std::string out;
    size_t n = name.size();
    size_t i = 0;

    auto digit = [&](size_t p) {
        return p < n && std::isdigit(static_cast<unsigned char>(name[p]));
    };
    // exactly two digits starting at p, not followed by a third
    auto two_digits_at = [&](size_t p) { return digit(p) && digit(p + 1) && !digit(p + 2); };

    while (i < n) {
        if (!digit(i)) {
            out.push_back(name[i++]);
            continue;
        }
        size_t j = i;
        while (digit(j)) ++j;
        size_t len = j - i;
        std::string_view run(name.data() + i, len);

        bool masked = false;
        if (len == 13 || len == 10) {
            masked = true; // epoch millis / seconds
        } else if (len == 8) {
            masked = valid_year(run.substr(0, 4)) && valid_month(run.substr(4, 2)) &&
                     valid_day(run.substr(6, 2));
        } else if (len == 6) {
            masked = valid_year(run.substr(0, 4)) && valid_month(run.substr(4, 2));
        } else if (len == 4 && valid_year(run)) {
            char sep = j < n ? name[j] : '\0';
            if (sep == '-' || sep == '_') {
                if (two_digits_at(j + 1) && valid_month({name.data() + j + 1, 2})) {
                    size_t after_month = j + 3;
                    if (after_month < n && name[after_month] == sep && two_digits_at(after_month + 1) &&
                        valid_day({name.data() + after_month + 1, 2})) {
                        out += placeholder; // YYYY-MM-DD / YYYY_MM_DD
                        i = after_month + 3;
                        continue;
                    }
                    if (sep == '-') {
                        out += placeholder; // YYYY-MM
                        i = j + 3;
                        continue;
                    }
                }
            }
        }

        if (masked) {
            out += placeholder;
        } else {
            out.append(run);
        }
        i = j;
    }
    return out;
}

std::string QuerySignature::rendered() const {
    if (!include_tables || (sources.empty() && !destination)) return body;
    std::string out = body + " ";
    for (size_t i = 0; i < sources.size(); ++i) {
        if (i) out += ",";
        out += sources[i];
    }
    if (destination) {
        out += "->";
        out += *destination;
    }
    return out;
}

TableSets tables_of(const PlanPtr& plan) {
    std::set<std::string> sources;
    std::optional<std::string> destination;
    collect_tables(plan, sources, destination);
    TableSets out;
    out.sources.assign(sources.begin(), sources.end());
    out.destination = destination;
    return out;
}

QuerySignature signature_of(const PlanPtr& plan, const SignatureOptions& opts) {
    Renderer r{opts};
    QuerySignature sig;
    sig.body = r.render(plan, {});
    sig.include_tables = opts.include_tables;
    if (opts.include_tables) {
        TableSets tables = tables_of(plan);
        std::set<std::string> masked;
        for (const auto& s : tables.sources) masked.insert(r.mask(s));
        sig.sources.assign(masked.begin(), masked.end());
        if (tables.destination) sig.destination = r.mask(*tables.destination);
    }
    return sig;
}

} // namespace qsim
