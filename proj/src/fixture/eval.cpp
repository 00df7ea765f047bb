#include "fedkg/fixture/eval.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_map>

#include "fedkg/errors.hpp"
#include "fedkg/sparql/parser.hpp"

namespace fedkg::fixture {

namespace {

using sparql::Expr;
using sparql::ExprPtr;
using sparql::GroupPattern;
using sparql::PatternTerm;
using sparql::SelectQuery;

using Row = std::vector<std::optional<RdfTerm>>;

// Literal equality with numeric awareness: "01"^^xsd:integer equals "1"^^xsd:integer.
bool terms_equal(const RdfTerm& a, const RdfTerm& b) {
    if (a.is_numeric() && b.is_numeric()) return a.numeric_value() == b.numeric_value();
    return a == b;
}

std::string row_key(const Row& row) {
    // Trailing unbound cells are ignored so ragged rows with equal
    // bindings compare equal.
    size_t end = row.size();
    while (end > 0 && !row[end - 1]) --end;
    std::string key;
    for (size_t i = 0; i < end; ++i) {
        key += row[i] ? to_ntriples(*row[i]) : "~";
        key += '\x1f';
    }
    return key;
}

class Evaluator {
public:
    Evaluator(const TripleStore& store, const SelectQuery& query)
        : store_(store), query_(query) {}

    SparqlResultSet run() {
        std::vector<Row> solutions = eval_group(query_.where, std::nullopt, {Row{}});

        if (query_.has_aggregates() || !query_.group_by.empty()) {
            return aggregate(solutions);
        }

        std::vector<std::string> projected;
        if (query_.select_star) {
            projected = slot_order_;
        } else {
            for (const auto& item : query_.items) projected.push_back(item.var);
        }

        order_rows(solutions, query_.order_by);

        SparqlResultSet out;
        out.variables = projected;
        for (const auto& row : solutions) {
            Row cells;
            cells.reserve(projected.size());
            for (const auto& var : projected) cells.push_back(cell(row, var));
            out.rows.push_back(std::move(cells));
        }
        finalize(out);
        return out;
    }

private:
    size_t slot(const std::string& var) {
        auto it = slots_.find(var);
        if (it != slots_.end()) return it->second;
        size_t index = slot_order_.size();
        slots_.emplace(var, index);
        slot_order_.push_back(var);
        return index;
    }

    static std::optional<RdfTerm> get(const Row& row, size_t index) {
        if (index >= row.size()) return std::nullopt;
        return row[index];
    }

    std::optional<RdfTerm> cell(const Row& row, const std::string& var) const {
        auto it = slots_.find(var);
        if (it == slots_.end()) return std::nullopt;
        return get(row, it->second);
    }

    // --- pattern matching ---------------------------------------------------

    std::vector<Row> eval_group(const GroupPattern& group,
                                const std::optional<std::string>& scope,
                                std::vector<Row> rows) {
        std::vector<ExprPtr> filters;
        for (const auto& element : group.elements) {
            if (const auto* triple = std::get_if<sparql::TriplePattern>(&element)) {
                rows = join_triple(rows, *triple, scope);
            } else if (const auto* graph = std::get_if<sparql::GraphBlock>(&element)) {
                if (graph->graph.is_var)
                    throw Error(ErrorKind::Evaluation,
                                "unsupported construct: GRAPH with a variable");
                rows = eval_group(*graph->body, graph->graph.term.value, std::move(rows));
            } else if (const auto* opt = std::get_if<sparql::OptionalBlock>(&element)) {
                rows = left_join(rows, *opt->body, scope);
            } else if (const auto* filter = std::get_if<sparql::FilterClause>(&element)) {
                filters.push_back(filter->expr);  // filters apply to the whole group
            } else if (const auto* values = std::get_if<sparql::ValuesClause>(&element)) {
                rows = join_values(rows, *values);
            }
        }
        for (const auto& filter : filters) {
            std::vector<Row> kept;
            for (auto& row : rows) {
                if (ebv(filter, row)) kept.push_back(std::move(row));
            }
            rows = std::move(kept);
        }
        return rows;
    }

    std::vector<Row> join_triple(const std::vector<Row>& rows,
                                 const sparql::TriplePattern& pattern,
                                 const std::optional<std::string>& scope) {
        std::vector<Row> out;
        for (const auto& row : rows) {
            for (const Triple* triple : candidates(pattern, scope, row)) {
                Row extended = row;
                if (unify(pattern.subject, triple->subject, extended) &&
                    unify(pattern.predicate, triple->predicate, extended) &&
                    unify(pattern.object, triple->object, extended)) {
                    out.push_back(std::move(extended));
                }
            }
        }
        return out;
    }

    // Predicate-indexed candidate lookup; falls back to a full scan when the
    // predicate is not a constant URI.
    std::vector<const Triple*> candidates(const sparql::TriplePattern& pattern,
                                          const std::optional<std::string>& scope,
                                          const Row& row) {
        std::optional<std::string> predicate;
        if (!pattern.predicate.is_var) {
            predicate = pattern.predicate.term.value;
        } else {
            auto bound = cell_checked(row, pattern.predicate.var);
            if (bound && bound->kind == TermKind::Uri) predicate = bound->value;
        }
        const auto& index = scope_index(scope);
        if (predicate) {
            auto it = index.by_predicate.find(*predicate);
            if (it == index.by_predicate.end()) return {};
            return it->second;
        }
        return index.all;
    }

    std::optional<RdfTerm> cell_checked(const Row& row, const std::string& var) {
        auto it = slots_.find(var);
        if (it == slots_.end()) return std::nullopt;
        return get(row, it->second);
    }

    bool unify(const PatternTerm& pattern, const RdfTerm& term, Row& row) {
        if (!pattern.is_var) return terms_equal(pattern.term, term);
        size_t index = slot(pattern.var);
        if (index >= row.size()) row.resize(index + 1);
        if (row[index]) return terms_equal(*row[index], term);
        row[index] = term;
        return true;
    }

    std::vector<Row> left_join(const std::vector<Row>& rows, const GroupPattern& body,
                               const std::optional<std::string>& scope) {
        std::vector<Row> out;
        for (const auto& row : rows) {
            std::vector<Row> extensions = eval_group(body, scope, {row});
            if (extensions.empty()) {
                out.push_back(row);
            } else {
                for (auto& ext : extensions) out.push_back(std::move(ext));
            }
        }
        return out;
    }

    std::vector<Row> join_values(const std::vector<Row>& rows,
                                 const sparql::ValuesClause& values) {
        std::vector<size_t> indices;
        indices.reserve(values.vars.size());
        for (const auto& var : values.vars) indices.push_back(slot(var));

        std::vector<Row> out;
        for (const auto& row : rows) {
            for (const auto& data : values.rows) {
                Row extended = row;
                bool ok = true;
                for (size_t i = 0; i < indices.size() && ok; ++i) {
                    if (!data[i]) continue;  // UNDEF is compatible with anything
                    size_t index = indices[i];
                    if (index >= extended.size()) extended.resize(index + 1);
                    if (extended[index]) {
                        ok = terms_equal(*extended[index], *data[i]);
                    } else {
                        extended[index] = *data[i];
                    }
                }
                if (ok) out.push_back(std::move(extended));
            }
        }
        return out;
    }

    // --- filter expressions ---------------------------------------------------

    bool ebv(const ExprPtr& expr, const Row& row) {
        switch (expr->kind) {
            case Expr::Kind::And:
                return ebv(expr->children[0], row) && ebv(expr->children[1], row);
            case Expr::Kind::Or:
                return ebv(expr->children[0], row) || ebv(expr->children[1], row);
            case Expr::Kind::Not:
                return !ebv(expr->children[0], row);
            default:
                break;
        }
        auto value = eval_expr(expr, row);
        if (!value) return false;  // evaluation errors eliminate the solution
        if (value->kind != TermKind::Literal) return false;
        if (value->datatype == known::xsd_boolean) return value->value == "true";
        if (value->is_numeric()) return value->numeric_value() != 0.0;
        return !value->value.empty();
    }

    static RdfTerm boolean(bool b) {
        return RdfTerm::literal(b ? "true" : "false", known::xsd_boolean);
    }

    std::optional<RdfTerm> eval_expr(const ExprPtr& expr, const Row& row) {
        switch (expr->kind) {
            case Expr::Kind::Bool:
                return boolean(expr->bool_value);
            case Expr::Kind::Term:
                if (expr->term.is_var) return cell_checked(row, expr->term.var);
                return expr->term.term;
            case Expr::Kind::And:
            case Expr::Kind::Or:
            case Expr::Kind::Not:
                return boolean(ebv(expr, row));
            case Expr::Kind::Compare: {
                auto lhs = eval_expr(expr->children[0], row);
                auto rhs = eval_expr(expr->children[1], row);
                if (!lhs || !rhs) return std::nullopt;
                if (expr->op == "=") return boolean(terms_equal(*lhs, *rhs));
                if (expr->op == "!=") return boolean(!terms_equal(*lhs, *rhs));
                int cmp;
                if (lhs->is_numeric() && rhs->is_numeric()) {
                    double a = lhs->numeric_value(), b = rhs->numeric_value();
                    cmp = a < b ? -1 : (a > b ? 1 : 0);
                } else if (lhs->kind == TermKind::Literal && rhs->kind == TermKind::Literal) {
                    cmp = lhs->value.compare(rhs->value);
                } else {
                    return std::nullopt;  // type error
                }
                if (expr->op == "<") return boolean(cmp < 0);
                if (expr->op == ">") return boolean(cmp > 0);
                if (expr->op == "<=") return boolean(cmp <= 0);
                if (expr->op == ">=") return boolean(cmp >= 0);
                return std::nullopt;
            }
            case Expr::Kind::In: {
                auto lhs = eval_expr(expr->children[0], row);
                if (!lhs) return std::nullopt;
                bool found = false;
                for (const auto& member : expr->members) {
                    if (terms_equal(*lhs, member.term)) {
                        found = true;
                        break;
                    }
                }
                return boolean(expr->negated ? !found : found);
            }
            case Expr::Kind::Call:
                return eval_call(expr, row);
        }
        return std::nullopt;
    }

    std::optional<RdfTerm> eval_call(const ExprPtr& expr, const Row& row) {
        const std::string& fn = expr->function;
        if (fn == "bound") {
            if (expr->children.size() != 1 || expr->children[0]->kind != Expr::Kind::Term ||
                !expr->children[0]->term.is_var)
                throw Error(ErrorKind::Evaluation, "BOUND expects a single variable");
            return boolean(cell_checked(row, expr->children[0]->term.var).has_value());
        }
        std::vector<RdfTerm> args;
        for (const auto& child : expr->children) {
            auto value = eval_expr(child, row);
            if (!value) return std::nullopt;
            args.push_back(std::move(*value));
        }
        auto string_of = [](const RdfTerm& t) { return t.value; };
        if (fn == "str") {
            if (args.size() != 1) return std::nullopt;
            return RdfTerm::literal(string_of(args[0]));
        }
        if (fn == "lcase" || fn == "ucase") {
            if (args.size() != 1 || args[0].kind != TermKind::Literal) return std::nullopt;
            std::string v = args[0].value;
            for (auto& c : v)
                c = fn == "lcase" ? static_cast<char>(std::tolower(static_cast<unsigned char>(c)))
                                  : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return RdfTerm::literal(v, args[0].datatype, args[0].language);
        }
        if (fn == "contains" || fn == "strstarts" || fn == "strends") {
            if (args.size() != 2) return std::nullopt;
            const std::string& hay = args[0].value;
            const std::string& needle = args[1].value;
            bool result = false;
            if (fn == "contains") result = hay.find(needle) != std::string::npos;
            else if (fn == "strstarts") result = hay.rfind(needle, 0) == 0;
            else result = hay.size() >= needle.size() &&
                          hay.compare(hay.size() - needle.size(), needle.size(), needle) == 0;
            return boolean(result);
        }
        if (fn == "isliteral") return boolean(args.at(0).kind == TermKind::Literal);
        if (fn == "isiri" || fn == "isuri") return boolean(args.at(0).kind == TermKind::Uri);
        if (fn == "isblank") return boolean(args.at(0).kind == TermKind::Blank);
        if (fn == "datatype") {
            if (args.at(0).kind != TermKind::Literal) return std::nullopt;
            if (!args[0].language.empty())
                return RdfTerm::uri("http://www.w3.org/1999/02/22-rdf-syntax-ns#langString");
            return RdfTerm::uri(args[0].datatype.empty() ? known::xsd_string : args[0].datatype);
        }
        if (fn == "lang") {
            if (args.at(0).kind != TermKind::Literal) return std::nullopt;
            return RdfTerm::literal(args[0].language);
        }
        throw Error(ErrorKind::Evaluation, "unsupported function: " + fn);
    }

    // --- aggregation and modifiers ---------------------------------------------

    SparqlResultSet aggregate(const std::vector<Row>& solutions) {
        std::vector<size_t> key_slots;
        for (const auto& var : query_.group_by) key_slots.push_back(slot(var));

        // group key -> rows, preserving first-seen group order
        std::vector<std::string> group_order;
        std::map<std::string, std::vector<const Row*>> groups;
        for (const auto& row : solutions) {
            std::string key;
            for (size_t index : key_slots) {
                auto value = get(row, index);
                key += value ? to_ntriples(*value) : "~";
                key += '\x1f';
            }
            auto [it, inserted] = groups.try_emplace(key);
            if (inserted) group_order.push_back(key);
            it->second.push_back(&row);
        }
        // Implicit single group when aggregating without GROUP BY.
        if (query_.group_by.empty() && groups.empty()) {
            groups.try_emplace("");
            group_order.push_back("");
        }

        std::vector<Row> out_rows;
        for (const auto& key : group_order) {
            const auto& members = groups[key];
            Row out_row;
            for (const auto& item : query_.items) {
                if (!item.is_aggregate) {
                    auto index = slots_.find(item.var);
                    std::optional<RdfTerm> value;
                    if (!members.empty() && index != slots_.end())
                        value = get(*members.front(), index->second);
                    out_row.push_back(value);
                    continue;
                }
                long long count = 0;
                if (item.count_star && !item.count_distinct) {
                    count = static_cast<long long>(members.size());
                } else if (item.count_star) {
                    std::set<std::string> distinct;
                    for (const Row* row : members) distinct.insert(row_key(*row));
                    count = static_cast<long long>(distinct.size());
                } else {
                    size_t index = slot(item.count_var);
                    if (item.count_distinct) {
                        std::set<std::string> distinct;
                        for (const Row* row : members) {
                            auto value = get(*row, index);
                            if (value) distinct.insert(to_ntriples(*value));
                        }
                        count = static_cast<long long>(distinct.size());
                    } else {
                        for (const Row* row : members)
                            if (get(*row, index)) ++count;
                    }
                }
                out_row.push_back(RdfTerm::integer(count));
            }
            out_rows.push_back(std::move(out_row));
        }

        SparqlResultSet out;
        for (const auto& item : query_.items) out.variables.push_back(item.var);
        out.rows = std::move(out_rows);

        // ORDER BY over the aggregate output columns.
        if (!query_.order_by.empty()) {
            std::vector<size_t> key_columns;
            std::vector<bool> descending;
            for (const auto& key : query_.order_by) {
                auto it = std::find(out.variables.begin(), out.variables.end(), key.var);
                if (it == out.variables.end())
                    throw Error(ErrorKind::Evaluation,
                                "ORDER BY variable ?" + key.var + " is not projected");
                key_columns.push_back(static_cast<size_t>(it - out.variables.begin()));
                descending.push_back(key.descending);
            }
            std::stable_sort(out.rows.begin(), out.rows.end(),
                             [&](const Row& a, const Row& b) {
                                 for (size_t i = 0; i < key_columns.size(); ++i) {
                                     int c = compare_cells(get(a, key_columns[i]),
                                                           get(b, key_columns[i]));
                                     if (c != 0) return descending[i] ? c > 0 : c < 0;
                                 }
                                 return false;
                             });
        }
        finalize(out);
        return out;
    }

    static int compare_cells(const std::optional<RdfTerm>& a, const std::optional<RdfTerm>& b) {
        if (!a && !b) return 0;
        if (!a) return -1;
        if (!b) return 1;
        return compare_terms(*a, *b);
    }

    void order_rows(std::vector<Row>& rows, const std::vector<sparql::OrderKey>& keys) {
        if (keys.empty()) return;
        std::vector<size_t> key_slots;
        std::vector<bool> descending;
        for (const auto& key : keys) {
            key_slots.push_back(slot(key.var));
            descending.push_back(key.descending);
        }
        std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
            for (size_t i = 0; i < key_slots.size(); ++i) {
                int c = compare_cells(get(a, key_slots[i]), get(b, key_slots[i]));
                if (c != 0) return descending[i] ? c > 0 : c < 0;
            }
            return false;
        });
    }

    // Shared tail: DISTINCT, then OFFSET/LIMIT.
    void finalize(SparqlResultSet& out) const {
        if (query_.distinct) {
            std::set<std::string> seen;
            std::vector<Row> kept;
            for (auto& row : out.rows) {
                if (seen.insert(row_key(row)).second) kept.push_back(std::move(row));
            }
            out.rows = std::move(kept);
        }
        size_t offset = query_.offset.value_or(0);
        if (offset >= out.rows.size()) {
            out.rows.clear();
        } else if (offset > 0) {
            out.rows.erase(out.rows.begin(), out.rows.begin() + static_cast<long>(offset));
        }
        if (query_.limit && out.rows.size() > *query_.limit) {
            out.rows.resize(*query_.limit);
        }
    }

    // --- candidate indexes ---------------------------------------------------

    struct ScopeIndex {
        std::vector<const Triple*> all;
        std::unordered_map<std::string, std::vector<const Triple*>> by_predicate;
    };

    const ScopeIndex& scope_index(const std::optional<std::string>& scope) {
        std::string key = scope.value_or("\x01union");
        auto it = indexes_.find(key);
        if (it != indexes_.end()) return it->second;
        ScopeIndex index;
        auto add_triples = [&](const std::vector<Triple>& triples) {
            for (const auto& triple : triples) {
                index.all.push_back(&triple);
                index.by_predicate[triple.predicate.value].push_back(&triple);
            }
        };
        if (scope) {
            add_triples(store_.graph(*scope));
        } else {
            for (const auto& uri : store_.graph_uris()) add_triples(store_.graph(uri));
        }
        return indexes_.emplace(std::move(key), std::move(index)).first->second;
    }

    const TripleStore& store_;
    const SelectQuery& query_;
    std::map<std::string, size_t> slots_;
    std::vector<std::string> slot_order_;
    std::map<std::string, ScopeIndex> indexes_;
};

} // namespace

SparqlResultSet evaluate(const TripleStore& store, const sparql::SelectQuery& query) {
    return Evaluator(store, query).run();
}

SparqlResultSet evaluate(const TripleStore& store, const std::string& query_text) {
    return evaluate(store, sparql::parse_query(query_text));
}

} // namespace fedkg::fixture
