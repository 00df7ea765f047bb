#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "fedkg/rdf.hpp"

namespace fedkg::sparql {

// A pattern atom: either a variable or a constant RDF term.
struct PatternTerm {
    bool is_var = false;
    std::string var;  // variable name without the '?' sigil
    RdfTerm term;     // constant when !is_var

    static PatternTerm variable(std::string name) {
        PatternTerm p;
        p.is_var = true;
        p.var = std::move(name);
        return p;
    }
    static PatternTerm constant(RdfTerm t) {
        PatternTerm p;
        p.term = std::move(t);
        return p;
    }

    bool operator==(const PatternTerm& other) const = default;
};

struct TriplePattern {
    PatternTerm subject;
    PatternTerm predicate;
    PatternTerm object;

    bool operator==(const TriplePattern& other) const = default;
};

// Filter expression tree. Covers the supported subset: logical and/or/not,
// comparisons, IN / NOT IN, a handful of builtin calls, and atoms.
struct Expr {
    enum class Kind { And, Or, Not, Compare, In, Call, Term, Bool };

    Kind kind = Kind::Bool;
    std::vector<std::shared_ptr<Expr>> children;
    std::string op;                    // Compare: =, !=, <, >, <=, >=
    std::vector<PatternTerm> members;  // In: right-hand list (constants)
    bool negated = false;              // In: NOT IN
    std::string function;              // Call: lowercase builtin name
    PatternTerm term;                  // Term atom
    bool bool_value = false;           // Bool constant
};

using ExprPtr = std::shared_ptr<Expr>;

// Inline VALUES data. A missing optional in a row is UNDEF.
struct ValuesClause {
    std::vector<std::string> vars;
    std::vector<std::vector<std::optional<RdfTerm>>> rows;
};

struct GroupPattern;

struct GraphBlock {
    PatternTerm graph;  // URI constant or variable
    std::shared_ptr<GroupPattern> body;
};

struct OptionalBlock {
    std::shared_ptr<GroupPattern> body;
};

struct FilterClause {
    ExprPtr expr;
};

using Element = std::variant<TriplePattern, GraphBlock, OptionalBlock, FilterClause, ValuesClause>;

struct GroupPattern {
    std::vector<Element> elements;
};

// One projection item: a plain variable or (COUNT(...) AS ?alias).
struct SelectItem {
    bool is_aggregate = false;
    std::string var;  // plain variable, or the alias for aggregates
    bool count_star = false;
    bool count_distinct = false;
    std::string count_var;  // counted variable when !count_star
};

struct OrderKey {
    bool descending = false;
    std::string var;
};

struct SelectQuery {
    bool distinct = false;
    bool select_star = false;
    std::vector<SelectItem> items;  // empty when select_star
    GroupPattern where;
    std::vector<std::string> group_by;
    std::vector<OrderKey> order_by;
    std::optional<std::uint64_t> limit;
    std::optional<std::uint64_t> offset;

    bool has_aggregates() const {
        for (const auto& item : items)
            if (item.is_aggregate) return true;
        return false;
    }
};

// Deep copies; ASTs use shared_ptr internally, so plain copies alias.
GroupPattern clone(const GroupPattern& group);
ExprPtr clone(const ExprPtr& expr);
SelectQuery clone(const SelectQuery& query);

// Every variable name mentioned anywhere in the query.
std::set<std::string> collect_variables(const SelectQuery& query);

// True if any GRAPH block occurs anywhere in the pattern tree.
bool contains_graph_block(const GroupPattern& group);

} // namespace fedkg::sparql
