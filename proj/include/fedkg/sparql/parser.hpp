#pragma once

#include <string>

#include "fedkg/sparql/ast.hpp"

namespace fedkg::sparql {

// Parses a SPARQL SELECT query restricted to the supported subset:
// PREFIX declarations, SELECT [DISTINCT] with variables and COUNT
// aggregates, basic graph patterns, GRAPH blocks, OPTIONAL, FILTER
// (comparisons, IN, logical operators, string/type builtins), VALUES,
// GROUP BY, ORDER BY, LIMIT and OFFSET.
//
// Throws Error(ErrorKind::Parse) naming the offending construct for
// anything outside the subset.
SelectQuery parse_query(const std::string& text);

// Canonical single-line rendering of a parsed query. parse(serialize(q))
// is structurally equal to q.
std::string serialize(const SelectQuery& query);
std::string serialize(const GroupPattern& group);
std::string serialize(const ExprPtr& expr);
std::string serialize(const PatternTerm& term);

} // namespace fedkg::sparql
