#pragma once

#include <string>

#include "fedkg/fixture/store.hpp"
#include "fedkg/rdf.hpp"
#include "fedkg/sparql/ast.hpp"

namespace fedkg::fixture {

// Evaluates a SELECT query (supported subset) against the store.
// Unscoped patterns match the union of all named graphs; GRAPH <uri>
// blocks restrict matching to that graph. Solution modifiers follow
// SPARQL semantics: group/aggregate, then ORDER BY, projection,
// DISTINCT, OFFSET and LIMIT.
//
// Queries outside the subset raise Error(ErrorKind::Evaluation) or
// Error(ErrorKind::Parse) naming the construct.
SparqlResultSet evaluate(const TripleStore& store, const std::string& query_text);
SparqlResultSet evaluate(const TripleStore& store, const sparql::SelectQuery& query);

} // namespace fedkg::fixture
