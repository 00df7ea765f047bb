#pragma once

#include <optional>
#include <string>

#include "fedkg/rdf.hpp"

namespace fedkg::sparql {

struct EndpointConfig {
    std::string url;
    double request_timeout_s = 60.0;
    int max_retries = 2;
    size_t max_results_per_request = 10000;
    int max_concurrent = 4;   // simultaneous in-flight requests per endpoint
    int retry_backoff_ms = 250;
};

struct ScopeResult {
    std::string query;
    // Set when the query already contained a GRAPH block and was
    // returned unchanged; surfaces as a QueryAnalysis note.
    bool already_scoped = false;
};

// Restricts a SELECT query to one named graph by wrapping its WHERE
// pattern in a GRAPH block. Queries that already contain a GRAPH block
// pass through unchanged. Throws Error(ErrorKind::Rewrite) for queries
// outside the supported subset.
ScopeResult scope_to_graph(const std::string& query, const std::string& graph_uri);

// SPARQL 1.1 Protocol client: POST application/sparql-query, results as
// SPARQL JSON. Safe for concurrent use; a per-endpoint cap bounds
// simultaneous requests. Transient failures (timeouts, 5xx) are retried
// with exponential backoff up to max_retries.
class SparqlClient {
public:
    SparqlResultSet execute_select(const EndpointConfig& endpoint, const std::string& query) const;
};

} // namespace fedkg::sparql
