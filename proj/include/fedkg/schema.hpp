#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "fedkg/registry.hpp"
#include "fedkg/sparql/client.hpp"

namespace fedkg {

// Observed schema of one named graph: usage statistics, not declared
// ontology. Lists are sorted by descending count, ties by URI.
struct SchemaSummary {
    std::string graph;
    std::vector<std::pair<std::string, long long>> classes;       // class URI, instance count
    std::vector<std::pair<std::string, long long>> predicates;    // predicate URI, usage count
    std::vector<std::pair<std::string, std::string>> datatype_properties;  // predicate, sample datatype
    // class/predicate/class co-occurrences powering visualization edges
    std::vector<std::tuple<std::string, std::string, std::string>> edges;
    bool truncated = false;  // any of the bounded schema queries hit its limit
};

struct QueryTemplate {
    std::string template_id;
    std::string title;
    std::string description;
    std::string sparql_pattern;  // text with {slot} placeholders
    std::vector<std::pair<std::string, std::string>> placeholders;  // slot name, expected kind
};

// Query limits for schema introspection on large graphs.
struct SchemaLimits {
    size_t max_classes = 200;
    size_t max_predicates = 500;
    size_t max_edges = 1000;
};

class SchemaService {
public:
    SchemaService(const sparql::SparqlClient& client, const Registry& registry,
                  sparql::EndpointConfig endpoint, SchemaLimits limits = {});

    // Classes by instance count, predicates by usage count, datatype
    // properties by sampling one literal object per predicate, plus
    // co-occurrence edges. All through scoped aggregation queries.
    SchemaSummary get_schema(const std::string& graph_name) const;

private:
    const sparql::SparqlClient& client_;
    const Registry& registry_;
    sparql::EndpointConfig endpoint_;
    SchemaLimits limits_;
};

// Built-in template catalog.
const std::vector<QueryTemplate>& query_template_catalog();
const QueryTemplate& get_query_template(const std::string& template_id);

// Deterministic diagram source (dot or mermaid): one node per class with
// its instance count, one edge per co-occurring predicate.
std::string visualize_schema(const SchemaSummary& schema, const std::string& format);

} // namespace fedkg
