#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedkg {

// Identifier namespace known to the federation, e.g. MONDO with the OBO
// URI pattern. uri_pattern contains exactly one "{id}" slot.
struct OntologyNamespace {
    std::string prefix;
    std::string uri_pattern;
    bool expandable = false;
};

struct ExampleQuery {
    std::string title;
    std::string sparql;
};

// Registry entry describing one federated named graph.
struct GraphDescriptor {
    std::string name;  // lowercase short handle, unique
    std::string graph_uri;
    std::vector<std::string> domains;
    std::vector<std::string> entity_types;
    std::vector<std::string> namespaces;
    std::string description;
    std::string doc_url;
    std::vector<ExampleQuery> example_queries;
};

struct GraphSummary {
    std::string name;
    std::vector<std::string> domains;
    std::vector<std::string> entity_types;
    std::vector<std::string> namespaces;
    std::string description;
};

struct RouteCandidate {
    std::string graph;
    double score = 0.0;
    std::vector<std::string> matched_terms;
};

// Immutable after load; safe for concurrent reads.
struct Registry {
    std::vector<GraphDescriptor> graphs;  // document order
    std::string federation_endpoint;
    std::string ontology_endpoint;
    std::vector<OntologyNamespace> namespaces;

    const GraphDescriptor* find(const std::string& name) const;  // case-insensitive
    const OntologyNamespace* find_namespace(const std::string& prefix) const;
};

// Loads and validates the registry config document. Errors name the
// offending entry.
Registry load_registry(const nlohmann::json& config);
Registry load_registry_file(const std::string& path);

std::vector<GraphSummary> list_graphs(const Registry& registry);

// Full descriptor lookup; unknown names raise a not-found error listing
// valid names.
const GraphDescriptor& get_description(const Registry& registry, const std::string& name);

// Lexical routing: candidates scored by weighted token overlap between
// the question and descriptor fields. An explicit "@name" mention forces
// that graph to rank first. Zero-score graphs are omitted.
std::vector<RouteCandidate> route_query(const Registry& registry, const std::string& question);

// Tokenization shared by routing and lookups: lowercase, split on
// non-alphanumeric characters, drop tokens shorter than 3.
std::vector<std::string> tokenize(const std::string& text);

// Routing weights per matched token.
namespace routing_weights {
inline constexpr double name = 10.0;
inline constexpr double entity_types = 3.0;
inline constexpr double domains = 3.0;
inline constexpr double namespaces = 2.0;
inline constexpr double description = 1.0;
inline constexpr double mention_bonus = 1000.0;  // "@name" pin
} // namespace routing_weights

} // namespace fedkg
