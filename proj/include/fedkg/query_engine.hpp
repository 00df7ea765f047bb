#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedkg/ontology.hpp"
#include "fedkg/registry.hpp"
#include "fedkg/schema.hpp"
#include "fedkg/sparql/client.hpp"

namespace fedkg {

// Closed warning-code set; anything new must be added here and documented.
enum class WarningCode {
    NoLimit,
    NoGraphScopeAdded,
    UnparsedFallback,
    ExpansionTruncated,
    ExpansionSkippedMultipleSeeds,
    DuplicateGraph,
    UnknownPredicate,
};

const char* to_string(WarningCode code);

struct Warning {
    WarningCode code;
    std::string message;
};

struct QueryAnalysis {
    std::vector<Warning> warnings;
    std::optional<ExpansionReport> expansion;
    std::string scoped_graph;  // graph URI the query was scoped to
    size_t row_count = 0;
    bool truncated = false;
    double elapsed_s = 0.0;
};

struct QueryOutcome {
    SparqlResultSet results;
    QueryAnalysis analysis;
};

// Name of the reserved provenance variable in multi-graph results.
inline constexpr const char* kSourceGraphVariable = "source_graph";

struct AnnotatedResultSet {
    std::vector<std::string> variables;  // union across graphs + source_graph (last)
    std::vector<std::vector<std::optional<RdfTerm>>> rows;
    std::map<std::string, size_t> per_graph_counts;
    std::map<std::string, std::string> errors;  // graph -> failure message
    std::vector<Warning> warnings;
};

struct JoinStrategy {
    enum class Kind { Direct, Bridge, None };
    Kind kind = Kind::None;
    std::vector<std::string> shared_namespaces;
    std::optional<std::string> bridge_graph;
    std::string explanation;
};

const char* to_string(JoinStrategy::Kind kind);

// Direct join when namespace sets intersect; otherwise the bridge graph
// maximizing min(overlap with a, overlap with b), ties by registry order.
JoinStrategy get_join_strategy(const Registry& registry, const std::string& graph_a,
                               const std::string& graph_b);

class QueryEngine {
public:
    QueryEngine(const sparql::SparqlClient& client, const Registry& registry,
                sparql::EndpointConfig federation_endpoint, const OntologyService& ontology);

    // Full pipeline: parse (verbatim fallback with a warning), detect
    // expandable URIs, expand and batch, scope to the named graph,
    // execute, merge, and attach analysis.
    QueryOutcome query(const std::string& graph_name, const std::string& sparql,
                       const ExpansionConfig& expansion = {}) const;

    // Runs query() per graph and concatenates rows tagged with their
    // source graph. Per-graph failures are recorded, not fatal, unless
    // every graph fails.
    AnnotatedResultSet multi_graph_query(const std::vector<std::string>& graph_names,
                                         const std::string& sparql,
                                         const ExpansionConfig& expansion = {}) const;

    // Registers a schema so query() can warn about predicates absent
    // from it (unknown_predicate).
    void note_schema(const SchemaSummary& schema) const;

    const Registry& registry() const { return registry_; }
    const sparql::EndpointConfig& federation_endpoint() const { return federation_endpoint_; }

private:
    const sparql::SparqlClient& client_;
    const Registry& registry_;
    sparql::EndpointConfig federation_endpoint_;
    const OntologyService& ontology_;

    mutable std::mutex schema_mutex_;
    mutable std::map<std::string, std::set<std::string>> known_predicates_;
};

} // namespace fedkg
