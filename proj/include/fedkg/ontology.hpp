#pragma once

#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fedkg/registry.hpp"
#include "fedkg/sparql/client.hpp"

namespace fedkg {

struct ExpansionConfig {
    size_t max_descendants = 5000;
    size_t batch_size = 20;
    bool include_seed = true;
    // Prefixes eligible for automatic expansion. Empty means "use the
    // registry's expandable namespaces".
    std::vector<std::string> enabled_namespaces;
};

struct ExpansionReport {
    std::string seed_uri;
    std::string namespace_prefix;
    size_t descendant_count = 0;
    size_t batch_count = 0;  // 0 when expansion was skipped
    size_t batch_size = 0;
    bool truncated = false;
    double elapsed_s = 0.0;
};

// Where an expandable URI occurs in a query.
enum class UriLocation { TripleObject, FilterEquality, FilterIn, ValuesRow };

const char* to_string(UriLocation location);

struct ExpandableUri {
    std::string uri;
    UriLocation location;
};

// CURIE (PREFIX:LOCALID) to full URI under the namespace's uri_pattern.
std::string curie_to_uri(const std::string& curie,
                         const std::vector<OntologyNamespace>& namespaces);

// Namespace whose uri_pattern matches the URI, if any.
const OntologyNamespace* match_namespace(const std::string& uri,
                                         const std::vector<OntologyNamespace>& namespaces);

// Consecutive chunks of batch_size, preserving order; all but the last
// chunk have exactly batch_size elements.
std::vector<std::vector<std::string>> make_batches(const std::vector<std::string>& uris,
                                                   size_t batch_size);

// Finds constants from enabled namespaces in supported locations:
// triple objects, FILTER =/IN members, VALUES rows.
std::vector<ExpandableUri> detect_expandable_uris(const std::string& query,
                                                  const std::vector<OntologyNamespace>& namespaces,
                                                  const ExpansionConfig& config);

// Rewrites the single-URI constraint on `uri` into a VALUES constraint
// over {seed?} + descendants, partitioned into batch_size chunks. Each
// returned query is individually valid; their solution union equals a
// single query over the whole set.
std::vector<std::string> expand_query(const std::string& query, const std::string& uri,
                                      const std::vector<std::string>& descendants,
                                      const ExpansionConfig& config);

// Ontology-endpoint operations: label lookup and transitive descendant
// retrieval, with a bounded LRU cache keyed by seed URI.
class OntologyService {
public:
    OntologyService(const sparql::SparqlClient& client, sparql::EndpointConfig endpoint,
                    std::vector<OntologyNamespace> namespaces);

    // CURIE fast path, otherwise a case-insensitive label match. Up to 20
    // (URI, label) pairs, exact label matches first.
    std::vector<std::pair<std::string, std::string>> lookup_uri(const std::string& term) const;

    // Strict transitive subclass descendants (seed excluded from the
    // returned list), deduplicated and sorted. The report counts batches
    // for the would-be expansion set under `config`.
    std::pair<std::vector<std::string>, ExpansionReport> get_descendants(
        const std::string& uri, const ExpansionConfig& config) const;

    const std::vector<OntologyNamespace>& namespaces() const { return namespaces_; }

    // Prefixes enabled under `config` (explicit list, or expandable defaults).
    std::vector<OntologyNamespace> enabled_namespaces(const ExpansionConfig& config) const;

    const sparql::EndpointConfig& endpoint() const { return endpoint_; }

private:
    std::vector<std::string> fetch_descendants(const std::string& uri, size_t bound,
                                               bool& truncated) const;

    const sparql::SparqlClient& client_;
    sparql::EndpointConfig endpoint_;
    std::vector<OntologyNamespace> namespaces_;

    // LRU cache: seed URI + bound -> descendants.
    struct CacheEntry {
        std::vector<std::string> descendants;
        bool truncated = false;
    };
    static constexpr size_t kCacheCapacity = 256;
    mutable std::mutex cache_mutex_;
    mutable std::list<std::string> cache_order_;  // most recent first
    mutable std::map<std::string, std::pair<std::list<std::string>::iterator, CacheEntry>> cache_;
};

} // namespace fedkg
