#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedkg/rdf.hpp"

namespace fedkg::fixture {

// In-memory named-graph triple store for offline tests. Immutable once
// loading is done; the evaluator only reads.
class TripleStore {
public:
    // Parses line-oriented N-Triples text into the named graph. When
    // close_subclass is set, the transitive closure of rdfs:subClassOf
    // is materialized after loading, UberGraph-style.
    // Throws Error(ErrorKind::Parse) with a line number on bad input.
    void load_ntriples(const std::string& text, const std::string& graph_uri,
                       bool close_subclass = false);
    void load_ntriples_file(const std::string& path, const std::string& graph_uri,
                            bool close_subclass = false);

    void add(const std::string& graph_uri, Triple triple);

    const std::vector<Triple>& graph(const std::string& graph_uri) const;
    std::vector<std::string> graph_uris() const;
    // Union of all named graphs, in graph-then-insertion order.
    std::vector<Triple> all_triples() const;

    size_t size(const std::string& graph_uri) const;

private:
    void close_subclass_of(const std::string& graph_uri);

    std::map<std::string, std::vector<Triple>> graphs_;
    std::map<std::string, std::set<std::string>> seen_;  // graph -> triple keys
};

// Parses a single N-Triples term (IRI, literal, or blank node).
RdfTerm parse_ntriples_term(const std::string& text, size_t& pos);

} // namespace fedkg::fixture
