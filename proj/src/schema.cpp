#include "fedkg/schema.hpp"

#include <algorithm>
#include <sstream>

#include "fedkg/errors.hpp"

namespace fedkg {

namespace {

long long count_cell(const SparqlResultSet& results, size_t row, const std::string& var) {
    auto cell = results.binding(row, var);
    if (!cell) return 0;
    try {
        return std::stoll(cell->value);
    } catch (...) {
        return 0;
    }
}

void sort_counted(std::vector<std::pair<std::string, long long>>& entries) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
}

std::string local_name(const std::string& uri) {
    auto hash = uri.find_last_of('#');
    if (hash != std::string::npos && hash + 1 < uri.size()) return uri.substr(hash + 1);
    auto slash = uri.find_last_of('/');
    if (slash != std::string::npos && slash + 1 < uri.size()) return uri.substr(slash + 1);
    return uri;
}

} // namespace

SchemaService::SchemaService(const sparql::SparqlClient& client, const Registry& registry,
                             sparql::EndpointConfig endpoint, SchemaLimits limits)
    : client_(client), registry_(registry), endpoint_(std::move(endpoint)), limits_(limits) {}

SchemaSummary SchemaService::get_schema(const std::string& graph_name) const {
    const GraphDescriptor& graph = get_description(registry_, graph_name);
    const std::string g = "<" + graph.graph_uri + ">";

    SchemaSummary schema;
    schema.graph = graph.name;
    try {
        SparqlResultSet classes = client_.execute_select(
            endpoint_,
            "SELECT ?class (COUNT(?s) AS ?instances) WHERE { GRAPH " + g +
                " { ?s a ?class } } GROUP BY ?class ORDER BY DESC(?instances) ?class LIMIT " +
                std::to_string(limits_.max_classes));
        for (size_t i = 0; i < classes.rows.size(); ++i) {
            auto cls = classes.binding(i, "class");
            if (cls) schema.classes.emplace_back(cls->value, count_cell(classes, i, "instances"));
        }
        if (classes.rows.size() >= limits_.max_classes) schema.truncated = true;

        SparqlResultSet predicates = client_.execute_select(
            endpoint_,
            "SELECT ?p (COUNT(*) AS ?uses) WHERE { GRAPH " + g +
                " { ?s ?p ?o } } GROUP BY ?p ORDER BY DESC(?uses) ?p LIMIT " +
                std::to_string(limits_.max_predicates));
        for (size_t i = 0; i < predicates.rows.size(); ++i) {
            auto pred = predicates.binding(i, "p");
            if (pred)
                schema.predicates.emplace_back(pred->value, count_cell(predicates, i, "uses"));
        }
        if (predicates.rows.size() >= limits_.max_predicates) schema.truncated = true;

        // One literal sample per predicate; predicates without literal
        // objects stay out of datatype_properties.
        for (const auto& [predicate, _] : schema.predicates) {
            SparqlResultSet sample = client_.execute_select(
                endpoint_, "SELECT ?o WHERE { GRAPH " + g + " { ?s <" + predicate +
                               "> ?o . FILTER(isLiteral(?o)) } } LIMIT 1");
            if (sample.rows.empty()) continue;
            auto cell = sample.binding(0, "o");
            if (!cell) continue;
            std::string datatype = cell->datatype;
            if (datatype.empty())
                datatype = cell->language.empty()
                               ? known::xsd_string
                               : "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
            schema.datatype_properties.emplace_back(predicate, datatype);
        }

        SparqlResultSet edges = client_.execute_select(
            endpoint_, "SELECT DISTINCT ?ca ?p ?cb WHERE { GRAPH " + g +
                           " { ?s ?p ?o . ?s a ?ca . ?o a ?cb } } LIMIT " +
                           std::to_string(limits_.max_edges));
        for (size_t i = 0; i < edges.rows.size(); ++i) {
            auto ca = edges.binding(i, "ca");
            auto p = edges.binding(i, "p");
            auto cb = edges.binding(i, "cb");
            if (ca && p && cb && p->value != known::rdf_type)
                schema.edges.emplace_back(ca->value, p->value, cb->value);
        }
        if (edges.rows.size() >= limits_.max_edges) schema.truncated = true;
    } catch (const Error& e) {
        throw Error(e.kind(), "get_schema(" + graph.name + "): " + e.what());
    }

    sort_counted(schema.classes);
    sort_counted(schema.predicates);
    std::sort(schema.datatype_properties.begin(), schema.datatype_properties.end());
    std::sort(schema.edges.begin(), schema.edges.end());
    return schema;
}

const std::vector<QueryTemplate>& query_template_catalog() {
    static const std::vector<QueryTemplate> catalog = {
        {
            "reified_edge_properties",
            "Edge properties via RDF reification",
            "Fetches edges represented as statement nodes together with a property "
            "attached to the edge itself (for example an effect size or p-value).",
            "SELECT ?subject ?predicate ?object ?value WHERE { GRAPH <{graph_uri}> { "
            "?statement <http://www.w3.org/1999/02/22-rdf-syntax-ns#subject> ?subject . "
            "?statement <http://www.w3.org/1999/02/22-rdf-syntax-ns#predicate> ?predicate . "
            "?statement <http://www.w3.org/1999/02/22-rdf-syntax-ns#object> ?object . "
            "?statement <{property_uri}> ?value } } LIMIT {limit}",
            {{"graph_uri", "uri"}, {"property_uri", "uri"}, {"limit", "number"}},
        },
        {
            "class_instances",
            "Instances of a class within a graph",
            "Lists instances of one class inside a named graph.",
            "SELECT ?instance WHERE { GRAPH <{graph_uri}> { ?instance a <{class_uri}> } } "
            "LIMIT {limit}",
            {{"graph_uri", "uri"}, {"class_uri", "uri"}, {"limit", "number"}},
        },
        {
            "count_by_annotation",
            "Record counts grouped by an annotation value",
            "Counts records per value of an annotation predicate, most frequent first.",
            "SELECT ?value (COUNT(?record) AS ?count) WHERE { GRAPH <{graph_uri}> { "
            "?record <{annotation_predicate}> ?value } } GROUP BY ?value "
            "ORDER BY DESC(?count) ?value LIMIT {limit}",
            {{"graph_uri", "uri"}, {"annotation_predicate", "uri"}, {"limit", "number"}},
        },
        {
            "ontology_expanded_filter",
            "Ontology-term filter eligible for automatic expansion",
            "Matches records annotated with one ontology term. The query tool expands the "
            "FILTER constraint over the term's descendants automatically.",
            "SELECT ?record ?term WHERE { GRAPH <{graph_uri}> { "
            "?record <{annotation_predicate}> ?term . FILTER(?term = <{seed_uri}>) } } "
            "LIMIT {limit}",
            {{"graph_uri", "uri"},
             {"annotation_predicate", "uri"},
             {"seed_uri", "uri"},
             {"limit", "number"}},
        },
        {
            "label_search",
            "Case-insensitive label search",
            "Finds resources whose rdfs:label contains a text fragment.",
            "SELECT DISTINCT ?uri ?label WHERE { GRAPH <{graph_uri}> { "
            "?uri <http://www.w3.org/2000/01/rdf-schema#label> ?label . "
            "FILTER(CONTAINS(LCASE(STR(?label)), \"{text}\")) } } LIMIT {limit}",
            {{"graph_uri", "uri"}, {"text", "text"}, {"limit", "number"}},
        },
    };
    return catalog;
}

const QueryTemplate& get_query_template(const std::string& template_id) {
    for (const auto& entry : query_template_catalog()) {
        if (entry.template_id == template_id) return entry;
    }
    std::ostringstream known_ids;
    const auto& catalog = query_template_catalog();
    for (size_t i = 0; i < catalog.size(); ++i) {
        if (i) known_ids << ", ";
        known_ids << catalog[i].template_id;
    }
    throw Error(ErrorKind::NotFound,
                "unknown template '" + template_id + "'; available: " + known_ids.str());
}

std::string visualize_schema(const SchemaSummary& schema, const std::string& format) {
    if (format != "dot" && format != "mermaid")
        throw Error(ErrorKind::InvalidArgument,
                    "unsupported diagram format '" + format + "' (expected dot or mermaid)");

    // Stable node ids in classes order.
    std::vector<std::string> class_uris;
    for (const auto& [uri, _] : schema.classes) class_uris.push_back(uri);
    auto node_index = [&](const std::string& uri) -> long {
        auto it = std::find(class_uris.begin(), class_uris.end(), uri);
        return it == class_uris.end() ? -1 : it - class_uris.begin();
    };

    std::ostringstream out;
    if (format == "mermaid") {
        out << "graph TD\n";
        for (size_t i = 0; i < schema.classes.size(); ++i) {
            out << "    C" << i << "[\"" << local_name(schema.classes[i].first) << " ("
                << schema.classes[i].second << ")\"]\n";
        }
        for (const auto& [ca, p, cb] : schema.edges) {
            long a = node_index(ca), b = node_index(cb);
            if (a < 0 || b < 0) continue;
            out << "    C" << a << " -->|" << local_name(p) << "| C" << b << "\n";
        }
    } else {
        out << "digraph schema {\n  rankdir=LR;\n";
        for (const auto& [uri, count] : schema.classes) {
            out << "  \"" << local_name(uri) << "\" [label=\"" << local_name(uri) << " (" << count
                << ")\"];\n";
        }
        for (const auto& [ca, p, cb] : schema.edges) {
            if (node_index(ca) < 0 || node_index(cb) < 0) continue;
            out << "  \"" << local_name(ca) << "\" -> \"" << local_name(cb) << "\" [label=\""
                << local_name(p) << "\"];\n";
        }
        out << "}\n";
    }
    return out.str();
}

} // namespace fedkg
