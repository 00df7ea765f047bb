#include "fedkg/registry.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fedkg/errors.hpp"

namespace fedkg {

namespace {

std::string to_lower(const std::string& text) {
    std::string out = text;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool valid_absolute_uri(const std::string& uri) {
    auto colon = uri.find(':');
    if (colon == std::string::npos || colon == 0) return false;
    if (!std::isalpha(static_cast<unsigned char>(uri[0]))) return false;
    for (size_t i = 1; i < colon; ++i) {
        char c = uri[i];
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
            return false;
    }
    if (colon + 1 >= uri.size()) return false;
    return uri.find(' ') == std::string::npos;
}

std::vector<std::string> string_list(const nlohmann::json& doc, const char* key) {
    std::vector<std::string> out;
    if (!doc.contains(key)) return out;
    for (const auto& item : doc.at(key)) out.push_back(item.get<std::string>());
    return out;
}

} // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!current.empty()) {
            if (current.size() >= 3) out.push_back(current);
            current.clear();
        }
    }
    if (current.size() >= 3) out.push_back(current);
    return out;
}

const GraphDescriptor* Registry::find(const std::string& name) const {
    std::string wanted = to_lower(name);
    for (const auto& graph : graphs) {
        if (graph.name == wanted) return &graph;
    }
    return nullptr;
}

const OntologyNamespace* Registry::find_namespace(const std::string& prefix) const {
    for (const auto& ns : namespaces) {
        if (ns.prefix == prefix) return &ns;
    }
    return nullptr;
}

Registry load_registry(const nlohmann::json& config) {
    if (!config.is_object())
        throw Error(ErrorKind::Config, "registry config must be a JSON object");

    Registry registry;
    registry.federation_endpoint = config.value("federation_endpoint", "");
    registry.ontology_endpoint = config.value("ontology_endpoint", "");

    if (config.contains("namespaces")) {
        std::set<std::string> seen;
        for (const auto& entry : config.at("namespaces")) {
            OntologyNamespace ns;
            ns.prefix = entry.at("prefix").get<std::string>();
            ns.uri_pattern = entry.at("uri_pattern").get<std::string>();
            ns.expandable = entry.value("expandable", false);
            if (ns.prefix.empty())
                throw Error(ErrorKind::Config, "namespace entry with empty prefix");
            if (!seen.insert(ns.prefix).second)
                throw Error(ErrorKind::Config, "duplicate namespace prefix: " + ns.prefix);
            auto slot = ns.uri_pattern.find("{id}");
            if (slot == std::string::npos ||
                ns.uri_pattern.find("{id}", slot + 1) != std::string::npos)
                throw Error(ErrorKind::Config, "namespace " + ns.prefix +
                                                   ": uri_pattern must contain exactly one {id}");
            registry.namespaces.push_back(std::move(ns));
        }
    }

    if (!config.contains("graphs") || !config.at("graphs").is_array() ||
        config.at("graphs").empty())
        throw Error(ErrorKind::Config, "registry config must list at least one graph");

    std::set<std::string> names;
    std::set<std::string> uris;
    for (const auto& entry : config.at("graphs")) {
        GraphDescriptor graph;
        if (!entry.contains("name") || !entry.at("name").is_string())
            throw Error(ErrorKind::Config, "graph entry missing name: " + entry.dump());
        graph.name = to_lower(entry.at("name").get<std::string>());
        if (graph.name.empty())
            throw Error(ErrorKind::Config, "graph entry with empty name");
        if (!entry.contains("graph_uri") || !entry.at("graph_uri").is_string())
            throw Error(ErrorKind::Config, "graph '" + graph.name + "' missing graph_uri");
        graph.graph_uri = entry.at("graph_uri").get<std::string>();
        if (!valid_absolute_uri(graph.graph_uri))
            throw Error(ErrorKind::Config,
                        "graph '" + graph.name + "': graph_uri is not an absolute URI: " +
                            graph.graph_uri);
        if (!names.insert(graph.name).second)
            throw Error(ErrorKind::Config, "duplicate graph name: " + graph.name);
        if (!uris.insert(graph.graph_uri).second)
            throw Error(ErrorKind::Config, "duplicate graph URI: " + graph.graph_uri);

        graph.domains = string_list(entry, "domains");
        graph.entity_types = string_list(entry, "entity_types");
        graph.namespaces = string_list(entry, "namespaces");
        for (const auto& ns : graph.namespaces) {
            if (ns.empty() || ns.find(' ') != std::string::npos)
                throw Error(ErrorKind::Config,
                            "graph '" + graph.name + "': invalid namespace prefix '" + ns + "'");
        }
        graph.description = entry.value("description", "");
        graph.doc_url = entry.value("doc_url", "");
        if (entry.contains("example_queries")) {
            for (const auto& example : entry.at("example_queries")) {
                graph.example_queries.push_back(ExampleQuery{
                    example.value("title", ""), example.at("sparql").get<std::string>()});
            }
        }
        registry.graphs.push_back(std::move(graph));
    }
    return registry;
}

Registry load_registry_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open registry config: " + path);
    nlohmann::json config;
    try {
        in >> config;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, "malformed registry config " + path + ": " + e.what());
    }
    return load_registry(config);
}

std::vector<GraphSummary> list_graphs(const Registry& registry) {
    std::vector<GraphSummary> out;
    out.reserve(registry.graphs.size());
    for (const auto& graph : registry.graphs) {
        out.push_back(GraphSummary{graph.name, graph.domains, graph.entity_types,
                                   graph.namespaces, graph.description});
    }
    return out;
}

const GraphDescriptor& get_description(const Registry& registry, const std::string& name) {
    const GraphDescriptor* graph = registry.find(name);
    if (graph) return *graph;
    std::ostringstream valid;
    for (size_t i = 0; i < registry.graphs.size(); ++i) {
        if (i) valid << ", ";
        valid << registry.graphs[i].name;
    }
    throw Error(ErrorKind::NotFound,
                "unknown graph '" + name + "'; registered graphs: " + valid.str());
}

std::vector<RouteCandidate> route_query(const Registry& registry, const std::string& question) {
    std::string trimmed = question;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    trimmed.erase(trimmed.find_last_not_of(" \t\r\n") + 1);
    if (trimmed.empty())
        throw Error(ErrorKind::InvalidArgument, "question must be non-empty");

    // "@name" mentions, matched case-insensitively against registered names.
    std::set<std::string> mentioned;
    std::string lower = to_lower(trimmed);
    size_t at = lower.find('@');
    while (at != std::string::npos) {
        size_t end = at + 1;
        while (end < lower.size() &&
               (std::isalnum(static_cast<unsigned char>(lower[end])) || lower[end] == '-' ||
                lower[end] == '_'))
            ++end;
        std::string name = lower.substr(at + 1, end - at - 1);
        if (registry.find(name)) mentioned.insert(name);
        at = lower.find('@', end);
    }

    std::vector<std::string> tokens = tokenize(trimmed);
    std::set<std::string> unique_tokens(tokens.begin(), tokens.end());

    std::vector<RouteCandidate> candidates;
    for (const auto& graph : registry.graphs) {
        auto field_tokens = [](const std::vector<std::string>& values) {
            std::set<std::string> out;
            for (const auto& value : values)
                for (const auto& token : tokenize(value)) out.insert(token);
            return out;
        };
        std::set<std::string> name_tokens;
        for (const auto& token : tokenize(graph.name)) name_tokens.insert(token);
        std::set<std::string> entity_tokens = field_tokens(graph.entity_types);
        std::set<std::string> domain_tokens = field_tokens(graph.domains);
        std::set<std::string> namespace_tokens = field_tokens(graph.namespaces);
        std::set<std::string> description_tokens;
        for (const auto& token : tokenize(graph.description)) description_tokens.insert(token);

        RouteCandidate candidate;
        candidate.graph = graph.name;
        for (const auto& token : unique_tokens) {
            double gain = 0.0;
            if (name_tokens.count(token)) gain += routing_weights::name;
            if (entity_tokens.count(token)) gain += routing_weights::entity_types;
            if (domain_tokens.count(token)) gain += routing_weights::domains;
            if (namespace_tokens.count(token)) gain += routing_weights::namespaces;
            if (description_tokens.count(token)) gain += routing_weights::description;
            if (gain > 0.0) {
                candidate.score += gain;
                candidate.matched_terms.push_back(token);
            }
        }
        if (mentioned.count(graph.name)) {
            candidate.score += routing_weights::mention_bonus;
            candidate.matched_terms.push_back("@" + graph.name);
        }
        if (candidate.score > 0.0) candidates.push_back(std::move(candidate));
    }

    // Descending score; ties keep registry order (stable sort).
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const RouteCandidate& a, const RouteCandidate& b) {
                         return a.score > b.score;
                     });
    return candidates;
}

} // namespace fedkg
