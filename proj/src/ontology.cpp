#include "fedkg/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <regex>
#include <set>
#include <sstream>

#include "fedkg/errors.hpp"
#include "fedkg/sparql/parser.hpp"

namespace fedkg {

namespace {

using sparql::Expr;
using sparql::ExprPtr;
using sparql::GroupPattern;

const std::regex kCuriePattern(R"(^([A-Za-z][A-Za-z0-9]*):([A-Za-z0-9_.\-]+)$)");

std::string to_lower(const std::string& text) {
    std::string out = text;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string escape_string_literal(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

struct PatternParts {
    std::string head;
    std::string tail;
};

PatternParts split_pattern(const OntologyNamespace& ns) {
    auto slot = ns.uri_pattern.find("{id}");
    return {ns.uri_pattern.substr(0, slot), ns.uri_pattern.substr(slot + 4)};
}

bool pattern_matches(const OntologyNamespace& ns, const std::string& uri) {
    PatternParts parts = split_pattern(ns);
    if (uri.size() <= parts.head.size() + parts.tail.size()) return false;
    if (uri.compare(0, parts.head.size(), parts.head) != 0) return false;
    if (!parts.tail.empty() &&
        uri.compare(uri.size() - parts.tail.size(), parts.tail.size(), parts.tail) != 0)
        return false;
    std::string id = uri.substr(parts.head.size(),
                                uri.size() - parts.head.size() - parts.tail.size());
    return !id.empty() && id.find(' ') == std::string::npos &&
           id.find('/') == std::string::npos;
}

} // namespace

const char* to_string(UriLocation location) {
    switch (location) {
        case UriLocation::TripleObject: return "triple-object";
        case UriLocation::FilterEquality: return "filter-equality";
        case UriLocation::FilterIn: return "filter-in";
        case UriLocation::ValuesRow: return "values";
    }
    return "unknown";
}

std::string curie_to_uri(const std::string& curie,
                         const std::vector<OntologyNamespace>& namespaces) {
    std::smatch match;
    if (!std::regex_match(curie, match, kCuriePattern))
        throw Error(ErrorKind::InvalidArgument, "malformed CURIE: '" + curie + "'");
    std::string prefix = match[1].str();
    for (const auto& ns : namespaces) {
        if (ns.prefix == prefix) {
            PatternParts parts = split_pattern(ns);
            return parts.head + match[2].str() + parts.tail;
        }
    }
    throw Error(ErrorKind::NotFound, "unknown namespace prefix: '" + prefix + "'");
}

const OntologyNamespace* match_namespace(const std::string& uri,
                                         const std::vector<OntologyNamespace>& namespaces) {
    for (const auto& ns : namespaces) {
        if (pattern_matches(ns, uri)) return &ns;
    }
    return nullptr;
}

std::vector<std::vector<std::string>> make_batches(const std::vector<std::string>& uris,
                                                   size_t batch_size) {
    if (batch_size == 0) throw Error(ErrorKind::InvalidArgument, "batch_size must be >= 1");
    std::vector<std::vector<std::string>> out;
    for (size_t start = 0; start < uris.size(); start += batch_size) {
        size_t end = std::min(start + batch_size, uris.size());
        out.emplace_back(uris.begin() + static_cast<long>(start),
                         uris.begin() + static_cast<long>(end));
    }
    return out;
}

namespace {

std::vector<OntologyNamespace> filter_enabled(const std::vector<OntologyNamespace>& namespaces,
                                              const ExpansionConfig& config) {
    std::vector<OntologyNamespace> out;
    for (const auto& ns : namespaces) {
        if (config.enabled_namespaces.empty()) {
            if (ns.expandable) out.push_back(ns);
        } else if (std::find(config.enabled_namespaces.begin(), config.enabled_namespaces.end(),
                             ns.prefix) != config.enabled_namespaces.end()) {
            out.push_back(ns);
        }
    }
    return out;
}

void detect_in_expr(const ExprPtr& expr, const std::vector<OntologyNamespace>& enabled,
                    std::vector<ExpandableUri>& out) {
    if (!expr) return;
    if (expr->kind == Expr::Kind::Compare && (expr->op == "=" || expr->op == "!=")) {
        for (const auto& child : expr->children) {
            if (child->kind == Expr::Kind::Term && !child->term.is_var &&
                child->term.term.kind == TermKind::Uri &&
                match_namespace(child->term.term.value, enabled)) {
                out.push_back({child->term.term.value, UriLocation::FilterEquality});
            }
        }
        return;
    }
    if (expr->kind == Expr::Kind::In) {
        for (const auto& member : expr->members) {
            if (!member.is_var && member.term.kind == TermKind::Uri &&
                match_namespace(member.term.value, enabled)) {
                out.push_back({member.term.value, UriLocation::FilterIn});
            }
        }
        return;
    }
    for (const auto& child : expr->children) detect_in_expr(child, enabled, out);
}

void detect_in_group(const GroupPattern& group, const std::vector<OntologyNamespace>& enabled,
                     std::vector<ExpandableUri>& out) {
    for (const auto& element : group.elements) {
        if (const auto* triple = std::get_if<sparql::TriplePattern>(&element)) {
            if (!triple->object.is_var && triple->object.term.kind == TermKind::Uri &&
                match_namespace(triple->object.term.value, enabled)) {
                out.push_back({triple->object.term.value, UriLocation::TripleObject});
            }
        } else if (const auto* graph = std::get_if<sparql::GraphBlock>(&element)) {
            detect_in_group(*graph->body, enabled, out);
        } else if (const auto* opt = std::get_if<sparql::OptionalBlock>(&element)) {
            detect_in_group(*opt->body, enabled, out);
        } else if (const auto* filter = std::get_if<sparql::FilterClause>(&element)) {
            detect_in_expr(filter->expr, enabled, out);
        } else if (const auto* values = std::get_if<sparql::ValuesClause>(&element)) {
            for (const auto& row : values->rows) {
                for (const auto& entry : row) {
                    if (entry && entry->kind == TermKind::Uri &&
                        match_namespace(entry->value, enabled)) {
                        out.push_back({entry->value, UriLocation::ValuesRow});
                    }
                }
            }
        }
    }
}

// Site of the URI to be rewritten, resolved against a cloned AST.
struct RewriteSite {
    enum class Kind { TripleObject, Filter, Values, None } kind = Kind::None;
    GroupPattern* group = nullptr;  // group holding the site
    size_t element_index = 0;
    std::string values_var;              // constrained variable for Values sites
    std::vector<std::string> extra_uris; // other IN members / VALUES rows folded into the set
};

bool expr_mentions_uri(const ExprPtr& expr, const std::string& uri, bool& unsupported,
                       std::string& var, std::vector<std::string>& extra) {
    if (!expr) return false;
    if (expr->kind == Expr::Kind::Compare && (expr->op == "=" || expr->op == "!=")) {
        const auto& lhs = expr->children[0];
        const auto& rhs = expr->children[1];
        auto is_seed = [&](const ExprPtr& e) {
            return e->kind == Expr::Kind::Term && !e->term.is_var &&
                   e->term.term.kind == TermKind::Uri && e->term.term.value == uri;
        };
        auto is_variable = [&](const ExprPtr& e) {
            return e->kind == Expr::Kind::Term && e->term.is_var;
        };
        if (is_seed(lhs) || is_seed(rhs)) {
            if (expr->op != "=") {
                unsupported = true;  // inequality against the seed cannot become VALUES
                return true;
            }
            const ExprPtr& other = is_seed(lhs) ? rhs : lhs;
            if (!is_variable(other)) {
                unsupported = true;
                return true;
            }
            var = other->term.var;
            return true;
        }
        return false;
    }
    if (expr->kind == Expr::Kind::In) {
        bool found = false;
        for (const auto& member : expr->members) {
            if (!member.is_var && member.term.kind == TermKind::Uri && member.term.value == uri)
                found = true;
        }
        if (!found) return false;
        if (expr->negated || expr->children[0]->kind != Expr::Kind::Term ||
            !expr->children[0]->term.is_var) {
            unsupported = true;
            return true;
        }
        var = expr->children[0]->term.var;
        for (const auto& member : expr->members) {
            if (member.is_var || member.term.kind != TermKind::Uri) {
                unsupported = true;  // mixed-type IN lists are not rewritten
                return true;
            }
            if (member.term.value != uri) extra.push_back(member.term.value);
        }
        return true;
    }
    for (const auto& child : expr->children) {
        if (expr_mentions_uri(child, uri, unsupported, var, extra)) return true;
    }
    return false;
}

// Replaces the first equality/IN constraint on `uri` with TRUE. Returns
// true when a replacement happened; sets trivially_true when the whole
// expression collapsed to TRUE.
bool neutralize_constraint(ExprPtr& expr, const std::string& uri) {
    if (!expr) return false;
    bool is_site = false;
    if (expr->kind == Expr::Kind::Compare && expr->op == "=") {
        for (const auto& child : expr->children) {
            if (child->kind == Expr::Kind::Term && !child->term.is_var &&
                child->term.term.kind == TermKind::Uri && child->term.term.value == uri)
                is_site = true;
        }
    } else if (expr->kind == Expr::Kind::In && !expr->negated) {
        for (const auto& member : expr->members) {
            if (!member.is_var && member.term.kind == TermKind::Uri && member.term.value == uri)
                is_site = true;
        }
    }
    if (is_site) {
        auto replacement = std::make_shared<Expr>();
        replacement->kind = Expr::Kind::Bool;
        replacement->bool_value = true;
        expr = replacement;
        return true;
    }
    for (auto& child : expr->children) {
        if (neutralize_constraint(child, uri)) return true;
    }
    return false;
}

RewriteSite locate_site(GroupPattern& group, const std::string& uri, bool& unsupported);

RewriteSite locate_site_in_children(GroupPattern& group, const std::string& uri,
                                    bool& unsupported) {
    for (size_t i = 0; i < group.elements.size(); ++i) {
        auto& element = group.elements[i];
        if (auto* triple = std::get_if<sparql::TriplePattern>(&element)) {
            if (!triple->object.is_var && triple->object.term.kind == TermKind::Uri &&
                triple->object.term.value == uri) {
                RewriteSite site;
                site.kind = RewriteSite::Kind::TripleObject;
                site.group = &group;
                site.element_index = i;
                return site;
            }
        } else if (auto* graph = std::get_if<sparql::GraphBlock>(&element)) {
            RewriteSite site = locate_site(*graph->body, uri, unsupported);
            if (site.kind != RewriteSite::Kind::None || unsupported) return site;
        } else if (auto* opt = std::get_if<sparql::OptionalBlock>(&element)) {
            RewriteSite site = locate_site(*opt->body, uri, unsupported);
            if (site.kind != RewriteSite::Kind::None || unsupported) return site;
        } else if (auto* filter = std::get_if<sparql::FilterClause>(&element)) {
            std::string var;
            std::vector<std::string> extra;
            bool bad = false;
            if (expr_mentions_uri(filter->expr, uri, bad, var, extra)) {
                if (bad) {
                    unsupported = true;
                    return {};
                }
                RewriteSite site;
                site.kind = RewriteSite::Kind::Filter;
                site.group = &group;
                site.element_index = i;
                site.values_var = var;
                site.extra_uris = std::move(extra);
                return site;
            }
        } else if (auto* values = std::get_if<sparql::ValuesClause>(&element)) {
            bool found = false;
            for (const auto& row : values->rows) {
                for (const auto& entry : row) {
                    if (entry && entry->kind == TermKind::Uri && entry->value == uri) found = true;
                }
            }
            if (!found) continue;
            if (values->vars.size() != 1) {
                unsupported = true;  // multi-variable VALUES rows are not rewritten
                return {};
            }
            RewriteSite site;
            site.kind = RewriteSite::Kind::Values;
            site.group = &group;
            site.element_index = i;
            site.values_var = values->vars[0];
            for (const auto& row : values->rows) {
                if (!row[0] || row[0]->kind != TermKind::Uri) {
                    unsupported = true;  // UNDEF or literal rows cannot be folded in
                    return {};
                }
                if (row[0]->value != uri) site.extra_uris.push_back(row[0]->value);
            }
            return site;
        }
    }
    return {};
}

RewriteSite locate_site(GroupPattern& group, const std::string& uri, bool& unsupported) {
    return locate_site_in_children(group, uri, unsupported);
}

sparql::ValuesClause chunk_values(const std::string& var, const std::vector<std::string>& chunk) {
    sparql::ValuesClause values;
    values.vars.push_back(var);
    for (const auto& uri : chunk) {
        values.rows.push_back({RdfTerm::uri(uri)});
    }
    return values;
}

std::string fresh_variable(const std::set<std::string>& used) {
    std::string base = "_exp";
    if (!used.count(base)) return base;
    for (int i = 1;; ++i) {
        std::string candidate = base + std::to_string(i);
        if (!used.count(candidate)) return candidate;
    }
}

} // namespace

std::vector<ExpandableUri> detect_expandable_uris(const std::string& query,
                                                  const std::vector<OntologyNamespace>& namespaces,
                                                  const ExpansionConfig& config) {
    sparql::SelectQuery parsed;
    try {
        parsed = sparql::parse_query(query);
    } catch (const Error& e) {
        throw Error(ErrorKind::Rewrite, e.what());
    }
    std::vector<OntologyNamespace> enabled = filter_enabled(namespaces, config);
    std::vector<ExpandableUri> out;
    detect_in_group(parsed.where, enabled, out);
    return out;
}

std::vector<std::string> expand_query(const std::string& query, const std::string& uri,
                                      const std::vector<std::string>& descendants,
                                      const ExpansionConfig& config) {
    if (descendants.empty() && !config.include_seed)
        throw Error(ErrorKind::InvalidArgument,
                    "expansion set is empty (no descendants and seed excluded)");

    sparql::SelectQuery parsed;
    try {
        parsed = sparql::parse_query(query);
    } catch (const Error& e) {
        throw Error(ErrorKind::Rewrite, e.what());
    }

    // Resolve the site once against the original to classify it and pick up
    // folded-in URIs; per-chunk clones re-locate the same (first) site.
    bool unsupported = false;
    RewriteSite site = locate_site(parsed.where, uri, unsupported);
    if (unsupported)
        throw Error(ErrorKind::Rewrite,
                    "URI <" + uri + "> occurs in a position that cannot be rewritten to a "
                    "VALUES constraint");
    if (site.kind == RewriteSite::Kind::None)
        throw Error(ErrorKind::Rewrite,
                    "URI <" + uri + "> not found in a supported location (triple object, "
                    "FILTER =/IN, or VALUES)");

    // Deduplicated, lexicographically sorted set for deterministic batches.
    std::set<std::string> uri_set(descendants.begin(), descendants.end());
    for (const auto& extra : site.extra_uris) uri_set.insert(extra);
    if (config.include_seed) uri_set.insert(uri);
    else uri_set.erase(uri);
    std::vector<std::string> ordered(uri_set.begin(), uri_set.end());

    auto chunks = make_batches(ordered, config.batch_size);
    std::set<std::string> used_vars = collect_variables(parsed);

    std::vector<std::string> out;
    out.reserve(chunks.size());
    for (const auto& chunk : chunks) {
        sparql::SelectQuery copy = clone(parsed);
        bool ignored = false;
        RewriteSite target = locate_site(copy.where, uri, ignored);
        switch (target.kind) {
            case RewriteSite::Kind::TripleObject: {
                std::string var = fresh_variable(used_vars);
                auto& triple =
                    std::get<sparql::TriplePattern>(target.group->elements[target.element_index]);
                triple.object = sparql::PatternTerm::variable(var);
                target.group->elements.emplace_back(chunk_values(var, chunk));
                break;
            }
            case RewriteSite::Kind::Filter: {
                auto& filter =
                    std::get<sparql::FilterClause>(target.group->elements[target.element_index]);
                neutralize_constraint(filter.expr, uri);
                if (filter.expr->kind == Expr::Kind::Bool && filter.expr->bool_value) {
                    target.group->elements.erase(target.group->elements.begin() +
                                                 static_cast<long>(target.element_index));
                }
                target.group->elements.emplace_back(chunk_values(target.values_var, chunk));
                break;
            }
            case RewriteSite::Kind::Values: {
                auto& values =
                    std::get<sparql::ValuesClause>(target.group->elements[target.element_index]);
                values = chunk_values(target.values_var, chunk);
                break;
            }
            case RewriteSite::Kind::None:
                throw Error(ErrorKind::Rewrite, "rewrite site vanished after cloning");
        }
        out.push_back(sparql::serialize(copy));
    }
    return out;
}

OntologyService::OntologyService(const sparql::SparqlClient& client,
                                 sparql::EndpointConfig endpoint,
                                 std::vector<OntologyNamespace> namespaces)
    : client_(client), endpoint_(std::move(endpoint)), namespaces_(std::move(namespaces)) {}

std::vector<OntologyNamespace> OntologyService::enabled_namespaces(
    const ExpansionConfig& config) const {
    return filter_enabled(namespaces_, config);
}

std::vector<std::pair<std::string, std::string>> OntologyService::lookup_uri(
    const std::string& term) const {
    std::string trimmed = term;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    trimmed.erase(trimmed.find_last_not_of(" \t\r\n") + 1);
    if (trimmed.empty()) throw Error(ErrorKind::InvalidArgument, "lookup term must be non-empty");

    // CURIE fast path.
    std::smatch match;
    if (std::regex_match(trimmed, match, kCuriePattern) &&
        std::any_of(namespaces_.begin(), namespaces_.end(),
                    [&](const OntologyNamespace& ns) { return ns.prefix == match[1].str(); })) {
        std::string uri = curie_to_uri(trimmed, namespaces_);
        std::string query = "SELECT ?label WHERE { <" + uri + "> <" +
                            std::string(known::rdfs_label) + "> ?label } LIMIT 1";
        SparqlResultSet results = client_.execute_select(endpoint_, query);
        std::string label;
        if (!results.rows.empty()) {
            auto cell = results.binding(0, "label");
            if (cell) label = cell->value;
        }
        return {{uri, label}};
    }

    std::vector<std::string> tokens = tokenize(trimmed);
    if (tokens.empty()) tokens.push_back(to_lower(trimmed));

    std::ostringstream filter;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) filter << " || ";
        filter << "CONTAINS(LCASE(STR(?label)), \"" << escape_string_literal(tokens[i]) << "\")";
    }
    std::string query = "SELECT DISTINCT ?uri ?label WHERE { ?uri <" +
                        std::string(known::rdfs_label) + "> ?label . FILTER(" + filter.str() +
                        ") } LIMIT 200";
    SparqlResultSet results = client_.execute_select(endpoint_, query);

    struct Hit {
        std::string uri;
        std::string label;
        bool exact;
        size_t token_hits;
    };
    std::vector<Hit> hits;
    std::string needle = to_lower(trimmed);
    for (size_t i = 0; i < results.rows.size(); ++i) {
        auto uri = results.binding(i, "uri");
        auto label = results.binding(i, "label");
        if (!uri || !label) continue;
        std::string lowered = to_lower(label->value);
        size_t token_hits = 0;
        for (const auto& token : tokens) {
            if (lowered.find(token) != std::string::npos) ++token_hits;
        }
        hits.push_back({uri->value, label->value, lowered == needle, token_hits});
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.exact != b.exact) return a.exact;
        if (a.token_hits != b.token_hits) return a.token_hits > b.token_hits;
        if (a.label != b.label) return a.label < b.label;
        return a.uri < b.uri;
    });

    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& hit : hits) {
        out.emplace_back(hit.uri, hit.label);
        if (out.size() == 20) break;
    }
    return out;
}

std::vector<std::string> OntologyService::fetch_descendants(const std::string& uri, size_t bound,
                                                            bool& truncated) const {
    std::string query = "SELECT DISTINCT ?descendant WHERE { ?descendant <" +
                        std::string(known::rdfs_subclassof) + "> <" + uri +
                        "> . FILTER(?descendant != <" + uri + ">) } ORDER BY ?descendant LIMIT " +
                        std::to_string(bound + 1);
    SparqlResultSet results = client_.execute_select(endpoint_, query);
    std::set<std::string> unique;
    for (size_t i = 0; i < results.rows.size(); ++i) {
        auto cell = results.binding(i, "descendant");
        if (cell && cell->kind == TermKind::Uri && cell->value != uri) unique.insert(cell->value);
    }
    std::vector<std::string> out(unique.begin(), unique.end());
    truncated = out.size() > bound;
    if (truncated) out.resize(bound);
    return out;
}

std::pair<std::vector<std::string>, ExpansionReport> OntologyService::get_descendants(
    const std::string& uri, const ExpansionConfig& config) const {
    const OntologyNamespace* ns = match_namespace(uri, namespaces_);
    if (!ns)
        throw Error(ErrorKind::Skip, "URI <" + uri + "> matches no configured namespace");
    std::vector<OntologyNamespace> enabled = filter_enabled(namespaces_, config);
    if (!match_namespace(uri, enabled))
        throw Error(ErrorKind::Skip,
                    "namespace " + ns->prefix + " is not enabled for expansion");

    auto started = std::chrono::steady_clock::now();
    std::string cache_key = uri + "|" + std::to_string(config.max_descendants);

    CacheEntry entry;
    bool cached = false;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = cache_.find(cache_key);
        if (it != cache_.end()) {
            cache_order_.erase(it->second.first);
            cache_order_.push_front(cache_key);
            it->second.first = cache_order_.begin();
            entry = it->second.second;
            cached = true;
        }
    }
    if (!cached) {
        entry.descendants = fetch_descendants(uri, config.max_descendants, entry.truncated);
        std::lock_guard<std::mutex> lock(cache_mutex_);
        if (!cache_.count(cache_key)) {
            cache_order_.push_front(cache_key);
            cache_.emplace(cache_key, std::make_pair(cache_order_.begin(), entry));
            if (cache_.size() > kCacheCapacity) {
                cache_.erase(cache_order_.back());
                cache_order_.pop_back();
            }
        }
    }

    ExpansionReport report;
    report.seed_uri = uri;
    report.namespace_prefix = ns->prefix;
    report.descendant_count = entry.descendants.size();
    report.batch_size = config.batch_size;
    report.truncated = entry.truncated;
    if (!entry.descendants.empty()) {
        size_t total = entry.descendants.size() + (config.include_seed ? 1 : 0);
        report.batch_count = (total + config.batch_size - 1) / config.batch_size;
    }
    report.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {entry.descendants, report};
}

} // namespace fedkg
