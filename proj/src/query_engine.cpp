#include "fedkg/query_engine.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <sstream>

#include "fedkg/errors.hpp"
#include "fedkg/log.hpp"
#include "fedkg/sparql/parser.hpp"

namespace fedkg {

const char* to_string(WarningCode code) {
    switch (code) {
        case WarningCode::NoLimit: return "no_limit";
        case WarningCode::NoGraphScopeAdded: return "no_graph_scope_added";
        case WarningCode::UnparsedFallback: return "unparsed_fallback";
        case WarningCode::ExpansionTruncated: return "expansion_truncated";
        case WarningCode::ExpansionSkippedMultipleSeeds: return "expansion_skipped_multiple_seeds";
        case WarningCode::DuplicateGraph: return "duplicate_graph";
        case WarningCode::UnknownPredicate: return "unknown_predicate";
    }
    return "unknown";
}

const char* to_string(JoinStrategy::Kind kind) {
    switch (kind) {
        case JoinStrategy::Kind::Direct: return "direct";
        case JoinStrategy::Kind::Bridge: return "bridge";
        case JoinStrategy::Kind::None: return "none";
    }
    return "none";
}

namespace {

std::string cell_key(const std::optional<RdfTerm>& cell) {
    return cell ? to_ntriples(*cell) : "~";
}

std::string full_row_key(const std::vector<std::optional<RdfTerm>>& row) {
    std::string key;
    for (const auto& cell : row) {
        key += cell_key(cell);
        key += '\x1f';
    }
    return key;
}

void collect_constant_predicates(const sparql::GroupPattern& group, std::set<std::string>& out) {
    for (const auto& element : group.elements) {
        if (const auto* triple = std::get_if<sparql::TriplePattern>(&element)) {
            if (!triple->predicate.is_var && triple->predicate.term.kind == TermKind::Uri)
                out.insert(triple->predicate.term.value);
        } else if (const auto* graph = std::get_if<sparql::GraphBlock>(&element)) {
            collect_constant_predicates(*graph->body, out);
        } else if (const auto* opt = std::get_if<sparql::OptionalBlock>(&element)) {
            collect_constant_predicates(*opt->body, out);
        }
    }
}

int compare_cells(const std::optional<RdfTerm>& a, const std::optional<RdfTerm>& b) {
    if (!a && !b) return 0;
    if (!a) return -1;
    if (!b) return 1;
    return compare_terms(*a, *b);
}

// Merged-batch post-processing: re-apply ORDER BY / OFFSET / LIMIT from
// the original query so the union behaves like one query over the full
// URI set.
void apply_modifiers(SparqlResultSet& merged, const sparql::SelectQuery& parsed) {
    if (!parsed.order_by.empty()) {
        std::vector<long> columns;
        std::vector<bool> descending;
        for (const auto& key : parsed.order_by) {
            auto it = std::find(merged.variables.begin(), merged.variables.end(), key.var);
            columns.push_back(it == merged.variables.end()
                                  ? -1
                                  : it - merged.variables.begin());
            descending.push_back(key.descending);
        }
        std::stable_sort(merged.rows.begin(), merged.rows.end(),
                         [&](const auto& a, const auto& b) {
                             for (size_t i = 0; i < columns.size(); ++i) {
                                 if (columns[i] < 0) continue;
                                 auto index = static_cast<size_t>(columns[i]);
                                 int c = compare_cells(index < a.size() ? a[index] : std::nullopt,
                                                       index < b.size() ? b[index] : std::nullopt);
                                 if (c != 0) return descending[i] ? c > 0 : c < 0;
                             }
                             return false;
                         });
    }
    size_t offset = parsed.offset.value_or(0);
    if (offset >= merged.rows.size()) merged.rows.clear();
    else if (offset > 0)
        merged.rows.erase(merged.rows.begin(), merged.rows.begin() + static_cast<long>(offset));
    if (parsed.limit && merged.rows.size() > *parsed.limit) merged.rows.resize(*parsed.limit);
}

SparqlResultSet merge_batches(const std::vector<SparqlResultSet>& batches,
                              const sparql::SelectQuery& parsed) {
    SparqlResultSet merged;
    for (const auto& batch : batches) {
        if (merged.variables.empty()) merged.variables = batch.variables;
        merged.truncated = merged.truncated || batch.truncated;
    }

    if (parsed.has_aggregates()) {
        // Re-aggregate: sum counts per group key across batches.
        std::vector<size_t> key_columns;
        std::vector<size_t> count_columns;
        for (size_t i = 0; i < parsed.items.size(); ++i) {
            if (parsed.items[i].is_aggregate) count_columns.push_back(i);
            else key_columns.push_back(i);
        }
        std::vector<std::string> order;
        std::map<std::string, std::vector<std::optional<RdfTerm>>> groups;
        std::map<std::string, std::vector<long long>> sums;
        for (const auto& batch : batches) {
            for (const auto& row : batch.rows) {
                std::string key;
                for (size_t column : key_columns)
                    key += cell_key(column < row.size() ? row[column] : std::nullopt) + '\x1f';
                auto [it, inserted] = groups.try_emplace(key, row);
                if (inserted) {
                    order.push_back(key);
                    sums[key].assign(count_columns.size(), 0);
                }
                auto& accumulator = sums[key];
                for (size_t i = 0; i < count_columns.size(); ++i) {
                    size_t column = count_columns[i];
                    if (column < row.size() && row[column]) {
                        try {
                            accumulator[i] += std::stoll((*row[column]).value);
                        } catch (...) {
                        }
                    }
                }
            }
        }
        for (const auto& key : order) {
            auto row = groups[key];
            const auto& accumulator = sums[key];
            for (size_t i = 0; i < count_columns.size(); ++i) {
                size_t column = count_columns[i];
                if (column >= row.size()) row.resize(column + 1);
                row[column] = RdfTerm::integer(accumulator[i]);
            }
            merged.rows.push_back(std::move(row));
        }
    } else {
        // Batches over a VALUES partition cannot overlap for deterministic
        // queries; dedup guards against endpoint nondeterminism.
        std::set<std::string> seen;
        for (const auto& batch : batches) {
            for (const auto& row : batch.rows) {
                if (seen.insert(full_row_key(row)).second) merged.rows.push_back(row);
            }
        }
    }
    apply_modifiers(merged, parsed);
    return merged;
}

} // namespace

QueryEngine::QueryEngine(const sparql::SparqlClient& client, const Registry& registry,
                         sparql::EndpointConfig federation_endpoint,
                         const OntologyService& ontology)
    : client_(client),
      registry_(registry),
      federation_endpoint_(std::move(federation_endpoint)),
      ontology_(ontology) {}

void QueryEngine::note_schema(const SchemaSummary& schema) const {
    std::set<std::string> predicates;
    for (const auto& [uri, _] : schema.predicates) predicates.insert(uri);
    std::lock_guard<std::mutex> lock(schema_mutex_);
    known_predicates_[schema.graph] = std::move(predicates);
}

QueryOutcome QueryEngine::query(const std::string& graph_name, const std::string& sparql,
                                const ExpansionConfig& expansion) const {
    if (sparql.empty()) throw Error(ErrorKind::InvalidArgument, "sparql must be non-empty");
    const GraphDescriptor& graph = get_description(registry_, graph_name);

    auto started = std::chrono::steady_clock::now();
    QueryOutcome outcome;
    outcome.analysis.scoped_graph = graph.graph_uri;

    std::optional<sparql::SelectQuery> parsed;
    try {
        parsed = sparql::parse_query(sparql);
    } catch (const Error& e) {
        outcome.analysis.warnings.push_back(
            {WarningCode::UnparsedFallback,
             std::string("query outside the supported subset, executed verbatim: ") + e.what()});
    }

    // Automatic ontology expansion over the first detected URI.
    std::vector<std::string> batch_queries;
    if (parsed) {
        std::vector<OntologyNamespace> enabled = ontology_.enabled_namespaces(expansion);
        std::vector<ExpandableUri> hits;
        try {
            hits = detect_expandable_uris(sparql, ontology_.namespaces(), expansion);
        } catch (const Error&) {
            hits.clear();  // parsed above, so this cannot happen in practice
        }
        if (!hits.empty()) {
            if (hits.size() > 1) {
                std::ostringstream rest;
                for (size_t i = 1; i < hits.size(); ++i) {
                    if (i > 1) rest << ", ";
                    rest << "<" << hits[i].uri << ">";
                }
                outcome.analysis.warnings.push_back(
                    {WarningCode::ExpansionSkippedMultipleSeeds,
                     "only the first expandable URI <" + hits[0].uri +
                         "> was expanded; also detected: " + rest.str()});
            }
            const ExpandableUri& seed = hits.front();
            auto [descendants, report] = ontology_.get_descendants(seed.uri, expansion);
            if (report.truncated) {
                outcome.analysis.warnings.push_back(
                    {WarningCode::ExpansionTruncated,
                     "descendant set truncated at " + std::to_string(descendants.size())});
            }
            if (descendants.empty()) {
                outcome.analysis.expansion = report;  // batch_count stays 0
            } else {
                try {
                    batch_queries = expand_query(sparql, seed.uri, descendants, expansion);
                    report.batch_count = batch_queries.size();
                    outcome.analysis.expansion = report;
                } catch (const Error& e) {
                    outcome.analysis.warnings.push_back(
                        {WarningCode::UnparsedFallback,
                         std::string("expansion rewrite failed, executed verbatim: ") + e.what()});
                    batch_queries.clear();
                }
            }
        }
    }

    bool expanded = !batch_queries.empty();
    if (!expanded) batch_queries.push_back(sparql);

    // Scope every (batch) query to the named graph.
    bool scope_noted = false;
    if (parsed) {
        for (auto& query_text : batch_queries) {
            sparql::ScopeResult scoped = sparql::scope_to_graph(query_text, graph.graph_uri);
            if (scoped.already_scoped && !scope_noted) {
                outcome.analysis.warnings.push_back(
                    {WarningCode::NoGraphScopeAdded,
                     "query already contains a GRAPH block; no scope added"});
                scope_noted = true;
            }
            query_text = std::move(scoped.query);
        }
    }

    // Execute, concurrently when expansion produced multiple batches.
    std::vector<SparqlResultSet> batch_results(batch_queries.size());
    if (batch_queries.size() == 1) {
        try {
            batch_results[0] = client_.execute_select(federation_endpoint_, batch_queries[0]);
        } catch (const Error& e) {
            throw Error(e.kind(), "query against graph '" + graph.name + "' failed: " + e.what());
        }
    } else {
        std::vector<std::future<SparqlResultSet>> futures;
        futures.reserve(batch_queries.size());
        for (const auto& query_text : batch_queries) {
            futures.push_back(std::async(std::launch::async, [this, &query_text] {
                return client_.execute_select(federation_endpoint_, query_text);
            }));
        }
        for (size_t i = 0; i < futures.size(); ++i) {
            try {
                batch_results[i] = futures[i].get();
            } catch (const Error& e) {
                // Drain the remaining futures before propagating.
                for (size_t j = i + 1; j < futures.size(); ++j) {
                    try {
                        futures[j].get();
                    } catch (...) {
                    }
                }
                throw Error(e.kind(), "batch " + std::to_string(i + 1) + "/" +
                                          std::to_string(batch_queries.size()) +
                                          " failed against graph '" + graph.name +
                                          "': " + e.what());
            }
        }
    }

    if (expanded) {
        outcome.results = merge_batches(batch_results, *parsed);
    } else {
        outcome.results = std::move(batch_results[0]);
    }

    // Post-execution analysis.
    if (parsed) {
        if (!parsed->limit && !parsed->has_aggregates()) {
            outcome.analysis.warnings.push_back(
                {WarningCode::NoLimit, "query has no LIMIT and no aggregate; results may be "
                                       "large"});
        }
        std::set<std::string> predicates;
        collect_constant_predicates(parsed->where, predicates);
        if (!predicates.empty()) {
            std::lock_guard<std::mutex> lock(schema_mutex_);
            auto it = known_predicates_.find(graph.name);
            if (it != known_predicates_.end()) {
                for (const auto& predicate : predicates) {
                    if (!it->second.count(predicate)) {
                        outcome.analysis.warnings.push_back(
                            {WarningCode::UnknownPredicate,
                             "predicate <" + predicate + "> does not appear in the cached "
                             "schema of graph '" + graph.name + "'"});
                    }
                }
            }
        }
    }

    outcome.analysis.row_count = outcome.results.rows.size();
    outcome.analysis.truncated = outcome.results.truncated;
    outcome.analysis.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return outcome;
}

AnnotatedResultSet QueryEngine::multi_graph_query(const std::vector<std::string>& graph_names,
                                                  const std::string& sparql,
                                                  const ExpansionConfig& expansion) const {
    if (graph_names.empty())
        throw Error(ErrorKind::InvalidArgument, "multi_graph_query requires at least one graph");

    AnnotatedResultSet out;

    // Dedup while preserving order; validate names upfront.
    std::vector<std::string> unique_names;
    for (const auto& name : graph_names) {
        const GraphDescriptor& graph = get_description(registry_, name);
        if (std::find(unique_names.begin(), unique_names.end(), graph.name) !=
            unique_names.end()) {
            out.warnings.push_back({WarningCode::DuplicateGraph,
                                    "graph '" + graph.name + "' listed more than once; "
                                    "executed once"});
            continue;
        }
        unique_names.push_back(graph.name);
    }

    std::vector<std::future<QueryOutcome>> futures;
    futures.reserve(unique_names.size());
    for (const auto& name : unique_names) {
        futures.push_back(std::async(std::launch::async, [this, name, &sparql, &expansion] {
            return query(name, sparql, expansion);
        }));
    }

    std::vector<std::optional<QueryOutcome>> outcomes(unique_names.size());
    for (size_t i = 0; i < futures.size(); ++i) {
        try {
            outcomes[i] = futures[i].get();
        } catch (const Error& e) {
            out.errors[unique_names[i]] = e.what();
        } catch (const std::exception& e) {
            out.errors[unique_names[i]] = e.what();
        }
    }

    if (out.errors.size() == unique_names.size()) {
        std::ostringstream causes;
        for (const auto& [name, message] : out.errors) causes << " [" << name << "] " << message;
        throw Error(ErrorKind::Endpoint, "all graphs failed:" + causes.str());
    }

    // Union of per-graph variable lists in first-seen order, provenance last.
    for (size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i]) continue;
        for (const auto& var : outcomes[i]->results.variables) {
            if (std::find(out.variables.begin(), out.variables.end(), var) == out.variables.end())
                out.variables.push_back(var);
        }
    }
    out.variables.push_back(kSourceGraphVariable);

    for (size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i]) continue;
        const auto& results = outcomes[i]->results;
        out.per_graph_counts[unique_names[i]] = results.rows.size();
        for (const auto& row : results.rows) {
            std::vector<std::optional<RdfTerm>> annotated(out.variables.size());
            for (size_t v = 0; v < results.variables.size(); ++v) {
                auto target = std::find(out.variables.begin(), out.variables.end(),
                                        results.variables[v]);
                if (target != out.variables.end() && v < row.size())
                    annotated[static_cast<size_t>(target - out.variables.begin())] = row[v];
            }
            annotated.back() = RdfTerm::literal(unique_names[i]);
            out.rows.push_back(std::move(annotated));
        }
        for (const auto& warning : outcomes[i]->analysis.warnings) {
            out.warnings.push_back(
                {warning.code, "[" + unique_names[i] + "] " + warning.message});
        }
    }
    return out;
}

JoinStrategy get_join_strategy(const Registry& registry, const std::string& graph_a,
                               const std::string& graph_b) {
    const GraphDescriptor& a = get_description(registry, graph_a);
    const GraphDescriptor& b = get_description(registry, graph_b);
    if (a.name == b.name)
        throw Error(ErrorKind::InvalidArgument, "join strategy requires two distinct graphs");

    auto namespace_set = [](const GraphDescriptor& g) {
        return std::set<std::string>(g.namespaces.begin(), g.namespaces.end());
    };
    std::set<std::string> ns_a = namespace_set(a);
    std::set<std::string> ns_b = namespace_set(b);

    std::vector<std::string> shared;
    std::set_intersection(ns_a.begin(), ns_a.end(), ns_b.begin(), ns_b.end(),
                          std::back_inserter(shared));

    JoinStrategy strategy;
    if (!shared.empty()) {
        strategy.kind = JoinStrategy::Kind::Direct;
        strategy.shared_namespaces = shared;
        std::ostringstream text;
        text << "Graphs '" << a.name << "' and '" << b.name << "' share identifier namespaces: ";
        for (size_t i = 0; i < shared.size(); ++i) text << (i ? ", " : "") << shared[i];
        text << ". Join records directly on those identifiers.";
        strategy.explanation = text.str();
        return strategy;
    }

    // Bridge search: maximize min(overlap with a, overlap with b), ties by
    // registry order.
    const GraphDescriptor* best = nullptr;
    size_t best_score = 0;
    std::vector<std::string> best_shared;
    for (const auto& candidate : registry.graphs) {
        if (candidate.name == a.name || candidate.name == b.name) continue;
        std::set<std::string> ns_c = namespace_set(candidate);
        std::vector<std::string> with_a, with_b;
        std::set_intersection(ns_c.begin(), ns_c.end(), ns_a.begin(), ns_a.end(),
                              std::back_inserter(with_a));
        std::set_intersection(ns_c.begin(), ns_c.end(), ns_b.begin(), ns_b.end(),
                              std::back_inserter(with_b));
        if (with_a.empty() || with_b.empty()) continue;
        size_t score = std::min(with_a.size(), with_b.size());
        if (score > best_score) {
            best = &candidate;
            best_score = score;
            best_shared.clear();
            std::set<std::string> merged(with_a.begin(), with_a.end());
            merged.insert(with_b.begin(), with_b.end());
            best_shared.assign(merged.begin(), merged.end());
        }
    }
    if (best) {
        strategy.kind = JoinStrategy::Kind::Bridge;
        strategy.bridge_graph = best->name;
        strategy.shared_namespaces = best_shared;
        std::ostringstream text;
        text << "Graphs '" << a.name << "' and '" << b.name
             << "' share no identifier namespaces. Graph '" << best->name
             << "' bridges them via ";
        for (size_t i = 0; i < best_shared.size(); ++i) text << (i ? ", " : "") << best_shared[i];
        text << ": query each graph against the bridge and join through it.";
        strategy.explanation = text.str();
        return strategy;
    }

    strategy.kind = JoinStrategy::Kind::None;
    strategy.explanation = "Graphs '" + a.name + "' and '" + b.name +
                           "' share no identifier namespaces and no registered graph bridges "
                           "them.";
    return strategy;
}

} // namespace fedkg
