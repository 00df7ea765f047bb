#include "fedkg/fixture/store.hpp"

#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

#include "fedkg/errors.hpp"

namespace fedkg::fixture {

namespace {

void skip_spaces(const std::string& text, size_t& pos) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
}

std::string triple_key(const Triple& t) {
    return to_ntriples(t.subject) + " " + to_ntriples(t.predicate) + " " + to_ntriples(t.object);
}

} // namespace

RdfTerm parse_ntriples_term(const std::string& text, size_t& pos) {
    skip_spaces(text, pos);
    if (pos >= text.size()) throw Error(ErrorKind::Parse, "unexpected end of triple");
    char c = text[pos];
    if (c == '<') {
        size_t end = text.find('>', pos + 1);
        if (end == std::string::npos) throw Error(ErrorKind::Parse, "unterminated IRI");
        RdfTerm term = RdfTerm::uri(text.substr(pos + 1, end - pos - 1));
        pos = end + 1;
        return term;
    }
    if (c == '_') {
        if (pos + 1 >= text.size() || text[pos + 1] != ':')
            throw Error(ErrorKind::Parse, "malformed blank node");
        size_t start = pos + 2;
        size_t end = start;
        while (end < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[end])) || text[end] == '_' ||
                text[end] == '-'))
            ++end;
        if (end == start) throw Error(ErrorKind::Parse, "empty blank node label");
        RdfTerm term = RdfTerm::blank(text.substr(start, end - start));
        pos = end;
        return term;
    }
    if (c == '"') {
        std::string value;
        ++pos;
        while (pos < text.size() && text[pos] != '"') {
            if (text[pos] == '\\') {
                ++pos;
                if (pos >= text.size()) throw Error(ErrorKind::Parse, "unterminated escape");
                switch (text[pos]) {
                    case 'n': value += '\n'; break;
                    case 't': value += '\t'; break;
                    case 'r': value += '\r'; break;
                    case '"': value += '"'; break;
                    case '\\': value += '\\'; break;
                    default: throw Error(ErrorKind::Parse, "unsupported escape in literal");
                }
                ++pos;
            } else {
                value += text[pos++];
            }
        }
        if (pos >= text.size()) throw Error(ErrorKind::Parse, "unterminated literal");
        ++pos;  // closing quote
        if (pos < text.size() && text[pos] == '@') {
            size_t start = ++pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '-'))
                ++pos;
            return RdfTerm::literal(value, "", text.substr(start, pos - start));
        }
        if (pos + 1 < text.size() && text[pos] == '^' && text[pos + 1] == '^') {
            pos += 2;
            if (pos >= text.size() || text[pos] != '<')
                throw Error(ErrorKind::Parse, "expected datatype IRI");
            size_t end = text.find('>', pos);
            if (end == std::string::npos) throw Error(ErrorKind::Parse, "unterminated datatype IRI");
            RdfTerm term = RdfTerm::literal(value, text.substr(pos + 1, end - pos - 1));
            pos = end + 1;
            return term;
        }
        return RdfTerm::literal(value);
    }
    throw Error(ErrorKind::Parse, std::string("unexpected character '") + c + "' in triple");
}

void TripleStore::load_ntriples(const std::string& text, const std::string& graph_uri,
                                bool close_subclass) {
    std::istringstream stream(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        size_t pos = 0;
        skip_spaces(line, pos);
        if (pos >= line.size() || line[pos] == '#') continue;
        try {
            Triple triple;
            triple.subject = parse_ntriples_term(line, pos);
            triple.predicate = parse_ntriples_term(line, pos);
            triple.object = parse_ntriples_term(line, pos);
            skip_spaces(line, pos);
            if (pos >= line.size() || line[pos] != '.')
                throw Error(ErrorKind::Parse, "missing terminating '.'");
            add(graph_uri, std::move(triple));
        } catch (const Error& e) {
            throw Error(ErrorKind::Parse,
                        "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (close_subclass) close_subclass_of(graph_uri);
}

void TripleStore::load_ntriples_file(const std::string& path, const std::string& graph_uri,
                                     bool close_subclass) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Config, "cannot open fixture file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    load_ntriples(buffer.str(), graph_uri, close_subclass);
}

void TripleStore::add(const std::string& graph_uri, Triple triple) {
    auto& keys = seen_[graph_uri];
    if (!keys.insert(triple_key(triple)).second) return;  // set semantics
    graphs_[graph_uri].push_back(std::move(triple));
}

const std::vector<Triple>& TripleStore::graph(const std::string& graph_uri) const {
    static const std::vector<Triple> empty;
    auto it = graphs_.find(graph_uri);
    return it == graphs_.end() ? empty : it->second;
}

std::vector<std::string> TripleStore::graph_uris() const {
    std::vector<std::string> out;
    out.reserve(graphs_.size());
    for (const auto& [uri, _] : graphs_) out.push_back(uri);
    return out;
}

std::vector<Triple> TripleStore::all_triples() const {
    std::vector<Triple> out;
    for (const auto& [_, triples] : graphs_) out.insert(out.end(), triples.begin(), triples.end());
    return out;
}

size_t TripleStore::size(const std::string& graph_uri) const { return graph(graph_uri).size(); }

void TripleStore::close_subclass_of(const std::string& graph_uri) {
    auto it = graphs_.find(graph_uri);
    if (it == graphs_.end()) return;

    // parent adjacency over subclass edges, URIs only
    std::map<std::string, std::set<std::string>> parents;
    for (const auto& triple : it->second) {
        if (triple.predicate.value == known::rdfs_subclassof &&
            triple.subject.kind == TermKind::Uri && triple.object.kind == TermKind::Uri) {
            parents[triple.subject.value].insert(triple.object.value);
        }
    }

    for (const auto& [node, _] : parents) {
        // BFS to all ancestors
        std::set<std::string> reached;
        std::deque<std::string> frontier(parents[node].begin(), parents[node].end());
        while (!frontier.empty()) {
            std::string current = frontier.front();
            frontier.pop_front();
            if (!reached.insert(current).second) continue;
            auto next = parents.find(current);
            if (next == parents.end()) continue;
            for (const auto& parent : next->second) frontier.push_back(parent);
        }
        for (const auto& ancestor : reached) {
            add(graph_uri, Triple{RdfTerm::uri(node), RdfTerm::uri(known::rdfs_subclassof),
                                  RdfTerm::uri(ancestor)});
        }
    }
}

} // namespace fedkg::fixture
