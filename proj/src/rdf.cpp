#include "fedkg/rdf.hpp"

#include <algorithm>
#include <cstdlib>

#include "fedkg/errors.hpp"

namespace fedkg {

namespace {

bool parse_double(const std::string& text, double& out) {
    if (text.empty()) return false;
    char* end = nullptr;
    out = std::strtod(text.c_str(), &end);
    return end == text.c_str() + text.size();
}

int rank(TermKind kind) {
    switch (kind) {
        case TermKind::Blank: return 0;
        case TermKind::Uri: return 1;
        case TermKind::Literal: return 2;
    }
    return 3;
}

std::string escape_literal(const std::string& text) {
    std::string out;
    out.reserve(text.size() + 2);
    for (char c : text) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '"': out += "\\\""; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

bool RdfTerm::is_numeric() const {
    if (kind != TermKind::Literal) return false;
    if (datatype == known::xsd_integer || datatype == known::xsd_decimal ||
        datatype == known::xsd_double ||
        datatype == "http://www.w3.org/2001/XMLSchema#float" ||
        datatype == "http://www.w3.org/2001/XMLSchema#long" ||
        datatype == "http://www.w3.org/2001/XMLSchema#int") {
        return true;
    }
    if (datatype.empty() && language.empty()) {
        double ignored;
        return parse_double(value, ignored);
    }
    return false;
}

double RdfTerm::numeric_value() const {
    double out = 0.0;
    parse_double(value, out);
    return out;
}

int compare_terms(const RdfTerm& a, const RdfTerm& b) {
    if (rank(a.kind) != rank(b.kind)) return rank(a.kind) < rank(b.kind) ? -1 : 1;
    if (a.is_numeric() && b.is_numeric()) {
        double x = a.numeric_value(), y = b.numeric_value();
        if (x < y) return -1;
        if (x > y) return 1;
    }
    if (a.value != b.value) return a.value < b.value ? -1 : 1;
    if (a.datatype != b.datatype) return a.datatype < b.datatype ? -1 : 1;
    if (a.language != b.language) return a.language < b.language ? -1 : 1;
    return 0;
}

bool term_less(const RdfTerm& a, const RdfTerm& b) { return compare_terms(a, b) < 0; }

std::string to_ntriples(const RdfTerm& term) {
    switch (term.kind) {
        case TermKind::Uri: return "<" + term.value + ">";
        case TermKind::Blank: return "_:" + term.value;
        case TermKind::Literal: {
            std::string out = "\"" + escape_literal(term.value) + "\"";
            if (!term.language.empty()) {
                out += "@" + term.language;
            } else if (!term.datatype.empty()) {
                out += "^^<" + term.datatype + ">";
            }
            return out;
        }
    }
    return "";
}

bool triple_less(const Triple& a, const Triple& b) {
    int c = compare_terms(a.subject, b.subject);
    if (c != 0) return c < 0;
    c = compare_terms(a.predicate, b.predicate);
    if (c != 0) return c < 0;
    return compare_terms(a.object, b.object) < 0;
}

std::optional<RdfTerm> SparqlResultSet::binding(size_t row, const std::string& var) const {
    auto it = std::find(variables.begin(), variables.end(), var);
    if (it == variables.end() || row >= rows.size()) return std::nullopt;
    return rows[row][static_cast<size_t>(it - variables.begin())];
}

nlohmann::json term_to_json(const RdfTerm& term) {
    nlohmann::json out;
    switch (term.kind) {
        case TermKind::Uri: out["type"] = "uri"; break;
        case TermKind::Blank: out["type"] = "bnode"; break;
        case TermKind::Literal: out["type"] = "literal"; break;
    }
    out["value"] = term.value;
    if (term.kind == TermKind::Literal) {
        if (!term.language.empty()) out["xml:lang"] = term.language;
        else if (!term.datatype.empty()) out["datatype"] = term.datatype;
    }
    return out;
}

RdfTerm term_from_json(const nlohmann::json& value) {
    if (!value.is_object() || !value.contains("type") || !value.contains("value")) {
        throw Error(ErrorKind::Parse, "malformed SPARQL JSON binding: " + value.dump());
    }
    const std::string type = value.at("type").get<std::string>();
    RdfTerm term;
    term.value = value.at("value").get<std::string>();
    if (type == "uri") {
        term.kind = TermKind::Uri;
    } else if (type == "bnode") {
        term.kind = TermKind::Blank;
    } else if (type == "literal" || type == "typed-literal") {
        term.kind = TermKind::Literal;
        if (value.contains("datatype")) term.datatype = value.at("datatype").get<std::string>();
        if (value.contains("xml:lang")) term.language = value.at("xml:lang").get<std::string>();
    } else {
        throw Error(ErrorKind::Parse, "unknown SPARQL JSON term type: " + type);
    }
    return term;
}

nlohmann::json result_set_to_json(const SparqlResultSet& results) {
    nlohmann::json head;
    head["vars"] = results.variables;
    nlohmann::json bindings = nlohmann::json::array();
    for (const auto& row : results.rows) {
        nlohmann::json binding = nlohmann::json::object();
        for (size_t i = 0; i < results.variables.size(); ++i) {
            if (i < row.size() && row[i].has_value()) {
                binding[results.variables[i]] = term_to_json(*row[i]);
            }
        }
        bindings.push_back(std::move(binding));
    }
    nlohmann::json out;
    out["head"] = std::move(head);
    out["results"] = nlohmann::json{{"bindings", std::move(bindings)}};
    return out;
}

SparqlResultSet result_set_from_json(const nlohmann::json& document) {
    if (!document.is_object() || !document.contains("head") || !document.contains("results")) {
        throw Error(ErrorKind::Parse, "malformed SPARQL JSON results document");
    }
    SparqlResultSet out;
    const auto& head = document.at("head");
    if (head.contains("vars")) {
        for (const auto& v : head.at("vars")) out.variables.push_back(v.get<std::string>());
    }
    const auto& results = document.at("results");
    if (!results.contains("bindings") || !results.at("bindings").is_array()) {
        throw Error(ErrorKind::Parse, "malformed SPARQL JSON results: missing bindings");
    }
    for (const auto& binding : results.at("bindings")) {
        std::vector<std::optional<RdfTerm>> row(out.variables.size());
        for (auto it = binding.begin(); it != binding.end(); ++it) {
            auto pos = std::find(out.variables.begin(), out.variables.end(), it.key());
            if (pos == out.variables.end()) {
                // Endpoints occasionally bind variables missing from head.vars.
                out.variables.push_back(it.key());
                for (auto& r : out.rows) r.emplace_back();
                row.emplace_back();
                pos = out.variables.end() - 1;
            }
            row[static_cast<size_t>(pos - out.variables.begin())] = term_from_json(it.value());
        }
        row.resize(out.variables.size());
        out.rows.push_back(std::move(row));
    }
    return out;
}

} // namespace fedkg
