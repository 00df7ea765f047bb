#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fedkg {

enum class TermKind { Uri, Literal, Blank };

// One RDF term. Literals may carry a datatype URI or a language tag,
// never both; URIs and blanks carry neither.
struct RdfTerm {
    TermKind kind = TermKind::Uri;
    std::string value;
    std::string datatype; // empty unless kind == Literal
    std::string language; // empty unless kind == Literal

    static RdfTerm uri(std::string v) {
        return RdfTerm{TermKind::Uri, std::move(v), "", ""};
    }
    static RdfTerm literal(std::string v, std::string dt = "", std::string lang = "") {
        return RdfTerm{TermKind::Literal, std::move(v), std::move(dt), std::move(lang)};
    }
    static RdfTerm blank(std::string label) {
        return RdfTerm{TermKind::Blank, std::move(label), "", ""};
    }
    static RdfTerm integer(long long n) {
        return literal(std::to_string(n), "http://www.w3.org/2001/XMLSchema#integer");
    }

    bool is_numeric() const;
    // Numeric value of a numeric literal; 0 otherwise.
    double numeric_value() const;

    bool operator==(const RdfTerm& other) const = default;
};

// Total order over terms: blank < uri < literal, then value, datatype, language.
// Numeric literals compare numerically against each other.
int compare_terms(const RdfTerm& a, const RdfTerm& b);
bool term_less(const RdfTerm& a, const RdfTerm& b);

// N-Triples style rendering: <uri>, "literal"^^<dt>, "literal"@lang, _:bnode.
std::string to_ntriples(const RdfTerm& term);

struct Triple {
    RdfTerm subject;
    RdfTerm predicate;
    RdfTerm object;

    bool operator==(const Triple& other) const = default;
};

bool triple_less(const Triple& a, const Triple& b);

// Tabular SPARQL SELECT results. Rows are aligned to `variables`;
// an unset optional is an unbound variable in that solution.
struct SparqlResultSet {
    std::vector<std::string> variables;
    std::vector<std::vector<std::optional<RdfTerm>>> rows;
    bool truncated = false;

    std::optional<RdfTerm> binding(size_t row, const std::string& var) const;
};

// SPARQL 1.1 Query Results JSON conversions.
nlohmann::json term_to_json(const RdfTerm& term);
RdfTerm term_from_json(const nlohmann::json& value);
nlohmann::json result_set_to_json(const SparqlResultSet& results);
SparqlResultSet result_set_from_json(const nlohmann::json& document);

namespace known {
inline constexpr const char* rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr const char* rdf_subject = "http://www.w3.org/1999/02/22-rdf-syntax-ns#subject";
inline constexpr const char* rdf_predicate = "http://www.w3.org/1999/02/22-rdf-syntax-ns#predicate";
inline constexpr const char* rdf_object = "http://www.w3.org/1999/02/22-rdf-syntax-ns#object";
inline constexpr const char* rdfs_label = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr const char* rdfs_subclassof = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
inline constexpr const char* xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr const char* xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";
inline constexpr const char* xsd_double = "http://www.w3.org/2001/XMLSchema#double";
inline constexpr const char* xsd_string = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr const char* xsd_boolean = "http://www.w3.org/2001/XMLSchema#boolean";
} // namespace known

} // namespace fedkg
