#include "fedkg/sparql/ast.hpp"

#include <cctype>
#include <sstream>

#include "fedkg/sparql/parser.hpp"

namespace fedkg::sparql {

ExprPtr clone(const ExprPtr& expr) {
    if (!expr) return nullptr;
    auto out = std::make_shared<Expr>(*expr);
    out->children.clear();
    for (const auto& child : expr->children) out->children.push_back(clone(child));
    return out;
}

GroupPattern clone(const GroupPattern& group) {
    GroupPattern out;
    for (const auto& element : group.elements) {
        if (const auto* triple = std::get_if<TriplePattern>(&element)) {
            out.elements.emplace_back(*triple);
        } else if (const auto* graph = std::get_if<GraphBlock>(&element)) {
            GraphBlock copy;
            copy.graph = graph->graph;
            copy.body = std::make_shared<GroupPattern>(clone(*graph->body));
            out.elements.emplace_back(std::move(copy));
        } else if (const auto* opt = std::get_if<OptionalBlock>(&element)) {
            OptionalBlock copy;
            copy.body = std::make_shared<GroupPattern>(clone(*opt->body));
            out.elements.emplace_back(std::move(copy));
        } else if (const auto* filter = std::get_if<FilterClause>(&element)) {
            out.elements.emplace_back(FilterClause{clone(filter->expr)});
        } else if (const auto* values = std::get_if<ValuesClause>(&element)) {
            out.elements.emplace_back(*values);
        }
    }
    return out;
}

SelectQuery clone(const SelectQuery& query) {
    SelectQuery out = query;
    out.where = clone(query.where);
    return out;
}

namespace {

void collect_group_vars(const GroupPattern& group, std::set<std::string>& out);

void collect_expr_vars(const ExprPtr& expr, std::set<std::string>& out) {
    if (!expr) return;
    if (expr->kind == Expr::Kind::Term && expr->term.is_var) out.insert(expr->term.var);
    for (const auto& child : expr->children) collect_expr_vars(child, out);
}

void collect_group_vars(const GroupPattern& group, std::set<std::string>& out) {
    for (const auto& element : group.elements) {
        if (const auto* triple = std::get_if<TriplePattern>(&element)) {
            for (const auto* t : {&triple->subject, &triple->predicate, &triple->object})
                if (t->is_var) out.insert(t->var);
        } else if (const auto* graph = std::get_if<GraphBlock>(&element)) {
            if (graph->graph.is_var) out.insert(graph->graph.var);
            collect_group_vars(*graph->body, out);
        } else if (const auto* opt = std::get_if<OptionalBlock>(&element)) {
            collect_group_vars(*opt->body, out);
        } else if (const auto* filter = std::get_if<FilterClause>(&element)) {
            collect_expr_vars(filter->expr, out);
        } else if (const auto* values = std::get_if<ValuesClause>(&element)) {
            for (const auto& v : values->vars) out.insert(v);
        }
    }
}

} // namespace

std::set<std::string> collect_variables(const SelectQuery& query) {
    std::set<std::string> out;
    for (const auto& item : query.items) {
        out.insert(item.var);
        if (item.is_aggregate && !item.count_star) out.insert(item.count_var);
    }
    collect_group_vars(query.where, out);
    for (const auto& v : query.group_by) out.insert(v);
    for (const auto& key : query.order_by) out.insert(key.var);
    return out;
}

bool contains_graph_block(const GroupPattern& group) {
    for (const auto& element : group.elements) {
        if (std::holds_alternative<GraphBlock>(element)) return true;
        if (const auto* opt = std::get_if<OptionalBlock>(&element)) {
            if (contains_graph_block(*opt->body)) return true;
        }
    }
    return false;
}

namespace {

std::string serialize_term_value(const RdfTerm& term) {
    if (term.kind == TermKind::Literal && term.language.empty()) {
        // Compact lexical forms for plain numeric and boolean literals.
        if (term.datatype == known::xsd_integer || term.datatype == known::xsd_decimal) {
            bool plain = !term.value.empty();
            size_t start = term.value[0] == '-' ? 1 : 0;
            bool dot_seen = false;
            for (size_t i = start; i < term.value.size() && plain; ++i) {
                char c = term.value[i];
                if (c == '.' && !dot_seen && term.datatype == known::xsd_decimal) dot_seen = true;
                else if (!std::isdigit(static_cast<unsigned char>(c))) plain = false;
            }
            if (plain && start < term.value.size()) return term.value;
        }
        if (term.datatype == known::xsd_boolean &&
            (term.value == "true" || term.value == "false"))
            return term.value;
    }
    return to_ntriples(term);
}

void serialize_group_into(const GroupPattern& group, std::ostringstream& out);

void serialize_expr_into(const ExprPtr& expr, std::ostringstream& out, bool parenthesize) {
    if (!expr) {
        out << "true";
        return;
    }
    switch (expr->kind) {
        case Expr::Kind::And:
        case Expr::Kind::Or: {
            const char* op = expr->kind == Expr::Kind::And ? " && " : " || ";
            if (parenthesize) out << "(";
            for (size_t i = 0; i < expr->children.size(); ++i) {
                if (i) out << op;
                serialize_expr_into(expr->children[i], out, true);
            }
            if (parenthesize) out << ")";
            break;
        }
        case Expr::Kind::Not:
            out << "!(";
            serialize_expr_into(expr->children.at(0), out, false);
            out << ")";
            break;
        case Expr::Kind::Compare:
            if (parenthesize) out << "(";
            serialize_expr_into(expr->children.at(0), out, true);
            out << " " << expr->op << " ";
            serialize_expr_into(expr->children.at(1), out, true);
            if (parenthesize) out << ")";
            break;
        case Expr::Kind::In:
            if (parenthesize) out << "(";
            serialize_expr_into(expr->children.at(0), out, true);
            out << (expr->negated ? " NOT IN (" : " IN (");
            for (size_t i = 0; i < expr->members.size(); ++i) {
                if (i) out << ", ";
                out << serialize(expr->members[i]);
            }
            out << ")";
            if (parenthesize) out << ")";
            break;
        case Expr::Kind::Call: {
            std::string name = expr->function;
            for (auto& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            if (expr->function == "isliteral") name = "isLiteral";
            else if (expr->function == "isiri") name = "isIRI";
            else if (expr->function == "isuri") name = "isURI";
            else if (expr->function == "isblank") name = "isBlank";
            out << name << "(";
            for (size_t i = 0; i < expr->children.size(); ++i) {
                if (i) out << ", ";
                serialize_expr_into(expr->children[i], out, false);
            }
            out << ")";
            break;
        }
        case Expr::Kind::Term:
            out << serialize(expr->term);
            break;
        case Expr::Kind::Bool:
            out << (expr->bool_value ? "true" : "false");
            break;
    }
}

void serialize_values_into(const ValuesClause& values, std::ostringstream& out) {
    out << "VALUES ";
    bool multi = values.vars.size() != 1;
    if (multi) {
        out << "(";
        for (size_t i = 0; i < values.vars.size(); ++i) {
            if (i) out << " ";
            out << "?" << values.vars[i];
        }
        out << ") ";
    } else {
        out << "?" << values.vars[0] << " ";
    }
    out << "{ ";
    for (const auto& row : values.rows) {
        if (multi) out << "( ";
        for (const auto& entry : row) {
            out << (entry ? serialize_term_value(*entry) : "UNDEF") << " ";
        }
        if (multi) out << ") ";
    }
    out << "}";
}

void serialize_group_into(const GroupPattern& group, std::ostringstream& out) {
    out << "{ ";
    for (const auto& element : group.elements) {
        if (const auto* triple = std::get_if<TriplePattern>(&element)) {
            out << serialize(triple->subject) << " " << serialize(triple->predicate) << " "
                << serialize(triple->object) << " . ";
        } else if (const auto* graph = std::get_if<GraphBlock>(&element)) {
            out << "GRAPH " << serialize(graph->graph) << " ";
            serialize_group_into(*graph->body, out);
            out << " ";
        } else if (const auto* opt = std::get_if<OptionalBlock>(&element)) {
            out << "OPTIONAL ";
            serialize_group_into(*opt->body, out);
            out << " ";
        } else if (const auto* filter = std::get_if<FilterClause>(&element)) {
            out << "FILTER(";
            serialize_expr_into(filter->expr, out, false);
            out << ") ";
        } else if (const auto* values = std::get_if<ValuesClause>(&element)) {
            serialize_values_into(*values, out);
            out << " ";
        }
    }
    out << "}";
}

} // namespace

std::string serialize(const PatternTerm& term) {
    if (term.is_var) return "?" + term.var;
    return serialize_term_value(term.term);
}

std::string serialize(const ExprPtr& expr) {
    std::ostringstream out;
    serialize_expr_into(expr, out, false);
    return out.str();
}

std::string serialize(const GroupPattern& group) {
    std::ostringstream out;
    serialize_group_into(group, out);
    return out.str();
}

std::string serialize(const SelectQuery& query) {
    std::ostringstream out;
    out << "SELECT ";
    if (query.distinct) out << "DISTINCT ";
    if (query.select_star) {
        out << "* ";
    } else {
        for (const auto& item : query.items) {
            if (item.is_aggregate) {
                out << "(COUNT(";
                if (item.count_distinct) out << "DISTINCT ";
                out << (item.count_star ? std::string("*") : "?" + item.count_var);
                out << ") AS ?" << item.var << ") ";
            } else {
                out << "?" << item.var << " ";
            }
        }
    }
    out << "WHERE ";
    serialize_group_into(query.where, out);
    if (!query.group_by.empty()) {
        out << " GROUP BY";
        for (const auto& v : query.group_by) out << " ?" << v;
    }
    if (!query.order_by.empty()) {
        out << " ORDER BY";
        for (const auto& key : query.order_by) {
            if (key.descending) out << " DESC(?" << key.var << ")";
            else out << " ?" << key.var;
        }
    }
    if (query.limit) out << " LIMIT " << *query.limit;
    if (query.offset) out << " OFFSET " << *query.offset;
    return out.str();
}

} // namespace fedkg::sparql
