#include "fedkg/sparql/parser.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "fedkg/errors.hpp"

namespace fedkg::sparql {

namespace {

enum class TokKind {
    Eof,
    Iri,      // <...> with brackets stripped
    PName,    // prefix:local, unresolved
    Var,      // ?name / $name, sigil stripped
    String,   // quoted literal, unescaped
    Number,   // integer or decimal lexical form
    Word,     // bare identifier / keyword
    LangTag,  // @tag
    DtSep,    // ^^
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Semicolon,
    Comma,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Star,
};

struct Token {
    TokKind kind = TokKind::Eof;
    std::string text;
    size_t pos = 0;  // byte offset, for error messages
};

[[noreturn]] void fail(const std::string& message, size_t pos) {
    throw Error(ErrorKind::Parse, message + " (at offset " + std::to_string(pos) + ")");
}

bool iri_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    if (u <= 0x20) return false;
    switch (c) {
        case '<': case '>': case '"': case '{': case '}': case '|': case '^': case '`': case '\\':
            return false;
        default:
            return true;
    }
}

bool pname_prefix_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

bool pname_local_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == '%';
}

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        skip_ws();
        Token tok;
        tok.pos = pos_;
        if (pos_ >= text_.size()) return tok;

        char c = text_[pos_];
        switch (c) {
            case '{': ++pos_; tok.kind = TokKind::LBrace; return tok;
            case '}': ++pos_; tok.kind = TokKind::RBrace; return tok;
            case '(': ++pos_; tok.kind = TokKind::LParen; return tok;
            case ')': ++pos_; tok.kind = TokKind::RParen; return tok;
            case ';': ++pos_; tok.kind = TokKind::Semicolon; return tok;
            case ',': ++pos_; tok.kind = TokKind::Comma; return tok;
            case '*': ++pos_; tok.kind = TokKind::Star; return tok;
            case '=': ++pos_; tok.kind = TokKind::Eq; return tok;
            default: break;
        }

        if (c == '.') {
            if (pos_ + 1 < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))
                return lex_number();
            ++pos_;
            tok.kind = TokKind::Dot;
            return tok;
        }
        if (c == '<') return lex_angle();
        if (c == '>') {
            ++pos_;
            if (peek() == '=') { ++pos_; tok.kind = TokKind::Ge; } else tok.kind = TokKind::Gt;
            return tok;
        }
        if (c == '!') {
            ++pos_;
            if (peek() == '=') { ++pos_; tok.kind = TokKind::Ne; } else tok.kind = TokKind::Bang;
            return tok;
        }
        if (c == '&') {
            ++pos_;
            if (peek() == '&') { ++pos_; tok.kind = TokKind::AndAnd; return tok; }
            fail("stray '&'", tok.pos);
        }
        if (c == '|') {
            ++pos_;
            if (peek() == '|') { ++pos_; tok.kind = TokKind::OrOr; return tok; }
            fail("stray '|'", tok.pos);
        }
        if (c == '^') {
            ++pos_;
            if (peek() == '^') { ++pos_; tok.kind = TokKind::DtSep; return tok; }
            fail("stray '^'", tok.pos);
        }
        if (c == '?' || c == '$') return lex_var();
        if (c == '"' || c == '\'') return lex_string(c);
        if (c == '@') return lex_langtag();
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return lex_number();
        if (c == ':') return lex_pname_from("");
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return lex_word_or_pname();
        fail(std::string("unexpected character '") + c + "'", tok.pos);
    }

private:
    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    Token lex_angle() {
        // IRIREF if a closing '>' is reachable over IRI-safe characters,
        // otherwise the comparison operator '<' / '<='.
        Token tok;
        tok.pos = pos_;
        size_t scan = pos_ + 1;
        while (scan < text_.size() && iri_char(text_[scan])) ++scan;
        if (scan < text_.size() && text_[scan] == '>') {
            tok.kind = TokKind::Iri;
            tok.text = text_.substr(pos_ + 1, scan - pos_ - 1);
            pos_ = scan + 1;
            return tok;
        }
        ++pos_;
        if (peek() == '=') { ++pos_; tok.kind = TokKind::Le; } else tok.kind = TokKind::Lt;
        return tok;
    }

    Token lex_var() {
        Token tok;
        tok.pos = pos_;
        ++pos_;  // sigil
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        if (pos_ == start) fail("empty variable name", tok.pos);
        tok.kind = TokKind::Var;
        tok.text = text_.substr(start, pos_ - start);
        return tok;
    }

    Token lex_string(char quote) {
        Token tok;
        tok.pos = pos_;
        ++pos_;
        std::string out;
        while (pos_ < text_.size() && text_[pos_] != quote) {
            char c = text_[pos_];
            if (c == '\\') {
                ++pos_;
                if (pos_ >= text_.size()) fail("unterminated escape", tok.pos);
                char e = text_[pos_];
                switch (e) {
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    case 'r': out += '\r'; break;
                    case '"': out += '"'; break;
                    case '\'': out += '\''; break;
                    case '\\': out += '\\'; break;
                    default: fail(std::string("unsupported escape '\\") + e + "'", pos_);
                }
                ++pos_;
            } else {
                out += c;
                ++pos_;
            }
        }
        if (pos_ >= text_.size()) fail("unterminated string literal", tok.pos);
        ++pos_;  // closing quote
        tok.kind = TokKind::String;
        tok.text = std::move(out);
        return tok;
    }

    Token lex_langtag() {
        Token tok;
        tok.pos = pos_;
        ++pos_;
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '-'))
            ++pos_;
        if (pos_ == start) fail("empty language tag", tok.pos);
        tok.kind = TokKind::LangTag;
        tok.text = text_.substr(start, pos_ - start);
        return tok;
    }

    Token lex_number() {
        Token tok;
        tok.pos = pos_;
        size_t start = pos_;
        if (peek() == '-') ++pos_;
        bool digits = false;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
            digits = true;
        }
        if (pos_ < text_.size() && text_[pos_] == '.' && pos_ + 1 < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
        }
        if (!digits) fail("malformed number", tok.pos);
        tok.kind = TokKind::Number;
        tok.text = text_.substr(start, pos_ - start);
        return tok;
    }

    Token lex_word_or_pname() {
        Token tok;
        tok.pos = pos_;
        size_t start = pos_;
        while (pos_ < text_.size() && pname_prefix_char(text_[pos_])) ++pos_;
        std::string word = text_.substr(start, pos_ - start);
        if (peek() == ':') return lex_pname_from(word);
        tok.kind = TokKind::Word;
        tok.text = std::move(word);
        return tok;
    }

    Token lex_pname_from(const std::string& prefix) {
        Token tok;
        tok.pos = pos_ - prefix.size();
        ++pos_;  // ':'
        size_t start = pos_;
        while (pos_ < text_.size() && pname_local_char(text_[pos_])) ++pos_;
        size_t end = pos_;
        // A trailing dot belongs to the surrounding triple, not the local name.
        while (end > start && text_[end - 1] == '.') --end;
        pos_ = end;
        tok.kind = TokKind::PName;
        tok.text = prefix + ":" + text_.substr(start, end - start);
        return tok;
    }

    const std::string& text_;
    size_t pos_ = 0;
};

bool word_is(const Token& tok, const char* keyword) {
    if (tok.kind != TokKind::Word) return false;
    if (tok.text.size() != std::string_view(keyword).size()) return false;
    for (size_t i = 0; i < tok.text.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(tok.text[i])) != keyword[i]) return false;
    }
    return true;
}

const std::set<std::string> kSupportedFunctions = {
    "str",      "lcase",    "ucase",   "contains", "strstarts", "strends",
    "isliteral", "isiri",   "isuri",   "isblank",  "bound",     "datatype",
    "lang",
};

class Parser {
public:
    explicit Parser(const std::string& text) : lexer_(text) { advance(); }

    SelectQuery parse() {
        parse_prologue();
        if (!word_is(cur_, "SELECT")) {
            if (cur_.kind == TokKind::Word)
                fail("unsupported query form: " + cur_.text + " (only SELECT is supported)",
                     cur_.pos);
            fail("expected SELECT", cur_.pos);
        }
        advance();
        SelectQuery query;
        if (word_is(cur_, "DISTINCT")) {
            query.distinct = true;
            advance();
        } else if (word_is(cur_, "REDUCED")) {
            fail("unsupported construct: REDUCED", cur_.pos);
        }
        parse_projection(query);
        if (word_is(cur_, "WHERE")) advance();
        query.where = parse_group();
        parse_modifiers(query);
        if (cur_.kind != TokKind::Eof) fail("unexpected trailing content", cur_.pos);
        validate(query);
        return query;
    }

private:
    void advance() { cur_ = lexer_.next(); }

    void expect(TokKind kind, const char* what) {
        if (cur_.kind != kind) fail(std::string("expected ") + what, cur_.pos);
        advance();
    }

    void parse_prologue() {
        while (true) {
            if (word_is(cur_, "PREFIX")) {
                advance();
                if (cur_.kind != TokKind::PName) fail("expected prefix name after PREFIX", cur_.pos);
                std::string name = cur_.text;
                auto colon = name.find(':');
                std::string prefix = name.substr(0, colon);
                if (colon + 1 != name.size())
                    fail("malformed PREFIX declaration", cur_.pos);
                advance();
                if (cur_.kind != TokKind::Iri) fail("expected IRI in PREFIX declaration", cur_.pos);
                prefixes_[prefix] = cur_.text;
                advance();
            } else if (word_is(cur_, "BASE")) {
                fail("unsupported construct: BASE", cur_.pos);
            } else {
                break;
            }
        }
    }

    std::string resolve_pname(const Token& tok) {
        auto colon = tok.text.find(':');
        std::string prefix = tok.text.substr(0, colon);
        std::string local = tok.text.substr(colon + 1);
        auto it = prefixes_.find(prefix);
        if (it == prefixes_.end()) fail("undeclared prefix '" + prefix + ":'", tok.pos);
        return it->second + local;
    }

    void parse_projection(SelectQuery& query) {
        if (cur_.kind == TokKind::Star) {
            query.select_star = true;
            advance();
            return;
        }
        while (true) {
            if (cur_.kind == TokKind::Var) {
                SelectItem item;
                item.var = cur_.text;
                query.items.push_back(std::move(item));
                advance();
            } else if (cur_.kind == TokKind::LParen) {
                advance();
                query.items.push_back(parse_aggregate_item());
            } else {
                break;
            }
        }
        if (query.items.empty()) fail("empty SELECT projection", cur_.pos);
    }

    SelectItem parse_aggregate_item() {
        if (!word_is(cur_, "COUNT")) {
            if (cur_.kind == TokKind::Word)
                fail("unsupported aggregate: " + cur_.text + " (only COUNT is supported)",
                     cur_.pos);
            fail("expected aggregate expression", cur_.pos);
        }
        advance();
        expect(TokKind::LParen, "'(' after COUNT");
        SelectItem item;
        item.is_aggregate = true;
        if (word_is(cur_, "DISTINCT")) {
            item.count_distinct = true;
            advance();
        }
        if (cur_.kind == TokKind::Star) {
            item.count_star = true;
            advance();
        } else if (cur_.kind == TokKind::Var) {
            item.count_var = cur_.text;
            advance();
        } else {
            fail("expected '*' or variable inside COUNT", cur_.pos);
        }
        expect(TokKind::RParen, "')' after COUNT argument");
        if (!word_is(cur_, "AS")) fail("expected AS after aggregate", cur_.pos);
        advance();
        if (cur_.kind != TokKind::Var) fail("expected variable after AS", cur_.pos);
        item.var = cur_.text;
        advance();
        expect(TokKind::RParen, "')' closing aggregate projection");
        return item;
    }

    GroupPattern parse_group() {
        expect(TokKind::LBrace, "'{'");
        GroupPattern group;
        while (cur_.kind != TokKind::RBrace) {
            if (cur_.kind == TokKind::Eof) fail("unterminated group pattern", cur_.pos);
            if (word_is(cur_, "GRAPH")) {
                advance();
                GraphBlock block;
                if (cur_.kind == TokKind::Iri) {
                    block.graph = PatternTerm::constant(RdfTerm::uri(cur_.text));
                    advance();
                } else if (cur_.kind == TokKind::PName) {
                    block.graph = PatternTerm::constant(RdfTerm::uri(resolve_pname(cur_)));
                    advance();
                } else if (cur_.kind == TokKind::Var) {
                    block.graph = PatternTerm::variable(cur_.text);
                    advance();
                } else {
                    fail("expected graph IRI or variable after GRAPH", cur_.pos);
                }
                block.body = std::make_shared<GroupPattern>(parse_group());
                group.elements.emplace_back(std::move(block));
            } else if (word_is(cur_, "OPTIONAL")) {
                advance();
                OptionalBlock block;
                block.body = std::make_shared<GroupPattern>(parse_group());
                group.elements.emplace_back(std::move(block));
            } else if (word_is(cur_, "FILTER")) {
                advance();
                FilterClause filter;
                filter.expr = parse_filter_constraint();
                group.elements.emplace_back(std::move(filter));
            } else if (word_is(cur_, "VALUES")) {
                advance();
                group.elements.emplace_back(parse_values());
            } else if (word_is(cur_, "UNION") || word_is(cur_, "MINUS") ||
                       word_is(cur_, "SERVICE") || word_is(cur_, "BIND")) {
                fail("unsupported construct: " + cur_.text, cur_.pos);
            } else if (cur_.kind == TokKind::LBrace) {
                fail("unsupported construct: nested group pattern", cur_.pos);
            } else if (cur_.kind == TokKind::Dot) {
                advance();
            } else {
                parse_triples_block(group);
            }
        }
        advance();  // '}'
        return group;
    }

    // subject (predicate object-list (';' predicate object-list)*) '.'?
    void parse_triples_block(GroupPattern& group) {
        PatternTerm subject = parse_term("triple subject");
        while (true) {
            PatternTerm predicate = parse_predicate();
            while (true) {
                PatternTerm object = parse_term("triple object");
                group.elements.emplace_back(TriplePattern{subject, predicate, object});
                if (cur_.kind == TokKind::Comma) {
                    advance();
                    continue;
                }
                break;
            }
            if (cur_.kind == TokKind::Semicolon) {
                advance();
                // allow trailing ';' before '.' or '}'
                if (cur_.kind == TokKind::Dot || cur_.kind == TokKind::RBrace) break;
                continue;
            }
            break;
        }
        if (cur_.kind == TokKind::Dot) advance();
    }

    PatternTerm parse_predicate() {
        if (cur_.kind == TokKind::Word && cur_.text == "a") {
            advance();
            return PatternTerm::constant(RdfTerm::uri(known::rdf_type));
        }
        return parse_term("triple predicate");
    }

    PatternTerm parse_term(const char* where) {
        switch (cur_.kind) {
            case TokKind::Var: {
                PatternTerm t = PatternTerm::variable(cur_.text);
                advance();
                return t;
            }
            case TokKind::Iri: {
                PatternTerm t = PatternTerm::constant(RdfTerm::uri(cur_.text));
                advance();
                return t;
            }
            case TokKind::PName: {
                PatternTerm t = PatternTerm::constant(RdfTerm::uri(resolve_pname(cur_)));
                advance();
                return t;
            }
            case TokKind::String:
                return PatternTerm::constant(parse_literal_tail(cur_));
            case TokKind::Number: {
                std::string lexical = cur_.text;
                advance();
                bool decimal = lexical.find('.') != std::string::npos;
                return PatternTerm::constant(RdfTerm::literal(
                    lexical, decimal ? known::xsd_decimal : known::xsd_integer));
            }
            case TokKind::Word:
                if (word_is(cur_, "TRUE") || word_is(cur_, "FALSE")) {
                    std::string v = word_is(cur_, "TRUE") ? "true" : "false";
                    advance();
                    return PatternTerm::constant(RdfTerm::literal(v, known::xsd_boolean));
                }
                if (word_is(cur_, "UNDEF"))
                    fail("UNDEF is only allowed inside VALUES", cur_.pos);
                fail(std::string("unexpected token '") + cur_.text + "' in " + where, cur_.pos);
            default:
                fail(std::string("expected term in ") + where, cur_.pos);
        }
    }

    RdfTerm parse_literal_tail(const Token& str) {
        std::string value = str.text;
        advance();
        if (cur_.kind == TokKind::LangTag) {
            RdfTerm t = RdfTerm::literal(value, "", cur_.text);
            advance();
            return t;
        }
        if (cur_.kind == TokKind::DtSep) {
            advance();
            if (cur_.kind == TokKind::Iri) {
                RdfTerm t = RdfTerm::literal(value, cur_.text);
                advance();
                return t;
            }
            if (cur_.kind == TokKind::PName) {
                RdfTerm t = RdfTerm::literal(value, resolve_pname(cur_));
                advance();
                return t;
            }
            fail("expected datatype IRI after '^^'", cur_.pos);
        }
        return RdfTerm::literal(value);
    }

    ValuesClause parse_values() {
        ValuesClause values;
        if (cur_.kind == TokKind::Var) {
            values.vars.push_back(cur_.text);
            advance();
            expect(TokKind::LBrace, "'{' after VALUES variable");
            while (cur_.kind != TokKind::RBrace) {
                values.rows.push_back({parse_values_entry()});
            }
            advance();
        } else if (cur_.kind == TokKind::LParen) {
            advance();
            while (cur_.kind == TokKind::Var) {
                values.vars.push_back(cur_.text);
                advance();
            }
            expect(TokKind::RParen, "')' after VALUES variables");
            if (values.vars.empty()) fail("VALUES requires at least one variable", cur_.pos);
            expect(TokKind::LBrace, "'{' after VALUES variables");
            while (cur_.kind != TokKind::RBrace) {
                expect(TokKind::LParen, "'(' opening VALUES row");
                std::vector<std::optional<RdfTerm>> row;
                while (cur_.kind != TokKind::RParen) {
                    row.push_back(parse_values_entry());
                }
                advance();
                if (row.size() != values.vars.size())
                    fail("VALUES row arity does not match variable list", cur_.pos);
                values.rows.push_back(std::move(row));
            }
            advance();
        } else {
            fail("expected variable or '(' after VALUES", cur_.pos);
        }
        return values;
    }

    std::optional<RdfTerm> parse_values_entry() {
        if (word_is(cur_, "UNDEF")) {
            advance();
            return std::nullopt;
        }
        if (cur_.kind == TokKind::Eof) fail("unterminated VALUES block", cur_.pos);
        PatternTerm term = parse_term("VALUES row");
        if (term.is_var) fail("variables are not allowed inside VALUES rows", cur_.pos);
        return term.term;
    }

    ExprPtr parse_filter_constraint() {
        if (cur_.kind == TokKind::LParen) {
            advance();
            ExprPtr e = parse_expr();
            expect(TokKind::RParen, "')' closing FILTER");
            return e;
        }
        // FILTER CONTAINS(...) form
        if (cur_.kind == TokKind::Word) return parse_primary_expr();
        fail("expected '(' or builtin call after FILTER", cur_.pos);
    }

    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr left = parse_and();
        while (cur_.kind == TokKind::OrOr) {
            advance();
            ExprPtr right = parse_and();
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Or;
            node->children = {left, right};
            left = node;
        }
        return left;
    }

    ExprPtr parse_and() {
        ExprPtr left = parse_unary();
        while (cur_.kind == TokKind::AndAnd) {
            advance();
            ExprPtr right = parse_unary();
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::And;
            node->children = {left, right};
            left = node;
        }
        return left;
    }

    ExprPtr parse_unary() {
        if (cur_.kind == TokKind::Bang) {
            advance();
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Not;
            node->children = {parse_unary()};
            return node;
        }
        return parse_relational();
    }

    ExprPtr parse_relational() {
        ExprPtr left = parse_primary_expr();
        std::string op;
        switch (cur_.kind) {
            case TokKind::Eq: op = "="; break;
            case TokKind::Ne: op = "!="; break;
            case TokKind::Lt: op = "<"; break;
            case TokKind::Gt: op = ">"; break;
            case TokKind::Le: op = "<="; break;
            case TokKind::Ge: op = ">="; break;
            default: break;
        }
        if (!op.empty()) {
            advance();
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Compare;
            node->op = op;
            node->children = {left, parse_primary_expr()};
            return node;
        }
        bool negated = false;
        if (word_is(cur_, "NOT")) {
            advance();
            if (!word_is(cur_, "IN")) fail("expected IN after NOT", cur_.pos);
            negated = true;
        }
        if (word_is(cur_, "IN")) {
            advance();
            expect(TokKind::LParen, "'(' after IN");
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::In;
            node->negated = negated;
            node->children = {left};
            while (cur_.kind != TokKind::RParen) {
                PatternTerm member = parse_term("IN list");
                if (member.is_var) fail("variables are not supported in IN lists", cur_.pos);
                node->members.push_back(std::move(member));
                if (cur_.kind == TokKind::Comma) advance();
            }
            advance();
            return node;
        }
        return left;
    }

    ExprPtr parse_primary_expr() {
        if (cur_.kind == TokKind::LParen) {
            advance();
            ExprPtr e = parse_expr();
            expect(TokKind::RParen, "')'");
            return e;
        }
        if (cur_.kind == TokKind::Word) {
            if (word_is(cur_, "TRUE") || word_is(cur_, "FALSE")) {
                auto node = std::make_shared<Expr>();
                node->kind = Expr::Kind::Bool;
                node->bool_value = word_is(cur_, "TRUE");
                advance();
                return node;
            }
            std::string name = cur_.text;
            std::transform(name.begin(), name.end(), name.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (!kSupportedFunctions.count(name))
                fail("unsupported function: " + cur_.text, cur_.pos);
            advance();
            expect(TokKind::LParen, "'(' after function name");
            auto node = std::make_shared<Expr>();
            node->kind = Expr::Kind::Call;
            node->function = name;
            while (cur_.kind != TokKind::RParen) {
                node->children.push_back(parse_expr());
                if (cur_.kind == TokKind::Comma) advance();
            }
            advance();
            return node;
        }
        auto node = std::make_shared<Expr>();
        node->kind = Expr::Kind::Term;
        node->term = parse_term("filter expression");
        return node;
    }

    void parse_modifiers(SelectQuery& query) {
        while (true) {
            if (word_is(cur_, "GROUP")) {
                advance();
                if (!word_is(cur_, "BY")) fail("expected BY after GROUP", cur_.pos);
                advance();
                while (cur_.kind == TokKind::Var) {
                    query.group_by.push_back(cur_.text);
                    advance();
                }
                if (query.group_by.empty()) fail("GROUP BY requires variables", cur_.pos);
            } else if (word_is(cur_, "HAVING")) {
                fail("unsupported construct: HAVING", cur_.pos);
            } else if (word_is(cur_, "ORDER")) {
                advance();
                if (!word_is(cur_, "BY")) fail("expected BY after ORDER", cur_.pos);
                advance();
                bool any = false;
                while (true) {
                    OrderKey key;
                    if (word_is(cur_, "ASC") || word_is(cur_, "DESC")) {
                        key.descending = word_is(cur_, "DESC");
                        advance();
                        expect(TokKind::LParen, "'(' after ASC/DESC");
                        if (cur_.kind != TokKind::Var)
                            fail("ORDER BY supports variables only", cur_.pos);
                        key.var = cur_.text;
                        advance();
                        expect(TokKind::RParen, "')'");
                    } else if (cur_.kind == TokKind::Var) {
                        key.var = cur_.text;
                        advance();
                    } else {
                        break;
                    }
                    query.order_by.push_back(std::move(key));
                    any = true;
                }
                if (!any) fail("ORDER BY requires at least one key", cur_.pos);
            } else if (word_is(cur_, "LIMIT")) {
                advance();
                if (cur_.kind != TokKind::Number || cur_.text.find('.') != std::string::npos)
                    fail("expected integer after LIMIT", cur_.pos);
                query.limit = std::stoull(cur_.text);
                advance();
            } else if (word_is(cur_, "OFFSET")) {
                advance();
                if (cur_.kind != TokKind::Number || cur_.text.find('.') != std::string::npos)
                    fail("expected integer after OFFSET", cur_.pos);
                query.offset = std::stoull(cur_.text);
                advance();
            } else {
                break;
            }
        }
    }

    void validate(const SelectQuery& query) {
        if (!query.group_by.empty() || query.has_aggregates()) {
            if (query.select_star)
                fail("SELECT * cannot be combined with aggregation", 0);
            for (const auto& item : query.items) {
                if (item.is_aggregate) continue;
                if (std::find(query.group_by.begin(), query.group_by.end(), item.var) ==
                    query.group_by.end())
                    fail("projected variable ?" + item.var + " is not in GROUP BY", 0);
            }
        }
        std::set<std::string> seen;
        for (const auto& item : query.items) {
            if (!seen.insert(item.var).second)
                fail("duplicate projection variable ?" + item.var, 0);
        }
    }

    Lexer lexer_;
    Token cur_;
    std::map<std::string, std::string> prefixes_;
};

} // namespace

SelectQuery parse_query(const std::string& text) { return Parser(text).parse(); }

} // namespace fedkg::sparql
