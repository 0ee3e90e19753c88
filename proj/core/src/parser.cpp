#include "sgf/parser.hpp"

#include "sgf/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>

namespace sgf {

namespace {

enum class Tok { End, Name, Int, String, Assign, LParen, RParen, Comma, Semi, Select, From, Where, And, Or, Not };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;
};

std::string_view describe(Tok t) {
    switch (t) {
    case Tok::End: return "end of input";
    case Tok::Name: return "identifier";
    case Tok::Int: return "integer";
    case Tok::String: return "string";
    case Tok::Assign: return "':='";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Comma: return "','";
    case Tok::Semi: return "';'";
    case Tok::Select: return "SELECT";
    case Tok::From: return "FROM";
    case Tok::Where: return "WHERE";
    case Tok::And: return "AND";
    case Tok::Or: return "OR";
    case Tok::Not: return "NOT";
    }
    return "?";
}

std::optional<Tok> keyword(std::string_view word) {
    std::string up(word);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "SELECT") return Tok::Select;
    if (up == "FROM") return Tok::From;
    if (up == "WHERE") return Tok::Where;
    if (up == "AND") return Tok::And;
    if (up == "OR") return Tok::Or;
    if (up == "NOT") return Tok::Not;
    return std::nullopt;
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.pos = {line_, col_};
            if (i_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t b = i_;
                while (i_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
                    advance();
                t.text = std::string(src_.substr(b, i_ - b));
                t.kind = keyword(t.text).value_or(Tok::Name);
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '-' && i_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
                std::size_t b = i_;
                advance();
                while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_])))
                    advance();
                t.kind = Tok::Int;
                t.text = std::string(src_.substr(b, i_ - b));
            } else if (c == '"') {
                t.kind = Tok::String;
                t.text = read_string(t.pos);
            } else if (c == ':' && i_ + 1 < src_.size() && src_[i_ + 1] == '=') {
                advance();
                advance();
                t.kind = Tok::Assign;
            } else {
                switch (c) {
                case '(': t.kind = Tok::LParen; break;
                case ')': t.kind = Tok::RParen; break;
                case ',': t.kind = Tok::Comma; break;
                case ';': t.kind = Tok::Semi; break;
                default:
                    throw ParseError(ErrorCode::Syntax, line_, col_, std::string("unexpected character '") + c + "'");
                }
                advance();
            }
            out.push_back(std::move(t));
        }
    }

private:
    void advance() {
        if (src_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }

    void skip_space() {
        while (i_ < src_.size()) {
            if (std::isspace(static_cast<unsigned char>(src_[i_]))) {
                advance();
            } else if (src_[i_] == '-' && i_ + 1 < src_.size() && src_[i_ + 1] == '-') {
                while (i_ < src_.size() && src_[i_] != '\n')
                    advance();
            } else {
                break;
            }
        }
    }

    std::string read_string(SourcePos start) {
        advance(); // opening quote
        std::string out;
        while (i_ < src_.size() && src_[i_] != '"') {
            if (src_[i_] == '\n')
                break;
            if (src_[i_] == '\\' && i_ + 1 < src_.size()) {
                advance();
                char e = src_[i_];
                if (e != '"' && e != '\\')
                    throw ParseError(ErrorCode::Syntax, line_, col_, std::string("unknown escape '\\") + e + "'");
            }
            out.push_back(src_[i_]);
            advance();
        }
        if (i_ >= src_.size() || src_[i_] != '"')
            throw ParseError(ErrorCode::Syntax, start.line, start.column, "unterminated string literal");
        advance();
        for (char ch : out)
            if (ch == '\t' || ch == '\x1e' || ch == '\x1f')
                throw ParseError(ErrorCode::Syntax, start.line, start.column, "string constant contains a reserved byte");
        return out;
    }

    std::string_view src_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    SgfQuery program() {
        SgfQuery q;
        do {
            q.queries.push_back(assignment());
        } while (peek().kind != Tok::End);
        check_program(q);
        return q;
    }

private:
    const Token& peek() const { return toks_[i_]; }
    const Token& take() { return toks_[i_++]; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        throw ParseError(ErrorCode::Syntax, t.pos.line, t.pos.column, msg);
    }

    const Token& expect(Tok kind, std::string_view context) {
        if (peek().kind != kind)
            fail(peek(), "expected " + std::string(describe(kind)) + " " + std::string(context) + ", found " +
                             std::string(describe(peek().kind)) +
                             (peek().text.empty() ? "" : " '" + peek().text + "'"));
        return take();
    }

    bool accept(Tok kind) {
        if (peek().kind != kind)
            return false;
        ++i_;
        return true;
    }

    BsgfQuery assignment() {
        BsgfQuery q;
        const Token& name = expect(Tok::Name, "at start of assignment");
        q.output = name.text;
        q.pos = name.pos;
        expect(Tok::Assign, "after output name");
        expect(Tok::Select, "after ':='");
        q.out_vars = varlist();
        expect(Tok::From, "after select list");
        q.guard = atom();
        if (accept(Tok::Where))
            q.condition = disjunction();
        expect(Tok::Semi, "at end of assignment");
        return q;
    }

    std::vector<std::string> varlist() {
        std::vector<std::string> vars;
        bool paren = accept(Tok::LParen);
        if (peek().kind != Tok::Name)
            fail(peek(), "select list must name at least one variable");
        vars.push_back(take().text);
        while (accept(Tok::Comma))
            vars.push_back(expect(Tok::Name, "in select list").text);
        if (paren)
            expect(Tok::RParen, "closing select list");
        return vars;
    }

    Atom atom() {
        Atom a;
        const Token& name = expect(Tok::Name, "as relation name");
        a.relation = name.text;
        a.pos = name.pos;
        expect(Tok::LParen, "after relation name");
        do {
            const Token& t = take();
            switch (t.kind) {
            case Tok::Name: a.terms.push_back(Term::variable(t.text)); break;
            case Tok::Int:
            case Tok::String: a.terms.push_back(Term::constant(t.text)); break;
            default: fail(t, "expected a term, found " + std::string(describe(t.kind)));
            }
        } while (accept(Tok::Comma));
        expect(Tok::RParen, "closing atom");
        return a;
    }

    ConditionPtr disjunction() {
        ConditionPtr lhs = conjunction();
        while (accept(Tok::Or))
            lhs = Condition::disj(lhs, conjunction());
        return lhs;
    }

    ConditionPtr conjunction() {
        ConditionPtr lhs = unary();
        while (accept(Tok::And))
            lhs = Condition::conj(lhs, unary());
        return lhs;
    }

    ConditionPtr unary() {
        if (accept(Tok::Not))
            return Condition::negate(unary());
        if (accept(Tok::LParen)) {
            ConditionPtr inner = disjunction();
            expect(Tok::RParen, "closing condition");
            return inner;
        }
        if (peek().kind != Tok::Name)
            fail(peek(), "expected an atom, NOT or '(' in condition");
        return Condition::leaf(atom());
    }

    // Program-wide checks: unique outputs, one arity per relation name.
    static void check_program(const SgfQuery& q) {
        std::map<std::string, std::size_t, std::less<>> outputs;
        std::map<std::string, std::size_t, std::less<>> arity;
        auto note = [&](const std::string& rel, std::size_t n, SourcePos pos) {
            auto [it, fresh] = arity.emplace(rel, n);
            if (!fresh && it->second != n)
                throw ParseError(ErrorCode::ArityMismatch, pos.line, pos.column,
                                 "relation " + rel + " used with arity " + std::to_string(n) + ", previously " +
                                     std::to_string(it->second));
        };
        for (const auto& b : q.queries) {
            if (!outputs.emplace(b.output, 0).second)
                throw ParseError(ErrorCode::DuplicateOutputName, b.pos.line, b.pos.column,
                                 "output relation " + b.output + " defined twice");
        }
        for (const auto& b : q.queries) {
            note(b.output, b.out_vars.size(), b.pos);
            note(b.guard.relation, b.guard.arity(), b.guard.pos);
            if (b.condition)
                for (const auto& a : b.condition->atoms())
                    note(a.relation, a.arity(), a.pos);
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

std::string quote_term(const Term& t) {
    if (t.is_variable())
        return t.text();
    if (is_integer_literal(t.text()) && canonical_datum(t.text()) == t.text())
        return t.text();
    std::string out = "\"";
    for (char c : t.text()) {
        if (c == '"' || c == '\\')
            out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void print_condition(const Condition& c, std::string& out);

void print_child(const ConditionPtr& c, bool parens, std::string& out) {
    if (parens)
        out += "(";
    print_condition(*c, out);
    if (parens)
        out += ")";
}

void print_condition(const Condition& c, std::string& out) {
    using K = Condition::Kind;
    switch (c.kind()) {
    case K::Leaf: out += pretty_print(c.atom()); break;
    case K::Not:
        out += "NOT ";
        print_child(c.child(), c.child()->kind() == K::And || c.child()->kind() == K::Or, out);
        break;
    case K::And:
        // Left-associative parse: a right child of the same operator needs parentheses.
        print_child(c.lhs(), c.lhs()->kind() == K::Or, out);
        out += " AND ";
        print_child(c.rhs(), c.rhs()->kind() == K::Or || c.rhs()->kind() == K::And, out);
        break;
    case K::Or:
        print_child(c.lhs(), false, out);
        out += " OR ";
        print_child(c.rhs(), c.rhs()->kind() == K::Or, out);
        break;
    }
}

} // namespace

SgfQuery parse_program(std::string_view text) {
    Lexer lex(text);
    Parser p(lex.run());
    return p.program();
}

std::string pretty_print(const Atom& a) {
    std::string out = a.relation + "(";
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (i)
            out += ", ";
        out += quote_term(a.terms[i]);
    }
    return out + ")";
}

std::string pretty_print(const ConditionPtr& c) {
    std::string out;
    if (c)
        print_condition(*c, out);
    return out;
}

std::string pretty_print(const BsgfQuery& q) {
    std::string out = q.output + " := SELECT ";
    for (std::size_t i = 0; i < q.out_vars.size(); ++i) {
        if (i)
            out += ", ";
        out += q.out_vars[i];
    }
    out += " FROM " + pretty_print(q.guard);
    if (q.condition)
        out += " WHERE " + pretty_print(q.condition);
    return out + ";";
}

std::string pretty_print(const SgfQuery& q) {
    std::string out;
    for (const auto& b : q.queries)
        out += pretty_print(b) + "\n";
    return out;
}

} // namespace sgf
