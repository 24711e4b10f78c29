#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"

// Expression language for fields: literals, the variables xi, x, t, chi,
// + - * / ^, unary minus and the functions sin cos exp ln abs min max step frac.
// Precedence: ^ > unary - > * / > + -; ^ is right-associative.

namespace lmc::dsl {

enum class Var { xi = 0, x = 1, t = 2, chi = 3 };
inline constexpr std::array<const char*, 4> var_names{"xi", "x", "t", "chi"};

enum class Fn { sin, cos, exp, ln, abs, min, max, step, frac };
inline constexpr std::array<const char*, 9> fn_names{"sin", "cos", "exp", "ln", "abs", "min", "max", "step", "frac"};
inline int arity(Fn f) { return (f == Fn::min || f == Fn::max) ? 2 : 1; }

struct SyntaxError : Error {
    int line, column;
    std::string found;
    std::vector<std::string> expected;
    SyntaxError(int l, int c, std::string f, std::vector<std::string> exp)
        : Error(format(l, c, f, exp)), line(l), column(c), found(std::move(f)), expected(std::move(exp)) {}

    static std::string format(int l, int c, const std::string& f, const std::vector<std::string>& exp) {
        std::string s = "syntax error at " + std::to_string(l) + ":" + std::to_string(c) + ": unexpected " + f +
                        "; expected one of: ";
        for (std::size_t i = 0; i < exp.size(); ++i) s += (i ? ", " : "") + exp[i];
        return s;
    }
};

struct Node {
    enum class Kind { num, var, neg, add, sub, mul, div, pow, call };
    Kind kind = Kind::num;
    double value = 0.0;
    Var var = Var::x;
    Fn fn = Fn::sin;
    std::shared_ptr<const Node> a, b;
};
using NodePtr = std::shared_ptr<const Node>;

inline bool equal(const NodePtr& p, const NodePtr& q) {
    if (!p || !q) return !p && !q;
    if (p->kind != q->kind) return false;
    switch (p->kind) {
        case Node::Kind::num: return p->value == q->value;
        case Node::Kind::var: return p->var == q->var;
        case Node::Kind::call: return p->fn == q->fn && equal(p->a, q->a) && equal(p->b, q->b);
        default: return equal(p->a, q->a) && equal(p->b, q->b);
    }
}

inline NodePtr make_num(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::num;
    n->value = v;
    return n;
}
inline NodePtr make_var(Var v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::var;
    n->var = v;
    return n;
}
inline NodePtr make_op(Node::Kind k, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}
inline NodePtr make_call(Fn f, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::call;
    n->fn = f;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

// Values for the free variables; unset entries are unbound.
struct Bindings {
    std::array<double, 4> v{};
    unsigned mask = 0;

    Bindings& set(Var var, double value) {
        v[static_cast<int>(var)] = value;
        mask |= 1u << static_cast<int>(var);
        return *this;
    }
    static Bindings of(double xi, double x, double t, double chi) {
        Bindings b;
        b.set(Var::xi, xi).set(Var::x, x).set(Var::t, t).set(Var::chi, chi);
        return b;
    }
};

namespace detail {

struct Token {
    enum class Kind { number, ident, op, end };
    Kind kind = Kind::end;
    std::string text;
    double value = 0.0;
    int line = 1, column = 1;

    std::string describe() const {
        switch (kind) {
            case Kind::number: return "number '" + text + "'";
            case Kind::ident: return "identifier '" + text + "'";
            case Kind::op: return "'" + text + "'";
            default: return "end of input";
        }
    }
};

class Lexer {
public:
    explicit Lexer(const std::string& s) : src_(s) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token tok;
            tok.line = line_;
            tok.column = col_;
            if (pos_ >= src_.size()) {
                tok.kind = Token::Kind::end;
                out.push_back(tok);
                return out;
            }
            const char c = src_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                lex_number(tok);
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t b = pos_;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    advance();
                tok.kind = Token::Kind::ident;
                tok.text = src_.substr(b, pos_ - b);
            } else if (std::string("+-*/^(),").find(c) != std::string::npos) {
                tok.kind = Token::Kind::op;
                tok.text = std::string(1, c);
                advance();
            } else {
                throw SyntaxError(line_, col_, "character '" + std::string(1, c) + "'",
                                  {"number", "identifier", "operator", "'('", "')'", "','"});
            }
            out.push_back(tok);
        }
    }

private:
    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }
    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    void lex_number(Token& tok) {
        const int l = line_, c = col_;
        std::size_t b = pos_;
        bool digits = false;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(), digits = true;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            advance();
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance(), digits = true;
        }
        if (!digits) throw SyntaxError(l, c, "'.'", {"digit"});
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            int sl = line_, sc = col_;
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
            if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
            } else {
                pos_ = save;
                line_ = sl;
                col_ = sc;
            }
        }
        tok.kind = Token::Kind::number;
        tok.text = src_.substr(b, pos_ - b);
        tok.value = std::strtod(tok.text.c_str(), nullptr);
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    int line_ = 1, col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    NodePtr parse_all() {
        NodePtr e = expr();
        expect_after_operand({"end of input"});
        return e;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    bool is_op(const char* s) const { return peek().kind == Token::Kind::op && peek().text == s; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        throw SyntaxError(peek().line, peek().column, peek().describe(), std::move(expected));
    }

    // After a complete operand only an operator or the given closer may follow.
    void expect_after_operand(std::vector<std::string> closers) const {
        bool ok = false;
        for (const auto& c : closers) {
            if (c == "end of input" && peek().kind == Token::Kind::end) ok = true;
            if (c == "')'" && is_op(")")) ok = true;
            if (c == "','" && is_op(",")) ok = true;
        }
        if (ok) return;
        std::vector<std::string> exp{"'+'", "'-'", "'*'", "'/'", "'^'"};
        exp.insert(exp.end(), closers.begin(), closers.end());
        fail(exp);
    }

    void expect_op(const char* s) {
        if (!is_op(s)) fail({std::string("'") + s + "'"});
        ++pos_;
    }

    NodePtr expr() {
        NodePtr lhs = term();
        while (is_op("+") || is_op("-")) {
            auto k = is_op("+") ? Node::Kind::add : Node::Kind::sub;
            ++pos_;
            lhs = make_op(k, lhs, term());
        }
        return lhs;
    }
    NodePtr term() {
        NodePtr lhs = unary();
        while (is_op("*") || is_op("/")) {
            auto k = is_op("*") ? Node::Kind::mul : Node::Kind::div;
            ++pos_;
            lhs = make_op(k, lhs, unary());
        }
        return lhs;
    }
    NodePtr unary() {
        if (is_op("-")) {
            ++pos_;
            return make_op(Node::Kind::neg, unary());
        }
        return power();
    }
    NodePtr power() {
        NodePtr base = primary();
        if (is_op("^")) {
            ++pos_;
            return make_op(Node::Kind::pow, base, unary());
        }
        return base;
    }
    NodePtr primary() {
        const Token& tok = peek();
        if (tok.kind == Token::Kind::number) {
            ++pos_;
            return make_num(tok.value);
        }
        if (tok.kind == Token::Kind::ident) {
            for (std::size_t i = 0; i < var_names.size(); ++i)
                if (tok.text == var_names[i]) {
                    ++pos_;
                    return make_var(static_cast<Var>(i));
                }
            for (std::size_t i = 0; i < fn_names.size(); ++i)
                if (tok.text == fn_names[i]) {
                    ++pos_;
                    const Fn f = static_cast<Fn>(i);
                    expect_op("(");
                    NodePtr a = expr();
                    NodePtr b;
                    if (arity(f) == 2) {
                        expect_after_operand({"','"});
                        ++pos_;
                        b = expr();
                    }
                    expect_after_operand({"')'"});
                    ++pos_;
                    return make_call(f, a, b);
                }
            throw UnknownIdentifier("unknown identifier '" + tok.text + "' at " + std::to_string(tok.line) + ":" +
                                    std::to_string(tok.column));
        }
        if (is_op("(")) {
            ++pos_;
            NodePtr e = expr();
            expect_after_operand({"')'"});
            ++pos_;
            return e;
        }
        fail({"number", "identifier", "'('", "'-'"});
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

inline int precedence(const Node& n) {
    switch (n.kind) {
        case Node::Kind::add:
        case Node::Kind::sub: return 1;
        case Node::Kind::mul:
        case Node::Kind::div: return 2;
        case Node::Kind::neg: return 3;
        case Node::Kind::pow: return 4;
        default: return 5;
    }
}

inline std::string number_text(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void print(const Node& n, int min_prec, std::string& out) {
    const int p = precedence(n);
    const bool paren = p < min_prec;
    if (paren) out += '(';
    switch (n.kind) {
        case Node::Kind::num: out += number_text(n.value); break;
        case Node::Kind::var: out += var_names[static_cast<int>(n.var)]; break;
        case Node::Kind::neg:
            out += '-';
            print(*n.a, 3, out);
            break;
        case Node::Kind::add:
        case Node::Kind::sub:
            print(*n.a, 1, out);
            out += n.kind == Node::Kind::add ? " + " : " - ";
            print(*n.b, 2, out);
            break;
        case Node::Kind::mul:
        case Node::Kind::div:
            print(*n.a, 2, out);
            out += n.kind == Node::Kind::mul ? "*" : "/";
            print(*n.b, 3, out);
            break;
        case Node::Kind::pow:
            print(*n.a, 5, out);
            out += '^';
            print(*n.b, 3, out);
            break;
        case Node::Kind::call:
            out += fn_names[static_cast<int>(n.fn)];
            out += '(';
            print(*n.a, 1, out);
            if (n.b) {
                out += ", ";
                print(*n.b, 1, out);
            }
            out += ')';
            break;
    }
    if (paren) out += ')';
}

inline double checked(double r, const char* what) {
    if (!std::isfinite(r)) throw NonfiniteResult(std::string("non-finite result in ") + what);
    return r;
}

inline double eval(const Node& n, const Bindings& b) {
    switch (n.kind) {
        case Node::Kind::num: return n.value;
        case Node::Kind::var: {
            const int i = static_cast<int>(n.var);
            if (!(b.mask & (1u << i))) throw UnboundVariable(std::string("variable '") + var_names[i] + "' is not bound");
            return b.v[i];
        }
        case Node::Kind::neg: return -eval(*n.a, b);
        case Node::Kind::add: return checked(eval(*n.a, b) + eval(*n.b, b), "'+'");
        case Node::Kind::sub: return checked(eval(*n.a, b) - eval(*n.b, b), "'-'");
        case Node::Kind::mul: return checked(eval(*n.a, b) * eval(*n.b, b), "'*'");
        case Node::Kind::div: return checked(eval(*n.a, b) / eval(*n.b, b), "'/'");
        case Node::Kind::pow: return checked(std::pow(eval(*n.a, b), eval(*n.b, b)), "'^'");
        case Node::Kind::call: {
            const double a = eval(*n.a, b);
            switch (n.fn) {
                case Fn::sin: return std::sin(a);
                case Fn::cos: return std::cos(a);
                case Fn::exp: return checked(std::exp(a), "exp");
                case Fn::ln: return checked(std::log(a), "ln");
                case Fn::abs: return std::abs(a);
                case Fn::min: return std::min(a, eval(*n.b, b));
                case Fn::max: return std::max(a, eval(*n.b, b));
                case Fn::step: return a >= 0.0 ? 1.0 : 0.0;
                case Fn::frac: return a - std::floor(a);
            }
        }
    }
    return 0.0;
}

inline bool uses(const Node& n, Var v) {
    if (n.kind == Node::Kind::var) return n.var == v;
    return (n.a && uses(*n.a, v)) || (n.b && uses(*n.b, v));
}

}  // namespace detail

// Immutable parsed expression.
class Expr {
public:
    Expr() : root_(make_num(0.0)) {}
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    const NodePtr& root() const { return root_; }
    bool uses(Var v) const { return detail::uses(*root_, v); }
    bool operator==(const Expr& o) const { return equal(root_, o.root_); }

private:
    NodePtr root_;
};

inline Expr parse(const std::string& source) {
    detail::Parser p(detail::Lexer(source).run());
    return Expr(p.parse_all());
}

inline std::string print(const Expr& e) {
    std::string out;
    detail::print(*e.root(), 1, out);
    return out;
}

inline double evaluate(const Expr& e, const Bindings& b) { return detail::eval(*e.root(), b); }

inline double evaluate(const Expr& e, double xi, double x, double t, double chi) {
    return detail::eval(*e.root(), Bindings::of(xi, x, t, chi));
}

}  // namespace lmc::dsl
