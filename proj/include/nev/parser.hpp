#pragma once

#include <cctype>
#include <cstdlib>
#include <map>
#include <string>

#include "nev/expr.hpp"

namespace nev {

struct parse_error : error {
    parse_error(const std::string& msg, size_t offset)
        : error(msg + " at offset " + std::to_string(offset)), offset(offset) {}
    size_t offset;
};

namespace detail {

// Recursive-descent parser for the expression grammar:
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | power
//   power   := atom ('^' factor)?          ('^' binds tighter than unary '-')
//   atom    := number | 'i' | 'z' | name '(' ... ')' | '(' expr ')'
// Builtins: exp(e), gamma(e), digamma(e), ml(alpha; e),
//           prod(k=a..b; factor-of-k)  -- expanded to a product chain,
//           subst(e; a*z+b)            -- evaluate e at the affine argument.
class Parser {
  public:
    Parser(const std::string& text) : s_(text) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return e;
    }

  private:
    [[noreturn]] void fail(const std::string& msg) const { throw parse_error("syntax error: " + msg, pos_); }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expr() {
        NodePtr e = term();
        for (;;) {
            if (eat('+'))
                e = mk_sum(e, term());
            else if (eat('-'))
                e = mk_sum(e, mk_neg(term()));
            else
                return e;
        }
    }

    NodePtr term() {
        NodePtr e = factor();
        for (;;) {
            if (eat('*'))
                e = mk_prod(e, factor());
            else if (eat('/'))
                e = mk_quot(e, factor());
            else
                return e;
        }
    }

    NodePtr factor() {
        if (eat('-')) return mk_neg(factor());
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (eat('^')) return mk_pow(base, factor());
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
        fail("expected a number, name, or '('");
    }

    NodePtr number() {
        const char* begin = s_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("malformed number");
        pos_ += static_cast<size_t>(end - begin);
        return constant(cplx(v, 0.0));
    }

    std::string ident() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
            ++pos_;
        return s_.substr(start, pos_ - start);
    }

    NodePtr name() {
        size_t at = pos_;
        std::string id = ident();
        if (id == "z") return node(Kind::variable);
        if (id == "i") return constant(cplx(0.0, 1.0));
        if (auto it = bound_.find(id); it != bound_.end()) return constant(it->second);
        if (id == "exp") {
            expect('(');
            NodePtr e = expr();
            expect(')');
            return mk_exp(e);
        }
        if (id == "gamma" || id == "digamma") {
            expect('(');
            NodePtr arg = expr();
            expect(')');
            auto n = std::make_shared<Node>();
            const_cast<Node&>(*n).kind = (id == "gamma") ? Kind::gamma_fn : Kind::digamma_fn;
            const_cast<Node&>(*n).a = arg;
            return n;
        }
        if (id == "ml") return ml_call();
        if (id == "prod") return prod_call();
        if (id == "subst") return subst_call();
        pos_ = at;
        fail("unknown name '" + id + "'");
    }

    NodePtr ml_call() {
        expect('(');
        size_t at = pos_;
        NodePtr alpha_node = expr();
        expect(';');
        if (alpha_node->kind != Kind::constant || alpha_node->cval.imag() != 0.0 ||
            alpha_node->cval.real() <= 0.0) {
            pos_ = at;
            fail("ml alpha must be a positive real constant");
        }
        NodePtr arg = expr();
        expect(')');
        auto n = std::make_shared<Node>();
        const_cast<Node&>(*n).kind = Kind::ml;
        const_cast<Node&>(*n).cval = alpha_node->cval;
        const_cast<Node&>(*n).a = arg;
        return n;
    }

    long int_bound() {
        skip_ws();
        size_t at = pos_;
        bool neg = eat('-');
        skip_ws();
        size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == start) {
            pos_ = at;
            fail("expected an integer bound");
        }
        long v = std::strtol(s_.c_str() + start, nullptr, 10);
        return neg ? -v : v;
    }

    // prod(k=a..b; factor(k)): the factor text is re-parsed once per k with k
    // bound to its integer value, and the results chained into a product, so
    // the result round-trips through render/parse.
    NodePtr prod_call() {
        expect('(');
        std::string var = ident();
        if (var.empty() || var == "z") fail("prod index must be a name other than z");
        expect('=');
        long lo = int_bound();
        expect('.');
        expect('.');
        long hi = int_bound();
        expect(';');
        size_t body_start = pos_;
        // locate the matching ')': scan with paren depth
        int depth = 1;
        size_t p = pos_;
        while (p < s_.size() && depth > 0) {
            if (s_[p] == '(') ++depth;
            if (s_[p] == ')') --depth;
            ++p;
        }
        if (depth != 0) fail("unbalanced parentheses in prod body");
        size_t body_end = p - 1;
        std::string body = s_.substr(body_start, body_end - body_start);
        if (hi < lo) fail("empty prod range");
        if (hi - lo > 4095) fail("prod range too large");
        NodePtr acc;
        for (long k = lo; k <= hi; ++k) {
            Parser sub(body);
            sub.bound_ = bound_;
            sub.bound_[var] = cplx(static_cast<double>(k), 0.0);
            NodePtr f = sub.expr();
            sub.skip_ws();
            if (sub.pos_ != body.size())
                throw parse_error("syntax error: unexpected trailing input in prod body",
                                  body_start + sub.pos_);
            acc = acc ? mk_prod(acc, f) : f;
        }
        pos_ = body_end;
        expect(')');
        return acc;
    }

    NodePtr subst_call() {
        expect('(');
        NodePtr inner = expr();
        expect(';');
        size_t at = pos_;
        NodePtr arg = expr();
        expect(')');
        // the argument must be affine in z: probe at 0, 1, 2
        cplx g0 = eval_value(arg, 0.0), g1 = eval_value(arg, 1.0), g2 = eval_value(arg, 2.0);
        if (std::abs(g2 - 2.0 * g1 + g0) > 1e-9 * (1.0 + std::abs(g1))) {
            pos_ = at;
            fail("subst argument must be affine in z");
        }
        auto n = std::make_shared<Node>(Node{Kind::affine});
        const_cast<Node&>(*n).cval = g1 - g0;
        const_cast<Node&>(*n).cval2 = g0;
        const_cast<Node&>(*n).a = inner;
        return n;
    }

    std::string s_;
    size_t pos_ = 0;
    std::map<std::string, cplx> bound_;
};

}  // namespace detail

inline Expr parse(const std::string& text, Domain d = Domain::plane) {
    return {detail::Parser(text).parse(), d};
}

}  // namespace nev
