#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nev/logvalue.hpp"
#include "nev/special.hpp"

namespace nev {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Domain { plane, disc };

enum class Kind {
    constant,
    variable,
    sum,
    product,
    quotient,
    power,        // a ^ b, principal branch; b must be constant to differentiate
    exponential,  // exp(a)
    affine,       // a evaluated at cval*z + cval2
    family,       // finite product of kids
    gamma_fn,
    digamma_fn,   // appears only through differentiation of gamma
    ml            // Mittag-Leffler E_alpha, cval.real() = alpha, ideriv = order
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    cplx cval{0.0, 0.0};
    cplx cval2{0.0, 0.0};
    int ideriv = 0;
    NodePtr a, b;
    std::vector<NodePtr> kids;
};

namespace detail {

inline NodePtr node(Kind k) { return std::make_shared<Node>(Node{k}); }

inline NodePtr constant(cplx c) {
    auto n = std::make_shared<Node>(Node{Kind::constant});
    const_cast<Node&>(*n).cval = c;
    return n;
}

inline bool is_const(const NodePtr& n, cplx c) {
    return n->kind == Kind::constant && n->cval == c;
}
inline bool is_const(const NodePtr& n) { return n->kind == Kind::constant; }

inline NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    const_cast<Node&>(*n).kind = k;
    const_cast<Node&>(*n).a = std::move(a);
    const_cast<Node&>(*n).b = std::move(b);
    return n;
}

// smart constructors: light constant folding so derivative towers stay small
inline NodePtr mk_sum(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    if (is_const(a) && is_const(b)) return constant(a->cval + b->cval);
    return binary(Kind::sum, std::move(a), std::move(b));
}

inline NodePtr mk_prod(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    if (is_const(a) && is_const(b)) return constant(a->cval * b->cval);
    return binary(Kind::product, std::move(a), std::move(b));
}

inline NodePtr mk_quot(NodePtr a, NodePtr b) {
    if (is_const(a, 0.0) && !is_const(b, 0.0)) return constant(0.0);
    if (is_const(b, 1.0)) return a;
    if (is_const(a) && is_const(b) && b->cval != cplx(0.0)) return constant(a->cval / b->cval);
    return binary(Kind::quotient, std::move(a), std::move(b));
}

inline NodePtr mk_pow(NodePtr a, NodePtr b) {
    if (is_const(b, 1.0)) return a;
    if (is_const(b, 0.0)) return constant(1.0);
    return binary(Kind::power, std::move(a), std::move(b));
}

inline NodePtr mk_exp(NodePtr a) {
    if (is_const(a, 0.0)) return constant(1.0);
    return binary(Kind::exponential, std::move(a), nullptr);
}

inline NodePtr mk_neg(NodePtr a) { return mk_prod(constant(-1.0), std::move(a)); }

inline LogValue eval_log(const NodePtr& n, cplx z);

inline cplx eval_value(const NodePtr& n, cplx z) {
    LogValue lv = eval_log(n, z);
    if (lv.is_inf()) throw error("evaluation overflowed double range where a plain value was required");
    return lv.value();
}

inline LogValue eval_log(const NodePtr& n, cplx z) {
    switch (n->kind) {
        case Kind::constant:
            return LogValue::from(n->cval);
        case Kind::variable:
            return LogValue::from(z);
        case Kind::sum:
            return eval_log(n->a, z) + eval_log(n->b, z);
        case Kind::product:
            return eval_log(n->a, z) * eval_log(n->b, z);
        case Kind::quotient:
            return eval_log(n->a, z) / eval_log(n->b, z);
        case Kind::power: {
            LogValue base = eval_log(n->a, z);
            cplx e = eval_value(n->b, z);
            return pow(base, e);
        }
        case Kind::exponential: {
            LogValue w = eval_log(n->a, z);
            if (w.is_zero()) return LogValue::from(1.0);
            if (w.logmag > 705.0) return LogValue::infinite();  // exp arg beyond double
            cplx v = w.value();
            return {v.real(), v.imag()};
        }
        case Kind::affine:
            return eval_log(n->a, n->cval * z + n->cval2);
        case Kind::family: {
            LogValue acc = LogValue::from(1.0);
            for (const auto& k : n->kids) {
                LogValue f = eval_log(k, z);
                if (f.is_zero()) return LogValue::zero();
                acc = acc * f;
            }
            return acc;
        }
        case Kind::gamma_fn:
            return gamma_log(eval_value(n->a, z));
        case Kind::digamma_fn:
            return LogValue::from(digamma(eval_value(n->a, z)));
        case Kind::ml:
            try {
                return LogValue::from(mittag_leffler(n->cval.real(), eval_value(n->a, z), n->ideriv));
            } catch (const std::overflow_error&) {
                return LogValue::infinite();
            }
    }
    return LogValue::zero();
}

inline NodePtr diff(const NodePtr& n);

inline NodePtr diff(const NodePtr& n) {
    switch (n->kind) {
        case Kind::constant:
            return constant(0.0);
        case Kind::variable:
            return constant(1.0);
        case Kind::sum:
            return mk_sum(diff(n->a), diff(n->b));
        case Kind::product:
            return mk_sum(mk_prod(diff(n->a), n->b), mk_prod(n->a, diff(n->b)));
        case Kind::quotient:
            return mk_quot(mk_sum(mk_prod(diff(n->a), n->b), mk_neg(mk_prod(n->a, diff(n->b)))),
                           mk_prod(n->b, n->b));
        case Kind::power: {
            if (is_const(n->b)) {
                // w * a^(w-1) * a'
                cplx w = n->b->cval;
                return mk_prod(constant(w), mk_prod(mk_pow(n->a, constant(w - 1.0)), diff(n->a)));
            }
            if (is_const(n->a)) {
                // c^g * log c * g'
                cplx c = n->a->cval;
                if (c == cplx(0.0)) return constant(0.0);
                return mk_prod(binary(Kind::power, n->a, n->b),
                               mk_prod(constant(std::log(c)), diff(n->b)));
            }
            throw error("differentiate: general f^g with both parts non-constant is unsupported");
        }
        case Kind::exponential:
            return mk_prod(diff(n->a), binary(Kind::exponential, n->a, nullptr));
        case Kind::affine: {
            auto inner = std::make_shared<Node>(*n);
            const_cast<Node&>(*inner).a = diff(n->a);
            return mk_prod(constant(n->cval), inner);
        }
        case Kind::family: {
            // F * sum_j F_j'/F_j (valid away from the zeros; families are
            // zero-carrying by purpose, evaluation at a zero yields the sentinel)
            NodePtr logsum = constant(0.0);
            for (const auto& k : n->kids) logsum = mk_sum(logsum, mk_quot(diff(k), k));
            return mk_prod(std::make_shared<Node>(*n), logsum);
        }
        case Kind::gamma_fn: {
            auto psi = std::make_shared<Node>(Node{Kind::digamma_fn});
            const_cast<Node&>(*psi).a = n->a;
            return mk_prod(mk_prod(std::make_shared<Node>(*n), psi), diff(n->a));
        }
        case Kind::digamma_fn:
            throw error("differentiate: digamma derivative not supported");
        case Kind::ml: {
            auto d = std::make_shared<Node>(*n);
            const_cast<Node&>(*d).ideriv = n->ideriv + 1;
            if (n->ideriv >= 1) throw error("differentiate: second ml derivative not supported");
            return mk_prod(d, diff(n->a));
        }
    }
    return constant(0.0);
}

inline bool equal(const NodePtr& x, const NodePtr& y) {
    if (x == y) return true;
    if (!x || !y) return false;
    if (x->kind != y->kind || x->cval != y->cval || x->cval2 != y->cval2 || x->ideriv != y->ideriv)
        return false;
    if (x->kids.size() != y->kids.size()) return false;
    for (size_t i = 0; i < x->kids.size(); ++i)
        if (!equal(x->kids[i], y->kids[i])) return false;
    if ((x->a == nullptr) != (y->a == nullptr) || (x->b == nullptr) != (y->b == nullptr)) return false;
    if (x->a && !equal(x->a, y->a)) return false;
    if (x->b && !equal(x->b, y->b)) return false;
    return true;
}

std::string render(const NodePtr& n, int parent_prec);

inline std::string fmt_num(double v) {
    char buf[40];
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15)
        snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
    else
        snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string render_const(cplx c) {
    if (c.imag() == 0.0) {
        if (c.real() < 0.0) return "(" + fmt_num(c.real()) + ")";
        return fmt_num(c.real());
    }
    if (c.real() == 0.0 && c.imag() == 1.0) return "i";
    return "(" + fmt_num(c.real()) + "+" + fmt_num(c.imag()) + "*i)";
}

// precedence: sum 1, product/quotient 2, power 3, atoms 4
inline std::string render(const NodePtr& n, int parent_prec = 0) {
    auto wrap = [&](int prec, std::string s) {
        return (prec < parent_prec) ? "(" + s + ")" : s;
    };
    switch (n->kind) {
        case Kind::constant:
            return render_const(n->cval);
        case Kind::variable:
            return "z";
        case Kind::sum:
            return wrap(1, render(n->a, 1) + "+" + render(n->b, 2));
        case Kind::product:
            return wrap(2, render(n->a, 2) + "*" + render(n->b, 3));
        case Kind::quotient:
            return wrap(2, render(n->a, 2) + "/" + render(n->b, 3));
        case Kind::power:
            return wrap(3, render(n->a, 4) + "^" + render(n->b, 4));
        case Kind::exponential:
            return "exp(" + render(n->a, 0) + ")";
        case Kind::affine: {
            // no surface syntax for substitution; render the composed argument inline
            std::string arg = render_const(n->cval) + "*z+" + render_const(n->cval2);
            return "subst(" + render(n->a, 0) + "; " + arg + ")";
        }
        case Kind::family: {
            if (n->kids.empty()) return "1";
            std::string s = render(n->kids[0], 3);
            for (size_t i = 1; i < n->kids.size(); ++i) s += "*" + render(n->kids[i], 3);
            return wrap(2, s);
        }
        case Kind::gamma_fn:
            return "gamma(" + render(n->a, 0) + ")";
        case Kind::digamma_fn:
            return "digamma(" + render(n->a, 0) + ")";
        case Kind::ml:
            return "ml(" + fmt_num(n->cval.real()) + "; " + render(n->a, 0) + ")";
    }
    return "?";
}

}  // namespace detail

// Immutable analytic-function expression on the plane or the unit disc.
// Derived expressions share subtrees structurally; all operations are pure.
class Expr {
  public:
    Expr() : root_(detail::constant(0.0)), dom_(Domain::plane) {}
    Expr(NodePtr root, Domain dom) : root_(std::move(root)), dom_(dom) {}

    static Expr constant(cplx c, Domain d = Domain::plane) { return {detail::constant(c), d}; }
    static Expr var(Domain d = Domain::plane) { return {detail::node(Kind::variable), d}; }

    const NodePtr& root() const { return root_; }
    Domain domain() const { return dom_; }

    LogValue eval_log(cplx z) const {
        check_point(z);
        return detail::eval_log(root_, z);
    }

    cplx eval(cplx z) const {
        check_point(z);
        return detail::eval_log(root_, z).value();
    }

    Expr derivative() const { return {detail::diff(root_), dom_}; }

    std::string render() const { return detail::render(root_, 0); }

    Expr retag(Domain d) const { return {root_, d}; }

  private:
    void check_point(cplx z) const {
        if (dom_ == Domain::disc && std::abs(z) >= 1.0)
            throw error("disc-tagged expression evaluated at |z| >= 1");
    }

    NodePtr root_;
    Domain dom_;
};

inline Domain merge_domain(const Expr& a, const Expr& b) {
    if (a.domain() == b.domain()) return a.domain();
    // pure-constant trees are domain-neutral
    if (a.root()->kind == Kind::constant) return b.domain();
    if (b.root()->kind == Kind::constant) return a.domain();
    throw error("disc/plane domain mismatch inside one expression");
}

inline Expr operator+(const Expr& a, const Expr& b) {
    return {detail::mk_sum(a.root(), b.root()), merge_domain(a, b)};
}
inline Expr operator-(const Expr& a, const Expr& b) {
    return {detail::mk_sum(a.root(), detail::mk_neg(b.root())), merge_domain(a, b)};
}
inline Expr operator-(const Expr& a) { return {detail::mk_neg(a.root()), a.domain()}; }
inline Expr operator*(const Expr& a, const Expr& b) {
    return {detail::mk_prod(a.root(), b.root()), merge_domain(a, b)};
}
inline Expr operator/(const Expr& a, const Expr& b) {
    return {detail::mk_quot(a.root(), b.root()), merge_domain(a, b)};
}
inline Expr operator*(cplx c, const Expr& a) { return Expr::constant(c, a.domain()) * a; }
inline Expr operator+(const Expr& a, cplx c) { return a + Expr::constant(c, a.domain()); }
inline Expr operator-(const Expr& a, cplx c) { return a - Expr::constant(c, a.domain()); }

inline Expr exp(const Expr& a) { return {detail::mk_exp(a.root()), a.domain()}; }
inline Expr pow(const Expr& a, cplx w) {
    return {detail::mk_pow(a.root(), detail::constant(w)), a.domain()};
}
inline Expr gamma(const Expr& a) {
    auto n = std::make_shared<Node>(Node{Kind::gamma_fn});
    const_cast<Node&>(*n).a = a.root();
    return {n, a.domain()};
}
inline Expr mittag_leffler_fn(double alpha, const Expr& a) {
    auto n = std::make_shared<Node>(Node{Kind::ml});
    const_cast<Node&>(*n).cval = cplx(alpha, 0.0);
    const_cast<Node&>(*n).a = a.root();
    return {n, a.domain()};
}
inline Expr product_family(const std::vector<Expr>& factors, Domain d = Domain::plane) {
    auto n = std::make_shared<Node>(Node{Kind::family});
    for (const auto& f : factors) const_cast<Node&>(*n).kids.push_back(f.root());
    return {n, d};
}

// f(z) -> f(z + c); leaves the disc, so plane trees only
inline Expr shift(const Expr& f, cplx c) {
    if (f.domain() == Domain::disc) throw error("shift: disc-tagged input rejected");
    if (c == cplx(0.0)) return f;
    auto n = std::make_shared<Node>(Node{Kind::affine});
    const_cast<Node&>(*n).cval = cplx(1.0, 0.0);
    const_cast<Node&>(*n).cval2 = c;
    const_cast<Node&>(*n).a = f.root();
    return {n, f.domain()};
}

// f(z) -> f(q z); plane trees only
inline Expr qscale(const Expr& f, cplx q) {
    if (f.domain() == Domain::disc) throw error("qscale: disc-tagged input rejected");
    if (q == cplx(1.0)) return f;
    auto n = std::make_shared<Node>(Node{Kind::affine});
    const_cast<Node&>(*n).cval = q;
    const_cast<Node&>(*n).a = f.root();
    return {n, f.domain()};
}

inline Expr delta(const Expr& f) { return shift(f, 1.0) - f; }
inline Expr delta_q(const Expr& f, cplx q) { return qscale(f, q) - f; }

inline Expr delta_n(Expr f, int n) {
    for (int i = 0; i < n; ++i) f = delta(f);
    return f;
}
inline Expr delta_q_n(Expr f, cplx q, int n) {
    for (int i = 0; i < n; ++i) f = delta_q(f, q);
    return f;
}

inline Expr derivative_n(Expr f, int n) {
    for (int i = 0; i < n; ++i) f = f.derivative();
    return f;
}

inline bool structurally_equal(const Expr& a, const Expr& b) {
    return a.domain() == b.domain() && detail::equal(a.root(), b.root());
}

}  // namespace nev
