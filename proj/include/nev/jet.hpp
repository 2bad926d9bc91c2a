#pragma once

#include <stdexcept>
#include <vector>

#include "nev/expr.hpp"

namespace nev {

// Truncated Taylor expansion around a fixed point: coefficients c[k] of
// (z - z0)^k, up to a shared order M. Used to carry numerically generated
// solutions (value + derivatives) through quotient/derivative towers.
struct Jet {
    std::vector<cplx> c;

    explicit Jet(size_t order = 0) : c(order + 1, cplx(0.0)) {}
    static Jet constant(cplx v, size_t order) {
        Jet j(order);
        j.c[0] = v;
        return j;
    }
    size_t order() const { return c.size() - 1; }
    cplx value() const { return c[0]; }

    // k-th derivative value at the expansion point
    cplx deriv(size_t k) const {
        if (k >= c.size()) throw error("jet: derivative order exceeds jet order");
        double fact = 1.0;
        for (size_t i = 2; i <= k; ++i) fact *= static_cast<double>(i);
        return c[k] * fact;
    }
};

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r(std::min(a.order(), b.order()));
    for (size_t k = 0; k < r.c.size(); ++k) r.c[k] = a.c[k] + b.c[k];
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
    Jet r(std::min(a.order(), b.order()));
    for (size_t k = 0; k < r.c.size(); ++k) r.c[k] = a.c[k] - b.c[k];
    return r;
}

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r(std::min(a.order(), b.order()));
    for (size_t k = 0; k < r.c.size(); ++k) {
        cplx s = 0.0;
        for (size_t j = 0; j <= k; ++j) s += a.c[j] * b.c[k - j];
        r.c[k] = s;
    }
    return r;
}

inline Jet operator*(cplx s, const Jet& a) {
    Jet r = a;
    for (auto& v : r.c) v *= s;
    return r;
}

inline Jet operator/(const Jet& a, const Jet& b) {
    if (b.c[0] == cplx(0.0)) throw error("jet: division by a jet with zero value");
    Jet r(std::min(a.order(), b.order()));
    for (size_t k = 0; k < r.c.size(); ++k) {
        cplx s = a.c[k];
        for (size_t j = 0; j < k; ++j) s -= r.c[j] * b.c[k - j];
        r.c[k] = s / b.c[0];
    }
    return r;
}

// d/dz: one order is consumed
inline Jet derivative(const Jet& a) {
    if (a.order() == 0) throw error("jet: derivative exhausts jet order");
    Jet r(a.order() - 1);
    for (size_t k = 0; k < r.c.size(); ++k) r.c[k] = static_cast<double>(k + 1) * a.c[k + 1];
    return r;
}

// Jet of an expression at z0 (symbolic derivatives evaluated pointwise).
inline Jet expr_jet(const Expr& f, cplx z0, size_t order) {
    Jet j(order);
    Expr d = f;
    double fact = 1.0;
    for (size_t k = 0; k <= order; ++k) {
        if (k > 0) {
            d = d.derivative();
            fact *= static_cast<double>(k);
        }
        j.c[k] = d.eval(z0) / fact;
    }
    return j;
}

// Jet of a solution of f^(n) + A_{n-1} f^(n-1) + ... + A_0 f = 0 at z0, given
// the state (f, f', ..., f^(n-1)) there; higher derivatives follow from the
// equation by repeated differentiation (Leibniz on the coefficient jets).
inline Jet ode_solution_jet(const std::vector<Expr>& A, cplx z0, const std::vector<cplx>& state,
                            size_t order) {
    size_t n = A.size();
    if (state.size() != n) throw error("ode_solution_jet: state size must equal the order");
    std::vector<Jet> Aj;
    for (const auto& a : A) Aj.push_back(expr_jet(a, z0, order));
    // F[m] = f^(m)(z0)
    std::vector<cplx> F(order + 1, cplx(0.0));
    std::vector<double> fact(order + 1, 1.0);
    for (size_t k = 1; k <= order; ++k) fact[k] = fact[k - 1] * static_cast<double>(k);
    for (size_t m = 0; m < n && m <= order; ++m) F[m] = state[m];
    for (size_t t = 0; n + t <= order; ++t) {
        // f^(n+t) = -(d/dz)^t sum_j A_j f^(j)
        cplx s = 0.0;
        for (size_t j = 0; j < n; ++j) {
            for (size_t d = 0; d <= t; ++d) {
                double binom = fact[t] / (fact[d] * fact[t - d]);
                s += binom * (Aj[j].c[d] * fact[d]) * F[j + t - d];
            }
        }
        F[n + t] = -s;
    }
    Jet out(order);
    for (size_t k = 0; k <= order; ++k) out.c[k] = F[k] / fact[k];
    return out;
}

}  // namespace nev
