#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "nev/scenario.hpp"

namespace nev {

// Zero list z_{2k-1} = 2^k, z_{2k} = 2^k + eps_k with eps_k = exp(-exp(2^k))/2.
// eps_1 = 3.0898949466...e-4; eps_k for k >= 2 is below one ulp of 2^k, so the
// paired zeros coincide in double precision. Truncated at k = 57: omitted
// factors differ from 1 by less than 1e-15 at the largest sampling radius 128.
inline std::string canonical_product_text() {
    return "(1 - z/2)*(1 - z/2.0003089894946657)*prod(k=2..57; (1 - z/2^k)^2)";
}

struct CatalogueEntry {
    std::string name;
    std::string description;
    std::string text;
};

namespace detail {

inline std::string canonical_product_scenario_text() {
    std::ostringstream os;
    os << "name = canonical-product\n"
          "domain = plane\n"
          "[growth]\n"
          "target = " << canonical_product_text() << "\n"
          "grid = 8:64\n"
          "tol = 1e-4\n"
          "bound_T_logsq = 10\n"
          "[zeros]\n"
          "target = " << canonical_product_text() << "\n"
          "a = 0\n"
          "grid = 8:64\n"
          "window_lo = 1.5\n"
          "window_hi = 2.5\n"
          "[qsmallness]\n"
          "target = " << canonical_product_text() << "\n"
          "q = 2\n"
          "grid = 8:128\n"
          "tol = 1e-3\n"
          "bound = 0.2\n";
    return os.str();
}

}  // namespace detail

inline const std::vector<CatalogueEntry>& catalogue() {
    static const std::vector<CatalogueEntry> entries = {
        {"frei-ex12",
         "order-2 plane equation with exp(2z) dominant coefficient: residuals, reduction "
         "identity, dominance index, growth conclusion",
         R"(name = frei-ex12
domain = plane
kind = derivative
coeff.0 = exp(2*z)
coeff.1 = -(2*exp(z) + 1)
solution.0 = exp(exp(z))
solution.1 = exp(z + exp(z))
[residual]
[reduce]
p = 0
[reduce]
p = 1
[dominance]
condition = characteristic
grid = 5:30
expect_p = 0
window_lo = 0.45
window_hi = 0.55
[conclusion]
kind = char_lower
target = solution.0
p = 0
grid = 1.5:5
[solve]
ic = 2.718281828459045,2.718281828459045
grid = 0.5:3
)"},
        {"disc-beta2",
         "unit-disc order-2 equation with boundary-singular coefficients (beta = 2): "
         "residuals, admissibility, dominance index, growth conclusion",
         R"(name = disc-beta2
domain = disc
kind = derivative
coeff.0 = 4*exp(2*(1-z)^(-2))/(1-z)^6
coeff.1 = -4*exp((1-z)^(-2))/(1-z)^3 - 2/(1-z)^3 - 3/(1-z)
solution.0 = exp(exp((1-z)^(-2)))
solution.1 = exp((1-z)^(-2))*exp(exp((1-z)^(-2)))
[residual]
[admissibility]
target = coeff.0
grid = 16:34
expect = 1
[admissibility]
target = coeff.1
grid = 16:34
expect = 1
[dominance]
condition = characteristic
grid = 14:34
expect_p = 0
window_lo = 0.45
window_hi = 0.55
[conclusion]
kind = char_lower
target = solution.0
p = 0
grid = 8:16
tol = 1e-3
)"},
        {"canonical-product",
         "zero-order canonical product with zeros near powers of 2: zero counts, growth "
         "bound, q-difference quotient smallness",
         detail::canonical_product_scenario_text()},
        {"curve-ez-gauss",
         "order-2 plane equation, middle coefficient exp(-z^2): maximum-curve dominance "
         "along the ray of exp(z)",
         R"(name = curve-ez-gauss
domain = plane
kind = derivative
coeff.0 = exp(z)
coeff.1 = exp(-z^2)
[curve]
p = 0
grid = 2:30
)"},
        {"curve-ez-eminus",
         "order-2 plane equation, middle coefficient exp(-z): maximum-curve dominance",
         R"(name = curve-ez-eminus
domain = plane
kind = derivative
coeff.0 = exp(z)
coeff.1 = exp(-z)
[curve]
p = 0
grid = 2:30
)"},
        {"disc-curve-2beta",
         "unit-disc curve condition with A_1 = exp(-(1-z)^(-4)) decaying along the "
         "maximum curve of A_0 = exp((1-z)^(-2))",
         R"(name = disc-curve-2beta
domain = disc
kind = derivative
coeff.0 = exp((1-z)^(-2))
coeff.1 = exp(-(1-z)^(-4))
[curve]
p = 0
grid = 8:24
[admissibility]
target = coeff.0
grid = 16:34
expect = 1
)"},
        {"gamma-recurrence",
         "first-order difference equation of the gamma function: lattice iteration and "
         "recurrence residual",
         R"(name = gamma-recurrence
domain = plane
kind = difference
coeff.0 = 1 - z
[lattice]
z0 = 1
steps = 25
init = 1
)"},
        {"diff-exp-base",
         "order-2 difference equation with base {2^z, 3^z}: reduction identity and "
         "candidate residuals",
         R"(name = diff-exp-base
domain = plane
kind = difference
coeff.0 = 2
coeff.1 = -3
solution.0 = exp(0.6931471805599453*z)
solution.1 = exp(1.0986122886681098*z)
[residual]
[reduce]
p = 0
[reduce]
p = 1
[lattice]
z0 = 0.25
steps = 20
init = 1,2
)"},
        {"qdiff-poly",
         "order-2 q-difference equation (q = 2) with polynomial base {z, z^2}: reduction "
         "identity and candidate residuals",
         R"(name = qdiff-poly
domain = plane
kind = qdifference
q = 2
coeff.0 = 3
coeff.1 = -4
solution.0 = z
solution.1 = z^2
[residual]
[reduce]
p = 0
[reduce]
p = 1
)"},
        {"mittag-leffler",
         "growth series and hyper-order probe of the order-2 Mittag-Leffler function "
         "E_{1/1.25} (order 1.25)",
         R"(name = mittag-leffler
domain = plane
[growth]
target = ml(0.8; z)
grid = 1:12
)"},
        {"exp-deficiency",
         "deficiency of exp(z) at a = 0 (deficient) and a = 1 (non-deficient)",
         R"(name = exp-deficiency
domain = plane
[deficiency]
target = exp(z)
a = 0
expect_min = 0.95
grid = 10:60
[deficiency]
target = exp(z)
a = 1
expect_max = 0.05
grid = 10:60
)"},
    };
    return entries;
}

inline const CatalogueEntry* find_catalogue_entry(const std::string& name) {
    for (const auto& e : catalogue())
        if (e.name == name) return &e;
    return nullptr;
}

}  // namespace nev
