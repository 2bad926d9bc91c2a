// Expression trees: parsing, differentiation, shift/q-scale operators, and
// log-scale evaluation.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "nev/catalogue.hpp"
#include "nev/parser.hpp"

using namespace nev;

namespace {

std::vector<cplx> sample_points(double radius, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<cplx> pts;
    while (static_cast<int>(pts.size()) < count) {
        cplx z(u(rng), u(rng));
        if (std::abs(z) <= radius) pts.push_back(z);
    }
    return pts;
}

double rel_err(cplx got, cplx want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

}  // namespace

TEST_CASE("parse round-trips through render", "[funcexpr][parser]") {
    for (const char* text : {
             "exp(exp(z))",
             "z^3 + 2*z - 1",
             "exp(2*z)/(1 - z)^2",
             "-(2*exp(z) + 1)",
             "gamma(z + 1)",
             "ml(0.8; z^2)",
             "prod(k=1..4; (1 - z/2^k))",
             "(1 + i*z)*exp(-z)",
         }) {
        Expr e = parse(text);
        Expr again = parse(e.render());
        CAPTURE(text);
        CHECK(structurally_equal(e, again));
    }
}

TEST_CASE("parse accepts the boundary-singular disc tree", "[funcexpr][parser]") {
    Expr h = parse("exp((1-z)^(-2))", Domain::disc);
    CHECK(h.domain() == Domain::disc);
    // value at z = 0.5: exp((0.5)^-2) = exp(4)
    CHECK(rel_err(h.eval(cplx(0.5, 0.0)), std::exp(4.0)) < 1e-12);
    CHECK_THROWS_AS(h.eval(cplx(1.5, 0.0)), error);  // outside the disc
}

TEST_CASE("parse reports syntax errors with the offset", "[funcexpr][parser]") {
    try {
        parse("z^(0.5");
        FAIL("expected a parse error");
    } catch (const parse_error& ex) {
        CHECK(ex.offset == 6);
    }
    CHECK_THROWS_AS(parse("frobnicate(z)"), parse_error);
    CHECK_THROWS_AS(parse("1 + "), parse_error);
    CHECK_THROWS_AS(parse("ml(z; z)"), parse_error);       // alpha must be a constant
    CHECK_THROWS_AS(parse("prod(k=3..1; z)"), parse_error);  // empty range
}

TEST_CASE("mixing plane and disc subtrees is rejected", "[funcexpr]") {
    Expr plane = parse("exp(z)", Domain::plane);
    Expr disc = parse("(1-z)^(-1)", Domain::disc);
    CHECK_THROWS_AS(plane + disc, error);
    // constants are domain-neutral
    CHECK_NOTHROW(disc + Expr::constant(2.0));
}

TEST_CASE("derivative of simple trees", "[funcexpr][derivative]") {
    Expr ez = parse("exp(z)");
    Expr dez = ez.derivative();
    for (cplx z : sample_points(2.0, 20, 11))
        CHECK(rel_err(dez.eval(z), std::exp(z)) < 1e-12);

    // chain rule: d/dz exp(exp(z)) at 0 equals e
    Expr eez = parse("exp(exp(z))");
    CHECK(rel_err(eez.derivative().eval(cplx(0.0, 0.0)), std::exp(1.0)) < 1e-12);
}

TEST_CASE("derivative matches central differences", "[funcexpr][derivative]") {
    // d/dz (1-z)^(-2) at z = 0.3, compared against (f(z+h)-f(z-h))/2h
    Expr f = parse("(1-z)^(-2)", Domain::disc);
    double h = 1e-6;
    cplx z(0.3, 0.0);
    cplx fd = (f.eval(z + h) - f.eval(z - h)) / (2.0 * h);
    cplx got = f.derivative().eval(z);
    CHECK(std::abs(got - fd) / std::abs(fd) < 1e-6);
    // closed form: 2 (1-z)^(-3)
    CHECK(rel_err(got, 2.0 / std::pow(1.0 - 0.3, 3.0)) < 1e-10);
}

TEST_CASE("derivative is linear at 100 random points", "[funcexpr][derivative]") {
    Expr f = parse("exp(z)*z + 1/(z + 3)");
    Expr g = parse("exp(exp(z)) - z^2");
    Expr lhs = (f + g).derivative();
    Expr rhs = f.derivative() + g.derivative();
    for (cplx z : sample_points(2.0, 100, 23)) {
        cplx a = lhs.eval(z), b = rhs.eval(z);
        CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)));
    }
}

TEST_CASE("shift and qscale evaluate by argument substitution", "[funcexpr][shift]") {
    Expr f = parse("exp(z) + z^2");
    cplx c(0.7, -0.4), q(2.0, 0.5);
    for (cplx z : sample_points(2.0, 25, 31)) {
        CHECK(rel_err(shift(f, c).eval(z), f.eval(z + c)) < 1e-12);
        CHECK(rel_err(qscale(f, q).eval(z), f.eval(q * z)) < 1e-12);
    }
    CHECK_THROWS_AS(shift(parse("z", Domain::disc), cplx(1.0, 0.0)), error);
    CHECK_THROWS_AS(qscale(parse("z", Domain::disc), cplx(2.0, 0.0)), error);
}

TEST_CASE("difference operators on the identity function", "[funcexpr][shift]") {
    Expr idz = Expr::var();
    Expr d1 = delta(idz);        // (z+1) - z = 1
    Expr d2 = delta_n(idz, 2);   // second difference of a linear function = 0
    Expr dq = delta_q(idz, cplx(2.0, 0.0));  // (q-1) z
    for (cplx z : sample_points(3.0, 15, 37)) {
        CHECK(rel_err(d1.eval(z), cplx(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(d2.eval(z)) < 1e-12);
        CHECK(rel_err(dq.eval(z), z) < 1e-12);
    }
    CHECK(rel_err(dq.eval(cplx(3.0, 0.0)), cplx(3.0, 0.0)) < 1e-12);
}

TEST_CASE("shift and qscale compose as a homomorphism", "[funcexpr][shift]") {
    Expr f = parse("exp(z)*(z + 1)");
    cplx a(0.3, 0.2), b(-1.1, 0.5), p(1.5, 0.0), q(0.8, 0.1);
    Expr s2 = shift(shift(f, a), b), s1 = shift(f, a + b);
    Expr q2 = qscale(qscale(f, p), q), q1 = qscale(f, p * q);
    for (cplx z : sample_points(2.0, 25, 41)) {
        CHECK(rel_err(s2.eval(z), s1.eval(z)) < 1e-12);
        CHECK(rel_err(q2.eval(z), q1.eval(z)) < 1e-12);
    }
}

TEST_CASE("eval_log survives exp-of-exp magnitudes", "[funcexpr][logvalue]") {
    Expr eez = parse("exp(exp(z))");
    LogValue v = eez.eval_log(cplx(5.0, 0.0));
    CHECK(v.finite());
    CHECK(std::abs(v.logmag - std::exp(5.0)) < 1e-9 * std::exp(5.0));  // e^5 = 148.413...

    LogValue w = eez.eval_log(cplx(3.0, 0.1));
    double want = std::exp(3.0) * std::cos(0.1);  // Re e^{3+0.1i} = 19.985...
    CHECK(std::abs(w.logmag - want) < 1e-9 * want);

    // far beyond double range but still finite in log scale
    LogValue big = eez.eval_log(cplx(30.0, 0.0));
    CHECK(big.finite());
    CHECK(std::abs(big.logmag - std::exp(30.0)) < 1e-6 * std::exp(30.0));
}

TEST_CASE("eval_log sentinels for zero and poles", "[funcexpr][logvalue]") {
    CHECK(Expr::constant(0.0).eval_log(cplx(1.0, 0.0)).is_zero());
    // at an exact pole the denominator cancels only to rounding noise, so the
    // result is a huge-but-representable log magnitude, never a throw
    Expr pole = parse("1/(z - 1)");
    CHECK(pole.eval_log(cplx(1.0, 0.0)).logmag > 30.0);
    // moderate values round-trip through log scale
    Expr f = parse("exp(z)*(z + 2)");
    for (cplx z : sample_points(3.0, 20, 43))
        CHECK(rel_err(f.eval_log(z).value(), std::exp(z) * (z + 2.0)) < 1e-12);
}

TEST_CASE("LogValue arithmetic composition rules", "[funcexpr][logvalue]") {
    cplx a(3.0, -1.5), b(-0.25, 0.75);
    LogValue la = LogValue::from(a), lb = LogValue::from(b);
    CHECK(std::abs((la * lb).value() - a * b) < 1e-14 * std::abs(a * b));
    CHECK(std::abs((la / lb).value() - a / b) < 1e-13 * std::abs(a / b));
    CHECK(std::abs((la + lb).value() - (a + b)) < 1e-13 * std::abs(a + b));
    CHECK(std::abs((la - lb).value() - (a - b)) < 1e-13 * std::abs(a - b));
    CHECK((la * LogValue::zero()).is_zero());
    CHECK((la / LogValue::zero()).is_inf());
}

TEST_CASE("Mittag-Leffler with alpha=1 matches exp", "[funcexpr][special]") {
    Expr ml1 = parse("ml(1; z)");
    double worst = 0.0;
    for (cplx z : sample_points(10.0, 50, 7)) {
        cplx got = ml1.eval(z), want = std::exp(z);
        worst = std::max(worst, std::abs(got - want) / std::abs(want));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("Mittag-Leffler derivative with alpha=1 matches exp", "[funcexpr][special]") {
    Expr dml = parse("ml(1; z)").derivative();
    for (cplx z : sample_points(5.0, 20, 47))
        CHECK(std::abs(dml.eval(z) - std::exp(z)) / std::abs(std::exp(z)) < 1e-9);
}

TEST_CASE("gamma builtin against factorial and sqrt(pi)", "[funcexpr][special]") {
    Expr g = parse("gamma(z)");
    CHECK(rel_err(g.eval(cplx(5.0, 0.0)), cplx(24.0, 0.0)) < 1e-12);
    CHECK(rel_err(g.eval(cplx(0.5, 0.0)), cplx(std::sqrt(kPi), 0.0)) < 1e-12);
    // recurrence Gamma(z+1) = z Gamma(z) off the real axis
    cplx z(1.3, 0.8);
    CHECK(rel_err(g.eval(z + 1.0), z * g.eval(z)) < 1e-11);
    // derivative closes over gamma via digamma
    Expr dg = g.derivative();
    double h = 1e-6;
    cplx fd = (g.eval(cplx(2.5 + h, 0.0)) - g.eval(cplx(2.5 - h, 0.0))) / (2.0 * h);
    CHECK(std::abs(dg.eval(cplx(2.5, 0.0)) - fd) / std::abs(fd) < 1e-6);
}

TEST_CASE("finite product families evaluate factor by factor", "[funcexpr][product]") {
    Expr p = parse("prod(k=1..4; (1 - z/2^k))");
    for (cplx z : sample_points(3.0, 15, 53)) {
        cplx want = 1.0;
        for (int k = 1; k <= 4; ++k) want *= (1.0 - z / std::pow(2.0, k));
        CHECK(rel_err(p.eval(z), want) < 1e-12);
    }
    // a zero of one factor collapses the product to rounding noise
    CHECK(p.eval_log(cplx(2.0, 0.0)).logmag < -30.0);
}

TEST_CASE("the truncated canonical product parses and has the right zeros", "[funcexpr][product]") {
    Expr f = parse(canonical_product_text());
    // simple zeros at 2 and 2.0003..., double zeros at 4, 8, ...
    CHECK(f.eval_log(cplx(4.0, 0.0)).logmag < -30.0);
    CHECK(f.eval_log(cplx(8.0, 0.0)).logmag < -30.0);
    CHECK(f.eval_log(cplx(3.0, 0.0)).logmag > -30.0);
    CHECK(rel_err(f.eval(cplx(0.0, 0.0)), cplx(1.0, 0.0)) < 1e-12);
}
