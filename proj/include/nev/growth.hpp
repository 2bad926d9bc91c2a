#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nev/csv.hpp"
#include "nev/expr.hpp"
#include "nev/quad.hpp"

namespace nev {

// ---------------------------------------------------------------------------
// data types

struct GrowthSample {
    double r = 0.0;
    double m = 0.0;        // proximity, nats
    double N = 0.0;        // integrated pole count, nats (0 for analytic f)
    double T = 0.0;        // characteristic, nats
    double logM = 0.0;     // log max modulus, nats
    double argmax_theta = 0.0;
};

struct GrowthSeries {
    Domain domain = Domain::plane;
    std::vector<GrowthSample> samples;

    std::string to_csv() const {
        std::ostringstream os;
        os << "r,m,N,T,logM,argmax_theta\n";
        for (const auto& s : samples)
            os << fmt17(s.r) << ',' << fmt17(s.m) << ',' << fmt17(s.N) << ',' << fmt17(s.T)
               << ',' << fmt17(s.logM) << ',' << fmt17(s.argmax_theta) << '\n';
        return os.str();
    }
};

struct GridSet {
    std::vector<double> r;
    std::vector<bool> flag;

    std::string to_csv() const {
        std::ostringstream os;
        os << "r,flag\n";
        for (size_t i = 0; i < r.size(); ++i) os << fmt17(r[i]) << ',' << (flag[i] ? 1 : 0) << '\n';
        return os.str();
    }
};

struct DeficiencyReport {
    cplx a = 0.0;
    bool a_is_infinity = false;
    std::vector<double> radii;
    std::vector<double> ratios;          // m(r, 1/(f-a)) / T(r, f)
    double liminf_untrimmed = 0.0;
    double liminf_trimmed = 0.0;
};

// ---------------------------------------------------------------------------
// grids

inline std::vector<double> plane_grid(double r0, double rmax, double rho = 1.15) {
    std::vector<double> g;
    for (double r = r0; r <= rmax * (1.0 + 1e-12); r *= rho) g.push_back(r);
    return g;
}

inline std::vector<double> disc_grid(int kmin, int kmax) {
    std::vector<double> g;
    for (int k = kmin; k <= kmax; ++k) g.push_back(1.0 - std::pow(2.0, -k / 4.0));
    return g;
}

// ---------------------------------------------------------------------------
// tail statistics: estimates of limsup/liminf over the final third of a grid,
// with a trim fraction dropping the worst radii (numerical stand-in for the
// exceptional sets of finite measure that the asymptotic statements exclude).

struct TailEstimate {
    double untrimmed = 0.0;
    double trimmed = 0.0;
};

inline std::vector<double> tail_third(const std::vector<double>& v) {
    size_t n = v.size();
    size_t start = (n < 3) ? 0 : n - n / 3;
    return {v.begin() + static_cast<long>(start), v.end()};
}

inline TailEstimate tail_limsup(const std::vector<double>& values, double trim = 0.10) {
    std::vector<double> t = tail_third(values);
    if (t.empty()) return {0.0, 0.0};
    TailEstimate e;
    e.untrimmed = *std::max_element(t.begin(), t.end());
    std::sort(t.begin(), t.end());
    size_t drop = static_cast<size_t>(std::floor(trim * static_cast<double>(t.size())));
    if (drop >= t.size()) drop = t.size() - 1;
    e.trimmed = t[t.size() - 1 - drop];
    return e;
}

inline TailEstimate tail_liminf(const std::vector<double>& values, double trim = 0.10) {
    std::vector<double> t = tail_third(values);
    if (t.empty()) return {0.0, 0.0};
    TailEstimate e;
    e.untrimmed = *std::min_element(t.begin(), t.end());
    std::sort(t.begin(), t.end());
    size_t drop = static_cast<size_t>(std::floor(trim * static_cast<double>(t.size())));
    if (drop >= t.size()) drop = t.size() - 1;
    e.trimmed = t[drop];
    return e;
}

// ---------------------------------------------------------------------------
// core functionals

// m(r, f) = (1/2pi) int_0^{2pi} log+ |f(r e^{i theta})| d theta, in nats
inline double proximity(const Expr& f, double r, double tol = 1e-6) {
    return quad::periodic_mean(
        [&](double th) {
            LogValue v = f.eval_log(r * std::polar(1.0, th));
            if (v.is_zero()) return 0.0;
            if (v.is_inf()) throw error("proximity: integrand overflow sentinel on the circle");
            return std::max(0.0, v.logmag);
        },
        tol);
}

struct MaxModulus {
    double logM = kNegInf;
    double theta = 0.0;
};

// log M(r, f) with the arg max angle; coarse scan + golden-section polish.
inline MaxModulus max_modulus(const Expr& f, double r, int coarse = 1024) {
    auto lm = [&](double th) {
        LogValue v = f.eval_log(r * std::polar(1.0, th));
        return v.is_zero() ? -1e308 : v.logmag;
    };
    MaxModulus best;
    double h = 2.0 * kPi / coarse;
    for (int j = 0; j < coarse; ++j) {
        double v = lm(j * h);
        if (v > best.logM) {
            best.logM = v;
            best.theta = j * h;
        }
    }
    // golden-section polish on [theta-h, theta+h]
    const double gr = 0.6180339887498949;
    double a = best.theta - h, b = best.theta + h;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = lm(x1), f2 = lm(x2);
    for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
        if (f1 > f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = lm(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = lm(x2);
        }
    }
    double xm = 0.5 * (a + b), fm = lm(xm);
    if (fm > best.logM) {
        best.logM = fm;
        best.theta = xm;
    }
    best.theta = std::remainder(best.theta, 2.0 * kPi);
    if (best.theta < 0.0 && std::abs(best.theta) < 1e-12) best.theta = 0.0;
    return best;
}

struct CurvePoint {
    double r = 0.0;
    double theta = 0.0;
    double logM = 0.0;
    bool branch_jump = false;
};

// Maximum curve r -> r e^{i theta(r)}: warm-start each angular search at the
// previous angle so one branch is followed; a global re-scan flags jumps.
inline std::vector<CurvePoint> trace_max_curve(const Expr& f, const std::vector<double>& radii) {
    std::vector<CurvePoint> out;
    std::optional<double> prev_theta;
    for (double r : radii) {
        MaxModulus global = max_modulus(f, r);
        CurvePoint p;
        p.r = r;
        p.theta = global.theta;
        p.logM = global.logM;
        if (prev_theta) {
            double d = std::remainder(global.theta - *prev_theta, 2.0 * kPi);
            if (std::abs(d) > 0.5) p.branch_jump = true;
            // stick to the local branch when it is an equally good maximum
            auto lm = [&](double th) {
                LogValue v = f.eval_log(r * std::polar(1.0, th));
                return v.is_zero() ? -1e308 : v.logmag;
            };
            double local = lm(*prev_theta);
            if (local >= global.logM - 1e-9 * (1.0 + std::abs(global.logM))) {
                p.theta = *prev_theta;
                p.logM = local;
                p.branch_jump = false;
            }
        }
        prev_theta = p.theta;
        out.push_back(p);
    }
    return out;
}

namespace detail {

// winding number of f - a around |z| = r via adaptive phase tracking;
// recursion halves the arc until the principal phase increment is < pi/2
inline double phase_delta(const Expr& f, cplx a, double r, double th1, double th2, double ph1,
                          double ph2, int depth) {
    double d = std::remainder(ph2 - ph1, 2.0 * kPi);
    if (std::abs(d) < kPi / 2.0) return d;
    if (depth > 48) throw error("count_zeros: phase tracking failed to stabilize; nudge the radius");
    double tm = 0.5 * (th1 + th2);
    LogValue v = f.eval_log(r * std::polar(1.0, tm)) - LogValue::from(a);
    if (v.is_zero() || v.logmag < -280.0)
        throw error("count_zeros: contour passes through a zero; nudge the radius");
    double pm = v.principal_phase();
    return phase_delta(f, a, r, th1, tm, ph1, pm, depth + 1) +
           phase_delta(f, a, r, tm, th2, pm, ph2, depth + 1);
}

inline int count_zeros_once(const Expr& f, cplx a, double r) {
    const int n = 256;
    std::vector<double> ph(n + 1);
    for (int j = 0; j <= n; ++j) {
        double th = 2.0 * kPi * j / n;
        LogValue v = f.eval_log(r * std::polar(1.0, th)) - LogValue::from(a);
        if (v.is_zero() || v.logmag < -280.0)
            throw error("count_zeros: contour passes through a zero; nudge the radius");
        ph[j] = v.principal_phase();
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j)
        total += phase_delta(f, a, r, 2.0 * kPi * j / n, 2.0 * kPi * (j + 1) / n, ph[j], ph[j + 1], 0);
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

}  // namespace detail

// number of a-points of f in |z| < r, counted with multiplicity
inline int count_zeros(const Expr& f, cplx a, double r) {
    double nudge = 1e-9 * r;
    for (int attempt = 0; attempt < 4; ++attempt) {
        try {
            return detail::count_zeros_once(f, a, r + attempt * nudge);
        } catch (const error&) {
            if (attempt == 3) throw;
        }
    }
    return 0;  // unreachable
}

// N(r, a, f) = n(0) log r + int_0^r (n(t) - n(0))/t dt, via counts on a
// log-spaced sub-grid, trapezoid in log t, sub-grid doubling until < tol.
inline double counting_N(const Expr& f, cplx a, double r, double tol = 1e-3) {
    const double r_eps = 1e-6;
    int n0 = count_zeros(f, a, r_eps);
    auto pass = [&](int m) {
        double s = 0.0;
        int prev = n0;
        double lt_prev = std::log(r_eps);
        for (int j = 1; j <= m; ++j) {
            double lt = std::log(r_eps) + (std::log(r) - std::log(r_eps)) * j / m;
            int cnt = count_zeros(f, a, std::exp(lt));
            s += 0.5 * ((prev - n0) + (cnt - n0)) * (lt - lt_prev);
            prev = cnt;
            lt_prev = lt;
        }
        return n0 * std::log(r) + s;
    };
    int m = 16;
    double cur = pass(m);
    while (m < 512) {
        m *= 2;
        double next = pass(m);
        if (std::abs(next - cur) < tol) return next;
        cur = next;
    }
    return cur;
}

// T(r, f) for analytic f (no poles): T = m. Meromorphic inputs with poles are
// out of scope; quotient trees are fine as long as the denominator does not
// vanish inside |z| <= r.
inline double characteristic(const Expr& f, double r, double tol = 1e-6) {
    return proximity(f, r, tol);
}

// log of int_0^{2pi} |f(r e^{i theta})|^kappa d theta, log-sum-exp accumulated
inline double log_circle_integral(const Expr& f, double r, double kappa, double tol = 1e-6) {
    return quad::log_periodic_integral(
        [&](double th) {
            LogValue v = f.eval_log(r * std::polar(1.0, th));
            if (v.is_zero()) return kNegInf;
            if (v.is_inf()) throw error("circle integral: overflow sentinel on the circle");
            return kappa * v.logmag;
        },
        tol);
}

inline double circle_p_integral(const Expr& f, double r, double kappa, double tol = 1e-6) {
    return std::exp(log_circle_integral(f, r, kappa, tol));
}

// log of int_{D(0,r)} |f|^kappa dA: radial log-sum-exp over circle integrals
inline double log_area_integral(const Expr& f, double r, double kappa, double tol = 1e-6) {
    auto ring = [&](double rho) {  // log of rho * int |f(rho e^{it})|^kappa dt
        if (rho <= 0.0) return kNegInf;
        return std::log(rho) + log_circle_integral(f, rho, kappa, tol);
    };
    int n = 64;
    auto pass = [&](int m) {
        double h = r / m;
        double peak = kNegInf;
        std::vector<double> vals(m);
        for (int j = 0; j < m; ++j) vals[j] = ring((j + 0.5) * h);
        for (double v : vals) peak = std::max(peak, v);
        if (peak == kNegInf) return kNegInf;
        double acc = 0.0;
        for (double v : vals) {
            double d = v - peak;
            if (d > -745.0) acc += std::exp(d);
        }
        return peak + std::log(acc * h);
    };
    double cur = pass(n);
    while (n < 1024) {
        n *= 2;
        double next = pass(n);
        if (std::abs(next - cur) < tol) return next;
        cur = next;
    }
    return cur;
}

inline double area_p_integral(const Expr& f, double r, double kappa, double tol = 1e-6) {
    return std::exp(log_area_integral(f, r, kappa, tol));
}

inline GrowthSeries growth_series(const Expr& f, const std::vector<double>& grid,
                                  double tol = 1e-6) {
    GrowthSeries out;
    out.domain = f.domain();
    for (double r : grid) {
        GrowthSample s;
        s.r = r;
        s.m = proximity(f, r, tol);
        s.N = 0.0;
        s.T = s.m + s.N;
        MaxModulus mm = max_modulus(f, r);
        s.logM = mm.logM;
        s.argmax_theta = mm.theta;
        out.samples.push_back(s);
    }
    return out;
}

// ---------------------------------------------------------------------------
// derived reports

inline DeficiencyReport deficiency(const Expr& f, cplx a, const std::vector<double>& grid,
                                   bool a_is_infinity = false, double tol = 1e-6,
                                   double trim = 0.10) {
    DeficiencyReport rep;
    rep.a = a;
    rep.a_is_infinity = a_is_infinity;
    std::vector<double> Ts;
    for (double r : grid) {
        double T = characteristic(f, r, tol);
        double m = a_is_infinity
                       ? proximity(f, r, tol)
                       : proximity(Expr::constant(1.0, f.domain()) / (f - a), r, tol);
        rep.radii.push_back(r);
        rep.ratios.push_back(T > 0.0 ? m / T : 0.0);
        Ts.push_back(T);
    }
    if (Ts.empty() || Ts.back() <= Ts.front() + 1e-9)
        throw error("deficiency: characteristic is bounded on this grid; deficiency undefined");
    TailEstimate e = tail_liminf(rep.ratios, trim);
    rep.liminf_untrimmed = e.untrimmed;
    rep.liminf_trimmed = e.trimmed;
    return rep;
}

struct AdmissibilityReport {
    std::vector<double> radii;
    std::vector<double> index;  // T(r) / (-log(1-r))
    double tail_max = 0.0;
    bool increasing_trend = false;
    bool admissible = false;
};

inline AdmissibilityReport admissibility_index(const Expr& f, const std::vector<double>& grid,
                                               double threshold = 5.0, double tol = 1e-6) {
    if (f.domain() != Domain::disc) throw error("admissibility_index: disc-tagged input required");
    AdmissibilityReport rep;
    for (double r : grid) {
        rep.radii.push_back(r);
        rep.index.push_back(characteristic(f, r, tol) / (-std::log(1.0 - r)));
    }
    auto t = tail_third(rep.index);
    if (!t.empty()) {
        rep.tail_max = *std::max_element(t.begin(), t.end());
        rep.increasing_trend = t.back() > t.front();
    }
    rep.admissible = rep.increasing_trend && rep.tail_max > threshold;
    return rep;
}

// sup over a disc sample grid of (1 - |z|^2)^q |f(z)|; +inf when the probe
// overflows double range (f far outside the power-growth space)
inline double korenblum_probe(const Expr& f, double q, const std::vector<double>& grid,
                              int angles = 64) {
    double best = 0.0;
    for (double r : grid) {
        for (int j = 0; j < angles; ++j) {
            double th = 2.0 * kPi * j / angles;
            LogValue v = f.eval_log(r * std::polar(1.0, th));
            if (v.is_zero()) continue;
            double lg = q * std::log1p(-r * r) + v.logmag;
            if (lg > 709.0) return kPosInf;
            best = std::max(best, std::exp(lg));
        }
    }
    return best;
}

// upper linear density of the flagged set: limsup over grid radii of
// |E intersect [r,1)| / (1-r)
inline double density_upper(const GridSet& set) {
    if (set.r.size() != set.flag.size()) throw error("density_upper: mask/grid length mismatch");
    size_t n = set.r.size();
    if (n == 0) return 0.0;
    // measure of the flagged part of [r_j, 1): flagged grid cells [r_k, r_{k+1})
    std::vector<double> cell(n);
    for (size_t k = 0; k < n; ++k) {
        double hi = (k + 1 < n) ? set.r[k + 1] : 1.0;
        cell[k] = set.flag[k] ? (hi - set.r[k]) : 0.0;
    }
    double best = 0.0, suffix = 0.0;
    for (size_t k = n; k-- > 0;) {
        suffix += cell[k];
        double denom = 1.0 - set.r[k];
        if (denom > 0.0) best = std::max(best, suffix / denom);
    }
    return std::min(best, 1.0);
}

struct HyperOrderEstimate {
    double value = 0.0;
    bool low_confidence = false;
};

// limsup of log log T(r) / log r over the tail third of the series
inline HyperOrderEstimate hyper_order(const GrowthSeries& series, double trim = 0.10) {
    std::vector<double> vals;
    bool any_small = false;
    for (const auto& s : series.samples) {
        if (s.r <= 1.0) continue;
        if (s.T <= std::exp(1.0)) {
            any_small = true;
            continue;
        }
        vals.push_back(std::log(std::log(s.T)) / std::log(s.r));
    }
    if (vals.size() < 3) return {0.0, true};
    TailEstimate e = tail_limsup(vals, trim);
    return {e.trimmed, any_small};
}

}  // namespace nev
