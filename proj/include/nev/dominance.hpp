#pragma once

#include <sstream>
#include <vector>

#include "nev/csv.hpp"
#include "nev/growth.hpp"

namespace nev {

enum class ConditionKind {
    characteristic_ratio,  // sum T(r,A_j)/T(r,A_p)
    max_modulus_ratio,     // sum log+ M(r,A_j)/log+ M(r,A_p)
    circle_integral,       // sum (n-j)/(n-p) * int|A_j|^{1/(n-j)} / int|A_p|^{1/(n-p)}
    area_integral          // same with area integrals over D(0,r)
};

struct DominanceReport {
    ConditionKind kind = ConditionKind::characteristic_ratio;
    Domain domain = Domain::plane;
    int n = 0;
    std::vector<double> radii;
    std::vector<std::vector<double>> ratios;  // [candidate p][radius]
    std::vector<TailEstimate> estimates;      // tail limsup per candidate p
    int selected_p = -1;                      // -1 = none
    double trim = 0.10;

    // margin |estimate - 1| of the selected candidate (how decisively the
    // finite-grid limsup clears the threshold)
    double margin() const {
        if (selected_p < 0) return 0.0;
        return std::abs(estimates[static_cast<size_t>(selected_p)].trimmed - 1.0);
    }

    std::string to_csv() const {
        std::ostringstream os;
        os << "p,r,ratio,trimmed,selected\n";
        for (size_t p = 0; p < ratios.size(); ++p)
            for (size_t i = 0; i < radii.size(); ++i)
                os << p << ',' << fmt17(radii[i]) << ',' << fmt17(ratios[p][i]) << ','
                   << fmt17(estimates[p].trimmed) << ',' << (static_cast<int>(p) == selected_p ? 1 : 0)
                   << '\n';
        return os.str();
    }
};

// Smallest index p whose trimmed tail limsup of the chosen ratio sum is < 1.
// Candidates are scanned from 0 upward and all are reported. p = n-1 has an
// empty sum (ratio identically 0), so a selection always exists for n >= 1.
inline DominanceReport find_p(const std::vector<Expr>& A, ConditionKind kind,
                              const std::vector<double>& grid, double trim = 0.10,
                              double tol = 1e-6) {
    int n = static_cast<int>(A.size());
    if (n < 1) throw error("find_p: no coefficients");
    DominanceReport rep;
    rep.kind = kind;
    rep.domain = A[0].domain();
    rep.n = n;
    rep.radii = grid;
    rep.trim = trim;
    // per-coefficient per-radius base quantities
    std::vector<std::vector<double>> X(static_cast<size_t>(n), std::vector<double>(grid.size(), 0.0));
    for (int j = 0; j < n; ++j) {
        for (size_t i = 0; i < grid.size(); ++i) {
            double r = grid[i];
            switch (kind) {
                case ConditionKind::characteristic_ratio:
                    X[j][i] = characteristic(A[j], r, tol);
                    break;
                case ConditionKind::max_modulus_ratio:
                    X[j][i] = std::max(0.0, max_modulus(A[j], r).logM);
                    break;
                case ConditionKind::circle_integral:
                    X[j][i] = log_circle_integral(A[j], r, 1.0 / (n - j), tol);
                    break;
                case ConditionKind::area_integral:
                    X[j][i] = log_area_integral(A[j], r, 1.0 / (n - j), tol);
                    break;
            }
        }
    }
    bool log_scale = (kind == ConditionKind::circle_integral || kind == ConditionKind::area_integral);
    for (int p = 0; p < n; ++p) {
        std::vector<double> ratio(grid.size(), 0.0);
        for (size_t i = 0; i < grid.size(); ++i) {
            double s = 0.0;
            for (int j = p + 1; j <= n - 1; ++j) {
                if (log_scale) {
                    double w = static_cast<double>(n - j) / static_cast<double>(n - p);
                    double d = X[j][i] - X[p][i];
                    s += (d > 700.0) ? kPosInf : w * std::exp(d);
                } else {
                    s += (X[p][i] > 0.0) ? X[j][i] / X[p][i] : kPosInf;
                }
            }
            ratio[i] = s;
        }
        rep.estimates.push_back(tail_limsup(ratio, trim));
        rep.ratios.push_back(std::move(ratio));
        if (rep.selected_p < 0 && rep.estimates.back().trimmed < 1.0) rep.selected_p = p;
    }
    return rep;
}

struct CurveDominanceReport {
    int p = 0;
    std::vector<double> radii;
    std::vector<double> ratios;  // sum_j (1/eta_j) |A_j|^{eta_j} / |A_p| along the curve
    TailEstimate estimate;
    bool low_confidence = false;  // a branch jump was flagged on the curve
};

// Ratio sum along a maximum curve of A_p; eta_j > 1 (default 2 for all j).
inline CurveDominanceReport curve_dominance(const std::vector<Expr>& A, int p,
                                            std::vector<double> eta,
                                            const std::vector<CurvePoint>& curve,
                                            double trim = 0.10) {
    int n = static_cast<int>(A.size());
    if (p < 0 || p >= n) throw error("curve_dominance: p out of range");
    if (eta.empty()) eta.assign(static_cast<size_t>(n), 2.0);
    for (int j = p + 1; j < n; ++j)
        if (eta[static_cast<size_t>(j)] <= 1.0) throw error("curve_dominance: eta_j must exceed 1");
    CurveDominanceReport rep;
    rep.p = p;
    for (const auto& pt : curve) {
        cplx z = pt.r * std::polar(1.0, pt.theta);
        LogValue ap = A[static_cast<size_t>(p)].eval_log(z);
        double s = 0.0;
        for (int j = p + 1; j <= n - 1; ++j) {
            LogValue aj = A[static_cast<size_t>(j)].eval_log(z);
            if (aj.is_zero()) continue;
            if (ap.is_zero()) {
                s = kPosInf;
                break;
            }
            double e = eta[static_cast<size_t>(j)];
            double lg = e * aj.logmag - ap.logmag - std::log(e);
            s += (lg > 700.0) ? kPosInf : std::exp(lg);
        }
        rep.radii.push_back(pt.r);
        rep.ratios.push_back(s);
        if (pt.branch_jump) rep.low_confidence = true;
    }
    rep.estimate = tail_limsup(rep.ratios, trim);
    return rep;
}

enum class ConclusionKind {
    char_lower,   // log T(r,f) / T(r,A_p), claimed bounded below
    logM_asymp,   // log T(r,f) / log M(r,A_p), claimed in an absolute window
    area_asymp    // log T(r,f) / log area-integral, claimed in an absolute window
};

struct ConclusionReport {
    ConclusionKind kind = ConclusionKind::char_lower;
    std::vector<double> radii;
    std::vector<double> ratios;
    double window_lo = 0.2;
    double window_hi = 5.0;
    bool within_window = false;   // tail values stay inside [lo, hi]
    bool resampled = false;       // denominator grid interpolated in log r
};

namespace detail {

inline double interp_loglin(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (xs.empty()) throw error("conclusion_check: empty reference series");
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    size_t hi = 1;
    while (xs[hi] < x) ++hi;
    double lx0 = std::log(xs[hi - 1]), lx1 = std::log(xs[hi]);
    double t = (std::log(x) - lx0) / (lx1 - lx0);
    return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
}

}  // namespace detail

// Compares the solution growth against the dominant-coefficient growth:
// denom_r/denom_v supply T(r,A_p), log M(r,A_p), or the log area integral
// per radius, depending on `kind`.
inline ConclusionReport conclusion_check(const GrowthSeries& solution,
                                         const std::vector<double>& denom_r,
                                         const std::vector<double>& denom_v, ConclusionKind kind,
                                         double window_lo = 0.2, double window_hi = 5.0) {
    ConclusionReport rep;
    rep.kind = kind;
    rep.window_lo = window_lo;
    rep.window_hi = window_hi;
    for (const auto& s : solution.samples) {
        if (s.T <= 1.0) continue;  // log T not meaningful yet
        double denom;
        if (denom_r.size() == solution.samples.size() &&
            std::abs(denom_r.front() - solution.samples.front().r) < 1e-12) {
            size_t idx = static_cast<size_t>(&s - solution.samples.data());
            denom = denom_v[idx];
        } else {
            denom = detail::interp_loglin(denom_r, denom_v, s.r);
            rep.resampled = true;
        }
        if (denom <= 0.0) continue;
        rep.radii.push_back(s.r);
        rep.ratios.push_back(std::log(s.T) / denom);
    }
    auto t = tail_third(rep.ratios);
    rep.within_window = !t.empty();
    for (double v : t) {
        bool ok = (kind == ConclusionKind::char_lower) ? (v >= window_lo)
                                                       : (v >= window_lo && v <= window_hi);
        if (!ok) rep.within_window = false;
    }
    return rep;
}

inline ConclusionReport conclusion_check(const GrowthSeries& solution, const GrowthSeries& coeff,
                                         ConclusionKind kind, double window_lo = 0.2,
                                         double window_hi = 5.0) {
    std::vector<double> rr, vv;
    for (const auto& s : coeff.samples) {
        rr.push_back(s.r);
        vv.push_back(kind == ConclusionKind::logM_asymp ? s.logM : s.T);
    }
    return conclusion_check(solution, rr, vv, kind, window_lo, window_hi);
}

}  // namespace nev
