#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nev/expr.hpp"
#include "nev/growth.hpp"
#include "nev/reduction.hpp"

namespace nev {

// ---------------------------------------------------------------------------
// ODE integration along rays, renormalized log scale

struct RayResult {
    double theta = 0.0;
    std::vector<double> r;                   // radii actually reached (subset of requested)
    std::vector<double> log_abs_f;           // log |f(r e^{i theta})|
    std::vector<std::vector<cplx>> states;   // renormalized (f, ..., f^(n-1))
    std::vector<double> logscale;            // accumulated log scale per radius
    bool truncated = false;
};

// f^(n) + A_{n-1} f^(n-1) + ... + A_0 f = 0 along z = r e^{i theta}, from r0
// to the last requested radius. Embedded RK (Cash-Karp 4/5) with adaptive
// steps; the state is divided by its norm whenever it leaves [0.5, 2] and the
// log of the divisor accumulates separately, so exp-of-exp growth stays
// representable.
inline RayResult integrate_ray(const std::vector<Expr>& A, double theta,
                               const std::vector<double>& radii, std::vector<cplx> ic,
                               double r0 = 0.0, double tol = 1e-10) {
    size_t n = A.size();
    if (ic.size() != n) throw error("integrate_ray: initial state size must equal the order");
    double icnorm = 0.0;
    for (cplx v : ic) icnorm = std::max(icnorm, std::abs(v));
    if (icnorm == 0.0) throw error("integrate_ray: zero initial condition gives the trivial solution");

    RayResult out;
    out.theta = theta;
    cplx dir = std::polar(1.0, theta);
    auto deriv = [&](double r, const std::vector<cplx>& y) {
        cplx z = r * dir;
        std::vector<cplx> d(n);
        for (size_t k = 0; k + 1 < n; ++k) d[k] = dir * y[k + 1];
        cplx top = 0.0;
        for (size_t j = 0; j < n; ++j) top -= A[j].eval(z) * y[j];
        d[n - 1] = dir * top;
        return d;
    };

    // Cash-Karp tableau
    static const double a2 = 1.0 / 5, a3 = 3.0 / 10, a4 = 3.0 / 5, a5 = 1.0, a6 = 7.0 / 8;
    static const double b21 = 1.0 / 5;
    static const double b31 = 3.0 / 40, b32 = 9.0 / 40;
    static const double b41 = 3.0 / 10, b42 = -9.0 / 10, b43 = 6.0 / 5;
    static const double b51 = -11.0 / 54, b52 = 5.0 / 2, b53 = -70.0 / 27, b54 = 35.0 / 27;
    static const double b61 = 1631.0 / 55296, b62 = 175.0 / 512, b63 = 575.0 / 13824,
                        b64 = 44275.0 / 110592, b65 = 253.0 / 4096;
    static const double c1 = 37.0 / 378, c3 = 250.0 / 621, c4 = 125.0 / 594, c6 = 512.0 / 1771;
    static const double d1 = 2825.0 / 27648, d3 = 18575.0 / 48384, d4 = 13525.0 / 55296,
                        d5 = 277.0 / 14336, d6 = 1.0 / 4;

    std::vector<cplx> y = std::move(ic);
    double logscale = 0.0;
    double r = r0;
    double h = 1e-3;
    size_t next_target = 0;
    auto record = [&](double at) {
        out.r.push_back(at);
        double mag = std::abs(y[0]);
        out.log_abs_f.push_back(mag > 0.0 ? logscale + std::log(mag) : kNegInf);
        out.states.push_back(y);
        out.logscale.push_back(logscale);
    };
    while (next_target < radii.size() && radii[next_target] <= r0 + 1e-15) {
        record(radii[next_target]);
        ++next_target;
    }
    long attempts = 0;
    while (next_target < radii.size()) {
        if (++attempts > 1000000) {
            // step budget exhausted: a power-law coefficient blow-up keeps the
            // steps tiny but valid, so h never reaches hmin; stop honestly
            out.truncated = true;
            return out;
        }
        double target = radii[next_target];
        double h_free = h;  // step size before clamping to the target radius
        bool hits = false;
        if (r + h >= target) {
            h = target - r;
            hits = true;
        }
        auto axpy = [&](std::initializer_list<std::pair<double, const std::vector<cplx>*>> terms) {
            std::vector<cplx> v = y;
            for (auto& [w, k] : terms)
                for (size_t i = 0; i < n; ++i) v[i] += h * w * (*k)[i];
            return v;
        };
        std::vector<cplx> k1 = deriv(r, y);
        std::vector<cplx> k2 = deriv(r + a2 * h, axpy({{b21, &k1}}));
        std::vector<cplx> k3 = deriv(r + a3 * h, axpy({{b31, &k1}, {b32, &k2}}));
        std::vector<cplx> k4 = deriv(r + a4 * h, axpy({{b41, &k1}, {b42, &k2}, {b43, &k3}}));
        std::vector<cplx> k5 = deriv(r + a5 * h, axpy({{b51, &k1}, {b52, &k2}, {b53, &k3}, {b54, &k4}}));
        std::vector<cplx> k6 =
            deriv(r + a6 * h, axpy({{b61, &k1}, {b62, &k2}, {b63, &k3}, {b64, &k4}, {b65, &k5}}));
        std::vector<cplx> y5 = axpy({{c1, &k1}, {c3, &k3}, {c4, &k4}, {c6, &k6}});
        std::vector<cplx> y4 = axpy({{d1, &k1}, {d3, &k3}, {d4, &k4}, {d5, &k5}, {d6, &k6}});
        double err = 0.0, scale = 0.0;
        for (size_t i = 0; i < n; ++i) {
            err = std::max(err, std::abs(y5[i] - y4[i]));
            scale = std::max(scale, std::abs(y5[i]));
        }
        double rel = err / std::max(scale, 1e-30);
        double hmin = 1e-13 * std::max(1.0, r);
        if (rel > tol && h <= hmin) {
            // even the smallest representable step cannot meet the local error
            // target (coefficient blow-up ahead): stop instead of crawling
            out.truncated = true;
            return out;
        }
        if (rel <= tol) {
            r += h;
            y = std::move(y5);
            double norm = 0.0;
            for (cplx v : y) norm = std::max(norm, std::abs(v));
            if (norm == 0.0) throw error("integrate_ray: state collapsed to zero");
            if (norm < 0.5 || norm > 2.0) {
                for (cplx& v : y) v /= norm;
                logscale += std::log(norm);
            }
            if (hits) {
                record(target);
                ++next_target;
                h = h_free;  // resume with the unclamped step size
            }
            double grow = (rel > 0.0) ? 0.9 * std::pow(tol / rel, 0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            h *= std::clamp(0.9 * std::pow(tol / rel, 0.25), 0.1, 0.9);
            if (h < hmin) {
                out.truncated = true;
                return out;
            }
        }
    }
    return out;
}

// plain (non-renormalized) value and derivatives at a single point z0,
// convenience for jet seeding at desk radii
inline std::vector<cplx> solution_state_at(const std::vector<Expr>& A, cplx z0,
                                           const std::vector<cplx>& ic, double tol = 1e-12) {
    double r = std::abs(z0);
    if (r == 0.0) return ic;
    RayResult ray = integrate_ray(A, std::arg(z0), {r}, ic, 0.0, tol);
    if (ray.truncated || ray.r.empty()) throw error("solution_state_at: integration truncated");
    std::vector<cplx> st = ray.states.back();
    double s = ray.logscale.back();
    if (s > 700.0) throw error("solution_state_at: value exceeds double range");
    for (cplx& v : st) v *= std::exp(s);
    return st;
}

// Growth series of the solution with initial state `ic`: proximity assembled
// from log|f| on rays (trapezoid over theta, ray count doubled until stable),
// logM as the max over rays. Entire solutions: N = 0, T = m.
inline GrowthSeries solution_growth(const std::vector<Expr>& A, const std::vector<cplx>& ic,
                                    const std::vector<double>& grid, double tol = 1e-4,
                                    int theta0 = 64, int theta_max = 512, double ode_tol = 1e-9) {
    GrowthSeries out;
    out.domain = A.empty() ? Domain::plane : A[0].domain();
    size_t nr = grid.size();
    auto compute = [&](int rays) {
        // rows: per-radius vector of log|f| over theta
        std::vector<std::vector<double>> logs(nr, std::vector<double>(rays, kNegInf));
        std::vector<double> thetas(rays);
        std::vector<size_t> reach(nr, 0);
        for (int t = 0; t < rays; ++t) {
            double th = 2.0 * kPi * t / rays;
            thetas[t] = th;
            RayResult ray = integrate_ray(A, th, grid, ic, 0.0, ode_tol);
            for (size_t j = 0; j < ray.r.size(); ++j) {
                // ray.r is a prefix of grid
                logs[j][t] = ray.log_abs_f[j];
                reach[j]++;
            }
        }
        std::vector<GrowthSample> samples;
        for (size_t j = 0; j < nr; ++j) {
            if (reach[j] < static_cast<size_t>(rays)) break;  // truncated: stop, do not extrapolate
            GrowthSample s;
            s.r = grid[j];
            double m = 0.0, best = kNegInf;
            int best_t = 0;
            for (int t = 0; t < rays; ++t) {
                m += std::max(0.0, logs[j][t]);
                if (logs[j][t] > best) {
                    best = logs[j][t];
                    best_t = t;
                }
            }
            s.m = m / rays;
            s.N = 0.0;
            s.T = s.m;
            s.logM = best;
            s.argmax_theta = thetas[best_t];
            samples.push_back(s);
        }
        return samples;
    };
    int rays = theta0;
    std::vector<GrowthSample> cur = compute(rays);
    while (rays < theta_max) {
        rays *= 2;
        std::vector<GrowthSample> next = compute(rays);
        double diff = 0.0;
        for (size_t j = 0; j < std::min(cur.size(), next.size()); ++j)
            diff = std::max(diff, std::abs(next[j].m - cur[j].m) / (1.0 + std::abs(next[j].m)));
        cur = std::move(next);
        if (diff < tol) break;
    }
    out.samples = std::move(cur);
    return out;
}

// ---------------------------------------------------------------------------
// difference / q-difference lattices

struct LatticeSolution {
    cplx z0 = 0.0;
    OpSpec op;                      // difference (step 1) or q_difference (ratio q)
    std::vector<LogValue> values;   // f at z0 + k, resp. q^k z0
};

inline cplx lattice_point(const LatticeSolution& sol, int k) {
    if (sol.op.kind == OpKind::q_difference) return std::pow(sol.op.q, k) * sol.z0;
    return sol.z0 + static_cast<double>(k);
}

// forward recurrence for the shift form f(sigma^n z) + B_{n-1} f(sigma^{n-1} z)
// + ... + B_0(z) f(z) = 0, carried in LogValue arithmetic
inline LatticeSolution iterate_lattice(const std::vector<Expr>& B, const OpSpec& op, cplx z0,
                                       int steps, const std::vector<LogValue>& seed) {
    size_t n = B.size();
    if (seed.size() != n) throw error("iterate_lattice: seed size must equal the order");
    LatticeSolution sol;
    sol.z0 = z0;
    sol.op = op;
    sol.values = seed;
    for (int k = 0; k < steps; ++k) {
        cplx z = lattice_point(sol, k);
        LogValue acc = LogValue::zero();
        for (size_t j = 0; j < n; ++j) {
            LogValue b = B[j].eval_log(z);
            if (b.is_inf()) throw error("iterate_lattice: coefficient overflow on the lattice");
            acc = acc + b * sol.values[static_cast<size_t>(k) + j];
        }
        if (!acc.is_zero()) acc.phase += kPi;  // negate
        sol.values.push_back(acc);
    }
    return sol;
}

// max relative recurrence residual over interior lattice points, log-domain
inline double lattice_residual(const std::vector<Expr>& B, const LatticeSolution& sol) {
    size_t n = B.size();
    double worst = 0.0;
    for (size_t k = 0; k + n < sol.values.size(); ++k) {
        cplx z = lattice_point(sol, static_cast<int>(k));
        std::vector<LogValue> terms{sol.values[k + n]};
        for (size_t j = 0; j < n; ++j) terms.push_back(B[j].eval_log(z) * sol.values[k + j]);
        worst = std::max(worst, relative_combo_residual(terms));
    }
    return worst;
}

// Delta^k = sum_j (-1)^(k-j) C(k,j) sigma^j: converts the Delta-form
// coefficient list (a_0..a_{n-1}, leading 1) into the shift form (B_0..B_{n-1},
// leading 1). Works identically for the q-difference operator.
inline std::vector<Expr> delta_to_shift(const std::vector<Expr>& A) {
    int n = static_cast<int>(A.size());
    Domain d = A.empty() ? Domain::plane : A[0].domain();
    std::vector<Expr> B(static_cast<size_t>(n), Expr::constant(0.0, d));
    auto add = [&](int j, double w, int k) {
        if (j >= n) return;  // j == n only arises from k == n with weight 1
        Expr term = (k == n) ? Expr::constant(w, d) : w * A[static_cast<size_t>(k)];
        B[static_cast<size_t>(j)] = B[static_cast<size_t>(j)] + term;
    };
    for (int k = 0; k <= n; ++k) {
        for (int j = 0; j <= k; ++j) {
            double w = binom(k, j) * (((k - j) % 2 == 0) ? 1.0 : -1.0);
            add(j, w, k);
        }
    }
    return B;
}

// inverse: sigma^j = sum_i C(j,i) Delta^i
inline std::vector<Expr> shift_to_delta(const std::vector<Expr>& B) {
    int n = static_cast<int>(B.size());
    Domain d = B.empty() ? Domain::plane : B[0].domain();
    std::vector<Expr> A(static_cast<size_t>(n), Expr::constant(0.0, d));
    auto add = [&](int i, double w, int j) {
        if (i >= n) return;
        Expr term = (j == n) ? Expr::constant(w, d) : w * B[static_cast<size_t>(j)];
        A[static_cast<size_t>(i)] = A[static_cast<size_t>(i)] + term;
    };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= j; ++i) add(i, binom(j, i), j);
    return A;
}

// ---------------------------------------------------------------------------
// candidate-solution residual

struct EquationResidual {
    double max_residual = 0.0;
    cplx worst_point = 0.0;
    bool trivial_candidate = false;  // candidate vanished at every sample
};

inline EquationResidual equation_residual(const std::vector<Expr>& A, const OpSpec& op,
                                          const Expr& candidate, const std::vector<cplx>& samples) {
    size_t n = A.size();
    std::vector<Expr> terms;
    terms.push_back(apply_op_n(candidate, op, static_cast<int>(n)));
    for (size_t j = 0; j < n; ++j) terms.push_back(A[j] * apply_op_n(candidate, op, static_cast<int>(j)));
    EquationResidual out;
    bool saw_nonzero = false;
    for (cplx z : samples) {
        std::vector<LogValue> tv;
        bool skip = false;
        for (const auto& e : terms) {
            LogValue v = e.eval_log(z);
            if (v.is_inf()) {
                skip = true;
                break;
            }
            tv.push_back(v);
        }
        if (skip) continue;
        if (!candidate.eval_log(z).is_zero()) saw_nonzero = true;
        double res = relative_combo_residual(tv);
        if (res > out.max_residual) {
            out.max_residual = res;
            out.worst_point = z;
        }
    }
    out.trivial_candidate = !saw_nonzero;
    return out;
}

}  // namespace nev
