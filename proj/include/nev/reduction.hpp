#pragma once

#include <array>
#include <map>
#include <random>
#include <sstream>
#include <tuple>
#include <vector>

#include "nev/expr.hpp"
#include "nev/jet.hpp"

namespace nev {

// ---------------------------------------------------------------------------
// operator kinds

enum class OpKind { derivative, difference, q_difference };

struct OpSpec {
    OpKind kind = OpKind::derivative;
    cplx q = cplx(2.0, 0.0);  // ratio for the q-difference operator
};

inline Expr apply_op(const Expr& f, const OpSpec& op) {
    switch (op.kind) {
        case OpKind::derivative: return f.derivative();
        case OpKind::difference: return delta(f);
        case OpKind::q_difference: return delta_q(f, op.q);
    }
    return f;
}

inline Expr apply_op_n(Expr f, const OpSpec& op, int times) {
    for (int i = 0; i < times; ++i) f = apply_op(f, op);
    return f;
}

// sigma^t: identity (derivative), z -> z+t (difference), z -> q^t z (q-difference)
inline Expr apply_shift(const Expr& f, const OpSpec& op, int t) {
    switch (op.kind) {
        case OpKind::derivative: return f;
        case OpKind::difference: return shift(f, cplx(static_cast<double>(t), 0.0));
        case OpKind::q_difference: return qscale(f, std::pow(op.q, t));
    }
    return f;
}

// ---------------------------------------------------------------------------
// the quotient table f_{q,s}

struct ReductionTable {
    OpSpec op;
    int n = 0;
    Domain domain = Domain::plane;
    // rows[q][s-1] = f_{q,s}; row 0 is the base, row q has n-q entries
    std::vector<std::vector<Expr>> rows;
};

namespace detail {

inline std::vector<cplx> random_points(double radius, int count, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    std::vector<cplx> pts;
    while (static_cast<int>(pts.size()) < count) {
        cplx z(u(rng), u(rng));
        if (std::abs(z) <= radius) pts.push_back(z);
    }
    return pts;
}

}  // namespace detail

// residual sample set: 100 points on a circle plus 20 random points, seed 42
inline std::vector<cplx> residual_samples(Domain d, unsigned seed = 42) {
    double circle_r = (d == Domain::plane) ? 1.5 : 0.5;
    double blob_r = (d == Domain::plane) ? 2.0 : 0.7;
    std::vector<cplx> pts;
    for (int j = 0; j < 100; ++j) pts.push_back(circle_r * std::polar(1.0, 2.0 * kPi * j / 100));
    for (cplx z : detail::random_points(blob_r, 20, seed)) pts.push_back(z);
    return pts;
}

inline ReductionTable reduce_base(const std::vector<Expr>& base, const OpSpec& op) {
    if (base.empty()) throw error("reduce_base: empty base");
    ReductionTable t;
    t.op = op;
    t.n = static_cast<int>(base.size());
    t.domain = base[0].domain();
    t.rows.push_back(base);
    auto degenerate = [&](const Expr& f) {
        for (cplx z : detail::random_points(t.domain == Domain::plane ? 2.0 : 0.7, 20, 1234)) {
            LogValue v = f.eval_log(z);
            if (!v.is_zero() && v.logmag > -690.0) return false;
        }
        return true;
    };
    for (int q = 1; q <= t.n - 1; ++q) {
        const auto& prev = t.rows[q - 1];
        if (degenerate(prev[0]))
            throw error("reduce_base: degenerate base ordering; permute base");
        std::vector<Expr> row;
        for (int s = 1; s <= t.n - q; ++s) row.push_back(apply_op(prev[s] / prev[0], t.op));
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---------------------------------------------------------------------------
// reduced coefficients A_{q,j} as expressions

inline double binom(int a, int b) {
    double r = 1.0;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
}

// result[q][j] = A_{q,j}; result[0] is A itself. The leading coefficient
// (identically 1) is implicit.
inline std::vector<std::vector<Expr>> reduced_coefficients(const std::vector<Expr>& A,
                                                           const ReductionTable& t) {
    int n = t.n;
    if (static_cast<int>(A.size()) != n) throw error("reduced_coefficients: need n coefficients");
    std::vector<std::vector<Expr>> out;
    out.push_back(A);
    Expr one = Expr::constant(1.0, t.domain);
    for (int q = 1; q <= n - 1; ++q) {
        const auto& prev = out[q - 1];  // size n-q+1 valid entries (j = 0..n-q)
        const Expr& u = t.rows[q - 1][0];
        auto prev_at = [&](int k) -> Expr {  // A_{q-1,k}, with the implicit leading 1
            return (k == n - q + 1) ? one : prev[static_cast<size_t>(k)];
        };
        std::vector<Expr> row;
        for (int j = 0; j <= n - q - 1; ++j) {
            Expr acc = Expr::constant(0.0, t.domain);
            if (t.op.kind == OpKind::derivative) {
                acc = prev_at(j + 1);
                for (int k = j + 2; k <= n - q + 1; ++k)
                    acc = acc + binom(k, j + 1) * (prev_at(k) * (derivative_n(u, k - j - 1) / u));
            } else {
                Expr den = apply_shift(u, t.op, n - q + 1);
                for (int k = j + 1; k <= n - q + 1; ++k) {
                    Expr num = apply_shift(apply_op_n(u, t.op, k - j - 1), t.op, j + 1);
                    acc = acc + binom(k, j + 1) * (prev_at(k) * (num / den));
                }
            }
            row.push_back(acc);
        }
        out.push_back(std::move(row));
    }
    return out;
}

// relative residual of sum(terms): |sum| / max |term|, in plain scale
inline double relative_combo_residual(const std::vector<LogValue>& terms) {
    LogValue sum = LogValue::zero();
    double peak = kNegInf;
    for (const auto& tv : terms) {
        sum = sum + tv;
        if (!tv.is_zero()) peak = std::max(peak, tv.logmag);
    }
    if (sum.is_zero()) return 0.0;
    if (peak == kNegInf) return 0.0;
    double d = sum.logmag - peak;
    return d > 700.0 ? kPosInf : std::exp(d);
}

// self-check: every f_{q,s} solves the row-q reduced equation
inline double reduced_equation_residual(const ReductionTable& t,
                                        const std::vector<std::vector<Expr>>& Aq, int q,
                                        const std::vector<cplx>& samples) {
    int n = t.n;
    double worst = 0.0;
    for (int s = 1; s <= n - q; ++s) {
        const Expr& f = t.rows[q][s - 1];
        std::vector<Expr> terms;
        terms.push_back(apply_op_n(f, t.op, n - q));
        for (int j = n - q - 1; j >= 0; --j) terms.push_back(Aq[q][j] * apply_op_n(f, t.op, j));
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
            worst = std::max(worst, relative_combo_residual(tv));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// monomial algebra for the C_k polynomials

// One factor sigma^shift(D^order f_{row,1}) raised to exp (exp<0 = denominator)
struct CFactor {
    int row = 0;
    int order = 0;
    int shift = 0;
    int exp = 1;
    auto operator<=>(const CFactor&) const = default;
};

using CMonomialKey = std::vector<CFactor>;

// polynomial = map monomial -> integer constant K
using CPoly = std::map<CMonomialKey, long long>;

namespace detail {

inline CMonomialKey canonical(CMonomialKey key) {
    std::sort(key.begin(), key.end(), [](const CFactor& a, const CFactor& b) {
        return std::tie(a.row, a.order, a.shift) < std::tie(b.row, b.order, b.shift);
    });
    CMonomialKey out;
    for (const auto& f : key) {
        if (!out.empty() && out.back().row == f.row && out.back().order == f.order &&
            out.back().shift == f.shift)
            out.back().exp += f.exp;
        else
            out.push_back(f);
    }
    std::erase_if(out, [](const CFactor& f) { return f.exp == 0; });
    return out;
}

inline void cpoly_add(CPoly& into, const CPoly& other, long long scale = 1) {
    for (const auto& [key, K] : other) {
        long long& slot = into[key];
        slot += scale * K;
        if (slot == 0) into.erase(key);
    }
}

inline CPoly cpoly_mul_monomial(const CPoly& a, const CMonomialKey& m, long long K = 1) {
    CPoly out;
    for (const auto& [key, Ka] : a) {
        CMonomialKey merged = key;
        merged.insert(merged.end(), m.begin(), m.end());
        out[canonical(std::move(merged))] += Ka * K;
    }
    return out;
}

}  // namespace detail

struct CkSet {
    int n = 0;
    int p = 0;
    OpSpec op;
    std::map<int, CPoly> C;  // k -> C_k, for k = p+1 .. n
    CMonomialKey W;          // the shift-ratio normalizer divided out (empty = 1)
};

// Executes the reduction recursion symbolically and assembles the C_k lists.
// Every A_{q,j} is carried as a linear combination over the original
// coefficients A_{0,0..n} (index n = the implicit leading 1), with CPoly
// entries as the combination coefficients.
inline CkSet build_Ck(int n, int p, const OpSpec& op) {
    if (p < 0 || p > n - 1) throw error("build_Ck: need 0 <= p <= n-1");
    using ALin = std::vector<CPoly>;  // size n+1, index = original coefficient
    CPoly unit{{CMonomialKey{}, 1}};
    auto lin_of = [&](int k) {
        ALin v(static_cast<size_t>(n) + 1);
        v[static_cast<size_t>(k)] = unit;
        return v;
    };
    // row 0: A_{0,j}; entry n stands for the constant function 1
    std::vector<ALin> row;
    for (int j = 0; j <= n; ++j) row.push_back(lin_of(j));
    auto mono = [&](int r, int order, int num_shift, int den_shift) {
        CMonomialKey m;
        m.push_back({r, order, num_shift, 1});
        m.push_back({r, 0, den_shift, -1});
        return detail::canonical(std::move(m));
    };
    for (int q = 1; q <= p; ++q) {
        std::vector<ALin> next;
        auto prev_at = [&](int k) -> const ALin& {
            return (k == n - q + 1) ? row[static_cast<size_t>(n)] : row[static_cast<size_t>(k)];
        };
        for (int j = 0; j <= n - q - 1; ++j) {
            ALin acc(static_cast<size_t>(n) + 1);
            auto accumulate = [&](const ALin& src, const CMonomialKey& m, long long K) {
                for (int t = 0; t <= n; ++t)
                    if (!src[static_cast<size_t>(t)].empty())
                        detail::cpoly_add(acc[static_cast<size_t>(t)],
                                          detail::cpoly_mul_monomial(src[static_cast<size_t>(t)], m, K));
            };
            if (op.kind == OpKind::derivative) {
                accumulate(prev_at(j + 1), CMonomialKey{}, 1);
                for (int k = j + 2; k <= n - q + 1; ++k)
                    accumulate(prev_at(k), mono(q - 1, k - j - 1, 0, 0),
                               static_cast<long long>(std::llround(binom(k, j + 1))));
            } else {
                for (int k = j + 1; k <= n - q + 1; ++k)
                    accumulate(prev_at(k), mono(q - 1, k - j - 1, j + 1, n - q + 1),
                               static_cast<long long>(std::llround(binom(k, j + 1))));
            }
            next.push_back(std::move(acc));
        }
        // re-index: next[j] for j = 0..n-q-1; slot n keeps the implicit leading 1
        std::vector<ALin> padded(static_cast<size_t>(n) + 1,
                                 ALin(static_cast<size_t>(n) + 1));
        for (int j = 0; j <= n - q - 1; ++j) padded[static_cast<size_t>(j)] = next[static_cast<size_t>(j)];
        padded[static_cast<size_t>(n)] = lin_of(n);
        row = std::move(padded);
    }
    // row now holds A_{p,i}: -A_{p,0} = D^{n-p} f_{p,1}/f_{p,1} + sum_i A_{p,i} D^i f_{p,1}/f_{p,1}
    // Collect S_k = sum over i of (coefficient of A_{0,k} in A_{p,i}) * M_i,
    // with i = n-p contributed by the implicit leading 1.
    std::vector<CPoly> S(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n - p; ++i) {
        CMonomialKey Mi = (i == 0) ? CMonomialKey{} : mono(p, i, 0, 0);
        const ALin& Ai = (i == n - p) ? row[static_cast<size_t>(n)] : row[static_cast<size_t>(i)];
        for (int k = 0; k <= n; ++k)
            if (!Ai[static_cast<size_t>(k)].empty())
                detail::cpoly_add(S[static_cast<size_t>(k)],
                                  detail::cpoly_mul_monomial(Ai[static_cast<size_t>(k)], Mi));
    }
    for (int k = 0; k < p; ++k)
        if (!S[static_cast<size_t>(k)].empty())
            throw error("build_Ck: internal: coefficient below index p survived");
    const CPoly& Sp = S[static_cast<size_t>(p)];
    if (Sp.size() != 1 || Sp.begin()->second != 1)
        throw error("build_Ck: internal: normalizer is not a single unit monomial");
    CMonomialKey W = Sp.begin()->first;
    CMonomialKey Winv = W;
    for (auto& f : Winv) f.exp = -f.exp;
    CkSet out;
    out.n = n;
    out.p = p;
    out.op = op;
    out.W = W;
    for (int k = p + 1; k <= n; ++k) {
        CPoly Ck = detail::cpoly_mul_monomial(S[static_cast<size_t>(k)], Winv);
        // invariants: positive integer constants; orders sum to k - p
        for (const auto& [key, K] : Ck) {
            if (K <= 0) throw error("build_Ck: internal: non-positive constant");
            int order_sum = 0;
            for (const auto& f : key)
                if (f.exp > 0) order_sum += f.order * f.exp;
            if (order_sum != k - p) throw error("build_Ck: internal: order-sum constraint violated");
        }
        out.C[k] = std::move(Ck);
    }
    return out;
}

// multi-index (l_0, ..., l_p) of a monomial: the operator order per row
inline std::vector<int> monomial_multi_index(const CMonomialKey& key, int p) {
    std::vector<int> l(static_cast<size_t>(p) + 1, 0);
    for (const auto& f : key)
        if (f.exp > 0 && f.order > 0) l[static_cast<size_t>(f.row)] += f.order * f.exp;
    return l;
}

// `reduce` subcommand format: one line per monomial `k; l0,...,lp; K`
inline std::string render_Ck(const CkSet& cks) {
    std::ostringstream os;
    for (const auto& [k, poly] : cks.C) {
        for (const auto& [key, K] : poly) {
            os << k << "; ";
            auto l = monomial_multi_index(key, cks.p);
            for (size_t i = 0; i < l.size(); ++i) os << (i ? "," : "") << l[i];
            os << "; " << K << "\n";
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// numeric evaluation of the identity -A_p = C_n + A_{n-1} C_{n-1} + ... + A_{p+1} C_{p+1}

struct skip_sample : error {
    using error::error;
};

class MonomialEvaluator {
  public:
    MonomialEvaluator(const ReductionTable& t) : t_(t) {}

    const Expr& factor_expr(int row, int order, int shiftv) {
        auto key = std::make_tuple(row, order, shiftv);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        Expr e = apply_shift(apply_op_n(t_.rows[static_cast<size_t>(row)][0], t_.op, order), t_.op,
                             shiftv);
        return cache_.emplace(key, std::move(e)).first->second;
    }

    LogValue eval_monomial(const CMonomialKey& key, long long K, cplx z) {
        LogValue acc = LogValue::from(static_cast<double>(K));
        for (const auto& f : key) {
            LogValue v = factor_expr(f.row, f.order, f.shift).eval_log(z);
            if (f.exp < 0 && (v.is_zero() || v.logmag < -276.0))
                throw skip_sample("denominator vanishes at sample");
            if (v.is_inf()) throw skip_sample("factor overflows at sample");
            for (int e = 0; e < std::abs(f.exp); ++e) acc = (f.exp > 0) ? acc * v : acc / v;
        }
        return acc;
    }

    LogValue eval_cpoly(const CPoly& poly, cplx z) {
        LogValue acc = LogValue::zero();
        for (const auto& [key, K] : poly) acc = acc + eval_monomial(key, K, z);
        return acc;
    }

  private:
    const ReductionTable& t_;
    std::map<std::tuple<int, int, int>, Expr> cache_;
};

struct ResidualReport {
    double max_residual = 0.0;
    cplx worst_point = 0.0;
    int skipped_samples = 0;
    int used_samples = 0;
};

inline ResidualReport identity_residual(const std::vector<Expr>& A, const ReductionTable& t, int p,
                                        const std::vector<cplx>& samples) {
    CkSet cks = build_Ck(t.n, p, t.op);
    MonomialEvaluator ev(t);
    ResidualReport rep;
    for (cplx z : samples) {
        try {
            LogValue Ap = A[static_cast<size_t>(p)].eval_log(z);
            std::vector<LogValue> terms{Ap};
            terms.push_back(ev.eval_cpoly(cks.C.at(t.n), z));
            for (int j = p + 1; j <= t.n - 1; ++j)
                terms.push_back(A[static_cast<size_t>(j)].eval_log(z) * ev.eval_cpoly(cks.C.at(j), z));
            LogValue sum = LogValue::zero();
            for (const auto& tv : terms) {
                if (tv.is_inf()) throw skip_sample("term overflow");
                sum = sum + tv;
            }
            double denom_log = std::max(0.0, Ap.is_zero() ? 0.0 : Ap.logmag);
            double res = sum.is_zero() ? 0.0 : std::exp(sum.logmag - denom_log);
            ++rep.used_samples;
            if (res > rep.max_residual) {
                rep.max_residual = res;
                rep.worst_point = z;
            }
        } catch (const skip_sample&) {
            ++rep.skipped_samples;
        }
    }
    if (rep.used_samples == 0) throw error("identity_residual: all samples were skipped");
    return rep;
}

// ---------------------------------------------------------------------------
// jet-based path for numerically generated bases (derivative kind only)

// base_jets: for the current sample point, jets of f_{0,1..n} with enough
// spare orders to survive the quotient tower plus D^{n-p}.
inline double identity_residual_jets(const std::vector<Expr>& A, int p,
                                     const std::vector<Jet>& base_jets, cplx z) {
    int n = static_cast<int>(base_jets.size());
    CkSet cks = build_Ck(n, p, OpSpec{OpKind::derivative});
    // build the quotient table rows as jets
    std::vector<std::vector<Jet>> rows{base_jets};
    for (int q = 1; q <= p; ++q) {
        std::vector<Jet> row;
        for (int s = 1; s <= n - q; ++s)
            row.push_back(derivative(rows[static_cast<size_t>(q - 1)][static_cast<size_t>(s)] /
                                     rows[static_cast<size_t>(q - 1)][0]));
        rows.push_back(std::move(row));
    }
    auto factor_value = [&](const CFactor& f) -> cplx {
        const Jet& u = rows[static_cast<size_t>(f.row)][0];
        return u.deriv(static_cast<size_t>(f.order));
    };
    auto eval_poly = [&](const CPoly& poly) -> cplx {
        cplx acc = 0.0;
        for (const auto& [key, K] : poly) {
            cplx m = static_cast<double>(K);
            for (const auto& f : key) {
                cplx v = factor_value(f);
                if (f.exp < 0 && std::abs(v) < 1e-120) throw skip_sample("denominator vanishes");
                for (int e = 0; e < std::abs(f.exp); ++e) m = (f.exp > 0) ? m * v : m / v;
            }
            acc += m;
        }
        return acc;
    };
    cplx Ap = A[static_cast<size_t>(p)].eval(z);
    cplx sum = Ap + eval_poly(cks.C.at(n));
    for (int j = p + 1; j <= n - 1; ++j) sum += A[static_cast<size_t>(j)].eval(z) * eval_poly(cks.C.at(j));
    return std::abs(sum) / (1.0 + std::abs(Ap));
}

}  // namespace nev
