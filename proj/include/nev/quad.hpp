#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nev/logvalue.hpp"

namespace nev {

struct quad_error : std::runtime_error {
    quad_error(const std::string& msg, double last, double prev)
        : std::runtime_error(msg + " (last two estimates " + std::to_string(last) + ", " +
                             std::to_string(prev) + ")"),
          last(last),
          prev(prev) {}
    double last, prev;
};

namespace quad {

inline constexpr int kStartNodes = 64;
inline constexpr int kMaxNodes = 1 << 17;

// Mean value of a 2pi-periodic function over one period: trapezoid rule with
// node doubling (equals the midpoint rule for periodic integrands, spectrally
// accurate when smooth). Stops when successive estimates differ < tol
// relative to the magnitude of the estimate, so very large integrands (disc
// coefficients near the boundary) still converge.
template <class F>
double periodic_mean(F&& f, double tol) {
    int n = kStartNodes;
    double h = 2.0 * kPi / n;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += f(j * h);
    double mean = sum / n;
    double prev = mean;
    auto close = [&](double slack) { return std::abs(mean - prev) < slack * tol * (1.0 + std::abs(mean)); };
    while (n < kMaxNodes) {
        // add midpoints of the current grid
        double msum = 0.0;
        for (int j = 0; j < n; ++j) msum += f((j + 0.5) * h);
        n *= 2;
        h *= 0.5;
        sum += msum;
        prev = mean;
        mean = sum / n;
        if (close(1.0)) return mean;
    }
    if (close(64.0)) return mean;  // slow kink-limited convergence
    throw quad_error("circle quadrature failed to converge", mean, prev);
}

// log of integral over [0,2pi) of exp(logf(theta)) d theta, accumulated as
// log-sum-exp so the integrand may exceed double range. logf may return -inf.
template <class F>
double log_periodic_integral(F&& logf, double tol) {
    auto pass = [&](int n) {
        double h = 2.0 * kPi / n;
        double peak = kNegInf;
        std::vector<double> vals(n);
        for (int j = 0; j < n; ++j) {
            vals[j] = logf(j * h);
            peak = std::max(peak, vals[j]);
        }
        if (peak == kNegInf) return kNegInf;
        double acc = 0.0;
        for (double v : vals) {
            double d = v - peak;
            if (d > -745.0) acc += std::exp(d);
        }
        return peak + std::log(acc * h);
    };
    int n = kStartNodes;
    double cur = pass(n);
    while (n < kMaxNodes) {
        n *= 2;
        double next = pass(n);
        bool close = (cur == kNegInf && next == kNegInf) || std::abs(next - cur) < tol;
        if (close) return next;
        cur = next;
    }
    throw quad_error("log-scale circle quadrature failed to converge", cur, cur);
}

// Adaptive trapezoid on [a,b] for a possibly mildly singular radial profile;
// plain interval doubling, good enough for the smooth profiles we integrate.
template <class F>
double interval_integral(F&& f, double a, double b, double tol) {
    int n = 32;
    auto pass = [&](int m) {
        double h = (b - a) / m;
        double s = 0.5 * (f(a) + f(b));
        for (int j = 1; j < m; ++j) s += f(a + j * h);
        return s * h;
    };
    double cur = pass(n);
    while (n < (1 << 15)) {
        n *= 2;
        double next = pass(n);
        if (std::abs(next - cur) < tol * (1.0 + std::abs(next))) return next;
        cur = next;
    }
    return cur;
}

}  // namespace quad
}  // namespace nev
