#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "nev/logvalue.hpp"

namespace nev {

// log Gamma(z), Lanczos approximation (g = 7, 9 coefficients), principal
// branch, reflection formula for Re z < 0.5. Relative error ~1e-13 away
// from the poles.
inline cplx log_gamma(cplx z) {
    static const double g = 7.0;
    static const double c[9] = {
        0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
        771.32342877765313,      -176.61502916214059,   12.507343278686905,
        -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
    if (z.real() < 0.5) {
        // log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
        cplx s = std::sin(kPi * z);
        if (s == cplx(0.0, 0.0)) throw std::domain_error("log_gamma: pole at nonpositive integer");
        // keep the imaginary part continuous enough for our sampling regions
        return std::log(kPi) - std::log(s) - log_gamma(1.0 - z);
    }
    z -= 1.0;
    cplx x = c[0];
    for (int i = 1; i < 9; ++i) x += c[i] / (z + static_cast<double>(i));
    cplx t = z + g + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

inline LogValue gamma_log(cplx z) {
    cplx lg = log_gamma(z);
    return {lg.real(), lg.imag()};
}

inline cplx gamma_fn(cplx z) { return std::exp(log_gamma(z)); }

// digamma = Gamma'/Gamma; recurrence up to Re z >= 8, then the asymptotic
// series. Used only so that differentiation stays closed over gamma nodes.
inline cplx digamma(cplx z) {
    if (z.real() < 0.5) {
        // reflection: psi(1-z) - psi(z) = pi cot(pi z)
        return digamma(1.0 - z) - kPi / std::tan(kPi * z);
    }
    cplx acc = 0.0;
    while (z.real() < 8.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    cplx inv = 1.0 / z, inv2 = inv * inv;
    cplx r = std::log(z) - 0.5 * inv -
             inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
    return acc + r;
}

// Mittag-Leffler E_alpha(z) = sum z^k / Gamma(alpha k + 1), direct series with
// compensated (Kahan) summation, truncated once the term drops below
// 1e-18 * |partial sum|. Valid at desk radii (value must fit in a double).
// Terms and the sum are carried in long double: the series is ill-conditioned
// for Re z strongly negative (alternating terms up to e^{|z|} cancel down to
// e^{Re z}), and the extra mantissa bits keep the final double accurate.
inline cplx mittag_leffler(double alpha, cplx z, int deriv = 0) {
    if (alpha <= 0.0) throw std::domain_error("mittag_leffler: alpha must be positive");
    using cld = std::complex<long double>;
    // at z = 0 only the k = deriv term survives, with weight k = 1 when deriv = 1
    if (z == 0.0)
        return {static_cast<double>(std::exp(-std::lgamma(alpha * static_cast<long double>(deriv) + 1.0L))), 0.0};
    cld sum = 0.0L, comp = 0.0L;
    cld lz = std::log(cld(z));  // each term built in log scale: z^(k-deriv) may not fit a double
    long double az = std::abs(cld(z));
    for (int k = deriv; k < 100000; ++k) {
        long double kk = (deriv == 1) ? static_cast<long double>(k) : 1.0L;
        cld lterm = static_cast<long double>(k - deriv) * lz -
                    std::lgamma(alpha * static_cast<long double>(k) + 1.0L);
        if (lterm.real() > 705.0L)
            throw std::overflow_error("mittag_leffler: series overflow at this radius");
        cld term = kk * std::exp(lterm);
        cld y = term - comp;
        cld t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if (std::abs(term) < 1e-18L * (std::abs(sum) + 1e-300L) && k > 4 &&
            static_cast<long double>(k) > az)
            break;
        if (!std::isfinite(static_cast<double>(sum.real())) ||
            !std::isfinite(static_cast<double>(sum.imag())))
            throw std::overflow_error("mittag_leffler: series overflow at this radius");
    }
    return {static_cast<double>(sum.real()), static_cast<double>(sum.imag())};
}

}  // namespace nev
