#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace nev {

using cplx = std::complex<double>;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// A complex number stored as (log|w|, arg w). Survives magnitudes far beyond
// double range, e.g. exp(exp(z)) on |z| = 30. logmag = -inf encodes 0,
// logmag = +inf encodes overflow / evaluation at a pole.
struct LogValue {
    double logmag = kNegInf;
    double phase = 0.0;

    static LogValue zero() { return {kNegInf, 0.0}; }
    static LogValue infinite() { return {kPosInf, 0.0}; }

    static LogValue from(cplx w) {
        if (w == cplx(0.0, 0.0)) return zero();
        return {std::log(std::abs(w)), std::arg(w)};
    }

    bool is_zero() const { return logmag == kNegInf; }
    bool is_inf() const { return logmag == kPosInf; }
    bool finite() const { return std::isfinite(logmag); }

    // Reconstructs the plain value; overflows to inf past double range.
    cplx value() const {
        if (is_zero()) return {0.0, 0.0};
        return std::exp(logmag) * cplx(std::cos(phase), std::sin(phase));
    }

    // phase folded into (-pi, pi]
    double principal_phase() const {
        double p = std::remainder(phase, 2.0 * kPi);
        if (p <= -kPi) p += 2.0 * kPi;
        return p;
    }
};

inline LogValue operator*(const LogValue& a, const LogValue& b) {
    if (a.is_zero() || b.is_zero()) return LogValue::zero();
    return {a.logmag + b.logmag, a.phase + b.phase};
}

inline LogValue operator/(const LogValue& a, const LogValue& b) {
    if (a.is_zero()) return b.is_zero() ? LogValue::infinite() : LogValue::zero();
    if (b.is_zero()) return LogValue::infinite();
    return {a.logmag - b.logmag, a.phase - b.phase};
}

// Complex addition in log scale: factor out the larger magnitude.
inline LogValue operator+(const LogValue& a, const LogValue& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_inf() || b.is_inf()) return LogValue::infinite();
    const LogValue& big = (a.logmag >= b.logmag) ? a : b;
    const LogValue& small = (a.logmag >= b.logmag) ? b : a;
    double d = small.logmag - big.logmag;
    if (d < -745.0) return big;  // below double resolution entirely
    cplx s = std::polar(1.0, big.phase) + std::exp(d) * std::polar(1.0, small.phase);
    if (s == cplx(0.0, 0.0)) return LogValue::zero();
    return {big.logmag + std::log(std::abs(s)), std::arg(s)};
}

inline LogValue operator-(const LogValue& a, const LogValue& b) {
    LogValue nb = b;
    if (!nb.is_zero()) nb.phase += kPi;
    return a + nb;
}

// principal-branch power a^w for constant exponent w
inline LogValue pow(const LogValue& a, cplx w) {
    if (a.is_zero()) {
        if (w.real() > 0.0) return LogValue::zero();
        if (w == cplx(0.0, 0.0)) return LogValue::from(1.0);
        return LogValue::infinite();
    }
    if (a.is_inf()) return LogValue::infinite();
    // Log a on the principal branch
    cplx loga(a.logmag, a.principal_phase());
    cplx e = w * loga;
    return {e.real(), e.imag()};
}

}  // namespace nev
