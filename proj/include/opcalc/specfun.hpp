#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"
#include "quad.hpp"
#include "rational.hpp"

namespace opcalc::specfun {

inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;

/// Absolute distance below which an argument counts as sitting on a pole.
inline constexpr double pole_window = 1e-12;

namespace detail {

inline constexpr double sqrt_2pi = 2.5066282746310005024;
inline constexpr double lanczos_g = 7.0;
inline constexpr std::array<double, 9> lanczos_c = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Bernoulli numbers B_2 .. B_16 for the digamma/trigamma asymptotic series.
inline constexpr std::array<double, 8> bernoulli_even = {
    1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};

inline bool near_nonpositive_integer(double x) {
    if (x > pole_window) return false;
    return std::abs(x - std::round(x)) < pole_window;
}

inline bool near_nonpositive_integer(cplx z) {
    return std::abs(z.imag()) < pole_window && near_nonpositive_integer(z.real());
}

template <class T>
std::string show(T z) {
    if constexpr (std::is_same_v<T, double>) {
        return format_double(z);
    } else {
        return Exponent(cplx(z)).to_string();
    }
}

template <class T>
void check_pole(T z, const char* fn) {
    if (near_nonpositive_integer(z)) throw PoleError(std::string(fn) + ": pole at " + show(z));
}

}  // namespace detail

/// sin(pi x) with exact argument reduction; exact zeros at integers.
inline double sin_pi(double x) {
    double r = std::fmod(x, 2.0);
    if (r > 1.0) r -= 2.0;
    if (r < -1.0) r += 2.0;
    if (r > 0.5) r = 1.0 - r;
    if (r < -0.5) r = -1.0 - r;
    return std::sin(pi * r);
}

inline double cos_pi(double x) {
    double r = std::fmod(std::abs(x), 2.0);
    if (r > 1.0) r = 2.0 - r;
    if (r < 0.25) return std::cos(pi * r);
    return std::sin(pi * (0.5 - r));
}

inline cplx sin_pi(cplx z) {
    if (z.imag() == 0.0) return sin_pi(z.real());
    return std::sin(pi * z);
}

inline cplx cos_pi(cplx z) {
    if (z.imag() == 0.0) return cos_pi(z.real());
    return std::cos(pi * z);
}

// ---------------------------------------------------------------- gamma family

namespace detail {

template <class T>
T lanczos_sum(T z) {
    T a = lanczos_c[0];
    for (int i = 1; i < 9; ++i) a += lanczos_c[i] / (z + static_cast<double>(i));
    return a;
}

}  // namespace detail

/// Gamma function; relative accuracy ~1e-14 on the real line.
inline double gamma(double x) {
    if (std::isnan(x)) return x;
    detail::check_pole(x, "gamma");
    if (x > 171.61447887182298) throw OverflowError("gamma overflows at " + format_double(x));
    if (x < 0.5) {
        double s = sin_pi(x);
        if (1.0 - x > 171.0) {
            // |Gamma(x)| underflows towards 0; go through logarithms.
            double z = 1.0 - x - 1.0;
            double t = z + detail::lanczos_g + 0.5;
            double lg = 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(detail::lanczos_sum(z));
            double mag = std::exp(std::log(pi) - std::log(std::abs(s)) - lg);
            return s < 0 ? -mag : mag;
        }
        return pi / (s * gamma(1.0 - x));
    }
    if (x == std::floor(x)) {
        double f = 1.0;  // exact through 22!
        for (double k = 2.0; k < x; k += 1.0) f *= k;
        return f;
    }
    // Upward recurrence from [9, 10): each factor adds at most half an ulp,
    // while a large Lanczos exponent would amplify the rounding of t.
    double y = x;
    double prod = 1.0;
    if (x >= 10.0) {
        y = x - (std::floor(x) - 9.0);
        for (double v = y; v < x; v += 1.0) prod *= v;
    }
    double z = y - 1.0;
    double t = z + detail::lanczos_g + 0.5;
    return detail::sqrt_2pi * std::pow(t, z + 0.5) * std::exp(-t) * detail::lanczos_sum(z) * prod;
}

inline cplx gamma(cplx z) {
    if (z.imag() == 0.0) return gamma(z.real());
    detail::check_pole(z, "gamma");
    if (z.real() < 0.5) return pi / (std::sin(pi * z) * gamma(1.0 - z));
    cplx w = z - 1.0;
    cplx t = w + detail::lanczos_g + 0.5;
    return detail::sqrt_2pi * std::exp((w + 0.5) * std::log(t) - t) * detail::lanczos_sum(w);
}

/// 1/Gamma: entire, exactly zero at the poles of Gamma.
inline double rgamma(double x) {
    if (detail::near_nonpositive_integer(x)) return 0.0;
    if (x > 171.61447887182298) return 0.0;
    return 1.0 / gamma(x);
}

inline cplx rgamma(cplx z) {
    if (detail::near_nonpositive_integer(z)) return 0.0;
    if (z.imag() == 0.0) return rgamma(z.real());
    return 1.0 / gamma(z);
}

/// log|Gamma(x)| for real x off the poles.
inline double log_gamma(double x) {
    detail::check_pole(x, "log_gamma");
    if (x <= 0.0) return std::log(pi) - std::log(std::abs(sin_pi(x))) - log_gamma(1.0 - x);
    if (x < 15.0) return std::log(std::abs(gamma(x)));
    double z = x - 1.0;
    double t = z + detail::lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(detail::lanczos_sum(z));
}

/// A logarithm of Gamma(z); equal to the principal log Gamma modulo 2 pi i.
inline cplx log_gamma(cplx z) {
    if (z.imag() == 0.0 && z.real() > 0.0) return log_gamma(z.real());
    detail::check_pole(z, "log_gamma");
    if (z.real() < 0.5) return std::log(pi) - std::log(std::sin(pi * z)) - log_gamma(1.0 - z);
    cplx w = z - 1.0;
    cplx t = w + detail::lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (w + 0.5) * std::log(t) - t + std::log(detail::lanczos_sum(w));
}

namespace detail {

template <class T>
T digamma_impl(T z) {
    check_pole(z, "digamma");
    if (std::real(z) < 0.5) {
        // psi(z) = psi(1 - z) - pi cot(pi z)
        return digamma_impl(T(1.0) - z) - pi * cos_pi(z) / sin_pi(z);
    }
    T acc = 0.0;
    while (std::abs(z) < 10.0) {
        acc -= 1.0 / z;
        z += 1.0;
    }
    T iz2 = 1.0 / (z * z);
    T term = iz2;
    T series = 0.0;
    for (int k = 1; k <= 8; ++k) {
        series += bernoulli_even[k - 1] / (2.0 * k) * term;
        term *= iz2;
    }
    return acc + std::log(z) - 0.5 / z - series;
}

template <class T>
T trigamma_impl(T z) {
    check_pole(z, "trigamma");
    if (std::real(z) < 0.5) {
        T s = sin_pi(z);
        return pi * pi / (s * s) - trigamma_impl(T(1.0) - z);
    }
    T acc = 0.0;
    while (std::abs(z) < 10.0) {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    T iz = 1.0 / z;
    T iz2 = iz * iz;
    T term = iz2 * iz;
    T series = 0.0;
    for (int k = 1; k <= 8; ++k) {
        series += bernoulli_even[k - 1] * term;
        term *= iz2;
    }
    return acc + iz + 0.5 * iz2 + series;
}

}  // namespace detail

inline double digamma(double x) { return detail::digamma_impl(x); }
inline cplx digamma(cplx z) { return detail::digamma_impl(z); }
inline double trigamma(double x) { return detail::trigamma_impl(x); }
inline cplx trigamma(cplx z) { return detail::trigamma_impl(z); }

inline double beta(double a, double b) {
    detail::check_pole(a, "beta");
    detail::check_pole(b, "beta");
    if (detail::near_nonpositive_integer(a + b)) return 0.0;
    if (a > 0 && b > 0 && a + b > 170.0) {
        return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
    }
    return gamma(a) * gamma(b) * rgamma(a + b);
}

inline cplx beta(cplx a, cplx b) {
    detail::check_pole(a, "beta");
    detail::check_pole(b, "beta");
    if (a.imag() == 0.0 && b.imag() == 0.0) return beta(a.real(), b.real());
    return gamma(a) * gamma(b) * rgamma(a + b);
}

/// Rising factorial (x)_n = Gamma(x + n)/Gamma(x).
inline double pochhammer(double x, double n) {
    if (n == 0.0) return 1.0;
    if (n > 0.0 && n == std::floor(n) && n <= 1000.0) {
        double p = 1.0;
        for (int k = 0; k < static_cast<int>(n); ++k) p *= x + k;
        return p;
    }
    bool xp = detail::near_nonpositive_integer(x);
    bool sp = detail::near_nonpositive_integer(x + n);
    if (xp && sp) {
        // Both poles: (x)_n = (-1)^n Gamma(1 - x)/Gamma(1 - x - n) for integer n.
        double ni = std::round(n);
        double sign = std::fmod(std::abs(ni), 2.0) == 1.0 ? -1.0 : 1.0;
        return sign * gamma(1.0 - x) * rgamma(1.0 - x - n);
    }
    if (xp) return 0.0;
    return gamma(x + n) * rgamma(x);
}

inline cplx pochhammer(cplx x, cplx n) {
    if (x.imag() == 0.0 && n.imag() == 0.0) return pochhammer(x.real(), n.real());
    return gamma(x + n) * rgamma(x);
}

// ------------------------------------------------------------- error function

namespace detail {

/// erfc by continued fraction (modified Lentz), x >= 2.
inline double erfc_cf(double x) {
    // erfc x = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    const double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 5000; ++k) {
        double a = 0.5 * k;
        d = x + a * d;
        d = std::abs(d) < tiny ? tiny : d;
        c = x + a / c;
        c = std::abs(c) < tiny ? tiny : c;
        d = 1.0 / d;
        double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x * x) / (std::sqrt(pi) * f);
}

/// erf by the positive-term series exp(-x^2) 2x/sqrt(pi) sum (2x^2)^n/(2n+1)!!.
inline double erf_series(double x) {
    double x2 = x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 500; ++n) {
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return 2.0 * x / std::sqrt(pi) * std::exp(-x2) * sum;
}

}  // namespace detail

inline double erf(double x) {
    if (x < 0) return -erf(-x);
    if (x < 2.0) return detail::erf_series(x);
    return 1.0 - detail::erfc_cf(x);
}

inline double erfc(double x) {
    if (x < 2.0) return 1.0 - erf(x);
    return detail::erfc_cf(x);
}

// ------------------------------------------------------------------- Bessel

namespace detail {

/// Power series for I_nu, nu in {0, 1}; long double accumulation.
inline long double bessel_i_series(int nu, double x) {
    long double q = static_cast<long double>(x) * x / 4.0L;
    long double term = nu == 0 ? 1.0L : static_cast<long double>(x) / 2.0L;
    long double sum = term;
    for (int k = 1; k < 1000; ++k) {
        term *= q / (static_cast<long double>(k) * (k + nu));
        sum += term;
        if (term < 1e-21L * sum) break;
    }
    return sum;
}

/// Asymptotic series for e^{-x} I_nu(x), x > 30.
inline double bessel_i_scaled_asym(int nu, double x) {
    double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        double odd = 2.0 * k - 1.0;
        double next = -term * (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term)) break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * pi * x);
}

}  // namespace detail

/// e^{-|x|} I_0(x).
inline double bessel_i0_scaled(double x) {
    double ax = std::abs(x);
    if (ax <= 30.0) return static_cast<double>(detail::bessel_i_series(0, ax) * std::exp(-static_cast<long double>(ax)));
    return detail::bessel_i_scaled_asym(0, ax);
}

/// e^{-|x|} I_1(x).
inline double bessel_i1_scaled(double x) {
    double ax = std::abs(x);
    double v = ax <= 30.0 ? static_cast<double>(detail::bessel_i_series(1, ax) * std::exp(-static_cast<long double>(ax)))
                          : detail::bessel_i_scaled_asym(1, ax);
    return x < 0 ? -v : v;
}

inline double bessel_i0(double x) {
    double ax = std::abs(x);
    if (ax <= 30.0) return static_cast<double>(detail::bessel_i_series(0, ax));
    if (ax > 713.0) throw OverflowError("bessel_i0 overflows at " + format_double(x));
    return bessel_i0_scaled(ax) * std::exp(ax);
}

inline double bessel_i1(double x) {
    double ax = std::abs(x);
    double v;
    if (ax <= 30.0) {
        v = static_cast<double>(detail::bessel_i_series(1, ax));
    } else {
        if (ax > 713.0) throw OverflowError("bessel_i1 overflows at " + format_double(x));
        v = bessel_i1_scaled(ax) * std::exp(ax);
    }
    return x < 0 ? -v : v;
}

inline double bessel_j0(double x) {
    double ax = std::abs(x);
    if (ax <= 17.0) {
        long double q = -static_cast<long double>(ax) * ax / 4.0L;
        long double term = 1.0L;
        long double sum = 1.0L;
        for (int k = 1; k < 200; ++k) {
            term *= q / (static_cast<long double>(k) * k);
            sum += term;
            if (std::abs(term) < 1e-22L) break;
        }
        return static_cast<double>(sum);
    }
    // Hankel asymptotic expansion: J0 = sqrt(2/(pi x)) (P cos chi - Q sin chi).
    double P = 0.0, Q = 0.0;
    double a = 1.0;  // a_k(0) / x^k with alternating sign folded in below
    for (int k = 0; k < 200; ++k) {
        if (k > 0) {
            double odd = 2.0 * k - 1.0;
            double next = a * (-odd * odd) / (8.0 * k * ax);
            if (std::abs(next) >= std::abs(a) && k > 2) break;
            a = next;
        }
        // P = sum (-1)^m a_{2m}, Q = sum (-1)^m a_{2m+1}
        int m = k / 2;
        double sgn = (m % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0)
            P += sgn * a;
        else
            Q += sgn * a;
        if (std::abs(a) < 1e-17) break;
    }
    double chi = ax - pi / 4.0;
    return std::sqrt(2.0 / (pi * ax)) * (P * std::cos(chi) - Q * std::sin(chi));
}

/// Complete elliptic integral of the first kind, modulus k, by AGM.
inline double elliptic_k(double k) {
    if (!(std::abs(k) < 1.0)) throw DomainError("elliptic_k requires |k| < 1");
    double a = 1.0;
    double b = std::sqrt((1.0 - k) * (1.0 + k));
    for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
        double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return pi / (a + b);
}

// ------------------------------------------------------------------- zeta

namespace detail {

/// Cohen-Villegas-Zagier weights for eta(s) = sum (-1)^k w_k (k+1)^{-s}.
struct EtaWeights {
    static constexpr int n = 40;
    std::array<double, n> w{};

    EtaWeights() {
        // d_k = n sum_{i<=k} (n+i-1)! 4^i / ((n-i)! (2i)!); w_k = (d_n - d_k)/d_n.
        std::array<double, n + 1> term{};
        term[0] = 1.0;
        for (int i = 1; i <= n; ++i)
            term[i] = term[i - 1] * 4.0 * (n + i - 1.0) * (n - i + 1.0) / ((2.0 * i) * (2.0 * i - 1.0));
        double dn = 0.0;
        for (double t : term) dn += t;
        double suffix = 0.0;
        for (int k = n - 1; k >= 0; --k) {
            suffix += term[k + 1];
            w[k] = suffix / dn;
        }
    }
};

inline const EtaWeights& eta_weights() {
    static const EtaWeights weights;
    return weights;
}

}  // namespace detail

/// Riemann zeta for Re s > 0, s != 1, via the alternating (eta) series.
inline cplx zeta(cplx s) {
    if (!(s.real() > 0.0)) throw DomainError("zeta requires Re s > 0");
    if (std::abs(s - 1.0) < 1e-14) throw PoleError("zeta: pole at s = 1");
    const auto& w = detail::eta_weights().w;
    cplx eta = 0.0;
    for (int k = detail::EtaWeights::n - 1; k >= 0; --k) {
        cplx term = w[k] * std::exp(-s * std::log(static_cast<double>(k + 1)));
        eta += (k % 2 == 0) ? term : -term;
    }
    return eta / (1.0 - std::exp((1.0 - s) * std::log(2.0)));
}

inline double zeta(double s) { return zeta(cplx(s, 0.0)).real(); }

/// d^order zeta / ds^order for order in {1, 2}, real s > 0, s != 1.
/// Richardson-extrapolated central differences (4 levels).
inline double zeta_deriv(int order, double s) {
    if (order != 1 && order != 2) throw DomainError("zeta_deriv supports order 1 or 2");
    if (!(s > 0.0) || s == 1.0) throw DomainError("zeta_deriv requires s > 0, s != 1");
    double h = order == 1 ? 1e-3 : 1e-2;
    h = std::min({h, std::abs(s - 1.0) / 4.0, s / 4.0});
    auto diff = [&](double hh) {
        if (order == 1) return (zeta(s + hh) - zeta(s - hh)) / (2.0 * hh);
        return (zeta(s + hh) - 2.0 * zeta(s) + zeta(s - hh)) / (hh * hh);
    };
    std::array<std::array<double, 4>, 4> r{};
    for (int i = 0; i < 4; ++i) {
        r[i][0] = diff(h / std::ldexp(1.0, i));
        double f = 1.0;
        for (int k = 1; k <= i; ++k) {
            f *= 4.0;
            r[i][k] = (f * r[i][k - 1] - r[i - 1][k - 1]) / (f - 1.0);
        }
    }
    return r[3][3];
}

// ---------------------------------------------------------- polynomial families

namespace detail {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

inline constexpr int exact_limit = 60;
inline constexpr int poly_limit = 200;

inline cpp_rational exact(double x) {
    if (x == 0.0) return cpp_rational(0);
    int e = 0;
    double m = std::frexp(x, &e);
    auto mi = static_cast<long long>(std::ldexp(m, 53));
    e -= 53;
    cpp_rational r{cpp_int(mi)};
    if (e > 0) r *= cpp_rational(cpp_int(1) << e);
    if (e < 0) r /= cpp_rational(cpp_int(1) << -e);
    return r;
}

/// Rounds to double without overflowing on huge numerators/denominators.
inline double to_double(const cpp_rational& r) {
    cpp_int n = boost::multiprecision::numerator(r);
    cpp_int d = boost::multiprecision::denominator(r);
    if (n == 0) return 0.0;
    bool neg = n < 0;
    if (neg) n = -n;
    long shift = static_cast<long>(boost::multiprecision::msb(d)) - static_cast<long>(boost::multiprecision::msb(n)) + 64;
    if (shift >= 0)
        n <<= shift;
    else
        d <<= -shift;
    cpp_int q = n / d;
    double v = std::ldexp(q.convert_to<double>(), static_cast<int>(-shift));
    return neg ? -v : v;
}

inline void check_degree(int n, const char* fn) {
    if (n < 0 || n > poly_limit) throw DomainError(std::string(fn) + ": degree must lie in [0, 200]");
}

/// Euler numbers E_0..E_60 (E_odd = 0).
inline const std::vector<cpp_int>& euler_numbers() {
    static const std::vector<cpp_int> table = [] {
        std::vector<cpp_int> e(exact_limit + 1, 0);
        e[0] = 1;
        for (int m = 2; m <= exact_limit; m += 2) {
            cpp_int acc = 0;
            cpp_int binom = 1;  // C(m, j)
            for (int j = 0; j < m; ++j) {
                if (j % 2 == 0) acc += binom * e[j];
                binom = binom * (m - j) / (j + 1);
            }
            e[m] = -acc;
        }
        return e;
    }();
    return table;
}

inline cpp_rational euler_poly_exact(int n, const cpp_rational& x) {
    // E_n(x) = sum_k C(n,k) E_k / 2^k (x - 1/2)^{n-k}
    const auto& e = euler_numbers();
    cpp_rational y = x - cpp_rational(1, 2);
    std::vector<cpp_rational> ypow(n + 1);
    ypow[0] = 1;
    for (int i = 1; i <= n; ++i) ypow[i] = ypow[i - 1] * y;
    cpp_rational sum = 0;
    cpp_int binom = 1;
    for (int k = 0; k <= n; ++k) {
        if (k % 2 == 0) sum += cpp_rational(binom * e[k], cpp_int(1) << k) * ypow[n - k];
        binom = binom * (n - k) / (k + 1);
    }
    return sum;
}

/// E_n(x)/n! from the Fourier series, 0 <= x <= 1, n >= 1.
inline double euler_fourier_scaled(int n, double x) {
    double sum = 0.0;
    for (int k = 0; k < 100000; ++k) {
        double odd = 2.0 * k + 1.0;
        double term = sin_pi(odd * x - 0.5 * n) * std::pow(odd, -(n + 1.0));
        sum += term;
        if (std::pow(odd + 2.0, -(n + 1.0)) < 1e-18 * std::abs(sum)) break;
    }
    return 4.0 * sum * std::exp(-(n + 1.0) * std::log(pi));
}

}  // namespace detail

/// Euler polynomial E_n(x). Exact rational arithmetic for n <= 60; above
/// that the Fourier series, valid for 0 <= x <= 1.
inline double euler_poly(int n, double x) {
    detail::check_degree(n, "euler_poly");
    if (n <= detail::exact_limit) return detail::to_double(detail::euler_poly_exact(n, detail::exact(x)));
    if (x < 0.0 || x > 1.0) throw DomainError("euler_poly: degree above 60 requires 0 <= x <= 1");
    return detail::euler_fourier_scaled(n, x) * std::exp(log_gamma(n + 1.0));
}

/// E_n(x)/n!, finite for every supported n.
inline double euler_poly_scaled(int n, double x) {
    detail::check_degree(n, "euler_poly");
    if (n <= detail::exact_limit) {
        detail::cpp_rational v = detail::euler_poly_exact(n, detail::exact(x));
        detail::cpp_int fact = 1;
        for (int i = 2; i <= n; ++i) fact *= i;
        return detail::to_double(v / detail::cpp_rational(fact));
    }
    if (x < 0.0 || x > 1.0) throw DomainError("euler_poly: degree above 60 requires 0 <= x <= 1");
    return detail::euler_fourier_scaled(n, x);
}

/// Physicists' Hermite polynomial H_n(x).
inline double hermite_poly(int n, double x) {
    detail::check_degree(n, "hermite_poly");
    if (n == 0) return 1.0;
    if (n <= detail::exact_limit) {
        detail::cpp_rational xr = detail::exact(x), h0 = 1, h1 = 2 * xr;
        for (int k = 1; k < n; ++k) {
            detail::cpp_rational h2 = 2 * xr * h1 - 2 * k * h0;
            h0 = std::move(h1);
            h1 = std::move(h2);
        }
        return detail::to_double(h1);
    }
    double h0 = 1.0, h1 = 2.0 * x;
    for (int k = 1; k < n; ++k) {
        double h2 = 2.0 * x * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

/// Generalized Laguerre polynomial L_n^{(alpha)}(x).
inline double laguerre_poly(int n, double alpha, double x) {
    detail::check_degree(n, "laguerre_poly");
    if (n == 0) return 1.0;
    if (n <= detail::exact_limit) {
        detail::cpp_rational a = detail::exact(alpha), xr = detail::exact(x);
        detail::cpp_rational l0 = 1, l1 = 1 + a - xr;
        for (int k = 1; k < n; ++k) {
            detail::cpp_rational l2 = ((2 * k + 1 + a - xr) * l1 - (k + a) * l0) / (k + 1);
            l0 = std::move(l1);
            l1 = std::move(l2);
        }
        return detail::to_double(l1);
    }
    double l0 = 1.0, l1 = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) {
        double l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    return l1;
}

// ------------------------------------------------------- eta and U functions

/// Dedekind eta at i x, x > 0. For x < 1 the modular relation
/// eta(i x) = eta(i/x)/sqrt(x) moves the argument into the fast q-product range.
inline double dedekind_eta(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("dedekind_eta requires x > 0");
    if (x < 1.0) return dedekind_eta(1.0 / x) / std::sqrt(x);
    const double q2 = std::exp(-2.0 * pi * x);
    double prod = 1.0;
    double qn = q2;
    while (qn >= 1e-17) {
        prod *= 1.0 - qn;
        qn *= q2;
    }
    return std::exp(-pi * x / 12.0) * prod;
}

/// Confluent hypergeometric U(a, b, z) for a > 0, z > 0 from
/// U = (1/Gamma(a)) int_0^inf e^{-zt} t^{a-1} (1+t)^{b-a-1} dt.
inline double hyper_u(double a, double b, double z) {
    if (!(a > 0.0) || !(z > 0.0)) throw DomainError("hyper_u requires a > 0 and z > 0");
    quad::IntegrandHints hints;
    hints.decay_scale = 1.0 / z;
    hints.endpoint_exponent = a - 1.0;
    auto r = quad::integrate_halfline(
        [&](double t) { return std::exp(-z * t + (a - 1.0) * std::log(t) + (b - a - 1.0) * std::log1p(t)); }, 1e-12,
        hints);
    if (!r.converged) throw ConvergenceError("hyper_u quadrature did not converge");
    return r.value.real() * rgamma(a);
}

// ------------------------------------------------------------ name dispatch

/// Names accepted by evaluate(); each entry lists its arity.
struct FunctionInfo {
    std::string_view name;
    int arity;
    std::string_view domain;
};

inline constexpr std::array<FunctionInfo, 19> function_table = {{
    {"gamma", 1, "real x, x not a nonpositive integer"},
    {"log_gamma", 1, "real x off the poles; returns log|Gamma|"},
    {"digamma", 1, "real x off the poles"},
    {"trigamma", 1, "real x off the poles"},
    {"beta", 2, "real a, b off the poles"},
    {"pochhammer", 2, "real x, n"},
    {"erf", 1, "real x"},
    {"erfc", 1, "real x"},
    {"bessel_i0", 1, "real x"},
    {"bessel_i1", 1, "real x"},
    {"bessel_j0", 1, "real x"},
    {"elliptic_k", 1, "|k| < 1"},
    {"zeta", 1, "s > 0, s != 1"},
    {"zeta_deriv1", 1, "s > 0, s != 1"},
    {"euler_poly", 2, "n in [0, 200], x"},
    {"hermite_poly", 2, "n in [0, 200], x"},
    {"laguerre_poly", 3, "n in [0, 200], alpha, x"},
    {"dedekind_eta", 1, "x > 0 (argument i x)"},
    {"hyper_u", 3, "a > 0, b, z > 0"},
}};

inline int degree_arg(double v) {
    if (v != std::floor(v)) throw DomainError("polynomial degree must be an integer");
    if (v < 0 || v > detail::poly_limit) throw DomainError("polynomial degree must lie in [0, 200]");
    return static_cast<int>(v);
}

/// Evaluates a special function by name; used by the CLI for debugging.
inline double evaluate(std::string_view name, std::span<const double> args) {
    const FunctionInfo* info = nullptr;
    for (const auto& f : function_table)
        if (f.name == name) info = &f;
    if (!info) throw DomainError("unknown special function '" + std::string(name) + "'");
    if (static_cast<int>(args.size()) != info->arity)
        throw DomainError(std::string(name) + " takes " + std::to_string(info->arity) + " argument(s)");
    const auto& a = args;
    if (name == "gamma") return gamma(a[0]);
    if (name == "log_gamma") return log_gamma(a[0]);
    if (name == "digamma") return digamma(a[0]);
    if (name == "trigamma") return trigamma(a[0]);
    if (name == "beta") return beta(a[0], a[1]);
    if (name == "pochhammer") return pochhammer(a[0], a[1]);
    if (name == "erf") return erf(a[0]);
    if (name == "erfc") return erfc(a[0]);
    if (name == "bessel_i0") return bessel_i0(a[0]);
    if (name == "bessel_i1") return bessel_i1(a[0]);
    if (name == "bessel_j0") return bessel_j0(a[0]);
    if (name == "elliptic_k") return elliptic_k(a[0]);
    if (name == "zeta") return zeta(a[0]);
    if (name == "zeta_deriv1") return zeta_deriv(1, a[0]);
    if (name == "euler_poly") return euler_poly(degree_arg(a[0]), a[1]);
    if (name == "hermite_poly") return hermite_poly(degree_arg(a[0]), a[1]);
    if (name == "laguerre_poly") return laguerre_poly(degree_arg(a[0]), a[1], a[2]);
    if (name == "dedekind_eta") return dedekind_eta(a[0]);
    return hyper_u(a[0], a[1], a[2]);
}

}  // namespace opcalc::specfun
