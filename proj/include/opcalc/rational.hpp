#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <string>
#include <variant>

#include "errors.hpp"

namespace opcalc {

using cplx = std::complex<double>;

/// 17 significant digits; round-trips every double.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Exact rational with 64-bit parts. Normalized: gcd(num, den) = 1, den > 0.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)
    Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

    std::int64_t num() const noexcept { return num_; }
    std::int64_t den() const noexcept { return den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    bool is_integer() const noexcept { return den_ == 1; }

    std::string to_string() const {
        return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                         static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw DomainError("rational division by zero");
        return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }
    Rational operator-() const { return Rational(-num_, den_); }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational&, const Rational&) = default;

private:
    std::int64_t num_ = 0;
    std::int64_t den_ = 1;

    void assign(std::int64_t n, std::int64_t d) {
        if (d == 0) throw DomainError("rational with zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        std::int64_t g = std::gcd(n, d);
        if (g == 0) g = 1;
        num_ = n / g;
        den_ = d / g;
    }

    static Rational from_wide(__int128 n, __int128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n;
        __int128 b = d;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        constexpr __int128 lim = INT64_MAX;
        if (n > lim || n < -lim || d > lim) throw OverflowError("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }
};

/// Shift component: exact rational where the source is exact, complex otherwise.
class Exponent {
public:
    Exponent() : v_(Rational(0)) {}
    Exponent(Rational r) : v_(r) {}                   // NOLINT(google-explicit-constructor)
    Exponent(std::int64_t n) : v_(Rational(n)) {}     // NOLINT(google-explicit-constructor)
    Exponent(int n) : v_(Rational(n)) {}              // NOLINT(google-explicit-constructor)
    Exponent(double x) : v_(cplx(x, 0.0)) {}          // NOLINT(google-explicit-constructor)
    Exponent(cplx z) : v_(z) {}                       // NOLINT(google-explicit-constructor)

    bool is_exact() const noexcept { return std::holds_alternative<Rational>(v_); }
    const Rational& exact() const { return std::get<Rational>(v_); }

    cplx value() const {
        if (is_exact()) return {exact().to_double(), 0.0};
        return std::get<cplx>(v_);
    }

    friend Exponent operator+(const Exponent& a, const Exponent& b) {
        if (a.is_exact() && b.is_exact()) return a.exact() + b.exact();
        return a.value() + b.value();
    }
    friend Exponent operator*(const Exponent& a, std::int64_t k) {
        if (a.is_exact()) return a.exact() * Rational(k);
        return a.value() * static_cast<double>(k);
    }

    /// Structural equality: exact values compare exactly, inexact compare bitwise.
    friend bool operator==(const Exponent& a, const Exponent& b) {
        if (a.is_exact() != b.is_exact()) return false;
        if (a.is_exact()) return a.exact() == b.exact();
        return a.value() == b.value();
    }

    std::string to_string() const {
        if (is_exact()) return exact().to_string();
        cplx z = value();
        std::string s = format_double(z.real());
        if (z.imag() != 0.0) s += (z.imag() < 0 ? "-" : "+") + format_double(std::abs(z.imag())) + "i";
        return s;
    }

private:
    std::variant<Rational, cplx> v_;
};

}  // namespace opcalc
