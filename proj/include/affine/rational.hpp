#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "affine/errors.hpp"

namespace affine {

/// Exact rational number over 64-bit integers, always kept in lowest terms
/// with a positive denominator. Intermediate products use 128-bit arithmetic;
/// results that do not fit back into 64 bits throw std::overflow_error rather
/// than silently wrapping.
class Rational {
public:
    using Int = std::int64_t;

    Rational() : num_(0), den_(1) {}
    Rational(Int n) : num_(n), den_(1) {} // NOLINT: implicit by design
    Rational(Int n, Int d) {
        if (d == 0) throw std::invalid_argument("Rational: zero denominator");
        from_i128(static_cast<__int128>(n), static_cast<__int128>(d));
    }

    Int num() const noexcept { return num_; }
    Int den() const noexcept { return den_; }

    bool is_zero() const noexcept { return num_ == 0; }
    bool is_integer() const noexcept { return den_ == 1; }
    bool is_nonnegative() const noexcept { return num_ >= 0; }

    /// Integer value; valid only when is_integer().
    Int as_integer() const {
        if (den_ != 1) throw std::logic_error("Rational::as_integer on non-integer " + to_string());
        return num_;
    }

    double to_double() const noexcept {
        return static_cast<double>(num_) / static_cast<double>(den_);
    }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::invalid_argument("Rational: division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }

    Rational& operator+=(const Rational& b) { return *this = *this + b; }
    Rational& operator-=(const Rational& b) { return *this = *this - b; }
    Rational& operator*=(const Rational& b) { return *this = *this * b; }
    Rational& operator/=(const Rational& b) { return *this = *this / b; }

    friend bool operator==(const Rational& a, const Rational& b) noexcept {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) noexcept { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) noexcept {
        return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
    }
    friend bool operator>(const Rational& a, const Rational& b) noexcept { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) noexcept { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) noexcept { return !(a < b); }

    /// Canonical text form: "3", "-2/7".
    std::string to_string() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Parses "p", "p/q" (optionally signed). Throws ParseError on malformed
    /// input, including "p/0".
    static Rational parse(const std::string& s) {
        auto slash = s.find('/');
        try {
            if (slash == std::string::npos) {
                return Rational(parse_int(s));
            }
            Int p = parse_int(s.substr(0, slash));
            Int q = parse_int(s.substr(slash + 1));
            if (q == 0) throw ParseError("rational with zero denominator: \"" + s + "\"");
            return Rational(p, q);
        } catch (const std::invalid_argument&) {
            throw ParseError("malformed rational: \"" + s + "\"");
        } catch (const std::out_of_range&) {
            throw ParseError("rational out of range: \"" + s + "\"");
        }
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        return os << r.to_string();
    }

private:
    using i128 = __int128;

    static i128 gcd_i128(i128 a, i128 b) {
        if (a < 0) a = -a;
        if (b < 0) b = -b;
        while (b != 0) {
            i128 t = a % b;
            a = b;
            b = t;
        }
        return a;
    }

    static Rational make(i128 n, i128 d) {
        Rational r;
        r.from_i128(n, d);
        return r;
    }

    void from_i128(i128 n, i128 d) {
        if (d < 0) {
            n = -n;
            d = -d;
        }
        if (n == 0) {
            num_ = 0;
            den_ = 1;
            return;
        }
        i128 g = gcd_i128(n, d);
        n /= g;
        d /= g;
        constexpr i128 lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi)
            throw std::overflow_error("Rational: value exceeds 64-bit range");
        num_ = static_cast<Int>(n);
        den_ = static_cast<Int>(d);
    }

    static Int parse_int(const std::string& s) {
        if (s.empty()) throw std::invalid_argument("empty");
        std::size_t pos = 0;
        Int v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    }

    Int num_;
    Int den_;
};

} // namespace affine
