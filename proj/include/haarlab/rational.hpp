// Copyright 2026 The haarlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace haarlab {

/// Exact rational in reduced form over signed 128-bit integers. Every
/// operation is overflow-checked and throws std::overflow_error rather than
/// wrapping.
class Rational {
  public:
    using Int = __int128;

    constexpr Rational() = default;
    constexpr Rational(Int num) : num_(num), den_(1) {}  // NOLINT: implicit from integers
    Rational(Int num, Int den) : num_(num), den_(den) {
        if (den_ == 0) {
            throw std::domain_error("Rational: zero denominator");
        }
        normalize();
    }

    Int num() const noexcept { return num_; }
    Int den() const noexcept { return den_; }

    double to_double() const noexcept {
        return static_cast<double>(static_cast<long double>(num_)
                                   / static_cast<long double>(den_));
    }

    friend Rational operator*(Rational const& a, Rational const& b) {
        // cross-reduce first to keep intermediates small
        const Int g1 = gcd(a.num_, b.den_);
        const Int g2 = gcd(b.num_, a.den_);
        return Rational(checked_mul(a.num_ / g1, b.num_ / g2),
                        checked_mul(a.den_ / g2, b.den_ / g1));
    }
    friend Rational operator/(Rational const& a, Rational const& b) {
        if (b.num_ == 0) {
            throw std::domain_error("Rational: division by zero");
        }
        return a * Rational(b.den_, b.num_);
    }
    friend Rational operator+(Rational const& a, Rational const& b) {
        const Int g = gcd(a.den_, b.den_);
        const Int lhs = checked_mul(a.num_, b.den_ / g);
        const Int rhs = checked_mul(b.num_, a.den_ / g);
        Int sum;
        if (__builtin_add_overflow(lhs, rhs, &sum)) {
            throw std::overflow_error("Rational: overflow");
        }
        return Rational(sum, checked_mul(a.den_, b.den_ / g));
    }
    friend Rational operator-(Rational const& a) { return Rational(-a.num_, a.den_); }
    friend Rational operator-(Rational const& a, Rational const& b) { return a + (-b); }

    friend bool operator==(Rational const&, Rational const&) = default;
    friend std::strong_ordering operator<=>(Rational const& a, Rational const& b) {
        const Int lhs = checked_mul(a.num_, b.den_);
        const Int rhs = checked_mul(b.num_, a.den_);
        return lhs <=> rhs;
    }

    std::string to_string() const {
        std::string s = int_to_string(num_);
        if (den_ != 1) {
            s += '/';
            s += int_to_string(den_);
        }
        return s;
    }

    static Int checked_mul(Int a, Int b) {
        Int out;
        if (__builtin_mul_overflow(a, b, &out)) {
            throw std::overflow_error("Rational: overflow");
        }
        return out;
    }

  private:
    static Int abs(Int x) noexcept { return x < 0 ? -x : x; }
    static Int gcd(Int a, Int b) noexcept {
        a = abs(a);
        b = abs(b);
        while (b != 0) {
            const Int t = a % b;
            a = b;
            b = t;
        }
        return a == 0 ? 1 : a;
    }
    static std::string int_to_string(Int x) {
        if (x == 0) {
            return "0";
        }
        const bool negative = x < 0;
        std::string digits;
        while (x != 0) {
            const int d = static_cast<int>(x % 10);
            digits.insert(digits.begin(), static_cast<char>('0' + (d < 0 ? -d : d)));
            x /= 10;
        }
        return negative ? "-" + digits : digits;
    }

    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const Int g = gcd(num_, den_);
        num_ /= g;
        den_ /= g;
    }

    Int num_ = 0;
    Int den_ = 1;
};

/// n! in 128-bit arithmetic; overflows past 33!.
inline Rational::Int factorial_exact(int n) {
    if (n < 0) {
        throw std::domain_error("factorial of a negative number");
    }
    Rational::Int f = 1;
    for (int i = 2; i <= n; ++i) {
        f = Rational::checked_mul(f, i);
    }
    return f;
}

/// Binomial coefficient C(n, k) in 128-bit arithmetic.
inline Rational::Int binomial_exact(std::int64_t n, std::int64_t k) {
    if (k < 0 || n < 0 || k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    Rational::Int c = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
        // c * (n - k + i) is divisible by i
        c = Rational::checked_mul(c, n - k + i) / i;
    }
    return c;
}

}  // namespace haarlab
