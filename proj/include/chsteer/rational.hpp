// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace chsteer {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number with arbitrary-precision integer parts.
/// Always stored reduced to lowest terms with a positive denominator.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(const BigInt& n) : num_(n), den_(1) {}
    Rational(long long num, long long den);
    Rational(BigInt num, BigInt den);

    /// Parses "p/q", "p", or a plain decimal like "-0.125" (exactly).
    static Rational parse(std::string_view s);

    /// Exact value of an IEEE double (every finite double is dyadic).
    static Rational from_double_exact(double x);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }

    bool is_zero() const { return num_ == 0; }
    bool is_integer() const { return den_ == 1; }
    int sign() const { return num_ == 0 ? 0 : (num_ < 0 ? -1 : 1); }

    double to_double() const;
    /// Canonical exact string "p/q" (denominator always present).
    std::string str() const;

    Rational operator-() const;
    Rational& operator+=(const Rational& o);
    Rational& operator-=(const Rational& o);
    Rational& operator*=(const Rational& o);
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return a.num_ * b.den_ < b.num_ * a.den_;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    Rational abs() const { return num_ < 0 ? -*this : *this; }
    Rational reciprocal() const;
    /// Integer power; negative exponents allowed for nonzero values.
    Rational pow(int e) const;
    /// Exact square root when the value is a perfect square of a rational.
    static std::optional<Rational> sqrt_exact(const Rational& r);

  private:
    void normalize();
    BigInt num_;
    BigInt den_;  // > 0
};

struct RationalApproximation {
    Rational value;
    double error;  // |x - value|
};

/// Best continued-fraction approximant with denominator <= max_denominator.
RationalApproximation rationalize(double x, long long max_denominator);

}  // namespace chsteer
