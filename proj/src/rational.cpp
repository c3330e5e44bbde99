// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/rational.hpp"

#include <cmath>
#include <limits>

namespace chsteer {

namespace {

BigInt big_gcd(BigInt a, BigInt b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    return boost::multiprecision::gcd(a, b);
}

}  // namespace

Rational::Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

Rational::Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) {
    normalize();
}

void Rational::normalize() {
    if (den_ == 0) throw std::invalid_argument("Rational: zero denominator");
    if (den_ < 0) {
        den_ = -den_;
        num_ = -num_;
    }
    if (num_ == 0) {
        den_ = 1;
        return;
    }
    BigInt g = big_gcd(num_, den_);
    if (g > 1) {
        num_ /= g;
        den_ /= g;
    }
}

Rational Rational::parse(std::string_view s) {
    auto bad = [&] { return std::invalid_argument("Rational: cannot parse \"" + std::string(s) + "\""); };
    if (s.empty()) throw bad();
    auto slash = s.find('/');
    if (slash != std::string_view::npos) {
        std::string p(s.substr(0, slash));
        std::string q(s.substr(slash + 1));
        if (p.empty() || q.empty()) throw bad();
        return Rational(BigInt(p), BigInt(q));
    }
    auto dot = s.find('.');
    if (dot == std::string_view::npos) {
        return Rational(BigInt(std::string(s)), BigInt(1));
    }
    std::string head(s.substr(0, dot));
    std::string tail(s.substr(dot + 1));
    if (tail.empty()) throw bad();
    bool neg = !head.empty() && head[0] == '-';
    if (head == "-" || head == "+" || head.empty()) head += '0';
    BigInt scale = 1;
    for (size_t i = 0; i < tail.size(); ++i) scale *= 10;
    BigInt whole(head);
    BigInt frac(tail);
    BigInt num = whole * scale + (neg ? -frac : frac);
    return Rational(num, scale);
}

Rational Rational::from_double_exact(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("Rational: non-finite double");
    if (x == 0.0) return Rational();
    int exp = 0;
    double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [1/2, 1)
    // 53 doublings make the mantissa integral.
    BigInt num(static_cast<long long>(std::ldexp(m, 53)));
    exp -= 53;
    BigInt den = 1;
    if (exp >= 0) {
        num <<= exp;
    } else {
        den <<= -exp;
    }
    return Rational(std::move(num), std::move(den));
}

RationalApproximation rationalize(double x, long long max_denominator) {
    if (max_denominator < 1) throw std::invalid_argument("rationalize: bad denominator cap");
    if (!std::isfinite(x)) throw std::invalid_argument("rationalize: non-finite double");
    // Stern-Brocot style continued fraction expansion of x.
    BigInt p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double v = x;
    for (int iter = 0; iter < 64; ++iter) {
        double fl = std::floor(v);
        if (!(std::abs(fl) < 9.2e18)) break;
        BigInt a(static_cast<long long>(fl));
        BigInt p2 = a * p1 + p0;
        BigInt q2 = a * q1 + q0;
        if (q2 > max_denominator) {
            // Take the best semiconvergent still under the cap.
            BigInt room = q1 == 0 ? BigInt(0) : (BigInt(max_denominator) - q0) / q1;
            if (room > 0) {
                BigInt ps = room * p1 + p0;
                BigInt qs = room * q1 + q0;
                Rational cand1(ps, qs);
                Rational cand2(p1, q1);
                double e1 = std::abs(x - cand1.to_double());
                double e2 = q1 == 0 ? std::numeric_limits<double>::infinity()
                                    : std::abs(x - cand2.to_double());
                Rational best = e1 < e2 ? cand1 : cand2;
                return {best, std::abs(x - best.to_double())};
            }
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        double rem = v - fl;
        if (rem < 1e-18) break;
        v = 1.0 / rem;
    }
    if (q1 == 0) return {Rational(), std::abs(x)};
    Rational best(p1, q1);
    return {best, std::abs(x - best.to_double())};
}

double Rational::to_double() const {
    return num_.convert_to<double>() / den_.convert_to<double>();
}

std::string Rational::str() const { return num_.str() + "/" + den_.str(); }

Rational Rational::operator-() const {
    Rational r = *this;
    r.num_ = -r.num_;
    return r;
}

Rational& Rational::operator+=(const Rational& o) {
    num_ = num_ * o.den_ + o.num_ * den_;
    den_ *= o.den_;
    normalize();
    return *this;
}

Rational& Rational::operator-=(const Rational& o) {
    num_ = num_ * o.den_ - o.num_ * den_;
    den_ *= o.den_;
    normalize();
    return *this;
}

Rational& Rational::operator*=(const Rational& o) {
    num_ *= o.num_;
    den_ *= o.den_;
    normalize();
    return *this;
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.num_ == 0) throw std::domain_error("Rational: division by zero");
    num_ *= o.den_;
    den_ *= o.num_;
    normalize();
    return *this;
}

Rational Rational::reciprocal() const {
    if (num_ == 0) throw std::domain_error("Rational: reciprocal of zero");
    return Rational(den_, num_);
}

Rational Rational::pow(int e) const {
    if (e == 0) return Rational(1);
    if (e < 0) return reciprocal().pow(-e);
    Rational base = *this;
    Rational acc(1);
    while (e > 0) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

std::optional<Rational> Rational::sqrt_exact(const Rational& r) {
    if (r.sign() < 0) return std::nullopt;
    if (r.is_zero()) return Rational();
    BigInt sn = boost::multiprecision::sqrt(r.num());
    BigInt sd = boost::multiprecision::sqrt(r.den());
    if (sn * sn != r.num() || sd * sd != r.den()) return std::nullopt;
    return Rational(sn, sd);
}

}  // namespace chsteer
