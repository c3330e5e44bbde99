// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#pragma once

#include "chsteer/rational.hpp"

#include <nlohmann/json_fwd.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace chsteer {

/// Real trigonometric polynomial on the circle with exact rational
/// coefficients:
///
///   f(x) = a0 + sum_k a_k cos(kx) + b_k sin(kx)
///
/// Stored modes never have both coefficients zero. All operations are pure
/// and exact; floating point enters only at the grid boundary (to_grid /
/// from_grid in grid_field.hpp).
class TrigPoly {
  public:
    struct Mode {
        Rational cos_coeff;
        Rational sin_coeff;
        friend bool operator==(const Mode& a, const Mode& b) {
            return a.cos_coeff == b.cos_coeff && a.sin_coeff == b.sin_coeff;
        }
    };

    TrigPoly() = default;
    explicit TrigPoly(Rational constant) : const_term_(std::move(constant)) {}

    static TrigPoly constant(Rational c) { return TrigPoly(std::move(c)); }
    static TrigPoly cosine(int k, Rational coeff = Rational(1));
    static TrigPoly sine(int k, Rational coeff = Rational(1));

    /// Parses a linear-combination string like "0.1 sin 2x + 0.05 cos x - 3/5".
    /// Coefficients may be decimals or exact "p/q" rationals.
    static TrigPoly parse(std::string_view text);

    const Rational& const_term() const { return const_term_; }
    Rational cos_coeff(int k) const;
    Rational sin_coeff(int k) const;
    const std::map<int, Mode>& modes() const { return modes_; }

    void set_const(Rational c) { const_term_ = std::move(c); }
    void add_cos(int k, const Rational& c);
    void add_sin(int k, const Rational& c);

    /// Largest stored frequency (0 for constants and the zero polynomial).
    int degree() const { return modes_.empty() ? 0 : modes_.rbegin()->first; }
    bool is_zero() const { return const_term_.is_zero() && modes_.empty(); }

    TrigPoly operator-() const;
    TrigPoly& operator+=(const TrigPoly& o);
    TrigPoly& operator-=(const TrigPoly& o);
    friend TrigPoly operator+(TrigPoly a, const TrigPoly& b) { return a += b; }
    friend TrigPoly operator-(TrigPoly a, const TrigPoly& b) { return a -= b; }
    TrigPoly scaled(const Rational& c) const;
    /// Exact product via product-to-sum identities. degree = deg p + deg q.
    friend TrigPoly operator*(const TrigPoly& p, const TrigPoly& q);

    friend bool operator==(const TrigPoly& a, const TrigPoly& b);
    friend bool operator!=(const TrigPoly& a, const TrigPoly& b) { return !(a == b); }

    /// Termwise derivative. The constant term of the result is zero.
    TrigPoly diff() const;
    /// (1 - d_xx): mode k scaled by (1 + k^2).
    TrigPoly helmholtz() const;
    /// (1 - d_xx)^{-1}: mode k scaled by 1/(1 + k^2). Exact inverse of helmholtz().
    TrigPoly helmholtz_inv() const;

    /// Keeps only frequencies <= max_k (the H0 part for max_k = 1).
    TrigPoly low_pass(int max_k) const;
    /// Keeps only frequencies > max_k.
    TrigPoly high_pass(int max_k) const;

    /// Sobolev norm under the convention
    ///   ||f||^2_{H^s} = a0^2 + (1/2) sum_k (1+k^2)^s (a_k^2 + b_k^2).
    double hs_norm(double s) const;
    /// Exact squared norm for integer s (negative s allowed).
    Rational hs_norm_sq_exact(int s) const;

    /// Largest coefficient magnitude (as double), including the constant.
    double max_coeff_magnitude() const;

    /// Evaluates at x (floating point).
    double eval(double x) const;

    std::string str() const;

    nlohmann::json to_json() const;
    static TrigPoly from_json(const nlohmann::json& j);

  private:
    Rational const_term_;
    std::map<int, Mode> modes_;  // k >= 1, never both coefficients zero
};

/// Single-phi drift map of the saturation recursion:
///   drift(phi) = -phi phi_x - (1 - d_xx)^{-1} (2 phi phi_x + phi_x phi_xx).
/// Quadratic in phi; degree <= 2 deg(phi). Exact.
TrigPoly drift(const TrigPoly& phi);

/// F(G)-element map: eta + sum_i drift(phi_i). Exact.
TrigPoly f_image(const TrigPoly& eta, std::span<const TrigPoly> phis);

}  // namespace chsteer
