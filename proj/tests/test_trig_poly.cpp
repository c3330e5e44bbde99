// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/grid_field.hpp"
#include "chsteer/trig_poly.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

using namespace chsteer;

namespace {

TrigPoly random_poly(std::mt19937_64& rng, int max_degree) {
    std::uniform_int_distribution<int> num(-9, 9);
    std::uniform_int_distribution<int> den(1, 7);
    TrigPoly p;
    p.set_const(Rational(num(rng), den(rng)));
    for (int k = 1; k <= max_degree; ++k) {
        p.add_cos(k, Rational(num(rng), den(rng)));
        p.add_sin(k, Rational(num(rng), den(rng)));
    }
    return p;
}

// Independent oracle for the drift of an H0 element, expanded by hand from
// the definition: drift(a + b cos x + c sin x) =
//   2ab sin x - 2ac cos x + (3/5)(b^2 - c^2) sin 2x - (6/5) bc cos 2x.
TrigPoly h0_drift_oracle(const Rational& a, const Rational& b, const Rational& c) {
    TrigPoly out;
    out.add_sin(1, Rational(2) * a * b);
    out.add_cos(1, Rational(-2) * a * c);
    out.add_sin(2, Rational(3, 5) * (b * b - c * c));
    out.add_cos(2, Rational(-6, 5) * b * c);
    return out;
}

}  // namespace

TEST_CASE("addition: inverses, identities, and the gadget base function") {
    TrigPoly sinx = TrigPoly::sine(1);
    CHECK((sinx + (-sinx)).is_zero());
    CHECK(TrigPoly() + sinx == sinx);

    TrigPoly phi1 = sinx + TrigPoly::cosine(1);
    CHECK(phi1.cos_coeff(1) == Rational(1));
    CHECK(phi1.sin_coeff(1) == Rational(1));
    CHECK(phi1.degree() == 1);
}

TEST_CASE("products follow the product-to-sum identities exactly") {
    TrigPoly sinx = TrigPoly::sine(1);
    TrigPoly cosx = TrigPoly::cosine(1);

    CHECK(sinx * cosx == TrigPoly::sine(2, Rational(1, 2)));
    CHECK(sinx * sinx == TrigPoly::constant(Rational(1, 2)) + TrigPoly::cosine(2, Rational(-1, 2)));

    TrigPoly mix = sinx + cosx;
    CHECK(mix * mix == TrigPoly::constant(Rational(1)) + TrigPoly::sine(2));
}

TEST_CASE("product degree and algebraic laws") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 12; ++i) {
        TrigPoly p = random_poly(rng, 3);
        TrigPoly q = random_poly(rng, 4);
        TrigPoly r = random_poly(rng, 2);
        CHECK(p * q == q * p);
        CHECK((p * q) * r == p * (q * r));
        CHECK((p * q).degree() <= p.degree() + q.degree());
    }
    CHECK((TrigPoly::sine(3) * TrigPoly::cosine(5)).degree() == 8);
}

TEST_CASE("derivative examples and the product rule") {
    CHECK(TrigPoly::sine(1).diff() == TrigPoly::cosine(1));
    CHECK(TrigPoly::constant(Rational(7)).diff().is_zero());
    CHECK(TrigPoly::cosine(2).diff() == TrigPoly::sine(2, Rational(-2)));

    std::mt19937_64 rng(11);
    for (int i = 0; i < 12; ++i) {
        TrigPoly p = random_poly(rng, 3);
        TrigPoly q = random_poly(rng, 3);
        CHECK((p * q).diff() == p.diff() * q + p * q.diff());
    }
}

TEST_CASE("helmholtz multipliers") {
    CHECK(TrigPoly::sine(1).helmholtz() == TrigPoly::sine(1, Rational(2)));
    CHECK(TrigPoly::sine(2).helmholtz_inv() == TrigPoly::sine(2, Rational(1, 5)));
    CHECK(TrigPoly::constant(Rational(3)).helmholtz_inv() == TrigPoly::constant(Rational(3)));

    std::mt19937_64 rng(13);
    for (int i = 0; i < 10; ++i) {
        TrigPoly p = random_poly(rng, 12);
        CHECK(p.helmholtz_inv().helmholtz() == p);
        CHECK(p.helmholtz().helmholtz_inv() == p);
    }
}

TEST_CASE("sobolev norm convention") {
    CHECK(TrigPoly::sine(1).hs_norm(1.0) == Catch::Approx(1.0).epsilon(1e-14));
    for (double s : {-1.0, 0.0, 1.5, 2.0})
        CHECK(TrigPoly::constant(Rational(1)).hs_norm(s) == Catch::Approx(1.0));

    // ||sin 2x||_{H^2} = sqrt(25/2) = 5/sqrt(2); direct summation oracle.
    double direct = std::sqrt(0.5 * std::pow(1.0 + 4.0, 2.0) * 1.0);
    CHECK(TrigPoly::sine(2).hs_norm(2.0) == Catch::Approx(5.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(TrigPoly::sine(2).hs_norm(2.0) == Catch::Approx(direct).epsilon(1e-14));
}

TEST_CASE("norm is monotone in s for zero-mean polynomials") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 8; ++i) {
        TrigPoly p = random_poly(rng, 5);
        p.set_const(Rational(0));
        double prev = p.hs_norm(-1.0);
        for (double s : {0.0, 0.5, 1.0, 2.0, 3.0}) {
            double cur = p.hs_norm(s);
            CHECK(cur >= prev - 1e-12);
            prev = cur;
        }
    }
}

TEST_CASE("helmholtz_inv shifts the exact norm index by two") {
    std::mt19937_64 rng(19);
    for (int i = 0; i < 8; ++i) {
        TrigPoly p = random_poly(rng, 6);
        for (int s : {-2, 0, 1, 2, 4}) {
            CHECK(p.helmholtz_inv().hs_norm_sq_exact(s) == p.hs_norm_sq_exact(s - 2));
        }
    }
}

TEST_CASE("drift: pinned seed values and the derived cosine case") {
    CHECK(drift(TrigPoly::sine(1)) == TrigPoly::sine(2, Rational(-3, 5)));
    CHECK(drift(TrigPoly::sine(1) + TrigPoly::cosine(1)) == TrigPoly::cosine(2, Rational(-6, 5)));
    CHECK(drift(TrigPoly::cosine(1)) == TrigPoly::sine(2, Rational(3, 5)));
    CHECK(drift(TrigPoly::constant(Rational(5, 3))).is_zero());
}

TEST_CASE("drift of general H0 elements matches the hand-expanded closed form") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> num(-6, 6);
    std::uniform_int_distribution<int> den(1, 5);
    for (int i = 0; i < 20; ++i) {
        Rational a(num(rng), den(rng)), b(num(rng), den(rng)), c(num(rng), den(rng));
        TrigPoly phi = TrigPoly::constant(a) + TrigPoly::cosine(1, b) + TrigPoly::sine(1, c);
        CHECK(drift(phi) == h0_drift_oracle(a, b, c));
    }
}

TEST_CASE("drift is quadratic under scaling") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 10; ++i) {
        TrigPoly phi = random_poly(rng, 4);
        for (auto c : {Rational(2), Rational(-1, 3), Rational(7, 2)}) {
            CHECK(drift(phi.scaled(c)) == drift(phi).scaled(c * c));
        }
    }
}

TEST_CASE("drift of a pure sine of frequency m is supported on frequency 2m") {
    // Independent expansion: drift(sin mx) =
    //   -(m/2) sin 2mx - (m - m^3/2)/(1 + 4m^2) sin 2mx.
    for (int m = 1; m <= 8; ++m) {
        Rational mm(m);
        Rational coeff = -(mm * Rational(1, 2)) -
                         (mm - mm.pow(3) * Rational(1, 2)) / Rational(1 + 4 * m * m);
        TrigPoly expect = TrigPoly::sine(2 * m, coeff);
        CHECK(drift(TrigPoly::sine(m)) == expect);
    }
}

TEST_CASE("f_image basics") {
    std::mt19937_64 rng(31);
    TrigPoly p = random_poly(rng, 4);
    CHECK(f_image(p, {}) == p);
    TrigPoly sinx = TrigPoly::sine(1);
    CHECK(f_image(TrigPoly(), std::span(&sinx, 1)) == TrigPoly::sine(2, Rational(-3, 5)));
}

TEST_CASE("grid sampling and analysis round trip") {
    GridField g = to_grid(TrigPoly::sine(1), 16);
    for (int j = 0; j < 16; ++j)
        CHECK(g.values[j] == Catch::Approx(std::sin(2.0 * M_PI * j / 16)).margin(1e-15));

    TrigPoly p = TrigPoly::sine(2, Rational(-3, 5));
    FromGridResult rt = from_grid(to_grid(p, 16), 4);
    CHECK(rt.poly == p);  // continued fractions recover -3/5 exactly
    CHECK(rt.rationalization_error < 1e-12);

    CHECK_THROWS_AS(to_grid(TrigPoly::sine(9), 16), std::invalid_argument);
    CHECK_THROWS_AS(from_grid(GridField::zeros(16), 8), std::invalid_argument);
}

TEST_CASE("json serialization uses exact rational strings") {
    std::mt19937_64 rng(37);
    for (int i = 0; i < 10; ++i) {
        TrigPoly p = random_poly(rng, 5);
        CHECK(TrigPoly::from_json(p.to_json()) == p);
    }
    auto j = TrigPoly::sine(2, Rational(-3, 5)).to_json();
    CHECK(j.at("a0").get<std::string>() == "0/1");
    CHECK(j.at("modes")[0].at("sin").get<std::string>() == "-3/5");
    CHECK(j.at("modes")[0].at("k").get<int>() == 2);
}

TEST_CASE("inline coefficient strings parse to exact polynomials") {
    CHECK(TrigPoly::parse("0.1 sin 2x + 0.05 cos x") ==
          TrigPoly::sine(2, Rational(1, 10)) + TrigPoly::cosine(1, Rational(1, 20)));
    CHECK(TrigPoly::parse("-3/5 sin 2x") == TrigPoly::sine(2, Rational(-3, 5)));
    CHECK(TrigPoly::parse("1 + sin x - cos 3x") ==
          TrigPoly::constant(Rational(1)) + TrigPoly::sine(1) + TrigPoly::cosine(3, Rational(-1)));
    CHECK(TrigPoly::parse("0.2 cos(1x)") == TrigPoly::cosine(1, Rational(1, 5)));
    CHECK_THROWS_AS(TrigPoly::parse("sin"), std::invalid_argument);
    CHECK_THROWS_AS(TrigPoly::parse("2y"), std::invalid_argument);
}
