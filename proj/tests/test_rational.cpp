// Distributed under the Apache License, Version 2.0.
// See LICENSE.txt for details.

#include "chsteer/rational.hpp"

#include <catch2/catch_amalgamated.hpp>

using chsteer::Rational;

TEST_CASE("rationals reduce to lowest terms with positive denominators") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(1, -2) == Rational(-1, 2));
    CHECK(Rational(0, -7) == Rational(0));
    CHECK(Rational(-6, -4) == Rational(3, 2));
    CHECK(Rational(3, 5).den() == 5);
    CHECK_THROWS_AS(Rational(1, 0), std::invalid_argument);
}

TEST_CASE("parsing accepts p/q, integers, and exact decimals") {
    CHECK(Rational::parse("3/5") == Rational(3, 5));
    CHECK(Rational::parse("-6/5") == Rational(-6, 5));
    CHECK(Rational::parse("42") == Rational(42));
    CHECK(Rational::parse("0.1") == Rational(1, 10));
    CHECK(Rational::parse("-0.125") == Rational(-1, 8));
    CHECK(Rational::parse("2.50") == Rational(5, 2));
    CHECK_THROWS_AS(Rational::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Rational::parse("1/"), std::invalid_argument);
}

TEST_CASE("string form round trips") {
    for (auto r : {Rational(3, 5), Rational(-6, 5), Rational(0), Rational(17)}) {
        CHECK(Rational::parse(r.str()) == r);
    }
    CHECK(Rational(-3, 5).str() == "-3/5");
}

TEST_CASE("arithmetic is exact") {
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(1, 2) - Rational(1, 2) == Rational(0));
    CHECK(Rational(2, 3) * Rational(9, 4) == Rational(3, 2));
    CHECK(Rational(1, 7) / Rational(2, 7) == Rational(1, 2));
    CHECK(-Rational(3, 5) == Rational(-3, 5));
    CHECK_THROWS_AS(Rational(1) / Rational(0), std::domain_error);
}

TEST_CASE("arbitrary precision: no silent wrap beyond 64 bits") {
    Rational big = Rational(10).pow(30);
    CHECK(big / Rational(10).pow(29) == Rational(10));
    Rational third = big / Rational(3);
    CHECK(third * Rational(3) == big);
    CHECK(Rational(2).pow(-3) == Rational(1, 8));
}

TEST_CASE("exact doubles are dyadic rationals") {
    CHECK(Rational::from_double_exact(0.5) == Rational(1, 2));
    CHECK(Rational::from_double_exact(-0.75) == Rational(-3, 4));
    CHECK(Rational::from_double_exact(0.0) == Rational(0));
    // 0.1 is not representable; its exact dyadic value differs from 1/10.
    CHECK(Rational::from_double_exact(0.1) != Rational(1, 10));
    CHECK(Rational::from_double_exact(0.1).to_double() == 0.1);
}

TEST_CASE("continued-fraction approximation honors the denominator cap") {
    auto pi = chsteer::rationalize(3.14159265358979323846, 1'000'000);
    CHECK(pi.value.den() <= 1'000'000);
    CHECK(pi.error < 1e-9);

    auto tenth = chsteer::rationalize(0.1, 1'000'000);
    CHECK(tenth.value == Rational(1, 10));

    auto tiny = chsteer::rationalize(1e-16, 1'000'000);
    CHECK(tiny.value == Rational(0));

    auto capped = chsteer::rationalize(3.14159265358979323846, 120);
    CHECK(capped.value.den() <= 120);
    CHECK(capped.value == Rational(355, 113));
}

TEST_CASE("exact square roots of perfect squares") {
    CHECK(Rational::sqrt_exact(Rational(4, 9)) == Rational(2, 3));
    CHECK(Rational::sqrt_exact(Rational(0)) == Rational(0));
    CHECK(Rational::sqrt_exact(Rational(1)) == Rational(1));
    CHECK_FALSE(Rational::sqrt_exact(Rational(2)).has_value());
    CHECK_FALSE(Rational::sqrt_exact(Rational(-1)).has_value());
}

TEST_CASE("ordering") {
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK(Rational(-1, 2) < Rational(-1, 3));
    CHECK(Rational(2, 4) <= Rational(1, 2));
    CHECK(Rational(3, 5).abs() == Rational(3, 5));
    CHECK(Rational(-3, 5).abs() == Rational(3, 5));
}
