#include <doctest.h>

#include "ivmm/dyadic.hpp"
#include "test_support.hpp"

using namespace ivmm;

TEST_CASE("precision of canonical dyadics") {
    CHECK(precision(Dyadic::from_parts(1, 1)) == 1);  // 1/2
    CHECK(precision(Dyadic::from_parts(3, 3)) == 3);  // 3/8
    CHECK(precision(Dyadic::zero()) == 0);
    CHECK(precision(Dyadic::one()) == 0);
    CHECK(precision(Dyadic::from_parts(4, 4)) == 2);  // 4/16 == 1/4
}

TEST_CASE("equality and ordering are value-based") {
    CHECK(Dyadic::from_parts(2, 2) == Dyadic::from_parts(1, 1));
    CHECK(Dyadic::from_parts(1, 2) < Dyadic::from_parts(1, 1));
    CHECK(Dyadic::from_parts(3, 2) > Dyadic::from_parts(5, 3));
    CHECK(Dyadic::from_parts(1ull << 62, 62) == Dyadic::one());

    test::Rng rng(7);
    for (int i = 0; i < 2000; ++i) {
        const Dyadic a = test::random_dyadic(rng, 50);
        const Dyadic b = test::random_dyadic(rng, 50);
        CHECK((a < b) == (a.to_double() < b.to_double()));
        CHECK((a == b) == (a.to_double() == b.to_double()));
    }
}

TEST_CASE("construction guards") {
    CHECK_THROWS_AS(Dyadic::from_parts(5, 2), BadArgs);   // 5/4 > 1
    CHECK_THROWS_AS(Dyadic::from_parts(1, 63), BadArgs);  // too fine
    CHECK_NOTHROW(Dyadic::from_parts(1, 62));
}

TEST_CASE("midpoint and width") {
    const Dyadic lo = Dyadic::from_parts(1, 2);
    const Dyadic hi = Dyadic::from_parts(1, 1);
    CHECK(dyadic_midpoint(lo, hi) == Dyadic::from_parts(3, 3));
    CHECK(Interval(lo, hi).width() == 0.25);
    CHECK(dyadic_midpoint(Dyadic::zero(), Dyadic::one()) == Dyadic::from_parts(1, 1));
}

TEST_CASE("payout is half-open") {
    const Interval iv(Dyadic::from_parts(1, 2), Dyadic::from_parts(1, 1)); // [1/4, 1/2)
    CHECK(payout(iv, Dyadic::from_parts(1, 2)) == 1);  // left endpoint in
    CHECK(payout(iv, Dyadic::from_parts(1, 1)) == 0);  // right endpoint out
    CHECK(payout(full_interval(), Dyadic::from_parts(7, 3)) == 1);
}

TEST_CASE("interval validation") {
    CHECK_THROWS_AS(Interval(Dyadic::one(), Dyadic::zero()), InvalidInterval);
    CHECK_THROWS_AS(Interval(Dyadic::zero(), Dyadic::zero()), InvalidInterval);
}

TEST_CASE("dyadic text round-trip") {
    test::Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const Dyadic d = test::random_dyadic(rng, 62);
        CHECK(parse_dyadic(to_string(d)) == d);
    }
}

TEST_CASE("decimal parsing accepts exact dyadics only") {
    CHECK(parse_dyadic("0.25") == Dyadic::from_parts(1, 2));
    CHECK(parse_dyadic("0.5") == Dyadic::from_parts(1, 1));
    CHECK(parse_dyadic("1.0") == Dyadic::one());
    CHECK(parse_dyadic("1") == Dyadic::one());
    CHECK(parse_dyadic("0") == Dyadic::zero());
    CHECK(parse_dyadic("0.6875") == Dyadic::from_parts(11, 4));
    CHECK_THROWS_AS(parse_dyadic("0.1"), ParseError);
    CHECK_THROWS_AS(parse_dyadic("1.5"), ParseError);
    CHECK_THROWS_AS(parse_dyadic("abc"), ParseError);
    CHECK_THROWS_AS(parse_dyadic("3/2^"), ParseError);
    CHECK_THROWS_AS(parse_dyadic("1/3"), ParseError);
}
