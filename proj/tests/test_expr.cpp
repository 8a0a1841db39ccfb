#include "hoferlab/expr.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using hoferlab::Expression;

TEST_CASE("expression arithmetic and precedence") {
    auto e = Expression::parse("2 + 3*4 - 6/3", {});
    CHECK(e.eval(std::span<const double>{}) == doctest::Approx(12.0).epsilon(1e-15));

    auto f = Expression::parse("x1^2 + 2*x1*x2 + x2^2", {"x1", "x2"});
    double at[] = {1.5, -0.5};
    CHECK(f.eval(at) == doctest::Approx(1.0).epsilon(1e-15));

    // ^ is right-associative: 2^3^2 = 2^9.
    auto g = Expression::parse("2^3^2", {});
    CHECK(g.eval(std::span<const double>{}) == doctest::Approx(512.0).epsilon(1e-15));
}

TEST_CASE("expression functions and unary minus") {
    auto e = Expression::parse("-sin(x1)*cos(x2) + exp(-x1^2)", {"x1", "x2"});
    double at[] = {0.7, 1.3};
    double want = -std::sin(0.7) * std::cos(1.3) + std::exp(-0.49);
    CHECK(e.eval(at) == doctest::Approx(want).epsilon(1e-15));

    auto p = Expression::parse("pow(x1, 3) - x1*x1*x1", {"x1"});
    double one[] = {1.7};
    CHECK(p.eval(one) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("expression single-variable convenience matches span form") {
    auto e = Expression::parse("sin(3.141592653589793*t)", {"t"});
    CHECK(e.eval(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e.eval(1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("expression parse errors carry a position") {
    CHECK_THROWS_AS(Expression::parse("x1 +", {"x1"}), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("boop(x1)", {"x1"}), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("x2", {"x1"}), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("(x1", {"x1"}), std::invalid_argument);
}

TEST_CASE("expression arity tracks the variable list") {
    auto e = Expression::parse("x1 + x3", {"x1", "x2", "x3"});
    CHECK(e.arity() == 3);
    double at[] = {1.0, 100.0, 2.5};
    CHECK(e.eval(at) == doctest::Approx(3.5).epsilon(1e-15));
}
