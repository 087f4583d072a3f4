#include <lpakit/expr.hpp>

#include <doctest.h>

#include <cmath>

using namespace lpakit::expr;

namespace {

double ev(const char* text, const Environment& env = {}) { return eval(parse(text), env); }

}  // namespace

TEST_CASE("operator precedence and associativity") {
    CHECK(ev("1 + 2 * 3") == 7);
    CHECK(ev("(1 + 2) * 3") == 9);
    CHECK(ev("2^3^2") == 512);
    CHECK(ev("-2^2") == -4);
    CHECK(ev("8 / 4 / 2") == 1);
    CHECK(ev("10 - 4 - 3") == 3);
    CHECK(ev("2 * -3") == -6);
    CHECK(ev("1e-3 * 2.5E2") == doctest::Approx(0.25));
}

TEST_CASE("functions and symbols") {
    const Environment env{{"x", 0.5}, {"y", 2.0}};
    CHECK(ev("exp(log(y))", env) == doctest::Approx(2.0));
    CHECK(ev("sqrt(y*y)", env) == doctest::Approx(2.0));
    CHECK(ev("sech(x)", env) == doctest::Approx(1.0 / std::cosh(0.5)));
    CHECK(ev("min(x, y) + max(x, y)", env) == doctest::Approx(2.5));
    CHECK(ev("abs(x - y)", env) == doctest::Approx(1.5));
    CHECK(std::isinf(ev("1/0")));
    CHECK(std::isnan(ev("log(-1)")));
}

TEST_CASE("free symbols exclude function names") {
    const auto s = free_symbols(parse("a*exp(-u) + u^2*v/(1+K*u)"));
    CHECK(s == std::set<std::string>{"K", "a", "u", "v"});
}

TEST_CASE("rendering re-parses to the same tree") {
    for (const char* text : {"a-u+u^2*v", "-(x+y)^2", "(a-b)-(c-d)", "a/(b*c)", "2^(3^x)", "(2^3)^x",
                             "-x^2", "max(a, -b)*sech(x/2)"}) {
        const Expr e = parse(text);
        CHECK_MESSAGE(structurally_equal(parse(to_string(e)), e), text);
    }
    CHECK(to_string(parse("a-u+u^2*v")) == "a - u + u^2*v");
}

TEST_CASE("compiled evaluation agrees with the tree walker") {
    const Expr e = parse("a - rho*u*v/(1 + u + K*u^2) + min(u, v)^2 - exp(-v)");
    const std::vector<std::string> slots{"u", "v", "a", "rho", "K"};
    const CompiledExpr c(e, slots);
    for (double u : {0.1, 1.0, 3.7}) {
        for (double v : {0.2, 2.0}) {
            const std::vector<double> vals{u, v, 100.0, 13.0, 0.125};
            const Environment env{{"u", u}, {"v", v}, {"a", 100.0}, {"rho", 13.0}, {"K", 0.125}};
            CHECK(c(vals) == doctest::Approx(eval(e, env)).epsilon(1e-14));
        }
    }
    CHECK_THROWS_AS(CompiledExpr(e, {"u", "v"}), UnboundSymbolError);
}

TEST_CASE("parse errors report the offset") {
    try {
        parse("1 + * 2");
        FAIL("no error");
    } catch (const ParseError& err) {
        CHECK(err.offset() == 4);
    }
    CHECK_THROWS_AS(parse("(1 + 2"), ParseError);
    CHECK_THROWS_AS(parse("exp(1, 2)"), ParseError);
    CHECK_THROWS_AS(parse("nosuch(1)"), ParseError);
    CHECK_THROWS_AS(parse(""), ParseError);
    CHECK_THROWS_AS(eval(parse("x + 1"), {}), UnboundSymbolError);
}
