#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "golden_expr.hpp"
#include "orbsde/rng.hpp"

using namespace orbsde;
using namespace orbsde::testing;

TEST_CASE("golden suite") {
    const auto cases = golden_expression_cases();
    CHECK(cases.size() >= 50);
    for (const GoldenCase& c : cases) {
        const std::string failure = run_golden_case(c);
        INFO(c.source);
        CHECK(failure.empty());
        if (!failure.empty()) MESSAGE(failure);
    }
}



TEST_CASE("round trip on random trees") {
    const expr::VariableSet vars{2, 2, 2};
    std::uint64_t counter = 0;
    for (int t = 0; t < 1000; ++t) {
        expr::NodePtr tree = random_expression_tree(1234 + t, counter, 0);
        expr::Expression e(tree, vars);
        const std::string printed = e.pretty();
        INFO(printed);
        expr::Expression r = expr::parse_expression(printed, vars);
        CHECK(expr::equal_trees(tree, r.root()));
        // printing is a normal form: reprinting reproduces it
        CHECK(r.pretty() == printed);
    }
}

TEST_CASE("error type carries position") {
    try {
        expr::parse_expression("1 +\n+ 2", {1, 0, 0});
        FAIL("expected ParseError");
    } catch (const expr::ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 1);
    }
}

TEST_CASE("compiled program evaluates like the tree on random inputs") {
    const expr::VariableSet vars{2, 2, 2};
    std::uint64_t counter = 999;
    for (int t = 0; t < 200; ++t) {
        expr::Expression e(random_expression_tree(777 + t, counter, 0), vars);
        // reference evaluation straight off the printed form and fresh parse
        expr::Expression f = expr::parse_expression(e.pretty(), vars);
        double x[2], y[2], z[2];
        for (int k = 0; k < 2; ++k) {
            x[k] = 4.0 * uniform_draw(5, t, k, 0) - 2.0;
            y[k] = 4.0 * uniform_draw(5, t, k, 1) - 2.0;
            z[k] = 4.0 * uniform_draw(5, t, k, 2) - 2.0;
        }
        const double a = e.eval({x, 2}, {y, 2}, {z, 2});
        const double b = f.eval({x, 2}, {y, 2}, {z, 2});
        CHECK((a == b || (std::isnan(a) && std::isnan(b))));
    }
}
