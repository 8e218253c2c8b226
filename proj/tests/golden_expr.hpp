#pragma once

// 50-case golden suite for the coefficient expression language: exact values
// computed with plain double arithmetic, and exact error positions.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "orbsde/expr.hpp"
#include "orbsde/rng.hpp"

namespace orbsde::testing {

struct GoldenCase {
    std::string source;
    int m = 1, ny = 0, nz = 0;
    std::vector<double> x, y, z;
    bool expect_error = false;
    int line = 0, column = 0;  // expected error position
    double expected = 0.0;
};

inline std::vector<GoldenCase> golden_expression_cases() {
    std::vector<GoldenCase> cases;
    auto ok = [&](std::string src, int m, int ny, int nz, std::vector<double> x,
                  std::vector<double> y, std::vector<double> z, double expected) {
        GoldenCase c;
        c.source = std::move(src);
        c.m = m;
        c.ny = ny;
        c.nz = nz;
        c.x = std::move(x);
        c.y = std::move(y);
        c.z = std::move(z);
        c.expected = expected;
        cases.push_back(std::move(c));
    };
    auto err = [&](std::string src, int m, int ny, int nz, int line, int col) {
        GoldenCase c;
        c.source = std::move(src);
        c.m = m;
        c.ny = ny;
        c.nz = nz;
        c.expect_error = true;
        c.line = line;
        c.column = col;
        cases.push_back(std::move(c));
    };

    // literals and arithmetic
    ok("0", 1, 0, 0, {0.0}, {}, {}, 0.0);
    ok("1.5", 1, 0, 0, {0.0}, {}, {}, 1.5);
    ok("1e2", 1, 0, 0, {0.0}, {}, {}, 100.0);
    ok("2.5e-1", 1, 0, 0, {0.0}, {}, {}, 0.25);
    ok(".5 + .25", 1, 0, 0, {0.0}, {}, {}, 0.75);
    ok("1/4", 1, 0, 0, {0.0}, {}, {}, 0.25);
    ok("5/2", 1, 0, 0, {0.0}, {}, {}, 2.5);
    ok("2 - 3 - 4", 1, 0, 0, {0.0}, {}, {}, -5.0);
    ok("2 - (3 - 4)", 1, 0, 0, {0.0}, {}, {}, 3.0);
    ok("12/4/3", 1, 0, 0, {0.0}, {}, {}, 1.0);
    ok("2*3 + 4*5", 1, 0, 0, {0.0}, {}, {}, 26.0);
    ok("0.1 + 0.2", 1, 0, 0, {0.0}, {}, {}, 0.1 + 0.2);
    ok("2 + 3*4 - 6/2", 1, 0, 0, {0.0}, {}, {}, 11.0);

    // variables
    ok("x1", 1, 0, 0, {2.0}, {}, {}, 2.0);
    ok("x1 + x2", 2, 0, 0, {1.0, 2.0}, {}, {}, 3.0);
    ok("2*x1 + 1", 1, 0, 0, {3.0}, {}, {}, 7.0);
    ok("x1 * (x2 + x3)", 3, 0, 0, {2.0, 3.0, 4.0}, {}, {}, 14.0);
    ok("x1*x1*x1", 1, 0, 0, {-2.0}, {}, {}, -8.0);
    ok("y2 - y1 + 0.5*z1", 1, 2, 1, {0.0}, {1.0, 4.0}, {2.0}, 4.0);
    ok("z1 + z2", 1, 0, 2, {0.0}, {}, {0.5, 0.25}, 0.75);
    ok("(((x1)))", 1, 0, 0, {7.0}, {}, {}, 7.0);

    // unary minus
    ok("-x1", 1, 0, 0, {2.5}, {}, {}, -2.5);
    ok("--x1", 1, 0, 0, {5.0}, {}, {}, 5.0);
    ok("-x1*x1", 1, 0, 0, {2.0}, {}, {}, -4.0);
    ok("-(x1 + 1)", 1, 0, 0, {2.0}, {}, {}, -3.0);

    // functions
    ok("max(x1 - 1, 0)", 1, 0, 0, {3.0}, {}, {}, 2.0);
    ok("max(x1 - 1, 0)", 1, 0, 0, {0.5}, {}, {}, 0.0);
    ok("min(x1, 2)", 1, 0, 0, {5.0}, {}, {}, 2.0);
    ok("abs(-x1)", 1, 0, 0, {-3.0}, {}, {}, 3.0);
    ok("abs(x1)", 1, 0, 0, {-3.0}, {}, {}, 3.0);
    ok("exp(0)", 1, 0, 0, {0.0}, {}, {}, 1.0);
    ok("exp(x1)", 1, 0, 0, {1.0}, {}, {}, std::exp(1.0));
    ok("clamp(x1, -1, 1)", 1, 0, 0, {5.0}, {}, {}, 1.0);
    ok("clamp(x1, -1, 1)", 1, 0, 0, {-5.0}, {}, {}, -1.0);
    ok("clamp(x1, -1, 1)", 1, 0, 0, {0.25}, {}, {}, 0.25);
    ok("min(max(x1, 0), max(x2, 0))", 2, 0, 0, {-1.0, 3.0}, {}, {}, 0.0);
    ok("max(y1 - y2, y2 - y1)", 1, 2, 0, {0.0}, {1.0, 4.0}, {}, 3.0);
    ok("exp(x1 - x1)", 1, 0, 0, {123.0}, {}, {}, 1.0);
    ok("clamp(z1, 0 - 1, y1)", 1, 1, 1, {0.0}, {0.5}, {2.0}, 0.5);
    ok("max(0, min(x1, x1*x1))", 1, 0, 0, {0.5}, {}, {}, 0.25);

    // errors: unknown identifiers, arity, syntax
    err("x3", 2, 0, 0, 1, 1);
    err("bar", 1, 0, 0, 1, 1);
    err("y1", 1, 0, 0, 1, 1);
    err("z2", 1, 1, 1, 1, 1);
    err("foo(1)", 1, 0, 0, 1, 1);
    err("1 + ", 1, 0, 0, 1, 5);
    err("(1 + 2", 1, 0, 0, 1, 7);
    err("min(1)", 1, 0, 0, 1, 6);
    err("clamp(1, 2)", 1, 0, 0, 1, 11);
    err("1 2", 1, 0, 0, 1, 3);
    err("x1 +* 2", 1, 0, 0, 1, 5);
    err("max(1, 2", 1, 0, 0, 1, 9);
    err("", 1, 0, 0, 1, 1);
    err("1 +\n+ 2", 1, 0, 0, 2, 1);
    err("exp()", 1, 0, 0, 1, 5);

    return cases;
}

// random trees in the parser's canonical form: nonnegative literals,
// explicit unary-minus nodes; used by the round-trip property tests
inline expr::NodePtr random_expression_tree(std::uint64_t seed, std::uint64_t& counter,
                                            int depth) {
    const double pick = uniform_draw(seed, counter++, depth, 0);
    auto node = std::make_shared<expr::Node>();
    if (depth >= 5 || pick < 0.3) {
        if (pick < 0.15) {
            node->tag = expr::Tag::constant;
            node->value = std::floor(uniform_draw(seed, counter++, 1, 1) * 400.0) / 16.0;
        } else {
            node->tag = expr::Tag::variable;
            const double k = uniform_draw(seed, counter++, 2, 2);
            node->var_kind = k < 0.5 ? 'x' : (k < 0.8 ? 'y' : 'z');
            node->var_index = static_cast<int>(uniform_draw(seed, counter++, 3, 3) * 2.0);
        }
        return node;
    }
    auto child = [&] { return random_expression_tree(seed, counter, depth + 1); };
    if (pick < 0.45) {
        node->tag = expr::Tag::unary_minus;
        node->args = {child()};
        return node;
    }
    if (pick < 0.8) {
        node->tag = expr::Tag::binary;
        const char ops[] = {'+', '-', '*', '/'};
        node->op = ops[static_cast<int>(uniform_draw(seed, counter++, 4, 4) * 4.0) & 3];
        node->args = {child(), child()};
        return node;
    }
    node->tag = expr::Tag::call;
    const double f = uniform_draw(seed, counter++, 5, 5);
    if (f < 0.25) {
        node->fun = expr::Fun::fmin;
        node->args = {child(), child()};
    } else if (f < 0.5) {
        node->fun = expr::Fun::fmax;
        node->args = {child(), child()};
    } else if (f < 0.7) {
        node->fun = expr::Fun::fexp;
        node->args = {child()};
    } else if (f < 0.9) {
        node->fun = expr::Fun::fabs;
        node->args = {child()};
    } else {
        node->fun = expr::Fun::fclamp;
        node->args = {child(), child(), child()};
    }
    return node;
}

// returns a human-readable failure description, empty on success
inline std::string run_golden_case(const GoldenCase& c) {
    try {
        expr::Expression e =
            expr::parse_expression(c.source, expr::VariableSet{c.m, c.ny, c.nz});
        if (c.expect_error)
            return "'" + c.source + "': expected a parse error, got a tree";
        const double v = e.eval(c.x, c.y, c.z);
        if (v != c.expected)
            return "'" + c.source + "': value " + std::to_string(v) + " != expected " +
                   std::to_string(c.expected);
        // pretty-printed form must reparse to the identical tree
        expr::Expression r =
            expr::parse_expression(e.pretty(), expr::VariableSet{c.m, c.ny, c.nz});
        if (!expr::equal_trees(e.root(), r.root()))
            return "'" + c.source + "': pretty form '" + e.pretty() + "' reparses differently";
        return {};
    } catch (const expr::ParseError& pe) {
        if (!c.expect_error)
            return "'" + c.source + "': unexpected parse error: " + pe.what();
        if (pe.line != c.line || pe.column != c.column)
            return "'" + c.source + "': error at " + std::to_string(pe.line) + ":" +
                   std::to_string(pe.column) + ", expected " + std::to_string(c.line) + ":" +
                   std::to_string(c.column) + " (" + pe.what() + ")";
        return {};
    }
}

}  // namespace orbsde::testing
