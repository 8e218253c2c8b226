#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "orbsde/condexp.hpp"
#include "orbsde/rng.hpp"
#include "test_helpers.hpp"

using namespace orbsde;
using orbsde::testing::martingale_problem;

TEST_CASE("monomial basis enumeration") {
    auto e1 = monomial_exponents(1, 3);
    REQUIRE(e1.size() == 4);  // 1, x, x^2, x^3
    CHECK(e1[0] == std::vector<int>{0});
    CHECK(e1[3] == std::vector<int>{3});
    auto e2 = monomial_exponents(2, 2);
    CHECK(e2.size() == 6);  // 1, x, y, x^2, xy, y^2
}

TEST_CASE("constants are reproduced by both backends") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    TimeGrid g = build_grids(3, 1.0, 1.0);

    LatticeModel lat = build_lattice(p, g);
    LatticeBackend lb(lat);
    std::vector<double> v(lat.nodes_at(2), 4.25);
    auto out = lb.condexp(1, v);
    for (double x : out) CHECK(x == doctest::Approx(4.25));

    PathEnsemble e = simulate_euler(p, g, 500, 8);
    LeastSquaresBackend reg(e, 3, 0.0);
    std::vector<double> w(e.n_paths, -1.5);
    auto fitted = reg.condexp(1, w);
    for (double x : fitted) CHECK(x == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("lattice one-step average of child states") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    p.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.25; };
    TimeGrid g = build_grids(2, 1.0, 1.0);
    LatticeModel lat = build_lattice(p, g);
    LatticeBackend lb(lat);
    std::vector<double> child_states(lat.nodes_at(2));
    for (long k = 0; k < lat.nodes_at(2); ++k) child_states[k] = lat.state(2, k)[0];
    auto parent_mean = lb.condexp(1, child_states);
    for (long k = 0; k < lat.nodes_at(1); ++k)
        CHECK(parent_mean[k] == doctest::Approx(lat.state(1, k)[0] + 0.25 * 0.5).epsilon(1e-14));
}

TEST_CASE("degree-2 regression recovers X^2 against an analytic oracle") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    TimeGrid g = build_grids(4, 1.0, 1.0);
    PathEnsemble e = simulate_euler(p, g, 100000, 91);
    const int i = 2;
    std::vector<double> targets(e.n_paths);
    for (long path = 0; path < e.n_paths; ++path) {
        const double x = e.state(i, path)[0];
        targets[path] = x * x + normal_draw(4242, path, 99, 0);  // E[target | X] = X^2
    }
    LeastSquaresFit fit =
        least_squares_fit(e.state(i, 0), e.n_paths, 1, targets.data(), 1, 2, 0.0);
    REQUIRE(fit.n_features == 3);
    CHECK(std::abs(fit.coefficients[0]) <= 0.05);
    CHECK(std::abs(fit.coefficients[1]) <= 0.05);
    CHECK(fit.coefficients[2] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("regression is linear for a shared design") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    TimeGrid g = build_grids(2, 1.0, 1.0);
    PathEnsemble e = simulate_euler(p, g, 4000, 17);
    std::vector<double> uv(e.n_paths * 2), combo(e.n_paths);
    for (long path = 0; path < e.n_paths; ++path) {
        const double x = e.state(1, path)[0];
        uv[path * 2 + 0] = std::sin(3.0 * x);
        uv[path * 2 + 1] = x * x * x - x;
        combo[path] = 2.0 * uv[path * 2 + 0] - 0.5 * uv[path * 2 + 1];
    }
    LeastSquaresBackend reg(e, 3, 0.0);
    std::vector<double> fitted_uv(e.n_paths * 2), fitted_combo(e.n_paths);
    reg.condexp_multi(1, uv.data(), 2, fitted_uv.data());
    reg.condexp_multi(1, combo.data(), 1, fitted_combo.data());
    for (long path = 0; path < e.n_paths; ++path) {
        const double lin = 2.0 * fitted_uv[path * 2] - 0.5 * fitted_uv[path * 2 + 1];
        CHECK(fitted_combo[path] == doctest::Approx(lin).epsilon(1e-9));
    }
}

TEST_CASE("lattice conditional expectation is a sup-norm contraction and linear") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    TimeGrid g = build_grids(4, 1.0, 1.0);
    LatticeModel lat = build_lattice(p, g);
    LatticeBackend lb(lat);
    std::vector<double> v(lat.nodes_at(3)), w(lat.nodes_at(3));
    for (long k = 0; k < lat.nodes_at(3); ++k) {
        v[k] = std::cos(static_cast<double>(k));
        w[k] = uniform_draw(3, k, 0, 0);
    }
    auto ev = lb.condexp(2, v);
    auto ew = lb.condexp(2, w);
    const double vmax = *std::max_element(v.begin(), v.end(),
                                          [](double a, double b) { return std::abs(a) < std::abs(b); });
    for (double x : ev) CHECK(std::abs(x) <= std::abs(vmax) + 1e-15);
    // linearity is exact: E[2v - 3w] = 2E[v] - 3E[w]
    std::vector<double> mix(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) mix[k] = 2.0 * v[k] - 3.0 * w[k];
    auto emix = lb.condexp(2, mix);
    for (std::size_t k = 0; k < emix.size(); ++k)
        CHECK(emix[k] == doctest::Approx(2.0 * ev[k] - 3.0 * ew[k]).epsilon(1e-14));
}

TEST_CASE("fitted values are invariant under path reordering") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    TimeGrid g = build_grids(2, 1.0, 1.0);
    PathEnsemble e = simulate_euler(p, g, 1000, 5);
    std::vector<double> t(e.n_paths);
    for (long path = 0; path < e.n_paths; ++path)
        t[path] = std::tanh(e.state(1, path)[0]) + 0.1 * normal_draw(1, path, 0, 0);
    LeastSquaresFit fit = least_squares_fit(e.state(1, 0), e.n_paths, 1, t.data(), 1, 3, 0.0);

    // reverse path order
    std::vector<double> states_rev(e.n_paths), t_rev(e.n_paths);
    for (long path = 0; path < e.n_paths; ++path) {
        states_rev[path] = e.state(1, e.n_paths - 1 - path)[0];
        t_rev[path] = t[e.n_paths - 1 - path];
    }
    LeastSquaresFit fit2 =
        least_squares_fit(states_rev.data(), e.n_paths, 1, t_rev.data(), 1, 3, 0.0);
    for (long path = 0; path < e.n_paths; ++path)
        CHECK(fit.fitted[path] ==
              doctest::Approx(fit2.fitted[e.n_paths - 1 - path]).epsilon(1e-9));
}

TEST_CASE("exactly collinear features: error without ridge, fit with ridge") {
    // x in {0,1} makes x^2 == x: degree 2 design is singular
    std::vector<double> states(400), targets(400);
    for (int k = 0; k < 400; ++k) {
        states[k] = k % 2;
        targets[k] = 3.0 * states[k] + 1.0;
    }
    CHECK_THROWS_AS(least_squares_fit(states.data(), 400, 1, targets.data(), 1, 2, 0.0),
                    NumericalFailure);
    LeastSquaresFit fit = least_squares_fit(states.data(), 400, 1, targets.data(), 1, 2, 1e-10);
    for (int k = 0; k < 400; ++k)
        CHECK(fit.fitted[k] == doctest::Approx(targets[k]).epsilon(1e-6));
}

TEST_CASE("bivariate states recover a planar target") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    p.state_dim = 2;
    p.brownian_dim = 2;
    p.x0 = {0.0, 1.0};
    p.drift = [](std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 0.0;
    };
    p.diffusion = [](std::span<const double>, std::span<double> out) {
        out[0] = 1.0;
        out[1] = 0.0;
        out[2] = 0.0;
        out[3] = 0.7;
    };
    TimeGrid g = build_grids(2, 1.0, 1.0);
    PathEnsemble e = simulate_euler(p, g, 20000, 3);
    std::vector<double> t(e.n_paths);
    for (long path = 0; path < e.n_paths; ++path) {
        const double* x = e.state(1, path);
        t[path] = 2.0 * x[0] - 0.5 * x[1] + 3.0 + normal_draw(88, path, 0, 0);
    }
    LeastSquaresFit fit = least_squares_fit(e.state(1, 0), e.n_paths, 2, t.data(), 1, 2, 0.0);
    REQUIRE(fit.n_features == 6);
    // exponent order: 1, x1, x2, x1^2, x1 x2, x2^2
    CHECK(fit.coefficients[0] == doctest::Approx(3.0).epsilon(0.15));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(0.05));
    CHECK(fit.coefficients[2] == doctest::Approx(-0.5).epsilon(0.15));
}

TEST_CASE("degenerate ensembles (sigma = 0) reduce to plain means") {
    SwitchingProblem p = martingale_problem(1, 1.0);
    p.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    TimeGrid g = build_grids(2, 1.0, 1.0);
    PathEnsemble e = simulate_euler(p, g, 100, 2);
    LeastSquaresBackend reg(e, 3, 0.0);  // constant columns drop, no singularity
    std::vector<double> t(e.n_paths);
    for (long path = 0; path < e.n_paths; ++path) t[path] = static_cast<double>(path);
    auto fitted = reg.condexp(1, t);
    const double mean = (e.n_paths - 1) / 2.0;
    for (double v : fitted) CHECK(v == doctest::Approx(mean).epsilon(1e-12));
}
