#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "orbsde/weights.hpp"
#include "test_helpers.hpp"

using namespace orbsde;
using orbsde::testing::martingale_problem;

namespace {

// tiny hand-built ensemble with prescribed increments on one interval
PathEnsemble manual_ensemble(double h, std::vector<double> dws) {
    PathEnsemble e;
    e.m = 1;
    e.q = 1;
    e.n_paths = static_cast<long>(dws.size());
    e.grid.horizon = h;
    e.grid.times = {0.0, h};
    e.grid.reflection = {1, 1};
    e.states.assign(2 * dws.size(), 0.0);
    e.increments = std::move(dws);
    for (std::size_t p = 0; p < e.increments.size(); ++p)
        e.states[e.increments.size() + p] = e.increments[p];
    return e;
}

}  // namespace

TEST_CASE("clamping arithmetic") {
    PathEnsemble e = manual_ensemble(0.01, {0.3, 0.7, -0.9});
    WeightFamily w = truncated_gaussian_weights(e, 0.5);
    CHECK(w.row(0, 0)[0] == doctest::Approx(30.0));   // no clipping: 30 < 50
    CHECK(w.row(0, 1)[0] == doctest::Approx(50.0));   // clipped at R/h
    CHECK(w.row(0, 2)[0] == doctest::Approx(-50.0));  // clipped at -R/h
}

TEST_CASE("truncation never increases magnitude") {
    PathEnsemble e = manual_ensemble(0.04, {0.05, -0.3, 1.2, -2.0, 0.0});
    WeightFamily w = truncated_gaussian_weights(e, 0.25);
    for (long p = 0; p < e.n_paths; ++p)
        CHECK(std::abs(w.row(0, p)[0]) <= std::abs(e.increment(0, p)[0]) / 0.04 + 1e-15);
}

TEST_CASE("lambda approaches one as R grows") {
    PathEnsemble e = manual_ensemble(0.01, {0.1});
    WeightFamily w = truncated_gaussian_weights(e, 1000.0);
    CHECK(w.lambdas[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(truncated_normal_lambda(1e9) == doctest::Approx(1.0));
    // small clip keeps lambda strictly inside (0,1)
    WeightFamily tight = truncated_gaussian_weights(e, 0.05);
    CHECK(tight.lambdas[0] > 0.0);
    CHECK(tight.lambdas[0] < 1.0);
}

TEST_CASE("analytic lambda matches a quadrature oracle") {
    // E[min(max(Z,-c),c)^2] by trapezoid integration of the normal density
    auto oracle = [](double c) {
        const int n = 400000;
        const double lo = -10.0, hi = 10.0;
        double acc = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double z = lo + (hi - lo) * i / n;
            const double v = std::min(std::max(z, -c), c);
            const double w = (i == 0 || i == n) ? 0.5 : 1.0;
            acc += w * v * v * std::exp(-0.5 * z * z);
        }
        return acc * (hi - lo) / n / std::sqrt(2.0 * 3.14159265358979323846);
    };
    for (double c : {0.3, 1.0, 2.5}) {
        CHECK(truncated_normal_lambda(c) == doctest::Approx(oracle(c)).epsilon(1e-6));
    }
}

TEST_CASE("rademacher two-point weights") {
    SwitchingProblem p = martingale_problem(2, 1.0);
    TimeGrid g = build_grids(4, 1.0, 1.0);  // h = 0.25
    LatticeModel lat = build_lattice(p, g);
    WeightFamily w = rademacher_weights(lat);
    for (long s = 0; s < lat.nodes_at(1); ++s)
        CHECK(std::abs(w.row(0, s)[0]) == doctest::Approx(2.0));
    CHECK(w.lambdas[0] == 1.0);
    // h E[H^2] = 0.25 * 4 = 1
    double m2 = 0.0;
    for (long s = 0; s < lat.nodes_at(1); ++s)
        m2 += lat.probs[1][s] * 0.25 * w.row(0, s)[0] * w.row(0, s)[0];
    CHECK(m2 == doctest::Approx(1.0));
    CHECK(w.sup_h_row_norm[0] == doctest::Approx(std::sqrt(0.25)));
}

TEST_CASE("check_moments is exact on the lattice") {
    SwitchingProblem p = martingale_problem(2, 1.0);
    // h = 0.25 makes h H^2 = 1 exact in floating point
    TimeGrid g = build_grids(4, 1.0, 1.0);
    LatticeModel lat = build_lattice(p, g);
    ScenarioSet sc(lat);
    WeightFamily w = rademacher_weights(sc.lattice());
    ValidationReport rep = check_moments(w, sc, 0.0, 0.5);
    CHECK(rep.pass());
    CHECK(rep.worst_margin >= 0.0);
}

TEST_CASE("check_moments on a Monte Carlo ensemble within standard errors") {
    SwitchingProblem p = martingale_problem(2, 1.0);
    TimeGrid g = build_grids(4, 1.0, 1.0);
    PathEnsemble e = simulate_euler(p, g, 100000, 31);
    ScenarioSet sc(e);
    WeightFamily w = truncated_gaussian_weights(sc.ensemble(), 1.0);
    ValidationReport rep = check_moments(w, sc, 5.0, 0.0);
    CHECK(rep.pass());
}

TEST_CASE("R exceeding 1/L^Z is flagged") {
    PathEnsemble e = manual_ensemble(0.01, {0.1, -0.2});
    WeightFamily w = truncated_gaussian_weights(e, 2.0, /*lipschitz_z=*/1.0);
    CHECK_FALSE(w.warnings.empty());
    ScenarioSet sc(e);
    ValidationReport rep = check_moments(w, sc, 5.0, 1.0);
    CHECK_FALSE(rep.pass());

    // default R picks 1/L^Z and stays legal
    WeightFamily ok = truncated_gaussian_weights(e, 0.0, 2.0);
    CHECK(ok.clip == doctest::Approx(0.5));
    CHECK(ok.warnings.empty());
}
