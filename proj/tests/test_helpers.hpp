#pragma once

// problem builders shared by the unit tests and the acceptance suite

#include <cmath>
#include <vector>

#include "orbsde/forward.hpp"
#include "orbsde/problem.hpp"
#include "orbsde/rng.hpp"

namespace orbsde::testing {

inline CostStructure constant_costs(int d, double value) {
    CostStructure c;
    c.d = d;
    c.entries.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j)
                c.entries[static_cast<std::size_t>(i) * d + j] =
                    [value](std::span<const double>) { return value; };
    return c;
}

inline CostStructure matrix_costs(int d, std::vector<double> values) {
    CostStructure c;
    c.d = d;
    c.entries.resize(static_cast<std::size_t>(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j) {
                const double v = values[static_cast<std::size_t>(i) * d + j];
                c.entries[static_cast<std::size_t>(i) * d + j] =
                    [v](std::span<const double>) { return v; };
            }
    return c;
}

// scalar Brownian state, d equal terminal components, zero driver
inline SwitchingProblem martingale_problem(int d, double cost, double x0 = 0.0, double T = 1.0) {
    SwitchingProblem p;
    p.state_dim = 1;
    p.brownian_dim = 1;
    p.component_count = d;
    p.x0 = {x0};
    p.horizon = T;
    p.lipschitz_y = 0.01;
    p.lipschitz_z = 0.0;
    p.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    p.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    p.terminal = [d](std::span<const double> x, std::span<double> out) {
        for (int j = 0; j < d; ++j) out[j] = x[0];
    };
    p.driver.assign(d, [](std::span<const double>, std::span<const double>,
                          std::span<const double>) { return 0.0; });
    p.costs = constant_costs(d, cost);
    return p;
}

// two-mode switching benchmark: mode 1 earns x, mode 2 earns -x, with mild
// y and z coupling so the implicit step and the Z row are both exercised
inline SwitchingProblem two_mode_benchmark(double cost = 0.1, double a_y = 0.1,
                                           double a_z = 0.05) {
    SwitchingProblem p;
    p.state_dim = 1;
    p.brownian_dim = 1;
    p.component_count = 2;
    p.x0 = {0.0};
    p.horizon = 1.0;
    p.lipschitz_y = std::max(a_y, 1e-3);
    p.lipschitz_z = a_z;
    p.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    p.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    p.terminal = [](std::span<const double>, std::span<double> out) {
        out[0] = 0.0;
        out[1] = 0.0;
    };
    p.driver.resize(2);
    p.driver[0] = [a_y, a_z](std::span<const double> x, std::span<const double> y,
                             std::span<const double> z) {
        return x[0] - a_y * y[0] + a_z * z[0];
    };
    p.driver[1] = [a_y, a_z](std::span<const double> x, std::span<const double> y,
                             std::span<const double> z) {
        return -x[0] - a_y * y[1] + a_z * z[0];
    };
    p.costs = constant_costs(2, cost);
    return p;
}

// decoupled linear drivers f^j = a_j y_j + c_j, terminal g_j = quad x^2 + off_j,
// costs huge so reflection never binds; closed form for the continuous limit.
// The terminal variance is kept small so the time-discretization bias, not
// Monte Carlo noise, drives the measured convergence slope.
struct LinearBenchmark {
    SwitchingProblem problem;
    std::vector<double> a, c, off;
    double quad = 0.1;
    std::vector<double> exact_y0() const {
        std::vector<double> out(a.size());
        const double T = problem.horizon;
        const double x0 = problem.x0[0];
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double grow = std::exp(a[j] * T);
            out[j] = grow * (quad * (x0 * x0 + T) + off[j]) + (grow - 1.0) * c[j] / a[j];
        }
        return out;
    }
};

inline LinearBenchmark linear_benchmark() {
    LinearBenchmark b;
    b.a = {0.8, 1.2};
    b.c = {0.5, -0.3};
    b.off = {1.0, 1.5};
    b.quad = 0.1;
    SwitchingProblem& p = b.problem;
    p.state_dim = 1;
    p.brownian_dim = 1;
    p.component_count = 2;
    p.x0 = {0.0};
    p.horizon = 1.0;
    p.lipschitz_y = 1.2;
    p.lipschitz_z = 0.0;
    p.drift = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
    p.diffusion = [](std::span<const double>, std::span<double> out) { out[0] = 1.0; };
    const auto off = b.off;
    const double quad = b.quad;
    p.terminal = [off, quad](std::span<const double> x, std::span<double> out) {
        for (std::size_t j = 0; j < off.size(); ++j) out[j] = quad * x[0] * x[0] + off[j];
    };
    p.driver.resize(2);
    for (int j = 0; j < 2; ++j) {
        const double aj = b.a[j], cj = b.c[j];
        p.driver[j] = [aj, cj, j](std::span<const double>, std::span<const double> y,
                                  std::span<const double>) { return aj * y[j] + cj; };
    }
    p.costs = constant_costs(2, 1e6);
    return b;
}

// random structural cost matrix: off-diagonals in [lo, lo*0.9+hi*...] chosen
// so triangle margins stay >= lo - (hi - lo) > 0 when hi < 2*lo
inline CostMatrix random_structural_matrix(int d, std::uint64_t seed, std::uint64_t tag) {
    CostMatrix C(d);
    const double lo = 1.0, hi = 1.9;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i != j)
                C.at(i, j) = lo + (hi - lo) * uniform_draw(seed, tag, i, j);
    return C;
}

}  // namespace orbsde::testing
