#include "orbsde/problem.hpp"

#include <cmath>
#include <stdexcept>

#include "orbsde/rng.hpp"

namespace orbsde {

void CostStructure::evaluate(std::span<const double> x, double* C) const {
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const auto& fn = entries[static_cast<std::size_t>(i) * d + j];
            C[static_cast<std::size_t>(i) * d + j] = (i == j || !fn) ? 0.0 : fn(x);
        }
}

CostMatrix CostStructure::evaluate(std::span<const double> x) const {
    CostMatrix C(d);
    evaluate(x, C.c.data());
    return C;
}

std::vector<double> SwitchingProblem::terminal_at(std::span<const double> x) const {
    std::vector<double> g(component_count);
    terminal(x, g);
    return g;
}

ValidationReport validate_costs(const CostStructure& costs,
                                const std::vector<std::vector<double>>& sample_points,
                                double eps) {
    if (sample_points.empty())
        throw std::invalid_argument("validate_costs: sample_points must be nonempty");
    ValidationReport rep;
    rep.subject = "cost structure";
    CostMatrix C(costs.d);
    for (const auto& x : sample_points) {
        costs.evaluate(x, C.c.data());
        ValidationReport at_x = check_structure(C, eps);
        rep.worst_margin = std::min(rep.worst_margin, at_x.worst_margin);
        for (Violation& v : at_x.violations) {
            v.point = x;
            rep.violations.push_back(std::move(v));
        }
    }
    rep.notes.push_back("sampled minimum margin: " + std::to_string(rep.worst_margin));
    return rep;
}

ValidationReport validate_problem(const SwitchingProblem& problem,
                                  const std::vector<std::vector<double>>& sample_points) {
    if (sample_points.empty())
        throw std::invalid_argument("validate_problem: sample_points must be nonempty");
    ValidationReport rep;
    rep.subject = "problem";
    const int d = problem.component_count;
    const int q = problem.brownian_dim;

    if (problem.lipschitz_y <= 0.0)
        rep.record(problem.lipschitz_y, "declared L^Y must be positive");
    if (problem.lipschitz_z < 0.0)
        rep.record(problem.lipschitz_z, "declared L^Z must be nonnegative");

    CostMatrix C(d);
    std::vector<double> g(d);
    const double tol = problem.costs.eps;
    for (const auto& x : sample_points) {
        problem.costs.evaluate(x, C.c.data());
        problem.terminal(x, g);
        for (int i = 0; i < d; ++i) {
            double worst = 0.0;
            int worst_j = i;
            for (int j = 0; j < d; ++j) {
                const double gap = (g[j] - C.at(i, j)) - g[i];
                if (gap > worst) {
                    worst = gap;
                    worst_j = j;
                }
            }
            rep.record(tol - worst, "terminal condition leaves the domain: g^i < g^j - c^{ij}",
                       {i + 1, worst_j + 1}, x);
        }
    }

    // finite-difference Lipschitz probes around each sample point
    const double ly_cap = problem.lipschitz_y * 1.1;
    const double lz_cap = problem.lipschitz_z * 1.1;
    std::vector<double> y0(d), y1(d), z0(q), z1(q), f0(1), tmp;
    std::uint64_t probe = 0;
    for (const auto& x : sample_points) {
        for (int rep_i = 0; rep_i < 8; ++rep_i) {
            for (int k = 0; k < d; ++k) {
                y0[k] = 2.0 * uniform_draw(17, probe, k, 0) - 1.0;
                y1[k] = y0[k] + (2.0 * uniform_draw(17, probe, k, 1) - 1.0);
            }
            for (int k = 0; k < q; ++k) {
                z0[k] = 2.0 * uniform_draw(17, probe, k, 2) - 1.0;
                z1[k] = z0[k] + (2.0 * uniform_draw(17, probe, k, 3) - 1.0);
            }
            ++probe;
            double dy = 0.0, dz = 0.0;
            for (int k = 0; k < d; ++k) dy += (y1[k] - y0[k]) * (y1[k] - y0[k]);
            for (int k = 0; k < q; ++k) dz += (z1[k] - z0[k]) * (z1[k] - z0[k]);
            dy = std::sqrt(dy);
            dz = std::sqrt(dz);
            for (int j = 0; j < d; ++j) {
                const double base = problem.driver[j](x, y0, z0);
                if (dy > 1e-12) {
                    const double fy = problem.driver[j](x, y1, z0);
                    const double ratio = std::abs(fy - base) / dy;
                    rep.record(ly_cap - ratio,
                               "driver Lipschitz ratio in y exceeds declared L^Y", {j + 1}, x);
                }
                if (dz > 1e-12) {
                    const double fz = problem.driver[j](x, y0, z1);
                    const double ratio = std::abs(fz - base) / dz;
                    rep.record(lz_cap - ratio,
                               "driver Lipschitz ratio in z exceeds declared L^Z", {j + 1}, x);
                }
            }
        }
    }
    return rep;
}

}  // namespace orbsde
