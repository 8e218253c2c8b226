#include "orbsde/scheme.hpp"

#include <algorithm>
#include <cmath>

#include "orbsde/parallel.hpp"
#include "orbsde/projection.hpp"

namespace orbsde {

GenericStepInputs make_step_inputs(const SwitchingProblem& problem, const ScenarioSet& scenario) {
    GenericStepInputs in;
    in.d = problem.component_count;
    in.q = problem.brownian_dim;
    in.driver_in_y = true;
    const SwitchingProblem* pb = &problem;
    const ScenarioSet* sc = &scenario;
    const int m = problem.state_dim;
    in.driver = [pb, sc, m](int i, long slot, int j, std::span<const double> y,
                            std::span<const double> zrow) {
        return pb->driver[j]({sc->state(i, slot), static_cast<std::size_t>(m)}, y, zrow);
    };
    in.costs = [pb, sc, m](int i, long slot, double* C) {
        pb->costs.evaluate({sc->state(i, slot), static_cast<std::size_t>(m)}, C);
    };
    const int n = scenario.grid().n_steps();
    in.terminal = [pb, sc, m, n](long slot, double* xi) {
        const int d = pb->component_count;
        std::span<double> out(xi, static_cast<std::size_t>(d));
        pb->terminal({sc->state(n, slot), static_cast<std::size_t>(m)}, out);
    };
    return in;
}

GenericStepInputs perturb_inputs(const GenericStepInputs& inputs, double zeta_f, double zeta_c) {
    GenericStepInputs out = inputs;
    auto base_driver = inputs.driver;
    out.driver = [base_driver, zeta_f](int i, long slot, int j, std::span<const double> y,
                                       std::span<const double> zrow) {
        return base_driver(i, slot, j, y, zrow) + zeta_f;
    };
    if (zeta_c != 0.0) {
        auto base_costs = inputs.costs;
        const int d = inputs.d;
        out.costs = [base_costs, zeta_c, d](int i, long slot, double* C) {
            base_costs(i, slot, C);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    if (a != b) C[static_cast<std::size_t>(a) * d + b] += zeta_c;
        };
    }
    return out;
}

StepResult backward_step(const GenericStepInputs& inputs, int i,
                         const std::vector<double>& y_next, const WeightFamily& weights,
                         const CondExpBackend& backend, const ScenarioSet& scenario, double h,
                         const SolverOptions& opts) {
    const int d = inputs.d;
    const int q = inputs.q;
    const long slots_next = scenario.slots(i + 1);
    const long slots_here = scenario.slots(i);
    const int ncols = d + d * q;

    // one conditional expectation per step: [Y_{i+1}, Y_{i+1} (x) H_i]
    std::vector<double> targets(static_cast<std::size_t>(slots_next) * ncols);
    parallel_for(slots_next, [&](long begin, long end) {
        for (long s = begin; s < end; ++s) {
            const double* ys = y_next.data() + static_cast<std::size_t>(s) * d;
            const double* hrow = weights.row(i, s);
            double* t = targets.data() + static_cast<std::size_t>(s) * ncols;
            for (int j = 0; j < d; ++j) t[j] = ys[j];
            for (int j = 0; j < d; ++j)
                for (int l = 0; l < q; ++l) t[d + j * q + l] = ys[j] * hrow[l];
        }
    });
    std::vector<double> cond(static_cast<std::size_t>(slots_here) * ncols);
    backend.condexp_multi(i, targets.data(), ncols, cond.data());

    StepResult res;
    res.ytilde.resize(static_cast<std::size_t>(slots_here) * d);
    res.z.resize(static_cast<std::size_t>(slots_here) * d * q);
    std::vector<double> ey(static_cast<std::size_t>(slots_here) * d);
    parallel_for(slots_here, [&](long begin, long end) {
        for (long s = begin; s < end; ++s) {
            const double* c = cond.data() + static_cast<std::size_t>(s) * ncols;
            for (int j = 0; j < d; ++j) ey[static_cast<std::size_t>(s) * d + j] = c[j];
            for (int k = 0; k < d * q; ++k)
                res.z[static_cast<std::size_t>(s) * d * q + k] = c[d + k];
        }
    });

    // Picard iteration for ytilde = ey + h F_i(ytilde, z); for z-only drivers
    // a single sweep lands on the fixed point
    std::vector<double> cur = ey;
    std::vector<double> next(cur.size());
    auto sweep = [&](const std::vector<double>& from, std::vector<double>& to) {
        parallel_for(slots_here, [&](long begin, long end) {
            for (long s = begin; s < end; ++s) {
                std::span<const double> yv(from.data() + static_cast<std::size_t>(s) * d,
                                           static_cast<std::size_t>(d));
                for (int j = 0; j < d; ++j) {
                    std::span<const double> zrow(
                        res.z.data() + (static_cast<std::size_t>(s) * d + j) * q,
                        static_cast<std::size_t>(q));
                    to[static_cast<std::size_t>(s) * d + j] =
                        ey[static_cast<std::size_t>(s) * d + j] +
                        h * inputs.driver(i, s, j, yv, zrow);
                }
            }
        });
    };

    if (!inputs.driver_in_y) {
        sweep(cur, next);
        res.ytilde = std::move(next);
        res.iterations = 1;
        res.first_residual = 0.0;
        return res;
    }

    double residual = 0.0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        sweep(cur, next);
        residual = 0.0;
        for (std::size_t k = 0; k < cur.size(); ++k)
            residual = std::max(residual, std::abs(next[k] - cur[k]));
        std::swap(cur, next);
        res.iterations = it;
        if (it == 1) res.first_residual = residual;
        if (residual <= opts.tol) {
            res.ytilde = std::move(cur);
            return res;
        }
    }
    throw IterationFailure("backward_step: Picard iteration did not reach tol " +
                               std::to_string(opts.tol) + " within " +
                               std::to_string(opts.max_iter) + " sweeps (residual " +
                               std::to_string(residual) + ") at time index " + std::to_string(i),
                           residual, i);
}

void reflect_step(const GenericStepInputs& inputs, int i, bool reflection_date,
                  const ScenarioSet& scenario, const std::vector<double>& ytilde,
                  std::vector<double>& y_out, std::vector<double>& dk_out, long* active_count) {
    const int d = inputs.d;
    const long slots = scenario.slots(i);
    y_out.resize(ytilde.size());
    dk_out.assign(ytilde.size(), 0.0);
    if (!reflection_date) {
        y_out = ytilde;
        if (active_count) *active_count = 0;
        return;
    }
    parallel_for(slots, [&](long begin, long end) {
        std::vector<double> C(static_cast<std::size_t>(d) * d);
        for (long s = begin; s < end; ++s) {
            inputs.costs(i, s, C.data());
            const double* yt = ytilde.data() + static_cast<std::size_t>(s) * d;
            double* yo = y_out.data() + static_cast<std::size_t>(s) * d;
            project_raw(d, C.data(), yt, yo);
            for (int j = 0; j < d; ++j)
                dk_out[static_cast<std::size_t>(s) * d + j] = yo[j] - yt[j];
        }
    });
    long total = 0;
    for (std::size_t k = 0; k < dk_out.size(); ++k) total += dk_out[k] > 0.0;
    if (active_count) *active_count = total;
}

namespace {

StepAggregates aggregate_level(const std::vector<double>& y, const std::vector<double>& dk,
                               int d, long slots) {
    StepAggregates a;
    a.y_mean.assign(d, 0.0);
    a.y_se.assign(d, 0.0);
    for (long s = 0; s < slots; ++s)
        for (int j = 0; j < d; ++j) a.y_mean[j] += y[static_cast<std::size_t>(s) * d + j];
    for (int j = 0; j < d; ++j) a.y_mean[j] /= slots;
    if (slots > 1) {
        for (long s = 0; s < slots; ++s)
            for (int j = 0; j < d; ++j) {
                const double dev = y[static_cast<std::size_t>(s) * d + j] - a.y_mean[j];
                a.y_se[j] += dev * dev;
            }
        for (int j = 0; j < d; ++j) a.y_se[j] = std::sqrt(a.y_se[j] / slots / slots);
    }
    for (double v : dk) a.max_dk = std::max(a.max_dk, v);
    return a;
}

}  // namespace

SchemeSolution solve_generic(const GenericStepInputs& inputs, const ScenarioSet& scenario,
                             const WeightFamily& weights, const CondExpBackend& backend,
                             const SolverOptions& opts) {
    const TimeGrid& grid = scenario.grid();
    const int n = grid.n_steps();
    const int d = inputs.d;
    const int q = inputs.q;
    if (static_cast<int>(weights.values.size()) != n || weights.q != q)
        throw std::invalid_argument("solve_generic: weights do not match the scenario grid");

    SchemeSolution sol;
    sol.grid = grid;
    sol.d = d;
    sol.q = q;
    sol.full_storage = opts.store_levels;
    sol.ytilde.resize(n + 1);
    sol.y.resize(n + 1);
    sol.dk.resize(n + 1);
    sol.z.resize(n);
    sol.aggregates.resize(n + 1);
    sol.diagnostics.picard_iterations.assign(n, 0);
    sol.diagnostics.first_residuals.assign(n, 0.0);

    // terminal condition; no projection at T (the terminal condition is
    // required to lie in the domain already)
    const long slots_n = scenario.slots(n);
    std::vector<double> y_next(static_cast<std::size_t>(slots_n) * d);
    parallel_for(slots_n, [&](long begin, long end) {
        for (long s = begin; s < end; ++s)
            inputs.terminal(s, y_next.data() + static_cast<std::size_t>(s) * d);
    });
    std::vector<double> zero_dk(y_next.size(), 0.0);
    sol.aggregates[n] = aggregate_level(y_next, zero_dk, d, slots_n);
    if (opts.store_levels) {
        sol.ytilde[n] = y_next;
        sol.y[n] = y_next;
        sol.dk[n] = zero_dk;
    }

    for (int i = n - 1; i >= 0; --i) {
        StepResult sr =
            backward_step(inputs, i, y_next, weights, backend, scenario, grid.step(i), opts);
        sol.diagnostics.picard_iterations[i] = sr.iterations;
        sol.diagnostics.first_residuals[i] = sr.first_residual;
        sol.diagnostics.max_picard = std::max(sol.diagnostics.max_picard, sr.iterations);

        std::vector<double> y_here, dk_here;
        long active = 0;
        reflect_step(inputs, i, grid.is_reflection(i), scenario, sr.ytilde, y_here, dk_here,
                     &active);
        sol.aggregates[i] = aggregate_level(y_here, dk_here, d, scenario.slots(i));
        sol.aggregates[i].projection_active = active;

        if (opts.z_observer) opts.z_observer(i, sr.z);
        if (opts.store_levels || i == 0) {
            sol.ytilde[i] = std::move(sr.ytilde);
            sol.z[i] = std::move(sr.z);
            sol.dk[i] = std::move(dk_here);
            sol.y[i] = y_here;
        }
        y_next = std::move(y_here);
    }
    return sol;
}

SchemeSolution solve(const SwitchingProblem& problem, const ScenarioSet& scenario,
                     const WeightFamily& weights, const CondExpBackend& backend,
                     const SolverOptions& opts) {
    const TimeGrid& grid = scenario.grid();
    if (grid.modulus() * problem.lipschitz_y >= 1.0)
        throw std::invalid_argument("solve: need |pi| L^Y < 1 for the implicit step to contract");
    GenericStepInputs inputs = make_step_inputs(problem, scenario);
    SchemeSolution sol = solve_generic(inputs, scenario, weights, backend, opts);
    if (problem.lipschitz_z > 0.0) {
        for (int i = 0; i < grid.n_steps(); ++i) {
            if (weights.sup_h_row_norm[i] * problem.lipschitz_z > 1.0) {
                sol.diagnostics.warnings.push_back(
                    "weights bound h|H| L^Z <= 1 violated at interval " + std::to_string(i) +
                    "; comparison properties are not guaranteed");
                break;
            }
        }
    }
    for (const std::string& w : weights.warnings) sol.diagnostics.warnings.push_back(w);
    return sol;
}

}  // namespace orbsde
