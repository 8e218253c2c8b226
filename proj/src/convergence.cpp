#include "orbsde/convergence.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace orbsde {

namespace {

double euclid_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double euclid(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

constexpr long kZAggregatePathCap = 50000;

}  // namespace

RunContext make_run_context(const ProblemConfig& config, const TimeGrid& grid,
                            std::uint64_t seed) {
    const SwitchingProblem& pb = config.problem;
    RunContext ctx;
    if (config.scenario.kind == ScenarioSpec::Kind::lattice) {
        ctx.scenario_ptr = std::make_unique<ScenarioSet>(build_lattice(pb, grid));
        ctx.weights = rademacher_weights(ctx.scenario().lattice(), pb.lipschitz_z);
    } else {
        ctx.scenario_ptr = std::make_unique<ScenarioSet>(
            simulate_euler(pb, grid, config.scenario.paths, seed));
        ctx.weights =
            truncated_gaussian_weights(ctx.scenario().ensemble(), config.weights.R, pb.lipschitz_z);
    }
    ctx.backend = make_backend(ctx.scenario(), config.solver.basis_degree, config.solver.ridge);
    return ctx;
}

std::vector<double> closed_form_reference(const ProblemConfig& config) {
    if (config.reference_y0.empty())
        throw std::invalid_argument(
            "run_convergence: reference 'closed_form' needs reference_y0 in the config");
    return config.reference_y0;
}

ConvergenceTable run_convergence(const ProblemConfig& config, std::vector<int> n_list,
                                 double gamma, const std::string& reference, std::uint64_t seed,
                                 bool with_z_aggregate) {
    if (n_list.empty()) throw std::invalid_argument("run_convergence: empty n list");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("run_convergence: n list must be increasing");
    if (reference != "closed_form" && reference != "finest")
        throw std::invalid_argument("run_convergence: reference must be closed_form or finest");

    const double T = config.problem.horizon;
    ConvergenceTable table;
    table.reference = reference;

    const bool z_diag = with_z_aggregate && reference == "finest" &&
                        config.scenario.kind == ScenarioSpec::Kind::montecarlo;
    // per row: time -> z slice over the first capped paths
    std::vector<std::map<double, std::vector<double>>> z_slices(n_list.size());
    const long zcap = std::min<long>(kZAggregatePathCap, config.scenario.paths);
    const int d = config.problem.component_count;
    const int q = config.problem.brownian_dim;

    for (std::size_t r = 0; r < n_list.size(); ++r) {
        ConvergenceRow row;
        row.n = n_list[r];
        const auto t0 = std::chrono::steady_clock::now();
        try {
            TimeGrid grid = build_grids(row.n, T, gamma);
            row.h = grid.modulus();
            row.hR = grid.reflection_modulus();
            row.kappa = grid.reflection_count();
            row.alpha = std::log(2.0 * T / row.h);

            RunContext ctx = make_run_context(config, grid, seed);
            SolverOptions opts;
            opts.tol = config.solver.tol;
            opts.max_iter = config.solver.max_iter;
            opts.store_levels = false;
            if (z_diag) {
                auto& slices = z_slices[r];
                const TimeGrid g = grid;
                opts.z_observer = [&slices, g, zcap, d, q](int i, const std::vector<double>& z) {
                    const std::size_t take =
                        std::min<std::size_t>(z.size(), static_cast<std::size_t>(zcap) * d * q);
                    slices[g.times[i]] = std::vector<double>(z.begin(), z.begin() + take);
                };
            }
            SchemeSolution sol =
                solve(config.problem, ctx.scenario(), ctx.weights, *ctx.backend, opts);
            row.y0 = sol.y0();
            row.stderr_val =
                ctx.scenario().is_lattice() ? 0.0 : euclid(sol.aggregates[1].y_se);
        } catch (const std::exception& e) {
            row.failed = true;
            row.message = e.what();
        }
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.z_aggregate = std::numeric_limits<double>::quiet_NaN();
        table.rows.push_back(std::move(row));
    }

    // reference values
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (reference == "closed_form") {
        table.reference_y0 = closed_form_reference(config);
    } else {
        const ConvergenceRow& last = table.rows.back();
        if (last.failed)
            throw std::runtime_error("run_convergence: finest-grid reference run failed: " +
                                     last.message);
        table.reference_y0 = last.y0;
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ConvergenceRow& row = table.rows[r];
        if (row.failed) {
            row.error = nan;
            continue;
        }
        const bool is_ref = reference == "finest" && r + 1 == table.rows.size();
        row.error = is_ref ? nan : euclid_diff(row.y0, table.reference_y0);
    }

    // optional Z aggregate against the reference run at shared times
    if (z_diag) {
        const auto& ref_slices = z_slices.back();
        auto find_near = [](const std::map<double, std::vector<double>>& m, double t) {
            auto it = m.lower_bound(t - 1e-12);
            if (it != m.end() && std::abs(it->first - t) <= 1e-12) return it;
            return m.end();
        };
        for (std::size_t r = 0; r + 1 < table.rows.size(); ++r) {
            ConvergenceRow& row = table.rows[r];
            if (row.failed) continue;
            double acc = 0.0;
            bool any = false;
            TimeGrid grid = build_grids(row.n, T, gamma);
            for (int i = 0; i < grid.n_steps(); ++i) {
                auto here = find_near(z_slices[r], grid.times[i]);
                auto ref = find_near(ref_slices, grid.times[i]);
                if (here == z_slices[r].end() || ref == ref_slices.end()) continue;
                const std::vector<double>& a = here->second;
                const std::vector<double>& b = ref->second;
                const std::size_t paths = std::min(a.size(), b.size()) / (d * q);
                if (paths == 0) continue;
                double mean_sq = 0.0;
                for (std::size_t p = 0; p < paths * d * q; ++p) {
                    const double dz = a[p] - b[p];
                    mean_sq += dz * dz;
                }
                acc += grid.step(i) * mean_sq / paths;
                any = true;
            }
            if (any) row.z_aggregate = acc;
        }
    }

    // slope over finite errors; values at machine noise (exact schemes) carry
    // no rate information and would only poison the fit
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    double ref_scale = 1.0;
    for (double v : table.reference_y0) ref_scale = std::max(ref_scale, std::abs(v));
    for (const ConvergenceRow& row : table.rows) {
        if (row.failed || !std::isfinite(row.error) || row.error <= 1e-13 * ref_scale) continue;
        const double lx = std::log(row.h);
        const double ly = std::log(row.error);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++pts;
    }
    table.fit_points = pts;
    if (pts >= 2) {
        const double det = pts * sxx - sx * sx;
        table.slope = (pts * sxy - sx * sy) / det;
        table.intercept = (sy * sxx - sx * sxy) / det;
    } else {
        table.slope = nan;
        table.intercept = nan;
    }
    return table;
}

std::vector<RefinementRow> run_refinement(const ProblemConfig& config, int n,
                                          const std::vector<int>& reflection_intervals,
                                          std::uint64_t seed) {
    if (reflection_intervals.empty())
        throw std::invalid_argument("run_refinement: empty interval list");
    const double T = config.problem.horizon;
    TimeGrid base = build_grids(n, T, 1.0);

    // one scenario set shared by every reflection variant
    RunContext ctx = make_run_context(config, base, seed);

    SolverOptions opts;
    opts.tol = config.solver.tol;
    opts.max_iter = config.solver.max_iter;
    opts.store_levels = false;

    std::vector<RefinementRow> rows;
    for (int intervals : reflection_intervals) {
        std::vector<char> flags(n + 1, 0);
        for (int j = 0; j <= intervals; ++j) {
            const int idx = static_cast<int>(std::lround(static_cast<double>(j) * n / intervals));
            flags[std::min(idx, n)] = 1;
        }
        flags[0] = 1;
        flags[n] = 1;
        ctx.scenario().set_reflection(flags);  // same draws, different reflection grid
        SchemeSolution sol = solve(config.problem, ctx.scenario(), ctx.weights, *ctx.backend, opts);

        RefinementRow row;
        row.intervals = intervals;
        row.hR = ctx.scenario().grid().reflection_modulus();
        row.alpha = std::log(2.0 * T / row.hR);
        row.y0 = sol.y0();
        row.drift = rows.empty() ? 0.0 : euclid_diff(row.y0, rows.back().y0);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<PerturbationRow> run_perturbation(const ProblemConfig& config,
                                              const std::vector<double>& zetas,
                                              std::uint64_t seed) {
    const double T = config.problem.horizon;
    TimeGrid grid = build_grids(config.grid.n, T, config.grid.gamma);
    RunContext ctx = make_run_context(config, grid, seed);
    SolverOptions opts;
    opts.tol = config.solver.tol;
    opts.max_iter = config.solver.max_iter;
    opts.store_levels = false;

    GenericStepInputs base = make_step_inputs(config.problem, ctx.scenario());
    SchemeSolution unperturbed =
        solve_generic(base, ctx.scenario(), ctx.weights, *ctx.backend, opts);
    const std::vector<double> y0 = unperturbed.y0();

    std::vector<PerturbationRow> rows;
    rows.push_back({0.0, y0, 0.0});
    for (double zeta : zetas) {
        GenericStepInputs pert = perturb_inputs(base, zeta, 0.0);
        SchemeSolution sol = solve_generic(pert, ctx.scenario(), ctx.weights, *ctx.backend, opts);
        PerturbationRow row;
        row.zeta = zeta;
        row.y0 = sol.y0();
        row.delta = euclid_diff(row.y0, y0);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace orbsde
