// command line front end: validate / solve / oracle / strategy / converge /
// perturb / refine over JSON problem configs

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "orbsde/convergence.hpp"
#include "orbsde/export.hpp"
#include "orbsde/switching.hpp"

using namespace orbsde;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitUsage = 64;

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
};

ProblemConfig load(const CommonArgs& args) {
    ProblemConfig cfg = load_config(args.config_path);
    if (args.seed_set) cfg.scenario.seed = args.seed;
    return cfg;
}

void print_report(const ValidationReport& rep) {
    std::cout << rep.summary() << "\n";
    for (const Violation& v : rep.violations) {
        std::cout << "  violation: " << v.what;
        if (!v.indices.empty()) {
            std::cout << " at (";
            for (std::size_t k = 0; k < v.indices.size(); ++k)
                std::cout << (k ? "," : "") << v.indices[k];
            std::cout << ")";
        }
        std::cout << ", margin " << v.margin << "\n";
    }
    for (const std::string& n : rep.notes) std::cout << "  note: " << n << "\n";
}

int cmd_validate(const CommonArgs& args) {
    ProblemConfig cfg = load(args);
    const auto points = default_sample_points(cfg.problem);
    ValidationReport costs = validate_costs(cfg.problem.costs, points, cfg.problem.costs.eps);
    ValidationReport model = validate_problem(cfg.problem, points);

    TimeGrid grid = build_grids(cfg.grid.n, cfg.problem.horizon, cfg.grid.gamma);
    RunContext ctx = make_run_context(cfg, grid, cfg.scenario.seed);
    const double tol = ctx.scenario().is_lattice() ? 1e-12 : 6.0;
    ValidationReport moments =
        check_moments(ctx.weights, ctx.scenario(), tol, cfg.problem.lipschitz_z);

    print_report(costs);
    print_report(model);
    print_report(moments);
    if (!args.out.empty()) {
        nlohmann::json j;
        j["costs"] = to_json(costs);
        j["problem"] = to_json(model);
        j["weights"] = to_json(moments);
        write_text(args.out, j.dump(2) + "\n");
    }
    return (costs.pass() && model.pass() && moments.pass()) ? kExitOk : kExitValidation;
}

int cmd_solve(const CommonArgs& args) {
    ProblemConfig cfg = load(args);
    TimeGrid grid = build_grids(cfg.grid.n, cfg.problem.horizon, cfg.grid.gamma);
    RunContext ctx = make_run_context(cfg, grid, cfg.scenario.seed);
    SolverOptions opts;
    opts.tol = cfg.solver.tol;
    opts.max_iter = cfg.solver.max_iter;
    opts.store_levels = false;
    SchemeSolution sol = solve(cfg.problem, ctx.scenario(), ctx.weights, *ctx.backend, opts);

    const std::string prefix = args.out.empty() ? cfg.name : args.out;
    write_text(prefix + "_summary.json", to_json(sol).dump(2) + "\n");
    write_text(prefix + "_steps.csv", csv_of(sol));
    std::cout << "y0:";
    for (double v : sol.y0()) std::cout << " " << format_float17(v);
    std::cout << "\nwrote " << prefix << "_summary.json, " << prefix << "_steps.csv\n";
    for (const std::string& w : sol.diagnostics.warnings) std::cout << "warning: " << w << "\n";
    return kExitOk;
}

int cmd_oracle(const CommonArgs& args, int start_time, int start_mode, int samples) {
    ProblemConfig cfg = load(args);
    if (cfg.scenario.kind != ScenarioSpec::Kind::lattice)
        throw std::runtime_error("oracle: needs a lattice scenario for exact expectations");
    TimeGrid grid = build_grids(cfg.grid.n, cfg.problem.horizon, cfg.grid.gamma);
    RunContext ctx = make_run_context(cfg, grid, cfg.scenario.seed);
    SolverOptions opts;
    opts.tol = cfg.solver.tol;
    opts.max_iter = cfg.solver.max_iter;
    SchemeSolution sol = solve(cfg.problem, ctx.scenario(), ctx.weights, *ctx.backend, opts);
    GenericStepInputs inputs = make_step_inputs(cfg.problem, ctx.scenario());
    SnellReport rep = snell_check(sol, inputs, ctx.scenario(), ctx.weights, *ctx.backend,
                                  start_time, start_mode - 1, samples, cfg.scenario.seed + 1);
    std::cout << to_json(rep).dump(2) << "\n";
    if (!args.out.empty()) write_text(args.out, to_json(rep).dump(2) + "\n");
    // outside the domain the projected value is the sharp reference
    const double dom =
        rep.start_in_domain ? rep.domination_margin : rep.domination_margin_reflected;
    const double gap = rep.start_in_domain ? rep.optimality_gap : rep.optimality_gap_reflected;
    const bool pass = dom >= -1e-10 && gap <= 1e-10 &&
                      (!rep.enumerated || !rep.start_in_domain || rep.enumeration_gap <= 1e-10);
    return pass ? kExitOk : kExitValidation;
}

int cmd_strategy(const CommonArgs& args, int start_time, int start_mode) {
    ProblemConfig cfg = load(args);
    if (cfg.scenario.kind != ScenarioSpec::Kind::lattice)
        throw std::runtime_error("strategy: needs a lattice scenario");
    TimeGrid grid = build_grids(cfg.grid.n, cfg.problem.horizon, cfg.grid.gamma);
    RunContext ctx = make_run_context(cfg, grid, cfg.scenario.seed);
    SchemeSolution sol = solve(cfg.problem, ctx.scenario(), ctx.weights, *ctx.backend);
    GenericStepInputs inputs = make_step_inputs(cfg.problem, ctx.scenario());
    Strategy s =
        extract_optimal_strategy(sol, inputs, ctx.scenario(), start_time, start_mode - 1);
    const std::string path = args.out.empty() ? cfg.name + "_strategy.csv" : args.out;
    write_text(path, csv_of(s));

    auto reals = realize(s, inputs, ctx.scenario());
    double mean_switches = 0.0, mean_cost = 0.0;
    const int n = grid.n_steps();
    for (long leaf = 0; leaf < ctx.scenario().slots(n); ++leaf) {
        const double p = ctx.scenario().probability(n, leaf);
        mean_switches += p * reals[leaf].n_switches;
        mean_cost += p * reals[leaf].total_cost;
    }
    std::cout << "wrote " << path << "\nE[N^a] = " << mean_switches
              << ", E[A^a_n] = " << mean_cost << "\n";
    return kExitOk;
}

int cmd_converge(const CommonArgs& args, const std::vector<int>& n_list, double gamma,
                 const std::string& reference, bool z_aggregate) {
    ProblemConfig cfg = load(args);
    ConvergenceTable table =
        run_convergence(cfg, n_list, gamma, reference, cfg.scenario.seed, z_aggregate);
    const std::string path = args.out.empty() ? cfg.name + "_convergence.csv" : args.out;
    write_text(path, csv_of(table));
    std::cout << csv_of(table);
    if (table.fit_points >= 2)
        std::cout << "slope " << table.slope << " intercept " << table.intercept << " ("
                  << table.fit_points << " points)\n";
    else
        std::cout << "slope NA\n";
    std::cout << "wrote " << path << "\n";
    for (const ConvergenceRow& r : table.rows)
        if (r.failed) std::cout << "row n=" << r.n << " failed: " << r.message << "\n";
    return kExitOk;
}

int cmd_perturb(const CommonArgs& args, const std::vector<double>& zetas) {
    ProblemConfig cfg = load(args);
    auto rows = run_perturbation(cfg, zetas, cfg.scenario.seed);
    const std::string path = args.out.empty() ? cfg.name + "_perturb.csv" : args.out;
    write_text(path, csv_of(rows));
    std::cout << csv_of(rows);
    if (rows.size() >= 2 && rows[1].zeta > 0.0) {
        const double k = rows[1].delta / rows[1].zeta;
        std::cout << "linear response |dY0|/zeta ~ " << k << "\n";
    }
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

int cmd_refine(const CommonArgs& args, int n, const std::vector<int>& intervals) {
    ProblemConfig cfg = load(args);
    auto rows = run_refinement(cfg, n, intervals, cfg.scenario.seed);
    const std::string path = args.out.empty() ? cfg.name + "_refine.csv" : args.out;
    write_text(path, csv_of(rows));
    std::cout << csv_of(rows) << "wrote " << path << "\n";
    return kExitOk;
}

std::pair<int, int> parse_start(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw CLI::ValidationError("--start", "expected i,j (time index, 1-based mode)");
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discretely reflected BSDE / optimal switching solver"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string start_spec = "0,1";
    int samples = 1000;
    std::vector<int> n_list{8, 16, 32, 64};
    double gamma = 0.5;
    std::string reference = "finest";
    bool z_aggregate = false;
    std::vector<double> zetas{0.01, 0.02, 0.04};
    int refine_n = 256;
    std::vector<int> intervals{2, 4, 8, 16, 32};

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", common.config_path, "problem config (JSON)")->required();
        cmd->add_option("--seed", common.seed, "override the config seed")
            ->each([&](const std::string&) { common.seed_set = true; });
        cmd->add_option("--out", common.out, "output path or prefix");
    };

    CLI::App* validate = app.add_subcommand("validate", "check structure/domain/weights");
    add_common(validate);
    CLI::App* solve_cmd = app.add_subcommand("solve", "run the backward scheme");
    add_common(solve_cmd);
    CLI::App* oracle = app.add_subcommand("oracle", "switched-value checks on the lattice");
    add_common(oracle);
    oracle->add_option("--start", start_spec, "start time index and 1-based mode, e.g. 0,1");
    oracle->add_option("--samples", samples, "random strategies when enumeration is infeasible");
    CLI::App* strategy = app.add_subcommand("strategy", "extract the optimal policy");
    add_common(strategy);
    strategy->add_option("--start", start_spec, "start time index and 1-based mode");
    CLI::App* converge = app.add_subcommand("converge", "error vs grid resolution");
    add_common(converge);
    converge->add_option("--n", n_list, "grid sizes, increasing")->delimiter(',');
    converge->add_option("--gamma", gamma, "reflection grid exponent");
    converge->add_option("--reference", reference, "closed_form or finest");
    converge->add_flag("--z-aggregate", z_aggregate, "also report the Z error aggregate");
    CLI::App* perturb = app.add_subcommand("perturb", "driver perturbation response");
    add_common(perturb);
    perturb->add_option("--zeta", zetas, "perturbation sizes")->delimiter(',');
    CLI::App* refine = app.add_subcommand("refine", "reflection-grid refinement at fixed pi");
    add_common(refine);
    refine->add_option("--pi-n", refine_n, "fixed number of time steps");
    refine->add_option("--intervals", intervals, "reflection interval counts")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*validate) return cmd_validate(common);
        if (*solve_cmd) return cmd_solve(common);
        if (*oracle) {
            auto [i, j] = parse_start(start_spec);
            return cmd_oracle(common, i, j, samples);
        }
        if (*strategy) {
            auto [i, j] = parse_start(start_spec);
            return cmd_strategy(common, i, j);
        }
        if (*converge) return cmd_converge(common, n_list, gamma, reference, z_aggregate);
        if (*perturb) return cmd_perturb(common, zetas);
        if (*refine) return cmd_refine(common, refine_n, intervals);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
