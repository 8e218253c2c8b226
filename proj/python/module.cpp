// pybind11 surface: grids, the oblique projection, the expression language,
// and config-driven solve / validate / oracle / converge runs

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbsde/convergence.hpp"
#include "orbsde/export.hpp"
#include "orbsde/switching.hpp"

namespace py = pybind11;
using namespace orbsde;

namespace {

ProblemConfig config_from(const std::string& source) {
    if (!source.empty() && source.find('{') != std::string::npos)
        return parse_config_json(source);
    return load_config(source);
}

CostMatrix cost_matrix_from(const std::vector<std::vector<double>>& rows) {
    const int d = static_cast<int>(rows.size());
    CostMatrix C(d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(rows[i].size()) != d)
            throw std::invalid_argument("cost matrix must be square");
        for (int j = 0; j < d; ++j) C.at(i, j) = rows[i][j];
    }
    return C;
}

py::object json_to_py(const nlohmann::json& j) {
    namespace nl = nlohmann;
    switch (j.type()) {
        case nl::json::value_t::null: return py::none();
        case nl::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nl::json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
        case nl::json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
        case nl::json::value_t::number_float: return py::float_(j.get<double>());
        case nl::json::value_t::string: return py::str(j.get<std::string>());
        case nl::json::value_t::array: {
            py::list out;
            for (const auto& e : j) out.append(json_to_py(e));
            return out;
        }
        case nl::json::value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default: return py::none();
    }
}

py::dict solve_config(const std::string& source, std::optional<std::uint64_t> seed) {
    ProblemConfig cfg = config_from(source);
    if (seed) cfg.scenario.seed = *seed;
    TimeGrid grid = build_grids(cfg.grid.n, cfg.problem.horizon, cfg.grid.gamma);
    RunContext ctx = make_run_context(cfg, grid, cfg.scenario.seed);
    SolverOptions opts;
    opts.tol = cfg.solver.tol;
    opts.max_iter = cfg.solver.max_iter;
    opts.store_levels = false;
    SchemeSolution sol = solve(cfg.problem, ctx.scenario(), ctx.weights, *ctx.backend, opts);
    return json_to_py(to_json(sol));
}

py::dict validate_config(const std::string& source) {
    ProblemConfig cfg = config_from(source);
    const auto points = default_sample_points(cfg.problem);
    nlohmann::json j;
    j["costs"] = to_json(validate_costs(cfg.problem.costs, points, cfg.problem.costs.eps));
    j["problem"] = to_json(validate_problem(cfg.problem, points));
    TimeGrid grid = build_grids(cfg.grid.n, cfg.problem.horizon, cfg.grid.gamma);
    RunContext ctx = make_run_context(cfg, grid, cfg.scenario.seed);
    const double tol = ctx.scenario().is_lattice() ? 1e-12 : 6.0;
    j["weights"] = to_json(check_moments(ctx.weights, ctx.scenario(), tol, cfg.problem.lipschitz_z));
    j["pass"] = j["costs"]["pass"].get<bool>() && j["problem"]["pass"].get<bool>() &&
                j["weights"]["pass"].get<bool>();
    return json_to_py(j);
}

py::dict oracle_config(const std::string& source, int start_time, int start_mode, int samples) {
    ProblemConfig cfg = config_from(source);
    if (cfg.scenario.kind != ScenarioSpec::Kind::lattice)
        throw std::runtime_error("oracle needs a lattice scenario");
    TimeGrid grid = build_grids(cfg.grid.n, cfg.problem.horizon, cfg.grid.gamma);
    RunContext ctx = make_run_context(cfg, grid, cfg.scenario.seed);
    SchemeSolution sol = solve(cfg.problem, ctx.scenario(), ctx.weights, *ctx.backend);
    GenericStepInputs inputs = make_step_inputs(cfg.problem, ctx.scenario());
    SnellReport rep = snell_check(sol, inputs, ctx.scenario(), ctx.weights, *ctx.backend,
                                  start_time, start_mode - 1, samples, cfg.scenario.seed + 1);
    return json_to_py(to_json(rep));
}

py::dict converge_config(const std::string& source, const std::vector<int>& n_list, double gamma,
                         const std::string& reference, std::optional<std::uint64_t> seed) {
    ProblemConfig cfg = config_from(source);
    if (seed) cfg.scenario.seed = *seed;
    ConvergenceTable table = run_convergence(cfg, n_list, gamma, reference, cfg.scenario.seed);
    return json_to_py(to_json(table));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "backward schemes for discretely reflected BSDEs / optimal switching";

    m.def(
        "build_grids",
        [](int n, double T, double gamma) {
            TimeGrid g = build_grids(n, T, gamma);
            py::dict out;
            out["times"] = g.times;
            out["reflection"] = std::vector<int>(g.reflection.begin(), g.reflection.end());
            out["kappa"] = g.reflection_count();
            out["h"] = g.modulus();
            out["hR"] = g.reflection_modulus();
            return out;
        },
        py::arg("n"), py::arg("T"), py::arg("gamma"),
        "uniform time grid with an embedded reflection grid of spacing ~ (T/n)^gamma");

    m.def(
        "project",
        [](const std::vector<std::vector<double>>& costs, const std::vector<double>& y) {
            return project(cost_matrix_from(costs), y);
        },
        py::arg("costs"), py::arg("y"), "componentwise-max oblique projection");

    m.def(
        "in_domain",
        [](const std::vector<std::vector<double>>& costs, const std::vector<double>& y,
           double tol) { return in_domain(cost_matrix_from(costs), y, tol); },
        py::arg("costs"), py::arg("y"), py::arg("tol") = 1e-10);

    m.def(
        "parse_expression",
        [](const std::string& src, int m_, int ny, int nz) {
            return expr::parse_expression(src, expr::VariableSet{m_, ny, nz}).pretty();
        },
        py::arg("source"), py::arg("m") = 1, py::arg("ny") = 0, py::arg("nz") = 0,
        "parse and pretty-print a coefficient expression");

    m.def(
        "eval_expression",
        [](const std::string& src, const std::vector<double>& x, const std::vector<double>& y,
           const std::vector<double>& z) {
            const expr::VariableSet vars{static_cast<int>(x.size()), static_cast<int>(y.size()),
                                         static_cast<int>(z.size())};
            return expr::parse_expression(src, vars).eval(x, y, z);
        },
        py::arg("source"), py::arg("x"), py::arg("y") = std::vector<double>{},
        py::arg("z") = std::vector<double>{});

    m.def("truncated_normal_lambda", &truncated_normal_lambda, py::arg("c"),
          "second moment of a standard normal clipped at +-c");

    m.def("solve", &solve_config, py::arg("config"), py::arg("seed") = py::none(),
          "solve the configured problem; config is a path or JSON text");
    m.def("validate", &validate_config, py::arg("config"));
    m.def("oracle", &oracle_config, py::arg("config"), py::arg("start_time") = 0,
          py::arg("start_mode") = 1, py::arg("samples") = 1000,
          "switched-value checks on the lattice; start_mode is 1-based");
    m.def("converge", &converge_config, py::arg("config"), py::arg("n_list"),
          py::arg("gamma") = 0.5, py::arg("reference") = "finest", py::arg("seed") = py::none());

    py::register_exception<expr::ParseError>(m, "ParseError");
    py::register_exception<CapacityError>(m, "CapacityError");
}
