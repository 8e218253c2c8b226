#include "orbsde/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <set>
#include <sstream>

#include "orbsde/rng.hpp"

namespace orbsde {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::runtime_error("config: unknown key '" + it.key() + "' in " + where);
}

expr::Expression compile(const std::string& src, const expr::VariableSet& vars,
                         const std::string& where) {
    try {
        return expr::parse_expression(src, vars);
    } catch (const expr::ParseError& e) {
        throw std::runtime_error("config: in " + where + ": " + e.what());
    }
}

std::vector<std::string> string_list(const json& j, const std::string& where, std::size_t count) {
    if (!j.is_array() || j.size() != count)
        throw std::runtime_error("config: " + where + " must be an array of " +
                                 std::to_string(count) + " expressions");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw std::runtime_error("config: " + where + " entries must be strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

}  // namespace

ProblemConfig parse_config_json(const std::string& text) {
    json j = json::parse(text);
    reject_unknown(j, {"name", "dimensions", "horizon", "x0", "coefficients", "lipschitz",
                       "grid", "scenario", "weights", "solver", "reference_y0"},
                   "top level");

    ProblemConfig cfg;
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();

    const json& dims = j.at("dimensions");
    reject_unknown(dims, {"m", "q", "d"}, "dimensions");
    const int m = dims.at("m").get<int>();
    const int q = dims.at("q").get<int>();
    const int d = dims.at("d").get<int>();
    if (m < 1 || q < 1 || d < 1)
        throw std::runtime_error("config: dimensions must be positive");

    SwitchingProblem& pb = cfg.problem;
    pb.state_dim = m;
    pb.brownian_dim = q;
    pb.component_count = d;
    pb.horizon = j.at("horizon").get<double>();
    pb.x0 = j.at("x0").get<std::vector<double>>();
    if (static_cast<int>(pb.x0.size()) != m)
        throw std::runtime_error("config: x0 must have m entries");

    const json& coef = j.at("coefficients");
    reject_unknown(coef, {"b", "sigma", "f", "g", "c"}, "coefficients");
    cfg.b_src = string_list(coef.at("b"), "coefficients.b", m);
    cfg.g_src = string_list(coef.at("g"), "coefficients.g", d);
    cfg.f_src = string_list(coef.at("f"), "coefficients.f", d);

    const json& sig = coef.at("sigma");
    if (!sig.is_array() || sig.size() != static_cast<std::size_t>(m))
        throw std::runtime_error("config: coefficients.sigma must be an m x q array");
    for (const auto& row : sig) {
        auto r = string_list(row, "coefficients.sigma row", q);
        cfg.sigma_src.insert(cfg.sigma_src.end(), r.begin(), r.end());
    }
    const json& cmat = coef.at("c");
    if (!cmat.is_array() || cmat.size() != static_cast<std::size_t>(d))
        throw std::runtime_error("config: coefficients.c must be a d x d array");
    for (const auto& row : cmat) {
        auto r = string_list(row, "coefficients.c row", d);
        cfg.c_src.insert(cfg.c_src.end(), r.begin(), r.end());
    }

    const expr::VariableSet xonly{m, 0, 0};
    const expr::VariableSet xyz{m, d, q};

    auto b_exprs = std::make_shared<std::vector<expr::Expression>>();
    for (int i = 0; i < m; ++i)
        b_exprs->push_back(compile(cfg.b_src[i], xonly, "coefficients.b[" + std::to_string(i) + "]"));
    pb.drift = [b_exprs](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < b_exprs->size(); ++i) out[i] = (*b_exprs)[i].eval(x);
    };

    auto s_exprs = std::make_shared<std::vector<expr::Expression>>();
    for (int i = 0; i < m * q; ++i)
        s_exprs->push_back(compile(cfg.sigma_src[i], xonly, "coefficients.sigma[" + std::to_string(i) + "]"));
    pb.diffusion = [s_exprs](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < s_exprs->size(); ++i) out[i] = (*s_exprs)[i].eval(x);
    };

    auto g_exprs = std::make_shared<std::vector<expr::Expression>>();
    for (int i = 0; i < d; ++i)
        g_exprs->push_back(compile(cfg.g_src[i], xonly, "coefficients.g[" + std::to_string(i) + "]"));
    pb.terminal = [g_exprs](std::span<const double> x, std::span<double> out) {
        for (std::size_t i = 0; i < g_exprs->size(); ++i) out[i] = (*g_exprs)[i].eval(x);
    };

    pb.driver.resize(d);
    for (int jc = 0; jc < d; ++jc) {
        auto fe = std::make_shared<expr::Expression>(
            compile(cfg.f_src[jc], xyz, "coefficients.f[" + std::to_string(jc) + "]"));
        pb.driver[jc] = [fe](std::span<const double> x, std::span<const double> y,
                             std::span<const double> zrow) { return fe->eval(x, y, zrow); };
    }

    pb.costs.d = d;
    pb.costs.entries.resize(static_cast<std::size_t>(d) * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            const std::string& src = cfg.c_src[static_cast<std::size_t>(a) * d + b];
            if (a == b) {
                if (src != "0")
                    throw std::runtime_error("config: diagonal cost entries must be \"0\"");
                continue;
            }
            auto ce = std::make_shared<expr::Expression>(
                compile(src, xonly, "coefficients.c[" + std::to_string(a) + "][" + std::to_string(b) + "]"));
            pb.costs.entries[static_cast<std::size_t>(a) * d + b] =
                [ce](std::span<const double> x) { return ce->eval(x); };
        }

    const json& lip = j.at("lipschitz");
    reject_unknown(lip, {"y", "z"}, "lipschitz");
    pb.lipschitz_y = lip.at("y").get<double>();
    pb.lipschitz_z = lip.at("z").get<double>();

    const json& grid = j.at("grid");
    reject_unknown(grid, {"n", "gamma"}, "grid");
    cfg.grid.n = grid.at("n").get<int>();
    cfg.grid.gamma = grid.at("gamma").get<double>();

    const json& sc = j.at("scenario");
    reject_unknown(sc, {"kind", "paths", "seed"}, "scenario");
    const std::string kind = sc.at("kind").get<std::string>();
    if (kind == "lattice") {
        cfg.scenario.kind = ScenarioSpec::Kind::lattice;
    } else if (kind == "montecarlo") {
        cfg.scenario.kind = ScenarioSpec::Kind::montecarlo;
        cfg.scenario.paths = sc.at("paths").get<long>();
    } else {
        throw std::runtime_error("config: scenario.kind must be 'lattice' or 'montecarlo'");
    }
    if (sc.contains("seed")) cfg.scenario.seed = sc.at("seed").get<std::uint64_t>();

    const json& w = j.at("weights");
    reject_unknown(w, {"kind", "R"}, "weights");
    const std::string wkind = w.at("kind").get<std::string>();
    if (wkind == "rademacher") {
        cfg.weights.kind = WeightSpec::Kind::rademacher;
    } else if (wkind == "truncated_gaussian") {
        cfg.weights.kind = WeightSpec::Kind::truncated_gaussian;
        if (w.contains("R")) cfg.weights.R = w.at("R").get<double>();
    } else {
        throw std::runtime_error("config: weights.kind must be 'rademacher' or 'truncated_gaussian'");
    }
    if (cfg.weights.kind == WeightSpec::Kind::rademacher &&
        cfg.scenario.kind != ScenarioSpec::Kind::lattice)
        throw std::runtime_error("config: rademacher weights need the lattice scenario");
    if (cfg.weights.kind == WeightSpec::Kind::truncated_gaussian &&
        cfg.scenario.kind != ScenarioSpec::Kind::montecarlo)
        throw std::runtime_error("config: truncated_gaussian weights need the montecarlo scenario");

    if (j.contains("solver")) {
        const json& so = j.at("solver");
        reject_unknown(so, {"tol", "max_iter", "basis_degree", "ridge"}, "solver");
        if (so.contains("tol")) cfg.solver.tol = so.at("tol").get<double>();
        if (so.contains("max_iter")) cfg.solver.max_iter = so.at("max_iter").get<int>();
        if (so.contains("basis_degree")) cfg.solver.basis_degree = so.at("basis_degree").get<int>();
        if (so.contains("ridge")) cfg.solver.ridge = so.at("ridge").get<double>();
    }
    if (j.contains("reference_y0")) {
        cfg.reference_y0 = j.at("reference_y0").get<std::vector<double>>();
        if (static_cast<int>(cfg.reference_y0.size()) != d)
            throw std::runtime_error("config: reference_y0 must have d entries");
    }
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

std::vector<std::vector<double>> default_sample_points(const SwitchingProblem& problem) {
    const int m = problem.state_dim;
    std::vector<std::vector<double>> pts;
    pts.push_back(problem.x0);
    const double span = 3.0 * std::sqrt(std::max(problem.horizon, 1.0));
    for (int k = 0; k < 64; ++k) {
        std::vector<double> x(m);
        for (int c = 0; c < m; ++c)
            x[c] = problem.x0[c] + span * (2.0 * uniform_draw(99, k, c, 0) - 1.0);
        pts.push_back(std::move(x));
    }
    return pts;
}

}  // namespace orbsde
