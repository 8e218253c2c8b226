#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orbsde/expr.hpp"
#include "orbsde/problem.hpp"

namespace orbsde {

struct GridSpec {
    int n = 16;
    double gamma = 1.0;
};

struct ScenarioSpec {
    enum class Kind { montecarlo, lattice } kind = Kind::lattice;
    long paths = 10000;
    std::uint64_t seed = 0;
};

struct WeightSpec {
    enum class Kind { truncated_gaussian, rademacher } kind = Kind::rademacher;
    double R = 0.0;  // 0 picks the default 1/L^Z
};

struct SolverSpec {
    double tol = 1e-12;
    int max_iter = 200;
    int basis_degree = 3;
    double ridge = 1e-10;
};

// A problem plus run parameters, parsed from the JSON schema documented in
// the README.  Coefficients are expression sources compiled on load; unknown
// keys anywhere are rejected.
struct ProblemConfig {
    std::string name = "problem";
    SwitchingProblem problem;
    GridSpec grid;
    ScenarioSpec scenario;
    WeightSpec weights;
    SolverSpec solver;
    std::vector<double> reference_y0;  // optional closed-form reference

    // retained sources, for reports
    std::vector<std::string> b_src, f_src, g_src;
    std::vector<std::string> sigma_src;  // m*q row-major
    std::vector<std::string> c_src;      // d*d row-major
};

ProblemConfig load_config(const std::string& path);
ProblemConfig parse_config_json(const std::string& text);

// states used by `validate`: x0 plus a deterministic spread around it
std::vector<std::vector<double>> default_sample_points(const SwitchingProblem& problem);

}  // namespace orbsde
