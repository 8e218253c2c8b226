#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "orbsde/config.hpp"
#include "orbsde/scheme.hpp"

namespace orbsde {

struct ConvergenceRow {
    int n = 0;
    double h = 0.0, hR = 0.0;
    int kappa = 0;
    std::vector<double> y0;
    double error = 0.0;       // |Y_0(n) - Y_0(reference)|, Euclidean; NaN on the reference row
    double stderr_val = 0.0;  // sampling error of the time-0 conditional mean
    double alpha = 0.0;       // log(2T/h)
    double seconds = 0.0;
    double z_aggregate = 0.0;  // optional sum_i h_i E|Z_i - Z_i^ref|^2; NaN unless requested
    bool failed = false;
    std::string message;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // sorted by n
    double slope = 0.0, intercept = 0.0;  // least squares of log error on log h
    int fit_points = 0;
    std::string reference;  // "closed_form" or "finest"
    std::vector<double> reference_y0;
};

// Solves the configured problem on every n with |R| ~ |pi|^gamma and common
// random numbers across rows.  reference = "closed_form" uses the config's
// reference_y0; "finest" uses the largest n, whose row is excluded from the
// slope fit.  Solver errors mark their row failed and are carried in the row.
ConvergenceTable run_convergence(const ProblemConfig& config, std::vector<int> n_list,
                                 double gamma, const std::string& reference, std::uint64_t seed,
                                 bool with_z_aggregate = false);

// Reflection-grid refinement at fixed pi: same scenario set for every
// variant, reflection times at multiples of n / intervals.
struct RefinementRow {
    int intervals = 0;  // reflection intervals (kappa - 1)
    double hR = 0.0;
    double alpha = 0.0;  // log(2T/hR)
    std::vector<double> y0;
    double drift = 0.0;  // |y0 - previous y0|, 0 on the first row
};
std::vector<RefinementRow> run_refinement(const ProblemConfig& config, int n,
                                          const std::vector<int>& reflection_intervals,
                                          std::uint64_t seed);

// Constant driver perturbation: F_i + zeta on every component.
struct PerturbationRow {
    double zeta = 0.0;
    std::vector<double> y0;
    double delta = 0.0;  // |Y_0(zeta) - Y_0(0)|
};
std::vector<PerturbationRow> run_perturbation(const ProblemConfig& config,
                                              const std::vector<double>& zetas,
                                              std::uint64_t seed);

// scenario/weights/backend assembly shared by the experiment drivers and CLI;
// the scenario sits behind a pointer so the backend's binding survives moves
struct RunContext {
    std::unique_ptr<ScenarioSet> scenario_ptr;
    WeightFamily weights;
    std::unique_ptr<CondExpBackend> backend;
    ScenarioSet& scenario() { return *scenario_ptr; }
    const ScenarioSet& scenario() const { return *scenario_ptr; }
};
RunContext make_run_context(const ProblemConfig& config, const TimeGrid& grid,
                            std::uint64_t seed);

std::vector<double> closed_form_reference(const ProblemConfig& config);

}  // namespace orbsde
