#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "orbsde/condexp.hpp"
#include "orbsde/forward.hpp"
#include "orbsde/problem.hpp"
#include "orbsde/weights.hpp"

namespace orbsde {

struct IterationFailure : std::runtime_error {
    double residual;
    int time_index;
    IterationFailure(const std::string& msg, double res, int i)
        : std::runtime_error(msg), residual(res), time_index(i) {}
};

// Per-step data of the generic backward scheme: a random generator F_i, a
// random cost process C_i and the terminal condition, all per scenario slot.
// Component j of the driver sees only its own z-row.
struct GenericStepInputs {
    int d = 1;
    int q = 1;
    bool driver_in_y = true;  // false makes the backward step explicit
    std::function<double(int i, long slot, int j, std::span<const double> y,
                         std::span<const double> zrow)>
        driver;
    std::function<void(int i, long slot, double* C)> costs;  // fills d x d
    std::function<void(long slot, double* xi)> terminal;     // fills d
};

// Markovian specialization: F_i(y,z) = f(X_i, y, z), C_i = c(X_i), xi = g(X_n).
// Holds pointers; problem and scenario must outlive the inputs.
GenericStepInputs make_step_inputs(const SwitchingProblem& problem, const ScenarioSet& scenario);

// driver perturbed by the constant zeta_f on every component, off-diagonal
// costs shifted by zeta_c
GenericStepInputs perturb_inputs(const GenericStepInputs& inputs, double zeta_f, double zeta_c);

struct StepAggregates {
    std::vector<double> y_mean, y_se;  // per component
    double max_dk = 0.0;
    long projection_active = 0;  // (slot, component) pairs with dk > 0
};

struct SchemeDiagnostics {
    std::vector<int> picard_iterations;   // per step i < n
    std::vector<double> first_residuals;  // per step i < n
    int max_picard = 0;
    std::vector<std::string> warnings;
};

struct SchemeSolution {
    TimeGrid grid;
    int d = 1, q = 1;
    bool full_storage = true;
    // per time: slots*d (ytilde, y, dk) and slots*d*q (z, for i < n); with
    // aggregate-only storage the level vectors beyond time 0 stay empty
    std::vector<std::vector<double>> ytilde, y, dk, z;
    std::vector<StepAggregates> aggregates;  // per time
    SchemeDiagnostics diagnostics;

    std::vector<double> y0() const { return {y[0].begin(), y[0].begin() + d}; }
    std::vector<double> ytilde0() const { return {ytilde[0].begin(), ytilde[0].begin() + d}; }
    std::vector<double> z0() const { return {z[0].begin(), z[0].begin() + d * q}; }
    const double* ytilde_at(int i, long slot) const {
        return ytilde[i].data() + static_cast<std::size_t>(slot) * d;
    }
    const double* y_at(int i, long slot) const {
        return y[i].data() + static_cast<std::size_t>(slot) * d;
    }
};

struct SolverOptions {
    double tol = 1e-12;
    int max_iter = 200;
    bool store_levels = true;
    // when set, receives (i, z_i) after every backward step
    std::function<void(int, const std::vector<double>&)> z_observer;
};

struct StepResult {
    std::vector<double> ytilde;  // slots(i)*d
    std::vector<double> z;       // slots(i)*d*q
    int iterations = 0;
    double first_residual = 0.0;
};

// One backward step: z_i = E[Y_{i+1} H_i], then the implicit
// ytilde = E[Y_{i+1}] + h F_i(ytilde, z_i) resolved by Picard iteration
// starting from E[Y_{i+1}].  Requires h_i L^Y < 1 to contract.
StepResult backward_step(const GenericStepInputs& inputs, int i,
                         const std::vector<double>& y_next, const WeightFamily& weights,
                         const CondExpBackend& backend, const ScenarioSet& scenario, double h,
                         const SolverOptions& opts);

// y = P(ytilde), dk = y - ytilde on reflection dates; identity otherwise
void reflect_step(const GenericStepInputs& inputs, int i, bool reflection_date,
                  const ScenarioSet& scenario, const std::vector<double>& ytilde,
                  std::vector<double>& y_out, std::vector<double>& dk_out, long* active_count);

SchemeSolution solve_generic(const GenericStepInputs& inputs, const ScenarioSet& scenario,
                             const WeightFamily& weights, const CondExpBackend& backend,
                             const SolverOptions& opts = {});

// full scheme for a Markovian switching problem; identical to solve_generic
// on make_step_inputs(problem, scenario)
SchemeSolution solve(const SwitchingProblem& problem, const ScenarioSet& scenario,
                     const WeightFamily& weights, const CondExpBackend& backend,
                     const SolverOptions& opts = {});

}  // namespace orbsde
