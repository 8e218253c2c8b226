#pragma once

#include <functional>
#include <span>
#include <vector>

#include "orbsde/projection.hpp"
#include "orbsde/time_grid.hpp"
#include "orbsde/validation.hpp"

namespace orbsde {

// x -> vector coefficient (drift b: m values, terminal g: d values)
using VectorFn = std::function<void(std::span<const double> x, std::span<double> out)>;
// x -> m x q matrix, row-major (diffusion sigma)
using MatrixFn = std::function<void(std::span<const double> x, std::span<double> out)>;
// x -> scalar cost entry
using CostFn = std::function<double(std::span<const double> x)>;
// component j of the driver; sees only its own z-row, so the row structure
// f^j(x,y,z) = f^j(x,y,z^{j.}) holds by construction
using DriverFn = std::function<double(std::span<const double> x, std::span<const double> y,
                                      std::span<const double> zrow)>;

struct CostStructure {
    int d = 0;
    std::vector<CostFn> entries;  // d*d, row-major; null entry means identically 0
    double eps = 1e-8;

    void evaluate(std::span<const double> x, double* C) const;
    CostMatrix evaluate(std::span<const double> x) const;
};

struct SwitchingProblem {
    int state_dim = 1;      // m
    int brownian_dim = 1;   // q
    int component_count = 1;  // d

    VectorFn drift;                 // b: R^m -> R^m
    MatrixFn diffusion;             // sigma: R^m -> R^{m x q}
    std::vector<DriverFn> driver;   // f^j, one per component
    VectorFn terminal;              // g: R^m -> R^d
    CostStructure costs;
    std::vector<double> x0;
    double horizon = 1.0;
    double lipschitz_y = 0.0;  // L^Y
    double lipschitz_z = 0.0;  // L^Z

    std::vector<double> terminal_at(std::span<const double> x) const;
};

// Structure condition on a finite sample of states.  Report-only: lists every
// violated positivity / triangle margin with its (i,j,l) triple and state.
ValidationReport validate_costs(const CostStructure& costs,
                                const std::vector<std::vector<double>>& sample_points,
                                double eps);

// g(x) in Q(x) on the sample, plus finite-difference probes of the driver's
// Lipschitz ratios in y and z against the declared constants (10% headroom).
ValidationReport validate_problem(const SwitchingProblem& problem,
                                  const std::vector<std::vector<double>>& sample_points);

}  // namespace orbsde
