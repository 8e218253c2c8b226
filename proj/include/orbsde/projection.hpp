#pragma once

#include <span>
#include <vector>

#include "orbsde/validation.hpp"

namespace orbsde {

// Switching costs evaluated at one state: d x d, zero diagonal.
struct CostMatrix {
    int d = 0;
    std::vector<double> c;  // row-major, c[i*d+j] = cost of switching i -> j

    CostMatrix() = default;
    explicit CostMatrix(int dim) : d(dim), c(static_cast<std::size_t>(dim) * dim, 0.0) {}
    double at(int i, int j) const { return c[static_cast<std::size_t>(i) * d + j]; }
    double& at(int i, int j) { return c[static_cast<std::size_t>(i) * d + j]; }
};

// raw kernels used by the solver hot loops; C is row-major d x d
bool in_domain_raw(int d, const double* C, const double* y, double tol);
void project_raw(int d, const double* C, const double* y, double* out);

// y_i >= max_j (y_j - C_ij) - tol for every component i
bool in_domain(const CostMatrix& C, std::span<const double> y, double tol);

// oblique projection: out_i = max_j (y_j - C_ij); dominates y componentwise
std::vector<double> project(const CostMatrix& C, std::span<const double> y);

// Best switch target out of mode `from`: value = max over m != from of
// y_m - C(from,m), ties broken by smallest index.  d = 1 yields -inf.
struct SwitchTarget {
    double value;
    int mode;
};
SwitchTarget best_alternative(int d, const double* C, const double* y, int from);

// structure condition at a single evaluated matrix: zero diagonal,
// off-diagonal >= eps, triangle margins C_ij + C_jl - C_il >= eps
ValidationReport check_structure(const CostMatrix& C, double eps);

}  // namespace orbsde
