#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "orbsde/forward.hpp"

namespace orbsde {

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// exponent tuples of all monomials in m variables of total degree <= degree,
// constant first, then by increasing degree
std::vector<std::vector<int>> monomial_exponents(int m, int degree);

struct LeastSquaresFit {
    long n = 0;
    int ncols = 0;
    int n_features = 0;
    int rank = 0;
    std::vector<double> fitted;        // n * ncols, row-major
    std::vector<double> coefficients;  // n_features * ncols in the raw monomial basis
};

// One shared design matrix (standardized monomials of the states), QR once,
// solved for every target column.  ridge = 0 with a rank-deficient design
// throws NumericalFailure advising ridge > 0; exactly-constant features are
// dropped before the rank test so degenerate ensembles (sigma = 0) still fit.
LeastSquaresFit least_squares_fit(const double* states, long n, int m, const double* targets,
                                  int ncols, int degree, double ridge);

// E[. | F_{t_i}] mapping per-slot values at t_{i+1} to per-slot values at t_i.
class CondExpBackend {
  public:
    virtual ~CondExpBackend() = default;
    virtual long slots(int i) const = 0;
    // values: slots(i+1) x ncols row-major; out: slots(i) x ncols
    virtual void condexp_multi(int i, const double* values, int ncols, double* out) const = 0;
    std::vector<double> condexp(int i, const std::vector<double>& values, int ncols = 1) const;
};

// probability-weighted average over each node's children; linearity, the
// tower property and the sup-norm contraction hold exactly
class LatticeBackend final : public CondExpBackend {
  public:
    explicit LatticeBackend(const LatticeModel& lattice) : lat_(&lattice) {}
    long slots(int i) const override { return lat_->nodes_at(i); }
    void condexp_multi(int i, const double* values, int ncols, double* out) const override;

  private:
    const LatticeModel* lat_;
};

// least-squares Monte Carlo: fitted value of an OLS of the targets on
// polynomial features of X_{t_i}, evaluated per path
class LeastSquaresBackend final : public CondExpBackend {
  public:
    LeastSquaresBackend(const PathEnsemble& ensemble, int basis_degree, double ridge)
        : ens_(&ensemble), degree_(basis_degree), ridge_(ridge) {}
    long slots(int) const override { return ens_->n_paths; }
    void condexp_multi(int i, const double* values, int ncols, double* out) const override;
    int degree() const { return degree_; }
    double ridge() const { return ridge_; }

  private:
    const PathEnsemble* ens_;
    int degree_;
    double ridge_;
};

std::unique_ptr<CondExpBackend> make_backend(const ScenarioSet& scenario, int basis_degree,
                                             double ridge);

}  // namespace orbsde
