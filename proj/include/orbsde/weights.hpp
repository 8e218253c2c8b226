#pragma once

#include <string>
#include <vector>

#include "orbsde/forward.hpp"
#include "orbsde/validation.hpp"

namespace orbsde {

// Weight rows H_i used by the Z part of the backward step,
// Z_i = E[Y_{i+1} H_i | F_{t_i}].  Values live at time i+1: one row of q
// entries per scenario slot there.
struct WeightFamily {
    enum class Kind { truncated_gaussian, rademacher };
    Kind kind = Kind::rademacher;
    int q = 1;
    double clip = 0.0;  // R; clipping |H^l| <= R/h_i (truncated_gaussian only)
    std::vector<std::vector<double>> values;  // per interval i: slots(i+1) * q
    std::vector<double> lambdas;              // lambda_i with h_i E[H^T H] = lambda_i I
    std::vector<double> sup_h_row_norm;       // per interval: h_i * ess sup |H_i|_2
    std::vector<std::string> warnings;

    const double* row(int i, long slot) const {
        return values[i].data() + static_cast<std::size_t>(slot) * q;
    }
    double lambda_min() const;
    double lambda_max() const;
};

// second moment of a standard normal clipped at +-c
double truncated_normal_lambda(double c);

// H_i = clamp(dW_i / h_i, -R/h_i, R/h_i); lambdas from the closed-form
// truncated-normal second moment rather than a sample estimate.  Pass the
// driver's z-Lipschitz constant to get the monotonicity warning when
// R L^Z > 1; R <= 0 selects the default R = 1/L^Z.
WeightFamily truncated_gaussian_weights(const PathEnsemble& ensemble, double R,
                                        double lipschitz_z = 0.0);

// H_i = dW_i / h_i with dW = +-sqrt(h_i): lambda_i = 1 exactly.
WeightFamily rademacher_weights(const LatticeModel& lattice, double lipschitz_z = 0.0);

// Checks E[H_i] = 0, h_i E[H^T H] = lambda_i I and the monotonicity bound
// sup_i h_i |H_i| L^Z <= 1.  On a lattice the moment checks are exact with
// absolute tolerance `tol`; on an ensemble they are statistical and `tol`
// counts standard errors.
ValidationReport check_moments(const WeightFamily& weights, const ScenarioSet& scenario,
                               double tol, double lipschitz_z);

}  // namespace orbsde
