#include "orbsde/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace orbsde {

namespace {
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / 2.5066282746310005024157652848110; }
double norm_cdf_neg(double c) { return 0.5 * std::erfc(c / 1.4142135623730950488016887242097); }
}  // namespace

double truncated_normal_lambda(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("truncated_normal_lambda: c must be positive");
    if (std::isinf(c)) return 1.0;
    return 1.0 - 2.0 * c * norm_pdf(c) - 2.0 * (1.0 - c * c) * norm_cdf_neg(c);
}

double WeightFamily::lambda_min() const {
    return *std::min_element(lambdas.begin(), lambdas.end());
}

double WeightFamily::lambda_max() const {
    return *std::max_element(lambdas.begin(), lambdas.end());
}

WeightFamily truncated_gaussian_weights(const PathEnsemble& ensemble, double R,
                                        double lipschitz_z) {
    // default clip: the largest value the comparison result tolerates; a
    // z-free driver needs no truncation at all
    if (R <= 0.0)
        R = lipschitz_z > 0.0 ? 1.0 / lipschitz_z : std::numeric_limits<double>::infinity();
    if (R <= 0.0) throw std::invalid_argument("truncated_gaussian_weights: R must be positive");

    const int n = ensemble.grid.n_steps();
    const int q = ensemble.q;
    WeightFamily w;
    w.kind = WeightFamily::Kind::truncated_gaussian;
    w.q = q;
    w.clip = R;
    w.values.resize(n);
    w.lambdas.resize(n);
    w.sup_h_row_norm.resize(n);
    for (int i = 0; i < n; ++i) {
        const double h = ensemble.grid.step(i);
        const double bound = R / h;
        w.values[i].resize(static_cast<std::size_t>(ensemble.n_paths) * q);
        for (long p = 0; p < ensemble.n_paths; ++p) {
            const double* dw = ensemble.increment(i, p);
            double* row = w.values[i].data() + static_cast<std::size_t>(p) * q;
            for (int l = 0; l < q; ++l)
                row[l] = std::clamp(dw[l] / h, -bound, bound);
        }
        // h_i E[H^2] for H = clamp(dW/h, +-R/h) reduces to the second moment
        // of a standard normal clipped at c = R/sqrt(h)
        w.lambdas[i] = truncated_normal_lambda(R / std::sqrt(h));
        w.sup_h_row_norm[i] = std::sqrt(static_cast<double>(q)) * R;
    }
    if (lipschitz_z > 0.0 && R * lipschitz_z > 1.0)
        w.warnings.push_back("R L^Z = " + std::to_string(R * lipschitz_z) +
                             " > 1: the scheme is not comparison-compatible");
    return w;
}

WeightFamily rademacher_weights(const LatticeModel& lattice, double lipschitz_z) {
    const int n = lattice.grid.n_steps();
    const int q = lattice.q;
    WeightFamily w;
    w.kind = WeightFamily::Kind::rademacher;
    w.q = q;
    w.values.resize(n);
    w.lambdas.assign(n, 1.0);
    w.sup_h_row_norm.resize(n);
    for (int i = 0; i < n; ++i) {
        const double h = lattice.grid.step(i);
        const double mag = 1.0 / std::sqrt(h);
        const long slots = lattice.nodes_at(i + 1);
        w.values[i].resize(static_cast<std::size_t>(slots) * q);
        for (long s = 0; s < slots; ++s) {
            double* row = w.values[i].data() + static_cast<std::size_t>(s) * q;
            for (int l = 0; l < q; ++l)
                row[l] = lattice.increment_sign(s, l) * mag;
        }
        w.sup_h_row_norm[i] = std::sqrt(static_cast<double>(q) * h);
        if (lipschitz_z > 0.0 && w.sup_h_row_norm[i] * lipschitz_z > 1.0)
            w.warnings.push_back("h_i |H_i| L^Z > 1 at interval " + std::to_string(i));
    }
    return w;
}

ValidationReport check_moments(const WeightFamily& weights, const ScenarioSet& scenario,
                               double tol, double lipschitz_z) {
    const TimeGrid& grid = scenario.grid();
    const int n = grid.n_steps();
    const int q = weights.q;
    if (static_cast<int>(weights.values.size()) != n)
        throw std::invalid_argument("check_moments: weights and scenario disagree on the grid");

    ValidationReport rep;
    rep.subject = "weight moments";
    const bool exact = scenario.is_lattice();

    for (int i = 0; i < n; ++i) {
        const double h = grid.step(i);
        const long slots = scenario.slots(i + 1);
        for (int a = 0; a < q; ++a) {
            // mean
            double mean = 0.0, msq = 0.0;
            for (long s = 0; s < slots; ++s) {
                const double v = weights.row(i, s)[a];
                const double p = scenario.probability(i + 1, s);
                mean += p * v;
                msq += p * v * v;
            }
            if (exact) {
                rep.record(tol - std::abs(mean), "weight mean not zero", {i, a + 1});
            } else {
                const double se = std::sqrt(std::max(msq - mean * mean, 0.0) / slots);
                const double allowed = se > 0.0 ? tol * se : tol;
                rep.record(allowed - std::abs(mean),
                           "weight mean off by more than tolerated standard errors", {i, a + 1});
            }
            // second moments, h E[H^T H] = lambda_i I
            for (int b = a; b < q; ++b) {
                double cross = 0.0, cross_sq = 0.0;
                for (long s = 0; s < slots; ++s) {
                    const double* row = weights.row(i, s);
                    const double v = row[a] * row[b];
                    const double p = scenario.probability(i + 1, s);
                    cross += p * v;
                    cross_sq += p * v * v;
                }
                const double gap = std::abs(h * cross - (a == b ? weights.lambdas[i] : 0.0));
                if (exact) {
                    rep.record(tol - gap, "weight second moment off lambda_i I", {i, a + 1, b + 1});
                } else {
                    const double se =
                        h * std::sqrt(std::max(cross_sq - cross * cross, 0.0) / slots);
                    const double allowed = se > 0.0 ? tol * se : tol;
                    rep.record(allowed - gap,
                               "weight second moment off by more than tolerated standard errors",
                               {i, a + 1, b + 1});
                }
            }
        }
        // uniform ellipticity of the weight family: 0 < lambda_i <= 1
        rep.record(weights.lambdas[i], "lambda_i must be positive", {i});
        rep.record(1.0 - weights.lambdas[i] + 1e-15, "lambda_i must not exceed 1", {i});
        if (lipschitz_z > 0.0) {
            rep.record(1.0 - weights.sup_h_row_norm[i] * lipschitz_z,
                       "monotonicity bound h_i |H_i| L^Z <= 1 violated", {i});
        }
    }
    if (weights.kind == WeightFamily::Kind::truncated_gaussian && lipschitz_z > 0.0)
        rep.record(1.0 - weights.clip * lipschitz_z, "R L^Z <= 1 violated");
    for (const std::string& wmsg : weights.warnings) rep.notes.push_back(wmsg);
    return rep;
}

}  // namespace orbsde
