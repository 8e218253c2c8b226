#include "orbsde/condexp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

#include "orbsde/parallel.hpp"

namespace orbsde {

std::vector<std::vector<int>> monomial_exponents(int m, int degree) {
    std::vector<std::vector<int>> out;
    std::vector<int> current(m, 0);
    out.push_back(current);  // constant first, then by increasing total degree
    std::function<void(int, int)> fill = [&](int pos, int remaining) {
        if (pos == m - 1) {
            current[pos] = remaining;
            out.push_back(current);
            current[pos] = 0;
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            current[pos] = e;
            fill(pos + 1, remaining - e);
        }
        current[pos] = 0;
    };
    for (int deg = 1; deg <= degree; ++deg) fill(0, deg);
    return out;
}

LeastSquaresFit least_squares_fit(const double* states, long n, int m, const double* targets,
                                  int ncols, int degree, double ridge) {
    const auto exps = monomial_exponents(m, degree);
    const int f = static_cast<int>(exps.size());

    // raw monomials, one column per exponent tuple
    Eigen::MatrixXd raw(n, f);
    parallel_for(n, [&](long begin, long end) {
        for (long r = begin; r < end; ++r) {
            const double* x = states + static_cast<std::size_t>(r) * m;
            raw(r, 0) = 1.0;
            for (int c = 1; c < f; ++c) {
                double v = 1.0;
                for (int k = 0; k < m; ++k)
                    for (int e = 0; e < exps[c][k]; ++e) v *= x[k];
                raw(r, c) = v;
            }
        }
    });

    // standardize non-constant columns; exactly-constant ones are dropped
    std::vector<int> keep{0};
    std::vector<double> mean(f, 0.0), scale(f, 1.0);
    for (int c = 1; c < f; ++c) {
        const double mu = raw.col(c).mean();
        const double sd = std::sqrt((raw.col(c).array() - mu).square().sum() / n);
        mean[c] = mu;
        scale[c] = sd;
        if (sd > 1e-14 * (std::abs(mu) + 1.0)) keep.push_back(c);
    }
    const int fk = static_cast<int>(keep.size());

    const long rows = ridge > 0.0 ? n + fk : n;
    Eigen::MatrixXd design(rows, fk);
    design.setZero();
    design.col(0).head(n).setOnes();
    for (int c = 1; c < fk; ++c)
        design.col(c).head(n) = (raw.col(keep[c]).array() - mean[keep[c]]) / scale[keep[c]];
    if (ridge > 0.0) {
        const double r = std::sqrt(ridge);
        for (int c = 0; c < fk; ++c) design(n + c, c) = r;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);  // columns are standardized, so relative is safe
    const int rank = static_cast<int>(qr.rank());
    if (ridge <= 0.0 && rank < fk)
        throw NumericalFailure(
            "least_squares_fit: singular normal equations (rank " + std::to_string(rank) +
            " < " + std::to_string(fk) + " features); set ridge > 0 to regularize");

    Eigen::MatrixXd rhs(rows, ncols);
    rhs.setZero();
    parallel_for(n, [&](long begin, long end) {
        for (long r = begin; r < end; ++r)
            for (int c = 0; c < ncols; ++c)
                rhs(r, c) = targets[static_cast<std::size_t>(r) * ncols + c];
    });
    Eigen::MatrixXd beta = qr.solve(rhs);

    LeastSquaresFit fit;
    fit.n = n;
    fit.ncols = ncols;
    fit.n_features = f;
    fit.rank = rank;
    fit.fitted.resize(static_cast<std::size_t>(n) * ncols);
    Eigen::MatrixXd vals = design.topRows(n) * beta;
    parallel_for(n, [&](long begin, long end) {
        for (long r = begin; r < end; ++r)
            for (int c = 0; c < ncols; ++c)
                fit.fitted[static_cast<std::size_t>(r) * ncols + c] = vals(r, c);
    });

    // undo the standardization: each kept column is an affine image of one
    // raw monomial, so coefficients map back feature by feature
    fit.coefficients.assign(static_cast<std::size_t>(f) * ncols, 0.0);
    for (int c = 0; c < ncols; ++c) {
        double intercept = beta(0, c);
        for (int k = 1; k < fk; ++k) {
            const int col = keep[k];
            const double b = beta(k, c) / scale[col];
            fit.coefficients[static_cast<std::size_t>(col) * ncols + c] = b;
            intercept -= b * mean[col];
        }
        fit.coefficients[c] = intercept;
    }
    return fit;
}

std::vector<double> CondExpBackend::condexp(int i, const std::vector<double>& values,
                                            int ncols) const {
    std::vector<double> out(static_cast<std::size_t>(slots(i)) * ncols);
    condexp_multi(i, values.data(), ncols, out.data());
    return out;
}

void LatticeBackend::condexp_multi(int i, const double* values, int ncols, double* out) const {
    const long parents = lat_->nodes_at(i);
    const int fan = 1 << lat_->q;
    const double inv = 1.0 / fan;
    for (long k = 0; k < parents; ++k) {
        double* o = out + static_cast<std::size_t>(k) * ncols;
        for (int c = 0; c < ncols; ++c) o[c] = 0.0;
        for (int br = 0; br < fan; ++br) {
            const double* v = values + (static_cast<std::size_t>(k) * fan + br) * ncols;
            for (int c = 0; c < ncols; ++c) o[c] += v[c];
        }
        for (int c = 0; c < ncols; ++c) o[c] *= inv;
    }
}

void LeastSquaresBackend::condexp_multi(int i, const double* values, int ncols,
                                        double* out) const {
    const long n = ens_->n_paths;
    LeastSquaresFit fit =
        least_squares_fit(ens_->state(i, 0), n, ens_->m, values, ncols, degree_, ridge_);
    std::copy(fit.fitted.begin(), fit.fitted.end(), out);
}

std::unique_ptr<CondExpBackend> make_backend(const ScenarioSet& scenario, int basis_degree,
                                             double ridge) {
    if (scenario.is_lattice())
        return std::make_unique<LatticeBackend>(scenario.lattice());
    return std::make_unique<LeastSquaresBackend>(scenario.ensemble(), basis_degree, ridge);
}

}  // namespace orbsde
