#include "orbsde/projection.hpp"

#include <limits>
#include <stdexcept>

namespace orbsde {

bool in_domain_raw(int d, const double* C, const double* y, double tol) {
    for (int i = 0; i < d; ++i) {
        const double* row = C + static_cast<std::size_t>(i) * d;
        for (int j = 0; j < d; ++j)
            if (y[i] < y[j] - row[j] - tol) return false;
    }
    return true;
}

void project_raw(int d, const double* C, const double* y, double* out) {
    for (int i = 0; i < d; ++i) {
        const double* row = C + static_cast<std::size_t>(i) * d;
        double best = y[i] - row[i];  // j = i term; row[i] = 0 for a true cost matrix
        for (int j = 0; j < d; ++j) {
            const double v = y[j] - row[j];
            if (v > best) best = v;
        }
        out[i] = best;
    }
}

bool in_domain(const CostMatrix& C, std::span<const double> y, double tol) {
    if (tol < 0.0) throw std::invalid_argument("in_domain: tol must be >= 0");
    if (static_cast<int>(y.size()) != C.d) throw std::invalid_argument("in_domain: dimension mismatch");
    return in_domain_raw(C.d, C.c.data(), y.data(), tol);
}

std::vector<double> project(const CostMatrix& C, std::span<const double> y) {
    if (static_cast<int>(y.size()) != C.d) throw std::invalid_argument("project: dimension mismatch");
    std::vector<double> out(C.d);
    project_raw(C.d, C.c.data(), y.data(), out.data());
    return out;
}

SwitchTarget best_alternative(int d, const double* C, const double* y, int from) {
    SwitchTarget t{-std::numeric_limits<double>::infinity(), -1};
    const double* row = C + static_cast<std::size_t>(from) * d;
    for (int m = 0; m < d; ++m) {
        if (m == from) continue;
        const double v = y[m] - row[m];
        if (v > t.value) {
            t.value = v;
            t.mode = m;
        }
    }
    return t;
}

ValidationReport check_structure(const CostMatrix& C, double eps) {
    ValidationReport rep;
    rep.subject = "cost structure";
    const int d = C.d;
    for (int i = 0; i < d; ++i) {
        const double dev = std::abs(C.at(i, i));
        rep.record(dev == 0.0 ? 0.0 : -dev, "diagonal cost must be zero", {i + 1, i + 1});
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            rep.record(C.at(i, j) - eps, "off-diagonal cost below eps", {i + 1, j + 1});
        }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (j == i) continue;
            for (int l = 0; l < d; ++l) {
                if (l == j) continue;
                const double margin = C.at(i, j) + C.at(j, l) - C.at(i, l) - eps;
                rep.record(margin, "structure condition margin", {i + 1, j + 1, l + 1});
            }
        }
    return rep;
}

std::string ValidationReport::summary() const {
    std::string s = subject + ": " + (pass() ? "PASS" : "FAIL");
    if (!violations.empty()) s += " (" + std::to_string(violations.size()) + " violations)";
    return s;
}

}  // namespace orbsde
