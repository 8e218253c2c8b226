#pragma once

#include <vector>

namespace orbsde {

// Time grid pi = {t_0=0,...,t_n=T} with an embedded reflection grid: every
// reflection time is a grid point.  By convention t_0 is always a reflection
// time and t_n = T carries the flag (the terminal condition already lies in
// the constraint set, so no projection is applied there).
struct TimeGrid {
    std::vector<double> times;
    std::vector<char> reflection;
    double horizon = 0.0;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
    double step(int i) const { return times[i + 1] - times[i]; }
    bool is_reflection(int i) const { return reflection[i] != 0; }

    // |pi|
    double modulus() const;
    // |R|: largest gap between consecutive reflection times
    double reflection_modulus() const;
    // kappa: number of flagged times
    int reflection_count() const;

    // throws std::invalid_argument when an invariant is broken
    void validate() const;
};

// Uniform grid with n steps over [0,T]; reflection times are the grid points
// closest to a uniform grid of spacing (T/n)^gamma.  gamma = 1 flags every
// grid point.
TimeGrid build_grids(int n, double T, double gamma);

}  // namespace orbsde
