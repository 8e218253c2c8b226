#include "orbsde/time_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace orbsde {

double TimeGrid::modulus() const {
    double h = 0.0;
    for (int i = 0; i + 1 < static_cast<int>(times.size()); ++i)
        h = std::max(h, times[i + 1] - times[i]);
    return h;
}

double TimeGrid::reflection_modulus() const {
    double gap = 0.0;
    double last = times.front();
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!reflection[i]) continue;
        gap = std::max(gap, times[i] - last);
        last = times[i];
    }
    return gap;
}

int TimeGrid::reflection_count() const {
    int k = 0;
    for (char f : reflection) k += (f != 0);
    return k;
}

void TimeGrid::validate() const {
    if (times.size() < 2) throw std::invalid_argument("TimeGrid: need at least two times");
    if (times.size() != reflection.size())
        throw std::invalid_argument("TimeGrid: flag/time size mismatch");
    if (times.front() != 0.0) throw std::invalid_argument("TimeGrid: t_0 must be 0");
    if (times.back() != horizon) throw std::invalid_argument("TimeGrid: t_n must equal horizon");
    if (horizon <= 0.0) throw std::invalid_argument("TimeGrid: horizon must be positive");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("TimeGrid: times must be strictly increasing");
    if (!reflection.front() || !reflection.back())
        throw std::invalid_argument("TimeGrid: first and last time must be flagged");
    if (reflection_count() < 1) throw std::invalid_argument("TimeGrid: empty reflection grid");
}

TimeGrid build_grids(int n, double T, double gamma) {
    if (n < 2) throw std::invalid_argument("build_grids: n must be >= 2");
    if (T <= 0.0) throw std::invalid_argument("build_grids: T must be positive");

    TimeGrid g;
    g.horizon = T;
    g.times.resize(n + 1);
    g.reflection.assign(n + 1, 0);
    const double h = T / n;
    for (int i = 0; i <= n; ++i) g.times[i] = T * static_cast<double>(i) / n;
    g.times[n] = T;

    const double target = std::pow(h, gamma);
    const int intervals = std::max(1, static_cast<int>(std::lround(T / target)));
    for (int j = 0; j <= intervals; ++j) {
        const double r = T * static_cast<double>(j) / intervals;
        const int idx = static_cast<int>(std::lround(r / h));
        g.reflection[std::clamp(idx, 0, n)] = 1;
    }
    g.reflection[0] = 1;
    g.reflection[n] = 1;
    g.validate();
    return g;
}

}  // namespace orbsde
