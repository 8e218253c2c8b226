#include "orbsde/forward.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "orbsde/parallel.hpp"
#include "orbsde/rng.hpp"

namespace orbsde {

PathEnsemble simulate_euler(const SwitchingProblem& problem, const TimeGrid& grid, long n_paths,
                            std::uint64_t seed, std::size_t max_doubles) {
    if (n_paths < 1) throw std::invalid_argument("simulate_euler: n_paths must be >= 1");
    const int n = grid.n_steps();
    const int m = problem.state_dim;
    const int q = problem.brownian_dim;
    const std::size_t need = static_cast<std::size_t>(n + 1) * n_paths * m +
                             static_cast<std::size_t>(n) * n_paths * q;
    if (need > max_doubles)
        throw CapacityError("simulate_euler: ensemble of " + std::to_string(need) +
                            " doubles exceeds the memory budget");

    PathEnsemble e;
    e.grid = grid;
    e.m = m;
    e.q = q;
    e.n_paths = n_paths;
    e.seed = seed;
    e.states.resize(static_cast<std::size_t>(n + 1) * n_paths * m);
    e.increments.resize(static_cast<std::size_t>(n) * n_paths * q);

    const std::vector<double>& x0 = problem.x0;
    parallel_for(n_paths, [&](long begin, long end) {
        std::vector<double> b(m), sig(static_cast<std::size_t>(m) * q);
        for (long p = begin; p < end; ++p) {
            double* x = e.states.data() + static_cast<std::size_t>(p) * m;
            std::memcpy(x, x0.data(), static_cast<std::size_t>(m) * sizeof(double));
            for (int i = 0; i < n; ++i) {
                const double h = grid.step(i);
                const double sqh = std::sqrt(h);
                double* dw =
                    e.increments.data() + (static_cast<std::size_t>(i) * n_paths + p) * q;
                for (int l = 0; l < q; ++l)
                    dw[l] = sqh * normal_draw(seed, static_cast<std::uint64_t>(p),
                                              static_cast<std::uint64_t>(i),
                                              static_cast<std::uint64_t>(l));
                const double* xi =
                    e.states.data() + (static_cast<std::size_t>(i) * n_paths + p) * m;
                double* xn =
                    e.states.data() + (static_cast<std::size_t>(i + 1) * n_paths + p) * m;
                problem.drift({xi, static_cast<std::size_t>(m)}, b);
                problem.diffusion({xi, static_cast<std::size_t>(m)}, sig);
                for (int c = 0; c < m; ++c) {
                    double v = xi[c] + b[c] * h;
                    const double* srow = sig.data() + static_cast<std::size_t>(c) * q;
                    for (int l = 0; l < q; ++l) v += srow[l] * dw[l];
                    xn[c] = v;
                }
            }
        }
    });
    return e;
}

LatticeModel build_lattice(const SwitchingProblem& problem, const TimeGrid& grid) {
    const int n = grid.n_steps();
    const int m = problem.state_dim;
    const int q = problem.brownian_dim;
    if (static_cast<long>(q) * n > 22)
        throw CapacityError("build_lattice: q*n = " + std::to_string(q * n) +
                            " exceeds the 2^22 node budget");

    LatticeModel lat;
    lat.grid = grid;
    lat.m = m;
    lat.q = q;
    lat.states.resize(n + 1);
    lat.probs.resize(n + 1);
    lat.states[0] = problem.x0;
    lat.probs[0] = {1.0};

    const int fan = 1 << q;
    std::vector<double> b(m), sig(static_cast<std::size_t>(m) * q);
    for (int i = 0; i < n; ++i) {
        const long parents = lat.nodes_at(i);
        const double h = grid.step(i);
        const double sqh = std::sqrt(h);
        lat.states[i + 1].resize(static_cast<std::size_t>(parents) * fan * m);
        lat.probs[i + 1].resize(static_cast<std::size_t>(parents) * fan);
        for (long k = 0; k < parents; ++k) {
            const double* x = lat.state(i, k);
            problem.drift({x, static_cast<std::size_t>(m)}, b);
            problem.diffusion({x, static_cast<std::size_t>(m)}, sig);
            const double pk = lat.probs[i][k] / fan;
            for (int br = 0; br < fan; ++br) {
                const long child = k * fan + br;
                double* xc = lat.states[i + 1].data() + static_cast<std::size_t>(child) * m;
                for (int c = 0; c < m; ++c) {
                    double v = x[c] + b[c] * h;
                    const double* srow = sig.data() + static_cast<std::size_t>(c) * q;
                    for (int l = 0; l < q; ++l) {
                        const double dw = ((br >> l) & 1) ? sqh : -sqh;
                        v += srow[l] * dw;
                    }
                    xc[c] = v;
                }
                lat.probs[i + 1][child] = pk;
            }
        }
    }
    return lat;
}

const TimeGrid& ScenarioSet::grid() const {
    return is_lattice() ? lattice().grid : ensemble().grid;
}

int ScenarioSet::state_dim() const { return is_lattice() ? lattice().m : ensemble().m; }

int ScenarioSet::brownian_dim() const { return is_lattice() ? lattice().q : ensemble().q; }

long ScenarioSet::slots(int i) const {
    return is_lattice() ? lattice().nodes_at(i) : ensemble().n_paths;
}

const double* ScenarioSet::state(int i, long slot) const {
    return is_lattice() ? lattice().state(i, slot) : ensemble().state(i, slot);
}

double ScenarioSet::probability(int i, long slot) const {
    return is_lattice() ? lattice().probs[i][slot] : 1.0 / ensemble().n_paths;
}

void ScenarioSet::set_reflection(const std::vector<char>& flags) {
    TimeGrid& g = is_lattice() ? std::get<LatticeModel>(data_).grid
                               : std::get<PathEnsemble>(data_).grid;
    if (flags.size() != g.reflection.size())
        throw std::invalid_argument("set_reflection: flag count mismatch");
    g.reflection = flags;
    g.validate();
}

namespace {
constexpr char kMagic[8] = {'O', 'R', 'B', 'S', 'D', 'E', '1', '\0'};
}

void PathEnsemble::save_binary(const std::string& path) const {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("save_binary: cannot open " + path);
    std::fwrite(kMagic, 1, 8, f);
    const std::int64_t dims[4] = {m, q, grid.n_steps(), n_paths};
    std::fwrite(dims, sizeof(std::int64_t), 4, f);
    std::fwrite(&seed, sizeof(seed), 1, f);
    std::fwrite(&grid.horizon, sizeof(double), 1, f);
    std::fwrite(grid.times.data(), sizeof(double), grid.times.size(), f);
    std::fwrite(grid.reflection.data(), 1, grid.reflection.size(), f);
    std::fwrite(states.data(), sizeof(double), states.size(), f);
    std::fwrite(increments.data(), sizeof(double), increments.size(), f);
    if (std::fclose(f) != 0) throw std::runtime_error("save_binary: write failed for " + path);
}

PathEnsemble load_binary_impl(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw std::runtime_error("load_binary: cannot open " + path);
    char magic[8];
    std::int64_t dims[4];
    PathEnsemble e;
    bool ok = std::fread(magic, 1, 8, f) == 8 && std::memcmp(magic, kMagic, 8) == 0 &&
              std::fread(dims, sizeof(std::int64_t), 4, f) == 4 &&
              std::fread(&e.seed, sizeof(e.seed), 1, f) == 1;
    if (ok) {
        e.m = static_cast<int>(dims[0]);
        e.q = static_cast<int>(dims[1]);
        const int n = static_cast<int>(dims[2]);
        e.n_paths = dims[3];
        e.grid.times.resize(n + 1);
        e.grid.reflection.resize(n + 1);
        ok = std::fread(&e.grid.horizon, sizeof(double), 1, f) == 1 &&
             std::fread(e.grid.times.data(), sizeof(double), n + 1, f) ==
                 static_cast<std::size_t>(n + 1) &&
             std::fread(e.grid.reflection.data(), 1, n + 1, f) == static_cast<std::size_t>(n + 1);
        if (ok) {
            e.states.resize(static_cast<std::size_t>(n + 1) * e.n_paths * e.m);
            e.increments.resize(static_cast<std::size_t>(n) * e.n_paths * e.q);
            ok = std::fread(e.states.data(), sizeof(double), e.states.size(), f) ==
                     e.states.size() &&
                 std::fread(e.increments.data(), sizeof(double), e.increments.size(), f) ==
                     e.increments.size();
        }
    }
    std::fclose(f);
    if (!ok) throw std::runtime_error("load_binary: malformed file " + path);
    return e;
}

PathEnsemble PathEnsemble::load_binary(const std::string& path) {
    return load_binary_impl(path);
}

}  // namespace orbsde
