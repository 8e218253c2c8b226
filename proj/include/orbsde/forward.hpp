#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "orbsde/problem.hpp"
#include "orbsde/time_grid.hpp"

namespace orbsde {

struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Euler Monte Carlo ensemble.  States and Brownian increments are stored
// flat, time-major; the update X_{i+1} = X_i + b(X_i) h_i + sigma(X_i) dW_i
// is recomputable bitwise from the stored increments.
struct PathEnsemble {
    TimeGrid grid;
    int m = 1, q = 1;
    long n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> states;      // (n+1) * n_paths * m
    std::vector<double> increments;  // n * n_paths * q

    const double* state(int i, long p) const {
        return states.data() + (static_cast<std::size_t>(i) * n_paths + p) * m;
    }
    const double* increment(int i, long p) const {
        return increments.data() + (static_cast<std::size_t>(i) * n_paths + p) * q;
    }

    void save_binary(const std::string& path) const;
    static PathEnsemble load_binary(const std::string& path);
};

PathEnsemble simulate_euler(const SwitchingProblem& problem, const TimeGrid& grid, long n_paths,
                            std::uint64_t seed,
                            std::size_t max_doubles = std::size_t(1) << 28);

// Exact scenario tree: each node branches into 2^q children with increments
// +-sqrt(h_i) per Brownian coordinate, probability split uniformly.  States
// follow the same Euler map as the ensemble.  Non-recombining.
struct LatticeModel {
    TimeGrid grid;
    int m = 1, q = 1;
    std::vector<std::vector<double>> states;  // per time: N_i * m
    std::vector<std::vector<double>> probs;   // per time: N_i

    long nodes_at(int i) const { return static_cast<long>(probs[i].size()); }
    long parent(long node) const { return node >> q; }
    int branch(long node) const { return static_cast<int>(node & ((1 << q) - 1)); }
    // sign of coordinate `coord` of the increment leading into `node`
    int increment_sign(long node, int coord) const {
        return (branch(node) >> coord) & 1 ? 1 : -1;
    }
    const double* state(int i, long node) const {
        return states[i].data() + static_cast<std::size_t>(node) * m;
    }
};

LatticeModel build_lattice(const SwitchingProblem& problem, const TimeGrid& grid);

// Either scenario kind behind one interface, so the solver and the switched
// evaluations run unchanged on both.
class ScenarioSet {
  public:
    explicit ScenarioSet(PathEnsemble e) : data_(std::move(e)) {}
    explicit ScenarioSet(LatticeModel l) : data_(std::move(l)) {}

    bool is_lattice() const { return std::holds_alternative<LatticeModel>(data_); }
    const LatticeModel& lattice() const { return std::get<LatticeModel>(data_); }
    const PathEnsemble& ensemble() const { return std::get<PathEnsemble>(data_); }

    const TimeGrid& grid() const;
    int state_dim() const;
    int brownian_dim() const;
    long slots(int i) const;
    const double* state(int i, long slot) const;
    double probability(int i, long slot) const;

    // swap the reflection flags on the shared time grid (times unchanged);
    // used by the refinement study to rerun one scenario set under different
    // reflection grids
    void set_reflection(const std::vector<char>& flags);

  private:
    std::variant<PathEnsemble, LatticeModel> data_;
};

}  // namespace orbsde
