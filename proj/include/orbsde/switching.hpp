#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "orbsde/scheme.hpp"

namespace orbsde {

// Adapted switching policy: at each reflection time a decision table
// (slot, current mode) -> next mode, where "next == current" means stay.
// Chains of instantaneous switches follow the same table, capped at
// min(max_switches, d-1) applications per date.
struct Strategy {
    int d = 1;  // component count, the stride of the decision tables
    int start_time = 0;
    int start_mode = 0;  // 0-based
    int max_switches = 1;
    std::map<int, std::vector<int>> decisions;  // time -> slots(i)*d table

    int decide(int time, long slot, int mode) const {
        auto it = decisions.find(time);
        if (it == decisions.end()) return mode;
        return it->second[static_cast<std::size_t>(slot) * d + mode];
    }
};

struct ChainOutcome {
    int mode;
    double cost;
    int hops;
};

// apply the policy at (time, slot) starting from `mode`, paying each
// switching cost from the inputs' cost process
ChainOutcome apply_chain(const Strategy& strategy, const GenericStepInputs& inputs, int time,
                         long slot, int mode);

// One-dimensional switched backward scheme along a strategy:
//   U_n = xi^{a_n} - (costs charged at n),
//   V_k = E[U_{k+1} H_k],  U_k = E[U_{k+1}] + h_k F_k^{a_k}(V_k) - (costs at k).
// Values are computed for every entering mode and realized along the policy.
struct SwitchedValue {
    int start_time = 0;
    int d = 1, q = 1;
    // arrays indexed by k - start_time
    std::vector<std::vector<double>> u;       // per time: realized value per slot
    std::vector<std::vector<double>> v;       // per time k < n: realized row per slot (q entries)
    std::vector<std::vector<int>> mode;       // a_k: post-decision mode per slot
    std::vector<std::vector<double>> cum_cost;  // A^a_k per slot
    std::vector<double> start_u_by_mode;      // slots(start) * d table at the start time

    double start_value(long slot = 0) const { return u[0][slot]; }
};

// Requires a z-only (frozen) driver; throws invalid_argument for strategies
// that switch off the reflection grid.
SwitchedValue evaluate_switched(const GenericStepInputs& inputs, const ScenarioSet& scenario,
                                const WeightFamily& weights, const CondExpBackend& backend,
                                const Strategy& strategy);

// z-only driver with y frozen at the solved ytilde; the solution must have
// been computed with full level storage
GenericStepInputs freeze_driver(const GenericStepInputs& inputs, const SchemeSolution& solution);

// The reflected scheme's optimal policy: at a reflection node switch as soon
// as ytilde^a <= max_{m != a}(ytilde^m - C^{am}), new mode = smallest argmax.
Strategy extract_optimal_strategy(const SchemeSolution& solution,
                                  const GenericStepInputs& inputs, const ScenarioSet& scenario,
                                  int start_time, int start_mode);

// Every adapted decision table over (reflection node, mode) pairs at times in
// [start_time, n].  Throws CapacityError when d^(pairs*d) exceeds the budget.
void for_each_strategy(const ScenarioSet& scenario, int d, int start_time, int start_mode,
                       int max_switches, long budget,
                       const std::function<void(const Strategy&)>& fn);
// natural log of the adapted policy count
double strategy_space_log(const ScenarioSet& scenario, int d, int start_time);

// random adapted policy; on a lattice decisions key on the node, on an
// ensemble they key on a coarse bucket of the first state coordinate
Strategy random_strategy(const ScenarioSet& scenario, int d, int start_time, int start_mode,
                         double switch_prob, std::uint64_t seed);

// path-wise view of a strategy: switch times/modes, N^a, cumulative cost
struct StrategyRealization {
    std::vector<int> switch_times;  // theta_r, repeats marking instantaneous chains
    std::vector<int> from_modes, to_modes;
    int n_switches = 0;       // N^a
    double total_cost = 0.0;  // A^a_n
    std::vector<int> mode_path;      // a_k from start_time to n
    std::vector<double> cum_cost;    // A^a_k
};
std::vector<StrategyRealization> realize(const Strategy& strategy,
                                         const GenericStepInputs& inputs,
                                         const ScenarioSet& scenario);

struct SnellReport {
    int start_time = 0;
    int start_mode = 0;  // 0-based
    bool start_in_domain = true;
    bool enumerated = false;
    bool statistical = false;  // regression backend: margins carry sampling noise
    long strategies_checked = 0;
    // min over strategies and start slots of ytilde^j - U^a
    double domination_margin = std::numeric_limits<double>::infinity();
    // max over start slots of |ytilde^j - U^extracted|
    double optimality_gap = std::numeric_limits<double>::quiet_NaN();
    // max over start slots of |ytilde^j - max_a U^a|, enumeration only
    double enumeration_gap = std::numeric_limits<double>::quiet_NaN();
    // same margins against the post-projection value Y^j; these are the
    // meaningful ones when the start value has left the domain (instantaneous
    // switches then recover exactly the projected value)
    double domination_margin_reflected = std::numeric_limits<double>::infinity();
    double optimality_gap_reflected = std::numeric_limits<double>::quiet_NaN();
};

SnellReport snell_check(const SchemeSolution& solution, const GenericStepInputs& inputs,
                        const ScenarioSet& scenario, const WeightFamily& weights,
                        const CondExpBackend& backend, int start_time, int start_mode,
                        int sample_count, std::uint64_t seed, long enumeration_budget = 1000000);

}  // namespace orbsde
