#include "orbsde/switching.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "orbsde/projection.hpp"
#include "orbsde/rng.hpp"

namespace orbsde {

namespace {

void check_admissible(const Strategy& s, const TimeGrid& grid) {
    for (const auto& [time, table] : s.decisions) {
        if (time < 0 || time > grid.n_steps() || !grid.is_reflection(time))
            throw std::invalid_argument(
                "strategy is not R-admissible: decision table at non-reflection time " +
                std::to_string(time));
        (void)table;
    }
}

// parent slot of `slot` at time i+1 (identity on ensembles)
long parent_slot(const ScenarioSet& sc, long slot) {
    return sc.is_lattice() ? sc.lattice().parent(slot) : slot;
}

}  // namespace

ChainOutcome apply_chain(const Strategy& strategy, const GenericStepInputs& inputs, int time,
                         long slot, int mode) {
    const int d = inputs.d;
    ChainOutcome out{mode, 0.0, 0};
    const int cap = std::min(strategy.max_switches, d - 1);
    std::vector<double> C;
    for (int hop = 0; hop < cap; ++hop) {
        const int next = strategy.decide(time, slot, out.mode);
        if (next == out.mode) break;
        if (C.empty()) {
            C.resize(static_cast<std::size_t>(d) * d);
            inputs.costs(time, slot, C.data());
        }
        out.cost += C[static_cast<std::size_t>(out.mode) * d + next];
        out.mode = next;
        ++out.hops;
    }
    return out;
}

GenericStepInputs freeze_driver(const GenericStepInputs& inputs, const SchemeSolution& solution) {
    if (!solution.full_storage)
        throw std::invalid_argument("freeze_driver: solution lacks per-level storage");
    GenericStepInputs out = inputs;
    auto base = inputs.driver;
    auto frozen = std::make_shared<std::vector<std::vector<double>>>(solution.ytilde);
    const int d = inputs.d;
    out.driver = [base, frozen, d](int i, long slot, int j, std::span<const double>,
                                   std::span<const double> zrow) {
        std::span<const double> y((*frozen)[i].data() + static_cast<std::size_t>(slot) * d,
                                  static_cast<std::size_t>(d));
        return base(i, slot, j, y, zrow);
    };
    out.driver_in_y = false;
    return out;
}

SwitchedValue evaluate_switched(const GenericStepInputs& inputs, const ScenarioSet& scenario,
                                const WeightFamily& weights, const CondExpBackend& backend,
                                const Strategy& strategy) {
    if (inputs.driver_in_y)
        throw std::invalid_argument(
            "evaluate_switched: needs a z-only driver (freeze_driver against a solution first)");
    if (strategy.d != inputs.d)
        throw std::invalid_argument("evaluate_switched: strategy/component count mismatch");
    const TimeGrid& grid = scenario.grid();
    check_admissible(strategy, grid);

    const int n = grid.n_steps();
    const int d = inputs.d;
    const int q = inputs.q;
    const int i0 = strategy.start_time;
    const int levels = n - i0 + 1;

    SwitchedValue sv;
    sv.start_time = i0;
    sv.d = d;
    sv.q = q;
    sv.u.resize(levels);
    sv.v.resize(levels - 1);
    sv.mode.resize(levels);
    sv.cum_cost.resize(levels);

    // realized modes and per-date charges, forward from the start
    std::vector<std::vector<double>> charge(levels);  // cost paid at time k per slot
    {
        std::vector<int> entering(scenario.slots(i0), strategy.start_mode);
        for (int k = i0; k <= n; ++k) {
            const long slots = scenario.slots(k);
            const int lev = k - i0;
            sv.mode[lev].resize(slots);
            charge[lev].assign(slots, 0.0);
            for (long s = 0; s < slots; ++s) {
                const ChainOutcome c = apply_chain(strategy, inputs, k, s, entering[s]);
                sv.mode[lev][s] = c.mode;
                charge[lev][s] = c.cost;
            }
            sv.cum_cost[lev].resize(slots);
            for (long s = 0; s < slots; ++s) {
                const double prev =
                    (lev == 0) ? 0.0 : sv.cum_cost[lev - 1][parent_slot(scenario, s)];
                sv.cum_cost[lev][s] = prev + charge[lev][s];
            }
            if (k < n) {
                const long next_slots = scenario.slots(k + 1);
                std::vector<int> next_entering(next_slots);
                for (long s = 0; s < next_slots; ++s)
                    next_entering[s] = sv.mode[lev][parent_slot(scenario, s)];
                entering = std::move(next_entering);
            }
        }
    }

    // backward sweep over the mode-conditioned table
    const long slots_n = scenario.slots(n);
    std::vector<double> u_next(static_cast<std::size_t>(slots_n) * d);
    {
        std::vector<double> xi(d);
        for (long s = 0; s < slots_n; ++s) {
            inputs.terminal(s, xi.data());
            for (int m = 0; m < d; ++m) {
                const ChainOutcome c = apply_chain(strategy, inputs, n, s, m);
                u_next[static_cast<std::size_t>(s) * d + m] = xi[c.mode] - c.cost;
            }
        }
        sv.u[levels - 1].resize(slots_n);
        for (long s = 0; s < slots_n; ++s) {
            const int entering =
                (levels == 1) ? strategy.start_mode : sv.mode[levels - 2][parent_slot(scenario, s)];
            sv.u[levels - 1][s] = u_next[static_cast<std::size_t>(s) * d + entering];
        }
        if (levels == 1) sv.start_u_by_mode = u_next;
    }

    const int ncols = d + d * q;
    for (int k = n - 1; k >= i0; --k) {
        const long slots_next = scenario.slots(k + 1);
        const long slots_here = scenario.slots(k);
        const int lev = k - i0;
        std::vector<double> targets(static_cast<std::size_t>(slots_next) * ncols);
        for (long s = 0; s < slots_next; ++s) {
            const double* us = u_next.data() + static_cast<std::size_t>(s) * d;
            const double* hrow = weights.row(k, s);
            double* t = targets.data() + static_cast<std::size_t>(s) * ncols;
            for (int m = 0; m < d; ++m) t[m] = us[m];
            for (int m = 0; m < d; ++m)
                for (int l = 0; l < q; ++l) t[d + m * q + l] = us[m] * hrow[l];
        }
        std::vector<double> cond(static_cast<std::size_t>(slots_here) * ncols);
        backend.condexp_multi(k, targets.data(), ncols, cond.data());

        const double h = grid.step(k);
        std::vector<double> u_here(static_cast<std::size_t>(slots_here) * d);
        std::vector<double> C;
        for (long s = 0; s < slots_here; ++s) {
            const double* c = cond.data() + static_cast<std::size_t>(s) * ncols;
            for (int m = 0; m < d; ++m) {
                const ChainOutcome ch = apply_chain(strategy, inputs, k, s, m);
                std::span<const double> vrow(c + d + ch.mode * q, static_cast<std::size_t>(q));
                u_here[static_cast<std::size_t>(s) * d + m] =
                    c[ch.mode] + h * inputs.driver(k, s, ch.mode, {}, vrow) - ch.cost;
            }
        }

        // realized slices along the policy
        sv.u[lev].resize(slots_here);
        sv.v[lev].resize(static_cast<std::size_t>(slots_here) * q);
        for (long s = 0; s < slots_here; ++s) {
            const int entering =
                (lev == 0) ? strategy.start_mode : sv.mode[lev - 1][parent_slot(scenario, s)];
            sv.u[lev][s] = u_here[static_cast<std::size_t>(s) * d + entering];
            const int current = sv.mode[lev][s];
            const double* c = cond.data() + static_cast<std::size_t>(s) * ncols;
            for (int l = 0; l < q; ++l)
                sv.v[lev][static_cast<std::size_t>(s) * q + l] = c[d + current * q + l];
        }
        if (k == i0) sv.start_u_by_mode = u_here;
        u_next = std::move(u_here);
    }
    return sv;
}

Strategy extract_optimal_strategy(const SchemeSolution& solution,
                                  const GenericStepInputs& inputs, const ScenarioSet& scenario,
                                  int start_time, int start_mode) {
    if (!solution.full_storage)
        throw std::invalid_argument("extract_optimal_strategy: solution lacks per-level storage");
    const TimeGrid& grid = scenario.grid();
    const int n = grid.n_steps();
    const int d = inputs.d;

    Strategy s;
    s.d = d;
    s.start_time = start_time;
    s.start_mode = start_mode;
    s.max_switches = d - 1;
    std::vector<double> C(static_cast<std::size_t>(d) * d);
    for (int k = start_time; k <= n; ++k) {
        if (!grid.is_reflection(k)) continue;
        const long slots = scenario.slots(k);
        std::vector<int> table(static_cast<std::size_t>(slots) * d);
        for (long slot = 0; slot < slots; ++slot) {
            inputs.costs(k, slot, C.data());
            const double* yt = solution.ytilde_at(k, slot);
            for (int mode = 0; mode < d; ++mode) {
                const SwitchTarget t = best_alternative(d, C.data(), yt, mode);
                table[static_cast<std::size_t>(slot) * d + mode] =
                    (t.mode >= 0 && yt[mode] <= t.value) ? t.mode : mode;
            }
        }
        s.decisions.emplace(k, std::move(table));
    }
    return s;
}

double strategy_space_log(const ScenarioSet& scenario, int d, int start_time) {
    const TimeGrid& grid = scenario.grid();
    long pairs = 0;
    for (int k = start_time; k <= grid.n_steps(); ++k)
        if (grid.is_reflection(k)) pairs += scenario.slots(k);
    return static_cast<double>(pairs) * d * std::log(static_cast<double>(d));
}

void for_each_strategy(const ScenarioSet& scenario, int d, int start_time, int start_mode,
                       int max_switches, long budget,
                       const std::function<void(const Strategy&)>& fn) {
    const TimeGrid& grid = scenario.grid();
    const int n = grid.n_steps();
    if (strategy_space_log(scenario, d, start_time) > std::log(static_cast<double>(budget)))
        throw CapacityError("for_each_strategy: adapted policy count exceeds budget " +
                            std::to_string(budget));

    // flatten (time, slot, mode) decision cells
    struct Cell {
        int time;
        long slot;
        int mode;
    };
    std::vector<Cell> cells;
    Strategy s;
    s.d = d;
    s.start_time = start_time;
    s.start_mode = start_mode;
    s.max_switches = max_switches;
    for (int k = start_time; k <= n; ++k) {
        if (!grid.is_reflection(k)) continue;
        const long slots = scenario.slots(k);
        std::vector<int> table(static_cast<std::size_t>(slots) * d);
        for (long slot = 0; slot < slots; ++slot)
            for (int mode = 0; mode < d; ++mode) {
                table[static_cast<std::size_t>(slot) * d + mode] = mode;
                cells.push_back({k, slot, mode});
            }
        s.decisions.emplace(k, std::move(table));
    }
    if (max_switches == 0) {  // decision tables are forced to "stay": one strategy
        fn(s);
        return;
    }

    std::vector<int> digits(cells.size(), 0);
    for (;;) {
        for (std::size_t c = 0; c < cells.size(); ++c)
            s.decisions[cells[c].time][static_cast<std::size_t>(cells[c].slot) * d +
                                       cells[c].mode] = digits[c];
        // skip nothing: digit == mode encodes "stay"
        fn(s);
        std::size_t c = 0;
        while (c < digits.size()) {
            if (++digits[c] < d) break;
            digits[c] = 0;
            ++c;
        }
        if (c == digits.size()) break;
    }
}

Strategy random_strategy(const ScenarioSet& scenario, int d, int start_time, int start_mode,
                         double switch_prob, std::uint64_t seed) {
    const TimeGrid& grid = scenario.grid();
    const int n = grid.n_steps();
    Strategy s;
    s.d = d;
    s.start_time = start_time;
    s.start_mode = start_mode;
    s.max_switches = 1;
    const bool lattice = scenario.is_lattice();
    for (int k = start_time; k <= n; ++k) {
        if (!grid.is_reflection(k)) continue;
        const long slots = scenario.slots(k);
        std::vector<int> table(static_cast<std::size_t>(slots) * d);
        for (long slot = 0; slot < slots; ++slot) {
            // adapted key: the node itself on a lattice, a coarse bucket of
            // the first state coordinate on an ensemble
            std::uint64_t key;
            if (lattice) {
                key = static_cast<std::uint64_t>(slot);
            } else {
                const double x = scenario.state(k, slot)[0];
                const long bucket = std::lround(std::clamp(x, -4.0, 4.0) * 2.0);
                key = static_cast<std::uint64_t>(bucket + 16);
            }
            for (int mode = 0; mode < d; ++mode) {
                const double u = uniform_draw(seed, static_cast<std::uint64_t>(k), key,
                                              static_cast<std::uint64_t>(mode));
                int target = mode;
                if (u < switch_prob && d > 1) {
                    const int step = 1 + static_cast<int>(u / switch_prob * (d - 1));
                    target = (mode + std::min(step, d - 1)) % d;
                }
                table[static_cast<std::size_t>(slot) * d + mode] = target;
            }
        }
        s.decisions.emplace(k, std::move(table));
    }
    return s;
}

std::vector<StrategyRealization> realize(const Strategy& strategy,
                                         const GenericStepInputs& inputs,
                                         const ScenarioSet& scenario) {
    const TimeGrid& grid = scenario.grid();
    const int n = grid.n_steps();
    const int d = inputs.d;
    const int i0 = strategy.start_time;
    const long leaves = scenario.slots(n);
    std::vector<StrategyRealization> out(leaves);

    for (long leaf = 0; leaf < leaves; ++leaf) {
        // slot of this leaf's ancestor at every time
        std::vector<long> slot_at(n + 1);
        slot_at[n] = leaf;
        for (int k = n; k > 0; --k) slot_at[k - 1] = parent_slot(scenario, slot_at[k]);

        StrategyRealization r;
        int mode = strategy.start_mode;
        double acc = 0.0;
        for (int k = i0; k <= n; ++k) {
            const long slot = slot_at[k];
            const int cap = std::min(strategy.max_switches, d - 1);
            std::vector<double> C;
            for (int hop = 0; hop < cap; ++hop) {
                const int next = strategy.decide(k, slot, mode);
                if (next == mode) break;
                if (C.empty()) {
                    C.resize(static_cast<std::size_t>(d) * d);
                    inputs.costs(k, slot, C.data());
                }
                r.switch_times.push_back(k);
                r.from_modes.push_back(mode);
                r.to_modes.push_back(next);
                acc += C[static_cast<std::size_t>(mode) * d + next];
                mode = next;
            }
            r.mode_path.push_back(mode);
            r.cum_cost.push_back(acc);
        }
        r.n_switches = static_cast<int>(r.switch_times.size());
        r.total_cost = acc;
        out[leaf] = std::move(r);
    }
    return out;
}

SnellReport snell_check(const SchemeSolution& solution, const GenericStepInputs& inputs,
                        const ScenarioSet& scenario, const WeightFamily& weights,
                        const CondExpBackend& backend, int start_time, int start_mode,
                        int sample_count, std::uint64_t seed, long enumeration_budget) {
    const int d = inputs.d;
    const long slots0 = scenario.slots(start_time);
    SnellReport rep;
    rep.start_time = start_time;
    rep.start_mode = start_mode;
    rep.statistical = !scenario.is_lattice();

    GenericStepInputs frozen = freeze_driver(inputs, solution);

    // reference values ytilde^j and Y^j at the start slots
    std::vector<double> ref(slots0), ref_refl(slots0);
    for (long s = 0; s < slots0; ++s) {
        ref[s] = solution.ytilde_at(start_time, s)[start_mode];
        ref_refl[s] = solution.y_at(start_time, s)[start_mode];
    }

    // membership of the start mode's own constraint (equality claims assume
    // it; other components may sit outside without affecting the start value)
    {
        std::vector<double> C(static_cast<std::size_t>(d) * d);
        for (long s = 0; s < slots0; ++s) {
            inputs.costs(start_time, s, C.data());
            const double* yt = solution.ytilde_at(start_time, s);
            const SwitchTarget t = best_alternative(d, C.data(), yt, start_mode);
            if (t.mode >= 0 && yt[start_mode] < t.value - 1e-10) {
                rep.start_in_domain = false;
                break;
            }
        }
    }

    // extracted optimal strategy
    Strategy best = extract_optimal_strategy(solution, inputs, scenario, start_time, start_mode);
    {
        SwitchedValue sv = evaluate_switched(frozen, scenario, weights, backend, best);
        double gap = 0.0, gap_refl = 0.0;
        for (long s = 0; s < slots0; ++s) {
            gap = std::max(gap, std::abs(ref[s] - sv.u[0][s]));
            gap_refl = std::max(gap_refl, std::abs(ref_refl[s] - sv.u[0][s]));
            rep.domination_margin = std::min(rep.domination_margin, ref[s] - sv.u[0][s]);
            rep.domination_margin_reflected =
                std::min(rep.domination_margin_reflected, ref_refl[s] - sv.u[0][s]);
        }
        rep.optimality_gap = gap;
        rep.optimality_gap_reflected = gap_refl;
        ++rep.strategies_checked;
    }

    // exhaustive enumeration when affordable, random sampling otherwise
    std::vector<double> best_u(slots0, -std::numeric_limits<double>::infinity());
    const bool can_enumerate =
        scenario.is_lattice() &&
        strategy_space_log(scenario, d, start_time) <=
            std::log(static_cast<double>(enumeration_budget));
    if (can_enumerate) {
        for_each_strategy(scenario, d, start_time, start_mode, 1, enumeration_budget,
                          [&](const Strategy& s) {
                              SwitchedValue sv =
                                  evaluate_switched(frozen, scenario, weights, backend, s);
                              for (long sl = 0; sl < slots0; ++sl) {
                                  best_u[sl] = std::max(best_u[sl], sv.u[0][sl]);
                                  rep.domination_margin =
                                      std::min(rep.domination_margin, ref[sl] - sv.u[0][sl]);
                                  rep.domination_margin_reflected = std::min(
                                      rep.domination_margin_reflected, ref_refl[sl] - sv.u[0][sl]);
                              }
                              ++rep.strategies_checked;
                          });
        rep.enumerated = true;
        double gap = 0.0;
        for (long sl = 0; sl < slots0; ++sl) gap = std::max(gap, std::abs(ref[sl] - best_u[sl]));
        rep.enumeration_gap = gap;
    } else {
        for (int t = 0; t < sample_count; ++t) {
            const double prob = 0.1 + 0.8 * uniform_draw(seed, 0xabcd, t, 0);
            Strategy s = random_strategy(scenario, d, start_time, start_mode, prob,
                                         seed + 1000003ULL * t);
            SwitchedValue sv = evaluate_switched(frozen, scenario, weights, backend, s);
            for (long sl = 0; sl < slots0; ++sl) {
                rep.domination_margin = std::min(rep.domination_margin, ref[sl] - sv.u[0][sl]);
                rep.domination_margin_reflected =
                    std::min(rep.domination_margin_reflected, ref_refl[sl] - sv.u[0][sl]);
            }
            ++rep.strategies_checked;
        }
    }
    return rep;
}

}  // namespace orbsde
