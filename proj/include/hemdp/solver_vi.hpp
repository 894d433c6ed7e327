#pragma once

// Monolithic finite-horizon value iteration by backward induction over the
// full horizon. This is the exactness reference for the block and macro
// solvers: they must reproduce its policy and cost bit for bit.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hemdp/hem_mdp.hpp"
#include "hemdp/parallel.hpp"
#include "hemdp/trace.hpp"

namespace hemdp {

// values[k] has n_states + 1 entries (last slot = out-of-band marker) for
// k = 0..K; best_action[k] covers the in-band states for k = 0..K-1.
struct ValueTable {
    int n_states = 0;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::int8_t>> best_action;

    double start_value(int state) const { return values.front()[state]; }
};

namespace vi {

// One Bellman backup: given row k+1, fill row k. Off (action 0) wins ties.
inline void backup_row(const TransitionModel& model, int step,
                       const std::vector<double>& next_row, std::vector<double>& out_row,
                       std::vector<std::int8_t>& out_action, unsigned threads = 0) {
    const StateGrid& grid = model.grid();
    const int n = grid.n_states();
    out_row.assign(static_cast<std::size_t>(n) + 1, 0.0);
    out_row.back() = model.scenario().out_of_band_penalty;
    out_action.assign(n, 0);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t s) {
        double best = 0.0;
        std::int8_t best_a = 0;
        for (int a = 0; a < 2; ++a) {
            const StepOutcome& o = model.primitive(step, static_cast<int>(s), a);
            const double v = o.cost.weighted + next_row[grid.value_slot(o.successor)];
            if (a == 0 || v < best) {
                best = v;
                best_a = static_cast<std::int8_t>(a);
            }
        }
        out_row[s] = best;
        out_action[s] = best_a;
    });
}

inline ValueTable build_table(const TransitionModel& model, unsigned threads = 0) {
    const Scenario& sc = model.scenario();
    const int k_max = sc.horizon_hours;
    ValueTable table;
    table.n_states = model.grid().n_states();
    table.values.resize(k_max + 1);
    table.best_action.resize(k_max);
    table.values[k_max] = terminal_values(sc);
    for (int k = k_max - 1; k >= 0; --k)
        backup_row(model, k, table.values[k + 1], table.values[k], table.best_action[k], threads);
    return table;
}

// Forward simulation following the stored argmins. If the trajectory is
// absorbed out of band the penalty is folded into the cumulative cost and the
// trace ends early with out_of_band set.
inline PolicyTrace trace_policy(const TransitionModel& model, const ValueTable& table,
                                double initial_t_in_c) {
    const Scenario& sc = model.scenario();
    const StateGrid& grid = model.grid();
    int state = grid.discretize(initial_t_in_c);
    if (state == StateGrid::kOutOfBand)
        throw std::invalid_argument("solve: initial temperature outside the comfort band");
    PolicyTrace trace;
    trace.rows.reserve(sc.horizon_hours);
    double cum = 0.0;
    for (int k = 0; k < sc.horizon_hours; ++k) {
        const int a = table.best_action[k][state];
        const StepOutcome& o = model.primitive(k, state, a);
        cum += o.cost.weighted;
        if (o.successor == StateGrid::kOutOfBand) {
            cum += sc.out_of_band_penalty;
            trace.out_of_band = true;
        }
        trace.rows.push_back({k, static_cast<double>(a), o.t_in_end_c, o.t_e_end_c,
                              sc.weather_c[k], o.cost.electricity_cents, o.cost.discomfort_c, cum});
        if (trace.out_of_band) break;
        state = o.successor;
    }
    return trace;
}

} // namespace vi

struct ViSolution {
    ValueTable table;
    PolicyTrace trace;
};

inline ViSolution solve_value_iteration(const TransitionModel& model, double initial_t_in_c,
                                        unsigned threads = 0) {
    ViSolution sol;
    sol.table = vi::build_table(model, threads);
    sol.trace = vi::trace_policy(model, sol.table, initial_t_in_c);
    return sol;
}

} // namespace hemdp
