#pragma once

// Macro-action variant of the block solver, in two phases.
//
// Phase 1 runs the block decomposition over the macro-action set: instead of
// 2^L primitive sequences per block, each candidate holds a constant power
// fraction phi for the whole block, costed with the part-load stage cost
// (tariff * rated_kW * phi per hour, discomfort unchanged). Phase 2 walks the
// blocks forward and expands each block's optimal phi into the primitive
// on/off sequence with exactly phi*L on-hours that minimizes primitive cost
// plus the downstream macro value at its landing state; the realized state
// advances along the expanded sequence. The expanded schedule always lies in
// the primitive policy class, so its cost can never beat the block solver's.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hemdp/hem_mdp.hpp"
#include "hemdp/parallel.hpp"
#include "hemdp/trace.hpp"

namespace hemdp {

namespace macro {

struct MacroEntry {
    double value = 0.0;
    int fraction_index = 0;
};

struct MacroBlockSolution {
    std::vector<MacroEntry> entries;
    std::vector<double> boundary_row() const {
        std::vector<double> row;
        row.reserve(entries.size() + 1);
        for (const auto& e : entries) row.push_back(e.value);
        return row;
    }
};

// Aggregate outcome of holding one power fraction for a whole block.
struct MacroOutcome {
    int landing = StateGrid::kOutOfBand; // grid index or kOutOfBand
    ThermalState end_state{};
    StageCost total{};
    bool absorbed = false;
};

// L consecutive one-hour steps at constant fraction phi from an in-band grid
// entry state, discretizing between hours exactly like the primitive model.
inline MacroOutcome macro_transition(const TransitionModel& model, int block_index,
                                     int entry_state, int fraction_index) {
    const Scenario& sc = model.scenario();
    const int first_hour = block_index * sc.block_length;
    MacroOutcome out;
    int state = entry_state;
    for (int j = 0; j < sc.block_length; ++j) {
        const StepOutcome o = model.at_fraction(first_hour + j, state, fraction_index);
        out.total.electricity_cents += o.cost.electricity_cents;
        out.total.discomfort_c += o.cost.discomfort_c;
        out.total.weighted += o.cost.weighted;
        out.end_state = {o.t_in_end_c, o.t_e_end_c};
        if (o.successor == StateGrid::kOutOfBand) {
            out.absorbed = true;
            out.landing = StateGrid::kOutOfBand;
            return out;
        }
        state = o.successor;
        out.landing = state;
    }
    return out;
}

// Backward-folded block value of a constant-phi candidate against a boundary
// row, with the same absorption rule as the primitive enumeration.
inline double evaluate_fraction(const TransitionModel& model, int block_index, int entry_state,
                                int fraction_index, const std::vector<double>& boundary) {
    const Scenario& sc = model.scenario();
    const StateGrid& grid = model.grid();
    const int first_hour = block_index * sc.block_length;
    double costs[32];
    int state = entry_state;
    int walked = 0;
    int landing_slot = grid.value_slot(entry_state);
    for (int j = 0; j < sc.block_length; ++j) {
        const StepOutcome o = model.at_fraction(first_hour + j, state, fraction_index);
        costs[walked++] = o.cost.weighted;
        if (o.successor == StateGrid::kOutOfBand) {
            landing_slot = grid.value_slot(StateGrid::kOutOfBand);
            break;
        }
        state = o.successor;
        landing_slot = state;
    }
    double value = boundary[landing_slot];
    for (int j = walked - 1; j >= 0; --j) value = costs[j] + value;
    return value;
}

inline MacroBlockSolution solve_block(const TransitionModel& model, int block_index,
                                      const std::vector<double>& boundary, unsigned threads = 0) {
    const Scenario& sc = model.scenario();
    const int n = model.grid().n_states();
    const int f_count = static_cast<int>(sc.macro_fractions.size());
    MacroBlockSolution sol;
    sol.entries.resize(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t s) {
        MacroEntry best;
        for (int f = 0; f < f_count; ++f) {
            const double v =
                evaluate_fraction(model, block_index, static_cast<int>(s), f, boundary);
            if (f == 0 || v < best.value) {
                best.value = v;
                best.fraction_index = f;
            }
        }
        sol.entries[s] = best;
    });
    return sol;
}

// Number of on-hours represented by a fraction over an L-hour block; rejects
// fractions that do not correspond to a whole number of hours.
inline int on_hours_of_fraction(double phi, int block_length) {
    const double exact = phi * block_length;
    const int rounded = static_cast<int>(std::llround(exact));
    if (std::fabs(exact - rounded) > 1e-9)
        throw std::invalid_argument("expand_macro: fraction * block_length must be an integer");
    return rounded;
}

// Expands a macro fraction into the primitive sequence of its equivalence
// class (exactly phi*L on-hours) that minimizes primitive block cost plus the
// downstream macro value. Ties go to the lexicographically smallest sequence.
inline std::uint32_t expand_macro(const TransitionModel& model, int block_index, int entry_state,
                                  double phi, const std::vector<double>& boundary) {
    const Scenario& sc = model.scenario();
    const StateGrid& grid = model.grid();
    const int length = sc.block_length;
    const int want = on_hours_of_fraction(phi, length);
    const int first_hour = block_index * length;
    std::uint32_t best_seq = 0;
    double best_value = 0.0;
    bool first = true;
    for (std::uint32_t seq = 0; seq < (1u << length); ++seq) {
        if (static_cast<int>(__builtin_popcount(seq)) != want) continue;
        double costs[32];
        int state = entry_state;
        int walked = 0;
        int landing_slot = grid.value_slot(entry_state);
        for (int j = 0; j < length; ++j) {
            const int a = (seq >> (length - 1 - j)) & 1u;
            const StepOutcome o = model.primitive(first_hour + j, state, a);
            costs[walked++] = o.cost.weighted;
            if (o.successor == StateGrid::kOutOfBand) {
                landing_slot = grid.value_slot(StateGrid::kOutOfBand);
                break;
            }
            state = o.successor;
            landing_slot = state;
        }
        double value = boundary[landing_slot];
        for (int j = walked - 1; j >= 0; --j) value = costs[j] + value;
        if (first || value < best_value) {
            best_value = value;
            best_seq = seq;
            first = false;
        }
    }
    return best_seq;
}

} // namespace macro

// Phase-1 product: per-block macro value tables plus the boundary row each
// block was solved against (needed again during phase-2 expansion).
struct MacroTables {
    std::vector<macro::MacroBlockSolution> tables;
    std::vector<std::vector<double>> boundaries;

    double start_value(int start_state) const { return tables[0].entries[start_state].value; }
};

inline MacroTables build_macro_tables(const TransitionModel& model, unsigned threads = 0) {
    const Scenario& sc = model.scenario();
    if (sc.horizon_hours % sc.block_length != 0)
        throw std::invalid_argument("solve_macro: horizon not divisible by block length");
    if (sc.block_length > 20)
        throw std::invalid_argument("solve_macro: block lengths above 20 are not supported");
    for (double phi : sc.macro_fractions) macro::on_hours_of_fraction(phi, sc.block_length);
    const int m_blocks = sc.block_count();
    MacroTables out;
    out.tables.resize(m_blocks);
    out.boundaries.resize(m_blocks);
    std::vector<double> boundary = terminal_values(sc);
    for (int m = m_blocks - 1; m >= 0; --m) {
        out.boundaries[m] = boundary;
        out.tables[m] = macro::solve_block(model, m, boundary, threads);
        boundary = out.tables[m].boundary_row();
        boundary.push_back(sc.out_of_band_penalty);
    }
    return out;
}

// Phase 2: walk the blocks forward, expanding each block's optimal macro
// action and advancing the state along the expanded primitive sequence.
inline PolicyTrace macro_trace(const TransitionModel& model, const MacroTables& tables,
                               double initial_t_in_c) {
    const Scenario& sc = model.scenario();
    int state = model.grid().discretize(initial_t_in_c);
    if (state == StateGrid::kOutOfBand)
        throw std::invalid_argument("solve_macro: initial temperature outside the comfort band");
    PolicyTrace trace;
    trace.rows.reserve(sc.horizon_hours);
    double cum = 0.0;
    for (int m = 0; m < sc.block_count() && !trace.out_of_band; ++m) {
        const int f = tables.tables[m].entries[state].fraction_index;
        const std::uint32_t seq =
            macro::expand_macro(model, m, state, sc.macro_fractions[f], tables.boundaries[m]);
        for (int j = 0; j < sc.block_length; ++j) {
            const int k = m * sc.block_length + j;
            const int a = (seq >> (sc.block_length - 1 - j)) & 1u;
            const StepOutcome o = model.primitive(k, state, a);
            cum += o.cost.weighted;
            if (o.successor == StateGrid::kOutOfBand) {
                cum += sc.out_of_band_penalty;
                trace.out_of_band = true;
            }
            trace.rows.push_back({k, static_cast<double>(a), o.t_in_end_c, o.t_e_end_c,
                                  sc.weather_c[k], o.cost.electricity_cents, o.cost.discomfort_c,
                                  cum});
            if (trace.out_of_band) break;
            state = o.successor;
        }
    }
    return trace;
}

struct MacroSolution {
    MacroTables tables;
    PolicyTrace trace;            // expanded primitive schedule, primitive costs
    double start_value = 0.0;     // stitched macro value at the start state
};

inline MacroSolution solve_macro(const TransitionModel& model, double initial_t_in_c,
                                 unsigned threads = 0) {
    const int start_state = model.grid().discretize(initial_t_in_c);
    if (start_state == StateGrid::kOutOfBand)
        throw std::invalid_argument("solve_macro: initial temperature outside the comfort band");
    MacroSolution sol;
    sol.tables = build_macro_tables(model, threads);
    sol.start_value = sol.tables.start_value(start_state);
    sol.trace = macro_trace(model, sol.tables, initial_t_in_c);
    return sol;
}

} // namespace hemdp
