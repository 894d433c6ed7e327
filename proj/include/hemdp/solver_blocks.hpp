#pragma once

// Multi-timescale block decomposition of the scheduling MDP.
//
// The horizon is split into M blocks of L hours. Blocks are solved backward:
// for every grid entry state the solver enumerates all 2^L primitive action
// sequences through the shared transition table, adds the downstream boundary
// value at the discretized landing state, and keeps the cheapest sequence.
// Boundary matching is exact index equality; the first block is solved from
// the single fixed start temperature. On a deterministic MDP this stitching
// reproduces monolithic value iteration exactly: sequence totals are folded
// back to front, so each partial sum is the same float the per-step backup
// would produce, and the enumeration visits sequences in lexicographic order
// (off first), matching the per-step tie rule.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hemdp/hem_mdp.hpp"
#include "hemdp/parallel.hpp"
#include "hemdp/trace.hpp"

namespace hemdp {

namespace blocks {

// Best total and action sequence for one entry state of one block. Sequence
// bits are read most-significant-first: bit (L-1-j) is the action in the
// block's j-th hour, so ascending ids enumerate sequences lexicographically.
struct BlockEntry {
    double value = 0.0;
    std::uint32_t sequence = 0;
};

// Per-entry-state solutions of one block against a downstream boundary row.
struct BlockSolution {
    std::vector<BlockEntry> entries; // one per in-band grid state
    std::vector<double> boundary_row() const {
        std::vector<double> row;
        row.reserve(entries.size() + 1);
        for (const auto& e : entries) row.push_back(e.value);
        return row; // caller appends the out-of-band slot
    }
};

// Walks one action sequence from an entry state, folding costs back to front.
// Absorbs at the first out-of-band landing (boundary slot = penalty).
inline double evaluate_sequence(const TransitionModel& model, int first_hour, int entry_state,
                                std::uint32_t sequence, int length,
                                const std::vector<double>& boundary) {
    const StateGrid& grid = model.grid();
    double costs[32];
    int state = entry_state;
    int walked = 0;
    int landing_slot = 0;
    for (int j = 0; j < length; ++j) {
        const int a = (sequence >> (length - 1 - j)) & 1u;
        const StepOutcome& o = model.primitive(first_hour + j, state, a);
        costs[walked++] = o.cost.weighted;
        if (o.successor == StateGrid::kOutOfBand) {
            landing_slot = grid.value_slot(StateGrid::kOutOfBand);
            state = StateGrid::kOutOfBand;
            break;
        }
        state = o.successor;
        landing_slot = state;
    }
    double value = boundary[landing_slot];
    for (int j = walked - 1; j >= 0; --j) value = costs[j] + value;
    return value;
}

inline BlockEntry best_sequence(const TransitionModel& model, int first_hour, int entry_state,
                                int length, const std::vector<double>& boundary) {
    BlockEntry best;
    const std::uint32_t count = 1u << length;
    for (std::uint32_t seq = 0; seq < count; ++seq) {
        const double v = evaluate_sequence(model, first_hour, entry_state, seq, length, boundary);
        if (seq == 0 || v < best.value) {
            best.value = v;
            best.sequence = seq;
        }
    }
    return best;
}

// Solves block `block_index` (0-based) for all grid entry states.
inline BlockSolution solve_block(const TransitionModel& model, int block_index,
                                 const std::vector<double>& boundary, unsigned threads = 0) {
    const Scenario& sc = model.scenario();
    const int n = model.grid().n_states();
    if (sc.block_length > 20)
        throw std::invalid_argument("solve_block: block lengths above 20 are not supported");
    if (static_cast<int>(boundary.size()) != n + 1)
        throw std::invalid_argument("solve_block: boundary row must cover every grid state plus the out-of-band slot");
    const int first_hour = block_index * sc.block_length;
    BlockSolution sol;
    sol.entries.resize(n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t s) {
        sol.entries[s] =
            best_sequence(model, first_hour, static_cast<int>(s), sc.block_length, boundary);
    });
    return sol;
}

} // namespace blocks

// tables[m] holds block m's per-entry-state solutions, m = 0..M-1. Only the
// forward walk depends on the start temperature, so one set of tables serves
// every start point.
struct BlocksTables {
    std::vector<blocks::BlockSolution> tables;

    double start_value(int start_state) const { return tables[0].entries[start_state].value; }
};

inline BlocksTables build_blocks_tables(const TransitionModel& model, unsigned threads = 0) {
    const Scenario& sc = model.scenario();
    if (sc.horizon_hours % sc.block_length != 0)
        throw std::invalid_argument("solve_blocks: horizon not divisible by block length");
    const int m_blocks = sc.block_count();
    BlocksTables out;
    out.tables.resize(m_blocks);
    std::vector<double> boundary = terminal_values(sc);
    for (int m = m_blocks - 1; m >= 0; --m) {
        out.tables[m] = blocks::solve_block(model, m, boundary, threads);
        boundary = out.tables[m].boundary_row();
        boundary.push_back(sc.out_of_band_penalty);
    }
    return out;
}

// Forward pass: concatenate the stored argmin sequences along the realized
// state path.
inline PolicyTrace blocks_trace(const TransitionModel& model, const BlocksTables& tables,
                                double initial_t_in_c) {
    const Scenario& sc = model.scenario();
    const StateGrid& grid = model.grid();
    int state = grid.discretize(initial_t_in_c);
    if (state == StateGrid::kOutOfBand)
        throw std::invalid_argument("solve_blocks: initial temperature outside the comfort band");
    PolicyTrace trace;
    trace.rows.reserve(sc.horizon_hours);
    double cum = 0.0;
    for (int m = 0; m < sc.block_count() && !trace.out_of_band; ++m) {
        const std::uint32_t seq = tables.tables[m].entries[state].sequence;
        for (int j = 0; j < sc.block_length; ++j) {
            const int k = m * sc.block_length + j;
            const int a = (seq >> (sc.block_length - 1 - j)) & 1u;
            const StepOutcome& o = model.primitive(k, state, a);
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

struct BlocksSolution {
    BlocksTables tables;
    PolicyTrace trace;
    double start_value = 0.0;
};

inline BlocksSolution solve_blocks(const TransitionModel& model, double initial_t_in_c,
                                   unsigned threads = 0) {
    const int start_state = model.grid().discretize(initial_t_in_c);
    if (start_state == StateGrid::kOutOfBand)
        throw std::invalid_argument("solve_blocks: initial temperature outside the comfort band");
    BlocksSolution sol;
    sol.tables = build_blocks_tables(model, threads);
    sol.start_value = sol.tables.start_value(start_state);
    sol.trace = blocks_trace(model, sol.tables, initial_t_in_c);
    return sol;
}

} // namespace hemdp
