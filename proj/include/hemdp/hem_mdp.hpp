#pragma once

// Finite-horizon HVAC scheduling MDP over the two-node thermal model.
//
// The decision state is the indoor temperature rounded to the nearest multiple
// of the discretization step and restricted to the comfort band; anything that
// rounds outside the band maps to a single out-of-band marker. The envelope
// temperature is not part of the state: every one-hour transition seeds it to
// the entry grid temperature, which makes the transition a pure function of
// (hour, grid state, power fraction) and lets all solvers share one table of
// computed transitions.

#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "hemdp/errors.hpp"
#include "hemdp/parallel.hpp"
#include "hemdp/pcm_thermal.hpp"

namespace hemdp {

struct TariffBand {
    int start_hour = 0; // inclusive
    int end_hour = 0;   // exclusive
    double cents_per_kwh = 0.0;
};

// Time-of-use tariff covering hours 0-24 without gaps or overlaps, applied
// cyclically per day.
class Tariff {
public:
    Tariff() : Tariff({{0, 24, 30.0}}) {}

    explicit Tariff(std::vector<TariffBand> bands) : bands_(std::move(bands)) {
        if (bands_.empty()) throw ValidationError("tariff", "at least one band required");
        int expected = 0;
        for (const auto& b : bands_) {
            if (b.start_hour != expected)
                throw ValidationError("tariff", "bands must cover 0-24 contiguously; got start " +
                                                    std::to_string(b.start_hour) + " after " +
                                                    std::to_string(expected));
            if (b.end_hour <= b.start_hour)
                throw ValidationError("tariff", "band end must exceed start");
            if (!(b.cents_per_kwh >= 0.0) || !std::isfinite(b.cents_per_kwh))
                throw ValidationError("tariff", "price must be >= 0 and finite");
            expected = b.end_hour;
        }
        if (expected != 24) throw ValidationError("tariff", "bands must end at hour 24");
        for (int h = 0; h < 24; ++h)
            for (const auto& b : bands_)
                if (h >= b.start_hour && h < b.end_hour) hourly_[h] = b.cents_per_kwh;
    }

    double cents_per_kwh_at(int hour) const {
        int h = hour % 24;
        if (h < 0) h += 24;
        return hourly_[h];
    }

    const std::vector<TariffBand>& bands() const { return bands_; }

private:
    std::vector<TariffBand> bands_;
    double hourly_[24] = {};
};

struct Scenario {
    int horizon_hours = 24;            // K
    std::vector<double> weather_c;     // hourly ambient series, length >= K+1
    Tariff tariff{};
    double lambda = 0.5;               // weight on the electricity term
    double setpoint_c = 23.0;          // T_s
    double comfort_low_c = 20.0;       // T_1
    double comfort_high_c = 26.0;      // T_2
    double discretization_c = 0.1;     // d
    HvacMode mode = HvacMode::Cooling;
    int block_length = 4;              // L
    std::vector<double> macro_fractions = {0.0, 0.25, 0.5, 0.75, 1.0};
    double out_of_band_penalty = 1e6;
    double initial_t_in_c = 22.0;
    double initial_t_e_c = 22.0;
    int substeps_per_hour = 60;

    void validate() const {
        if (horizon_hours < 1) throw ValidationError("horizon_hours", "must be >= 1");
        if (!(comfort_low_c < comfort_high_c))
            throw ValidationError("comfort_low_c/comfort_high_c", "lower bound must be below upper bound");
        if (!(discretization_c > 0.0)) throw ValidationError("discretization_c", "must be > 0");
        const double ratio = (comfort_high_c - comfort_low_c) / discretization_c;
        if (std::fabs(ratio - std::llround(ratio)) > 1e-6 * std::max(1.0, std::fabs(ratio)))
            throw ValidationError("discretization_c", "comfort band width must be an integer multiple of the step");
        if (block_length < 1) throw ValidationError("block_length", "must be >= 1");
        if (horizon_hours % block_length != 0)
            throw ValidationError("block_length", "horizon_hours must be divisible by block_length");
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw ValidationError("lambda", "must be in [0, 1]");
        if (!std::isfinite(setpoint_c)) throw ValidationError("setpoint_c", "must be finite");
        if (!(out_of_band_penalty > 0.0)) throw ValidationError("out_of_band_penalty", "must be > 0");
        if (substeps_per_hour < 1) throw ValidationError("substeps_per_hour", "must be >= 1");
        if (static_cast<int>(weather_c.size()) < horizon_hours + 1)
            throw ValidationError("weather_c", "need at least horizon_hours + 1 hourly samples, got " +
                                                   std::to_string(weather_c.size()));
        for (double w : weather_c)
            if (!std::isfinite(w)) throw ValidationError("weather_c", "temperatures must be finite");
        bool has0 = false, has1 = false;
        for (double f : macro_fractions) {
            if (!(f >= 0.0 && f <= 1.0)) throw ValidationError("macro_fractions", "values must be in [0, 1]");
            if (f == 0.0) has0 = true;
            if (f == 1.0) has1 = true;
        }
        if (!has0 || !has1) throw ValidationError("macro_fractions", "must contain both 0 and 1");
        for (std::size_t i = 1; i < macro_fractions.size(); ++i)
            if (!(macro_fractions[i] > macro_fractions[i - 1]))
                throw ValidationError("macro_fractions", "must be strictly increasing");
    }

    int block_count() const { return horizon_hours / block_length; }
};

struct StageCost {
    double electricity_cents = 0.0;
    double discomfort_c = 0.0;
    double weighted = 0.0;
};

// Uniform temperature grid of multiples of d covering [T_1, T_2].
class StateGrid {
public:
    static constexpr int kOutOfBand = -1;

    StateGrid(double low_c, double high_c, double step_c)
        : step_(step_c),
          low_index_(std::llround(low_c / step_c)),
          n_states_(static_cast<int>(std::llround((high_c - low_c) / step_c)) + 1) {}

    explicit StateGrid(const Scenario& s)
        : StateGrid(s.comfort_low_c, s.comfort_high_c, s.discretization_c) {}

    int n_states() const { return n_states_; }
    double step() const { return step_; }

    // Nearest multiple of the step; exact half-steps round away from zero.
    double snap(double t_c) const {
        if (!std::isfinite(t_c)) throw std::invalid_argument("snap: non-finite temperature");
        return static_cast<double>(std::llround(t_c / step_)) * step_;
    }

    // Grid index of the nearest multiple, or kOutOfBand if it falls outside.
    int discretize(double t_c) const {
        if (!std::isfinite(t_c)) throw std::invalid_argument("discretize: non-finite temperature");
        const long long i = std::llround(t_c / step_) - low_index_;
        if (i < 0 || i >= n_states_) return kOutOfBand;
        return static_cast<int>(i);
    }

    double temp_of(int index) const {
        return static_cast<double>(low_index_ + index) * step_;
    }

    // Row slot in a value vector of size n_states() + 1 (last slot = out of band).
    int value_slot(int state_or_oob) const {
        return state_or_oob == kOutOfBand ? n_states_ : state_or_oob;
    }

private:
    double step_;
    long long low_index_;
    int n_states_;
};

// Terminal value row: zero for every in-band grid state, the out-of-band
// penalty in the marker slot.
inline std::vector<double> terminal_values(const Scenario& s) {
    const StateGrid grid(s);
    std::vector<double> row(static_cast<std::size_t>(grid.n_states()) + 1, 0.0);
    row.back() = s.out_of_band_penalty;
    return row;
}

// One-hour transition outcome from a grid-snapped entry temperature.
struct StepOutcome {
    int successor = StateGrid::kOutOfBand; // grid index or kOutOfBand
    double t_in_end_c = 0.0;               // undiscretized slot-end indoor temperature
    double t_in_next_c = 0.0;              // slot-end temperature snapped to the grid
    double t_e_end_c = 0.0;
    StageCost cost{};
};

// Shared transition table for all solvers. Entries are pure functions of
// (hour, entry grid temperature, power fraction): the envelope node is seeded
// to the entry temperature, the ODEs are integrated for one hour against that
// hour's ambient sample, the electricity term is tariff * rated_kW * fraction
// and the discomfort term is the undiscretized slot-end deviation from the
// setpoint. With reuse enabled the per-(hour, state, action) results are
// computed once, in parallel, and then shared; with reuse disabled every call
// integrates the ODEs again.
class TransitionModel {
public:
    TransitionModel(const Scenario& scenario, const BuildingThermalParams& params,
                    bool reuse = true, unsigned threads = 0)
        : scenario_(validated(scenario)),
          thermal_(params),
          grid_(scenario_),
          reuse_(reuse),
          threads_(threads) {
        if (reuse_) {
            const std::size_t total =
                static_cast<std::size_t>(scenario_.horizon_hours) * grid_.n_states() * 2;
            primitive_.resize(total);
            parallel_for(total, threads_, [this](std::size_t idx) {
                const int action = static_cast<int>(idx % 2);
                const int state = static_cast<int>((idx / 2) % grid_.n_states());
                const int hour = static_cast<int>(idx / (2 * static_cast<std::size_t>(grid_.n_states())));
                primitive_[idx] = compute_from(grid_.temp_of(state), hour, static_cast<double>(action));
            });
        }
    }

    const Scenario& scenario() const { return scenario_; }
    const StateGrid& grid() const { return grid_; }
    const ThermalModel& thermal() const { return thermal_; }
    bool reuse_enabled() const { return reuse_; }

    // Primitive on/off transition from an in-band grid state.
    StepOutcome primitive(int hour, int state, int action) const {
        if (reuse_) return primitive_[index_of(hour, state, action)];
        return compute_from(grid_.temp_of(state), hour, static_cast<double>(action));
    }

    // Part-load transition from an in-band grid state at one of the scenario's
    // macro fractions. Fractions 0 and 1 run the identical computation as the
    // corresponding primitive actions.
    StepOutcome at_fraction(int hour, int state, int fraction_index) const {
        if (reuse_) {
            ensure_fraction_cache();
            const std::size_t f = scenario_.macro_fractions.size();
            return fraction_cache_[(static_cast<std::size_t>(hour) * grid_.n_states() + state) * f +
                                   fraction_index];
        }
        return compute_from(grid_.temp_of(state), hour, scenario_.macro_fractions[fraction_index]);
    }

    // Raw transition from any temperature (snapped to the grid modulus first;
    // the entry may lie outside the comfort band). Used by the relay baseline
    // and by explicit schedule simulation.
    StepOutcome compute_from(double entry_t_in_c, int hour, double fraction) const {
        if (hour < 0 || hour >= scenario_.horizon_hours)
            throw std::invalid_argument("transition: hour out of range");
        const double t0 = grid_.snap(entry_t_in_c);
        const ThermalState end = thermal_.step({t0, t0}, scenario_.weather_c[hour], fraction,
                                               scenario_.mode, 1.0, scenario_.substeps_per_hour);
        StepOutcome out;
        out.t_in_end_c = end.t_in_c;
        out.t_e_end_c = end.t_e_c;
        out.t_in_next_c = grid_.snap(end.t_in_c);
        out.successor = grid_.discretize(end.t_in_c);
        out.cost.electricity_cents = scenario_.tariff.cents_per_kwh_at(hour) *
                                     thermal_.params().hvac_rated_electrical_kw * fraction;
        out.cost.discomfort_c = std::fabs(end.t_in_c - scenario_.setpoint_c);
        out.cost.weighted = scenario_.lambda * out.cost.electricity_cents +
                            (1.0 - scenario_.lambda) * out.cost.discomfort_c;
        return out;
    }

private:
    static const Scenario& validated(const Scenario& s) {
        s.validate();
        return s;
    }

    std::size_t index_of(int hour, int state, int action) const {
        return (static_cast<std::size_t>(hour) * grid_.n_states() + state) * 2 + action;
    }

    void ensure_fraction_cache() const {
        std::call_once(fraction_once_, [this] {
            const std::size_t f = scenario_.macro_fractions.size();
            const std::size_t total =
                static_cast<std::size_t>(scenario_.horizon_hours) * grid_.n_states() * f;
            fraction_cache_.resize(total);
            parallel_for(total, threads_, [this, f](std::size_t idx) {
                const int fi = static_cast<int>(idx % f);
                const int state = static_cast<int>((idx / f) % grid_.n_states());
                const int hour = static_cast<int>(idx / (f * static_cast<std::size_t>(grid_.n_states())));
                fraction_cache_[idx] =
                    compute_from(grid_.temp_of(state), hour, scenario_.macro_fractions[fi]);
            });
        });
    }

    Scenario scenario_;
    ThermalModel thermal_;
    StateGrid grid_;
    bool reuse_;
    unsigned threads_;
    std::vector<StepOutcome> primitive_;
    mutable std::once_flag fraction_once_;
    mutable std::vector<StepOutcome> fraction_cache_;
};

// Spec-level transition: next state (indoor temperature snapped to the grid)
// plus the stage cost for taking `fraction` at `hour` from `state`.
inline std::pair<ThermalState, StageCost> transition(const TransitionModel& model,
                                                     ThermalState state, double fraction,
                                                     int hour) {
    const StepOutcome out = model.compute_from(state.t_in_c, hour, fraction);
    return {{out.t_in_next_c, out.t_e_end_c}, out.cost};
}

} // namespace hemdp
