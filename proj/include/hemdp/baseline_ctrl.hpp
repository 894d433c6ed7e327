#pragma once

// Deadband relay baseline. The relay is evaluated once per hour on the
// slot-start indoor temperature and drives the same approximated per-step
// dynamics as the optimizing solvers, so its schedule is one primitive policy
// in their feasible set and the comparison is apples to apples. Unlike the
// solvers, the relay keeps walking when the temperature leaves the comfort
// band; its trace is costed with the plain stage cost throughout.

#include "hemdp/hem_mdp.hpp"
#include "hemdp/trace.hpp"

namespace hemdp {

struct DeadbandConfig {
    double heating_low_c = 20.0;  // heating: on below low, off above high
    double heating_high_c = 22.0;
    double cooling_low_c = 22.0;  // cooling: on above high, off below low
    double cooling_high_c = 26.0;
};

inline PolicyTrace run_deadband(const TransitionModel& model, double initial_t_in_c,
                                const DeadbandConfig& cfg = {}) {
    const Scenario& sc = model.scenario();
    const StateGrid& grid = model.grid();
    if (!std::isfinite(initial_t_in_c))
        throw std::invalid_argument("run_deadband: initial temperature must be finite");

    PolicyTrace trace;
    trace.rows.reserve(sc.horizon_hours);
    double t = grid.snap(initial_t_in_c);
    bool on = false;
    double cum = 0.0;
    for (int k = 0; k < sc.horizon_hours; ++k) {
        if (sc.mode == HvacMode::Heating) {
            if (t < cfg.heating_low_c) on = true;
            else if (t > cfg.heating_high_c) on = false;
        } else {
            if (t > cfg.cooling_high_c) on = true;
            else if (t < cfg.cooling_low_c) on = false;
        }
        const StepOutcome o = model.compute_from(t, k, on ? 1.0 : 0.0);
        cum += o.cost.weighted;
        trace.rows.push_back({k, on ? 1.0 : 0.0, o.t_in_end_c, o.t_e_end_c, sc.weather_c[k],
                              o.cost.electricity_cents, o.cost.discomfort_c, cum});
        t = o.t_in_next_c;
    }
    return trace;
}

} // namespace hemdp
