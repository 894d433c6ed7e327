#pragma once

#include <cmath>
#include <vector>

namespace hemdp {

// Hour-indexed record of a simulated or optimized HVAC schedule. All
// comparison metrics operate on these.
struct TraceRow {
    int hour = 0;
    double action = 0.0;            // power fraction applied over the hour
    double t_in_c = 0.0;            // undiscretized slot-end indoor temperature
    double t_e_c = 0.0;
    double t_out_c = 0.0;
    double electricity_cents = 0.0;
    double discomfort_c = 0.0;
    double cumulative_weighted = 0.0;
};

struct PolicyTrace {
    std::vector<TraceRow> rows;
    // True when the trajectory left the comfort band and was absorbed; the
    // out-of-band penalty is folded into cumulative_weighted at that point.
    bool out_of_band = false;

    double total_weighted() const {
        return rows.empty() ? 0.0 : rows.back().cumulative_weighted;
    }
    double total_electricity_cents() const {
        double s = 0.0;
        for (const auto& r : rows) s += r.electricity_cents;
        return s;
    }
    double total_discomfort_c() const {
        double s = 0.0;
        for (const auto& r : rows) s += r.discomfort_c;
        return s;
    }
    int on_hours() const {
        int n = 0;
        for (const auto& r : rows) n += r.action > 0.0 ? 1 : 0;
        return n;
    }
    std::vector<double> indoor_series() const {
        std::vector<double> s;
        s.reserve(rows.size());
        for (const auto& r : rows) s.push_back(r.t_in_c);
        return s;
    }
    std::vector<int> on_off_sequence() const {
        std::vector<int> s;
        s.reserve(rows.size());
        for (const auto& r : rows) s.push_back(r.action > 0.0 ? 1 : 0);
        return s;
    }
};

} // namespace hemdp
