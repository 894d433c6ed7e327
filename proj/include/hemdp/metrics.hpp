#pragma once

// Comparison metrics between policy traces: mean absolute error, normalized
// calibration error (difference in on-hour counts over the horizon), and the
// per-scenario summary rows used by the comparison reports.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "hemdp/trace.hpp"

namespace hemdp {

inline double mae(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mae: length mismatch");
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

inline double mean(const std::vector<double>& a) {
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (double v : a) s += v;
    return s / static_cast<double>(a.size());
}

inline double median(std::vector<double> a) {
    if (a.empty()) return 0.0;
    std::sort(a.begin(), a.end());
    const std::size_t m = a.size() / 2;
    return a.size() % 2 ? a[m] : 0.5 * (a[m - 1] + a[m]);
}

// |on-hours(a) - on-hours(b)| / horizon, as a percentage.
inline double calibration_error_pct(const PolicyTrace& a, const PolicyTrace& b, int horizon) {
    if (a.rows.size() != b.rows.size())
        throw std::invalid_argument("calibration_error: trace length mismatch");
    if (horizon <= 0) throw std::invalid_argument("calibration_error: horizon must be positive");
    return 100.0 * std::abs(a.on_hours() - b.on_hours()) / static_cast<double>(horizon);
}

// Averaged over paired start points.
inline double calibration_error_pct(const std::vector<PolicyTrace>& a,
                                    const std::vector<PolicyTrace>& b, int horizon) {
    if (a.size() != b.size()) throw std::invalid_argument("calibration_error: batch size mismatch");
    if (a.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += calibration_error_pct(a[i], b[i], horizon);
    return s / static_cast<double>(a.size());
}

// One row of the per-season summary: averages over a batch of start points.
struct ScenarioSummary {
    double avg_operating_hours = 0.0;
    double avg_electricity_cents = 0.0;
    double avg_discomfort_c = 0.0;
};

inline ScenarioSummary summarize(const std::vector<PolicyTrace>& batch) {
    ScenarioSummary s;
    if (batch.empty()) return s;
    for (const auto& t : batch) {
        s.avg_operating_hours += t.on_hours();
        s.avg_electricity_cents += t.total_electricity_cents();
        s.avg_discomfort_c += t.total_discomfort_c();
    }
    const double n = static_cast<double>(batch.size());
    s.avg_operating_hours /= n;
    s.avg_electricity_cents /= n;
    s.avg_discomfort_c /= n;
    return s;
}

struct ComparisonReport {
    // Trace-level errors of solver A against solver B, over paired starts.
    double mae_state_c = 0.0;          // mean per-start MAE of the indoor series
    double max_mae_state_c = 0.0;      // worst start
    double mae_electricity_cents = 0.0; // MAE of cumulative electricity
    double avg_electricity_cents_b = 0.0;
    double mae_discomfort_c = 0.0;      // MAE of cumulative discomfort
    double avg_discomfort_c_b = 0.0;
    double calibration_error_pct = 0.0;
    double speedup = 0.0;              // median wall time of A / median wall time of B
    ScenarioSummary summary_a{};
    ScenarioSummary summary_b{};
};

inline ComparisonReport compare_trace_batches(const std::vector<PolicyTrace>& a,
                                              const std::vector<PolicyTrace>& b, int horizon) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("compare_trace_batches: need equal, non-empty batches");
    ComparisonReport r;
    std::vector<double> elec_a, elec_b, disc_a, disc_b;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double m = mae(a[i].indoor_series(), b[i].indoor_series());
        r.mae_state_c += m;
        r.max_mae_state_c = std::max(r.max_mae_state_c, m);
        elec_a.push_back(a[i].total_electricity_cents());
        elec_b.push_back(b[i].total_electricity_cents());
        disc_a.push_back(a[i].total_discomfort_c());
        disc_b.push_back(b[i].total_discomfort_c());
    }
    r.mae_state_c /= static_cast<double>(a.size());
    r.mae_electricity_cents = mae(elec_a, elec_b);
    r.avg_electricity_cents_b = mean(elec_b);
    r.mae_discomfort_c = mae(disc_a, disc_b);
    r.avg_discomfort_c_b = mean(disc_b);
    r.calibration_error_pct = hemdp::calibration_error_pct(a, b, horizon);
    r.summary_a = summarize(a);
    r.summary_b = summarize(b);
    return r;
}

} // namespace hemdp
