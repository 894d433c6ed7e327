#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hemdp/baseline_ctrl.hpp"
#include "hemdp/metrics.hpp"
#include "hemdp/solver_vi.hpp"
#include "test_support.hpp"

using namespace hemdp;
using namespace hemdp_test;
using Catch::Approx;

TEST_CASE("cooling relay engages above the upper band edge", "[baseline]") {
    Scenario s = seasonal_scenario(Season::Summer, 8, 0.5);
    TransitionModel model(s, desk_params());
    const PolicyTrace t = run_deadband(model, 27.0);
    CHECK(t.rows[0].action == 1.0);
}

TEST_CASE("cooling relay holds off inside the band", "[baseline]") {
    Scenario s = seasonal_scenario(Season::Summer, 8, 0.5);
    s.weather_c.assign(s.horizon_hours + 1, 24.0);
    TransitionModel model(s, desk_params());
    const PolicyTrace t = run_deadband(model, 24.0);
    CHECK(t.rows[0].action == 0.0);
}

TEST_CASE("heating relay produces one on-run per excursion and never switches in-band",
          "[baseline]") {
    Scenario s = seasonal_scenario(Season::Winter, 48, 0.5);
    TransitionModel model(s, desk_params());
    const PolicyTrace t = run_deadband(model, 21.0);

    // Hysteresis: any change of actuator state must happen outside (20, 22).
    double slot_start = model.grid().snap(21.0);
    double prev_action = 0.0;
    int switches = 0;
    for (const auto& r : t.rows) {
        if (r.action != prev_action) {
            ++switches;
            const bool inside = slot_start > 20.0 && slot_start < 22.0;
            CHECK_FALSE(inside);
        }
        prev_action = r.action;
        slot_start = model.grid().snap(r.t_in_c);
    }
    REQUIRE(switches >= 2); // winter week actually exercises the relay

    // Exactly one contiguous on-run between a fall below 20 and the following
    // rise above 22.
    int runs = 0;
    bool in_run = false;
    for (const auto& r : t.rows) {
        if (r.action > 0.0 && !in_run) {
            ++runs;
            in_run = true;
        } else if (r.action == 0.0) {
            in_run = false;
        }
    }
    CHECK(runs >= 1);
    CHECK(runs == (switches + 1) / 2);
}

TEST_CASE("relay trace is defined for out-of-band starts", "[baseline]") {
    Scenario s = seasonal_scenario(Season::Winter, 8, 0.5);
    TransitionModel model(s, desk_params());
    const PolicyTrace t = run_deadband(model, 17.0);
    CHECK(static_cast<int>(t.rows.size()) == s.horizon_hours);
    CHECK(t.rows[0].action == 1.0); // below the heating band, relay turns on
    CHECK_THROWS_AS(run_deadband(model, std::nan("")), std::invalid_argument);
}

TEST_CASE("mae basics and the naive-loop oracle", "[metrics]") {
    CHECK(mae({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}) == 0.0);
    CHECK(mae({1.06, 2.06}, {1.0, 2.0}) == Approx(0.06).margin(1e-12));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> a(97), b(97);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
    }
    double naive = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) naive += std::fabs(a[i] - b[i]);
    naive /= static_cast<double>(a.size());
    CHECK(mae(a, b) == naive);
    CHECK(mae(a, b) == mae(b, a));
    CHECK_THROWS_AS(mae({1.0}, {1.0, 2.0}), std::invalid_argument);
}

namespace {

PolicyTrace trace_with_on_hours(int horizon, int on) {
    PolicyTrace t;
    for (int k = 0; k < horizon; ++k)
        t.rows.push_back({k, k < on ? 1.0 : 0.0, 23.0, 23.0, 25.0, 0.0, 0.0, 0.0});
    return t;
}

} // namespace

TEST_CASE("calibration error counts on-cycle differences", "[metrics]") {
    const PolicyTrace a = trace_with_on_hours(24, 6);
    CHECK(calibration_error_pct(a, a, 24) == 0.0);

    // Batch of 61 pairs, one differing by a single on-cycle.
    std::vector<PolicyTrace> xs, ys;
    for (int i = 0; i < 61; ++i) {
        xs.push_back(trace_with_on_hours(24, 6));
        ys.push_back(trace_with_on_hours(24, i == 0 ? 7 : 6));
    }
    CHECK(calibration_error_pct(xs, ys, 24) == Approx((100.0 / 24.0) / 61.0).margin(1e-12));

    CHECK(calibration_error_pct(trace_with_on_hours(24, 24), trace_with_on_hours(24, 0), 24) ==
          100.0);
    CHECK(calibration_error_pct(trace_with_on_hours(24, 3), trace_with_on_hours(24, 9), 24) ==
          calibration_error_pct(trace_with_on_hours(24, 9), trace_with_on_hours(24, 3), 24));
    CHECK_THROWS_AS(calibration_error_pct(trace_with_on_hours(24, 3), trace_with_on_hours(23, 3), 24),
                    std::invalid_argument);
}

TEST_CASE("median of an even and odd sample count", "[metrics]") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
}

TEST_CASE("batch summaries average the table quantities", "[metrics]") {
    std::vector<PolicyTrace> batch{trace_with_on_hours(24, 4), trace_with_on_hours(24, 8)};
    const ScenarioSummary s = summarize(batch);
    CHECK(s.avg_operating_hours == 6.0);
}

TEST_CASE("full report populates every field", "[metrics]") {
    Scenario sc = seasonal_scenario(Season::Summer, 24, 0.95);
    TransitionModel model(sc, desk_params());
    std::vector<PolicyTrace> a, b;
    const ValueTable table = vi::build_table(model);
    for (int st = 0; st < model.grid().n_states(); st += 10) {
        a.push_back(vi::trace_policy(model, table, model.grid().temp_of(st)));
        b.push_back(run_deadband(model, model.grid().temp_of(st)));
    }
    const ComparisonReport r = compare_trace_batches(a, b, sc.horizon_hours);
    CHECK(r.mae_state_c >= 0.0);
    CHECK(r.max_mae_state_c >= r.mae_state_c);
    CHECK(r.calibration_error_pct >= 0.0);
    CHECK(r.calibration_error_pct <= 100.0);
    CHECK(r.summary_b.avg_electricity_cents >= 0.0);
}
