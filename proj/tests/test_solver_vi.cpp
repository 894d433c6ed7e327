#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hemdp/baseline_ctrl.hpp"
#include "hemdp/solver_vi.hpp"
#include "test_support.hpp"

using namespace hemdp;
using namespace hemdp_test;

TEST_CASE("terminal-adjacent backup prefers off when both actions stay in band", "[vi]") {
    Scenario s = toy_scenario(4, HvacMode::Cooling, 1.0);
    s.weather_c.assign(s.horizon_hours + 1, 23.0);
    s.tariff = Tariff({{0, 24, 30.0}});
    TransitionModel model(s, desk_params());
    std::vector<double> row;
    std::vector<std::int8_t> action;
    vi::backup_row(model, s.horizon_hours - 1, terminal_values(s), row, action);
    const int mid = model.grid().discretize(23.0);
    REQUIRE(model.primitive(s.horizon_hours - 1, mid, 0).successor != StateGrid::kOutOfBand);
    REQUIRE(model.primitive(s.horizon_hours - 1, mid, 1).successor != StateGrid::kOutOfBand);
    CHECK(action[mid] == 0);
    CHECK(row[mid] == 0.0); // off in mild weather costs nothing at lambda = 1
}

TEST_CASE("a state with both successors out of band takes the cheaper branch plus penalty", "[vi]") {
    Scenario s = toy_scenario(4, HvacMode::Heating, 1.0);
    s.weather_c.assign(s.horizon_hours + 1, -60.0);
    s.tariff = Tariff({{0, 24, 30.0}});
    BuildingThermalParams p = desk_params();
    p.hvac_rated_electrical_kw = 0.05; // far too weak to hold the band
    TransitionModel model(s, p);
    const int st = model.grid().discretize(20.0);
    REQUIRE(model.primitive(0, st, 0).successor == StateGrid::kOutOfBand);
    REQUIRE(model.primitive(0, st, 1).successor == StateGrid::kOutOfBand);
    std::vector<double> row;
    std::vector<std::int8_t> action;
    vi::backup_row(model, 0, terminal_values(s), row, action);
    const double off_total = model.primitive(0, st, 0).cost.weighted + s.out_of_band_penalty;
    const double on_total = model.primitive(0, st, 1).cost.weighted + s.out_of_band_penalty;
    CHECK(row[st] == std::min(off_total, on_total));
    CHECK(action[st] == 0); // off is cheaper at lambda = 1
}

TEST_CASE("two-step three-state problem matches enumeration of all four sequences", "[vi]") {
    Scenario s = toy_scenario(2, HvacMode::Cooling, 0.5, 0.5, 2);
    s.comfort_low_c = 22.0;
    s.comfort_high_c = 23.0; // 3 states at d = 0.5
    TransitionModel model(s, desk_params());
    const BruteResult oracle = brute_force(model, 22.5);
    const ViSolution sol = solve_value_iteration(model, 22.5);
    CHECK(sol.trace.total_weighted() ==
          Catch::Approx(oracle.cost).epsilon(1e-9));
    CHECK(trace_actions(sol.trace) == oracle.actions);
}

TEST_CASE("small horizons equal the exhaustive primitive-policy minimum", "[vi]") {
    for (const HvacMode mode : {HvacMode::Heating, HvacMode::Cooling}) {
        for (const double lambda : {0.05, 0.5, 0.95}) {
            Scenario s = toy_scenario(8, mode, lambda);
            TransitionModel model(s, desk_params());
            for (const double start : {20.5, 23.0, 25.5}) {
                const BruteResult oracle = brute_force(model, start);
                const ViSolution sol = solve_value_iteration(model, start);
                INFO("mode " << (mode == HvacMode::Heating ? "heat" : "cool") << " lambda "
                             << lambda << " start " << start);
                CHECK(sol.trace.total_weighted() ==
                      Catch::Approx(oracle.cost).epsilon(1e-9).margin(1e-12));
                CHECK(trace_actions(sol.trace) == oracle.actions);
            }
        }
    }
}

TEST_CASE("zero tariff at lambda one makes every policy free", "[vi]") {
    Scenario s = toy_scenario(8, HvacMode::Cooling, 1.0);
    s.tariff = Tariff({{0, 24, 0.0}});
    TransitionModel model(s, desk_params());
    const ViSolution sol = solve_value_iteration(model, 23.0);
    CHECK(sol.trace.total_weighted() == 0.0);
    CHECK(sol.table.start_value(model.grid().discretize(23.0)) == 0.0);
}

TEST_CASE("forward trace reproduces the backward value", "[vi]") {
    Scenario s = seasonal_scenario(Season::Summer, 24, 0.95);
    TransitionModel model(s, desk_params());
    const ViSolution sol = solve_value_iteration(model, 23.0);
    const double v0 = sol.table.start_value(model.grid().discretize(23.0));
    CHECK(sol.trace.total_weighted() == Catch::Approx(v0).epsilon(1e-9));
    CHECK(static_cast<int>(sol.trace.rows.size()) == s.horizon_hours);
    CHECK_FALSE(sol.trace.out_of_band);
    double prev = 0.0;
    for (const auto& row : sol.trace.rows) {
        CHECK(row.cumulative_weighted >= prev);
        prev = row.cumulative_weighted;
    }
}

TEST_CASE("optimizer never loses to the deadband relay", "[vi]") {
    for (const double lambda : {0.05, 0.95}) {
        Scenario s = seasonal_scenario(Season::Summer, 24, lambda);
        TransitionModel model(s, desk_params());
        const ViSolution sol = solve_value_iteration(model, 23.0);
        const PolicyTrace relay = run_deadband(model, 23.0);
        CHECK(sol.trace.total_weighted() <= relay.total_weighted() + 1e-9);
    }
}

TEST_CASE("stored values have zero Bellman residual", "[vi]") {
    Scenario s = toy_scenario(12, HvacMode::Cooling, 0.95);
    TransitionModel model(s, desk_params());
    const ValueTable table = vi::build_table(model);
    const StateGrid& grid = model.grid();
    for (int k = 0; k < s.horizon_hours; ++k)
        for (int st = 0; st < grid.n_states(); ++st) {
            double best = 0.0;
            for (int a = 0; a < 2; ++a) {
                const StepOutcome o = model.primitive(k, st, a);
                const double v = o.cost.weighted + table.values[k + 1][grid.value_slot(o.successor)];
                if (a == 0 || v < best) best = v;
            }
            CHECK(table.values[k][st] == best); // identical evaluation path, exact match
        }
}

TEST_CASE("out-of-band start is rejected", "[vi]") {
    Scenario s = toy_scenario(4, HvacMode::Cooling, 0.5);
    TransitionModel model(s, desk_params());
    CHECK_THROWS_AS(solve_value_iteration(model, 27.0), std::invalid_argument);
}

TEST_CASE("value table is identical for any thread count", "[vi]") {
    Scenario s = toy_scenario(12, HvacMode::Heating, 0.5);
    TransitionModel model(s, desk_params());
    const ValueTable one = vi::build_table(model, 1);
    const ValueTable four = vi::build_table(model, 4);
    REQUIRE(one.values.size() == four.values.size());
    for (std::size_t k = 0; k < one.values.size(); ++k)
        for (std::size_t i = 0; i < one.values[k].size(); ++i)
            CHECK(one.values[k][i] == four.values[k][i]);
}
