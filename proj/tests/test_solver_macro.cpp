#include <catch2/catch_amalgamated.hpp>

#include <bit>

#include "hemdp/solver_blocks.hpp"
#include "hemdp/solver_macro.hpp"
#include "test_support.hpp"

using namespace hemdp;
using namespace hemdp_test;

namespace {

int fraction_index(const Scenario& s, double phi) {
    for (std::size_t i = 0; i < s.macro_fractions.size(); ++i)
        if (s.macro_fractions[i] == phi) return static_cast<int>(i);
    throw std::logic_error("fraction not in scenario");
}

} // namespace

TEST_CASE("endpoint fractions reproduce primitive composition exactly", "[macro]") {
    Scenario s = toy_scenario(8, HvacMode::Cooling, 0.95, 0.5, 4);
    TransitionModel model(s, desk_params());
    for (const int phi_a : {0, 1}) {
        for (int st = 0; st < model.grid().n_states(); ++st) {
            const macro::MacroOutcome m =
                macro::macro_transition(model, 0, st, fraction_index(s, phi_a));
            // Compose the primitive steps by hand.
            StageCost total;
            int state = st;
            ThermalState end{};
            bool absorbed = false;
            for (int j = 0; j < 4 && !absorbed; ++j) {
                const StepOutcome o = model.primitive(j, state, phi_a);
                total.electricity_cents += o.cost.electricity_cents;
                total.discomfort_c += o.cost.discomfort_c;
                total.weighted += o.cost.weighted;
                end = {o.t_in_end_c, o.t_e_end_c};
                if (o.successor == StateGrid::kOutOfBand) absorbed = true;
                else state = o.successor;
            }
            CHECK(m.total.weighted == total.weighted);
            CHECK(m.total.electricity_cents == total.electricity_cents);
            CHECK(m.end_state.t_in_c == end.t_in_c);
            CHECK(m.absorbed == absorbed);
        }
    }
}

TEST_CASE("half power on a flat tariff costs exactly half of full power", "[macro]") {
    Scenario s = toy_scenario(4, HvacMode::Heating, 0.95, 0.5, 2);
    s.tariff = Tariff({{0, 24, 30.0}});
    TransitionModel model(s, desk_params());

    // Hour-level linearity of the tariff term, across the whole grid.
    for (int k = 0; k < s.horizon_hours; ++k)
        for (int st = 0; st < model.grid().n_states(); ++st)
            CHECK(model.at_fraction(k, st, fraction_index(s, 0.5)).cost.electricity_cents ==
                  0.5 * model.at_fraction(k, st, fraction_index(s, 1.0)).cost.electricity_cents);

    // Block-level aggregate on a window short enough that neither candidate
    // leaves the band.
    const int st = model.grid().discretize(20.0);
    const macro::MacroOutcome half = macro::macro_transition(model, 0, st, fraction_index(s, 0.5));
    const macro::MacroOutcome full = macro::macro_transition(model, 0, st, fraction_index(s, 1.0));
    REQUIRE_FALSE(half.absorbed);
    REQUIRE_FALSE(full.absorbed);
    CHECK(half.total.electricity_cents == 0.5 * full.total.electricity_cents);
}

TEST_CASE("expansion of the endpoint fractions is unique", "[macro]") {
    Scenario s = toy_scenario(8, HvacMode::Cooling, 0.95, 0.5, 4);
    TransitionModel model(s, desk_params());
    const auto boundary = terminal_values(s);
    const int st = model.grid().discretize(23.0);
    CHECK(macro::expand_macro(model, 0, st, 0.0, boundary) == 0u);
    CHECK(macro::expand_macro(model, 0, st, 1.0, boundary) == 0b1111u);
}

TEST_CASE("quarter-power expansion picks the cheapest on-hour placement", "[macro]") {
    // Negligible HVAC thermal output and a tariff peak in the block's first
    // hour: the four single-on sequences tie thermally, so the expansion must
    // avoid the peak hour and, among the equal off-peak hours, keep the
    // lexicographically smallest sequence.
    Scenario s = toy_scenario(4, HvacMode::Cooling, 1.0, 0.5, 4);
    s.weather_c.assign(s.horizon_hours + 1, 23.0);
    s.tariff = Tariff({{0, 1, 90.0}, {1, 24, 10.0}});
    BuildingThermalParams p = desk_params();
    p.hvac_cop = 1e-9;
    TransitionModel model(s, p);
    const auto boundary = terminal_values(s);
    const std::uint32_t seq =
        macro::expand_macro(model, 0, model.grid().discretize(23.0), 0.25, boundary);
    CHECK(std::popcount(seq) == 1);
    CHECK(seq == 0b0001u);
}

TEST_CASE("fractions that split hours are rejected", "[macro]") {
    Scenario s = toy_scenario(8, HvacMode::Cooling, 0.5, 0.5, 4);
    s.macro_fractions = {0.0, 0.3, 1.0};
    TransitionModel model(s, desk_params());
    CHECK_THROWS_AS(solve_macro(model, 23.0), std::invalid_argument);
    CHECK_THROWS_AS(macro::on_hours_of_fraction(0.3, 4), std::invalid_argument);
}

TEST_CASE("every expansion carries exactly phi * L on-hours", "[macro]") {
    Scenario s = seasonal_scenario(Season::Summer, 24, 0.95);
    TransitionModel model(s, desk_params());
    const MacroTables tables = build_macro_tables(model);
    for (int m = 0; m < s.block_count(); ++m)
        for (int st = 0; st < model.grid().n_states(); st += 10) {
            const int f = tables.tables[m].entries[st].fraction_index;
            const std::uint32_t seq =
                macro::expand_macro(model, m, st, s.macro_fractions[f], tables.boundaries[m]);
            CHECK(std::popcount(seq) ==
                  macro::on_hours_of_fraction(s.macro_fractions[f], s.block_length));
        }
}

TEST_CASE("macro schedules never beat the block solver", "[macro]") {
    for (const Season season : {Season::Summer, Season::Winter}) {
        for (const double lambda : {0.05, 0.95}) {
            Scenario s = seasonal_scenario(season, 24, lambda);
            TransitionModel model(s, desk_params());
            const BlocksSolution blk = solve_blocks(model, 23.0);
            const MacroSolution mac = solve_macro(model, 23.0);
            INFO(season_name(season) << " lambda " << lambda);
            CHECK(mac.trace.total_weighted() >=
                  blk.trace.total_weighted() * (1.0 - 1e-12) - 1e-12);
        }
    }
}

TEST_CASE("on/off-only macro set equals the block-constant brute force", "[macro]") {
    Scenario s = toy_scenario(8, HvacMode::Cooling, 0.95, 0.5, 4);
    s.macro_fractions = {0.0, 1.0};
    TransitionModel model(s, desk_params());
    const MacroSolution mac = solve_macro(model, 23.0);
    const BruteResult oracle = block_constant_brute_force(model, 23.0);
    CHECK(mac.trace.total_weighted() == Catch::Approx(oracle.cost).epsilon(1e-9));
    CHECK(trace_actions(mac.trace) == oracle.actions);
}

TEST_CASE("the macro gap is one-sided and closes when the optimum is block-constant", "[macro]") {
    Scenario s = toy_scenario(8, HvacMode::Cooling, 0.5, 0.5, 4);
    TransitionModel model(s, desk_params());
    const double full = solve_macro(model, 23.0).trace.total_weighted();
    const double optimum = solve_blocks(model, 23.0).trace.total_weighted();
    CHECK(full - optimum >= -1e-12);

    // Zero tariff at lambda = 1: every policy costs zero, the optimum is
    // trivially block-constant and the gap vanishes.
    Scenario free = toy_scenario(8, HvacMode::Cooling, 1.0, 0.5, 4);
    free.tariff = Tariff({{0, 24, 0.0}});
    TransitionModel free_model(free, desk_params());
    CHECK(solve_macro(free_model, 23.0).trace.total_weighted() == 0.0);
    CHECK(solve_blocks(free_model, 23.0).trace.total_weighted() == 0.0);
}
