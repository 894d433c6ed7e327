#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hemdp/pcm_thermal.hpp"

using namespace hemdp;
using Catch::Approx;

TEST_CASE("specific heat hits the 20000 peak at the melting point", "[pcm]") {
    PcmCurve curve{PcmCurveParams{}};
    CHECK(curve.specific_heat(25.1) == 20000.0);
}

TEST_CASE("specific heat matches the branch formulas outside the blend window", "[pcm]") {
    PcmCurve curve{PcmCurveParams{}};
    CHECK(curve.specific_heat(26.1) ==
          Approx(1300.0 + 18700.0 * std::exp(-4.0 * 1.0)).margin(1e-9));
    CHECK(curve.specific_heat(10.0) ==
          Approx(1200.0 + 18800.0 * std::exp(-(25.1 - 10.0) / 1.5)).margin(1e-9));
    // Window edges are exact branch values.
    CHECK(curve.specific_heat(25.1 - 0.05) == curve.solid_branch(25.1 - 0.05));
    CHECK(curve.specific_heat(25.1 + 0.05) == curve.liquid_branch(25.1 + 0.05));
}

TEST_CASE("blend keeps the curve continuous at the melting point", "[pcm]") {
    PcmCurve curve{PcmCurveParams{}};
    const double below = curve.specific_heat(25.1 - 1e-6);
    const double above = curve.specific_heat(25.1 + 1e-6);
    CHECK(std::fabs(below - above) <= 1.0);
}

TEST_CASE("specific heat rejects non-finite input", "[pcm]") {
    PcmCurve curve{PcmCurveParams{}};
    CHECK_THROWS_AS(curve.specific_heat(std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS(curve.specific_heat(INFINITY), std::invalid_argument);
}

TEST_CASE("curve parameter invariants are enforced", "[pcm]") {
    PcmCurveParams p;
    p.amp_solid = 0.0;
    CHECK_THROWS_AS(PcmCurve{p}, ValidationError);
    p = PcmCurveParams{};
    p.solid_decay_c = -1.0;
    CHECK_THROWS_AS(PcmCurve{p}, ValidationError);
}

TEST_CASE("polynomial smoothing stays positive on a narrow range and exact outside", "[pcm]") {
    PcmCurveParams p;
    p.smoothing.kind = PcmSmoothing::Kind::PolyFit;
    p.smoothing.fit_low_c = 20.0;
    p.smoothing.fit_high_c = 26.0;
    PcmCurve curve{p};
    for (int i = 0; i <= 600; ++i) {
        const double t = 20.0 + 6.0 * i / 600.0;
        CHECK(curve.specific_heat(t) > 0.0);
    }
    CHECK(curve.specific_heat(19.0) == curve.solid_branch(19.0));
    CHECK(curve.specific_heat(27.0) == curve.liquid_branch(27.0));
}

TEST_CASE("wide low-degree polynomial fits are rejected as non-positive", "[pcm]") {
    // Degree 10 over [15, 35] undershoots below zero near the peak; the
    // constructor must refuse it rather than hand out a negative heat capacity.
    PcmCurveParams p;
    p.smoothing.kind = PcmSmoothing::Kind::PolyFit;
    CHECK_THROWS_AS(PcmCurve{p}, ValidationError);
}

TEST_CASE("equilibrium is an exact fixed point", "[pcm]") {
    ThermalModel model{BuildingThermalParams{}};
    const ThermalState out = model.step({22.0, 22.0}, 22.0, 0.0, HvacMode::Cooling, 1.0, 60);
    CHECK(out.t_in_c == 22.0);
    CHECK(out.t_e_c == 22.0);
}

TEST_CASE("free-running building cools toward a lower ambient", "[pcm]") {
    ThermalModel model{BuildingThermalParams{}};
    const ThermalState out = model.step({24.0, 24.0}, 15.0, 0.0, HvacMode::Heating, 1.0, 60);
    CHECK(out.t_in_c < 24.0);
}

TEST_CASE("60 substeps agree with the 3600-substep reference within 1e-3", "[pcm]") {
    ThermalModel model{BuildingThermalParams{}};
    const ThermalState coarse = model.step({21.0, 21.0}, 7.0, 1.0, HvacMode::Heating, 1.0, 60);
    const ThermalState fine = model.step({21.0, 21.0}, 7.0, 1.0, HvacMode::Heating, 1.0, 3600);
    CHECK(std::fabs(coarse.t_in_c - fine.t_in_c) <= 1e-3);
    CHECK(std::fabs(coarse.t_e_c - fine.t_e_c) <= 1e-3);
}

TEST_CASE("halving the substep size cuts the error at least 8x", "[pcm]") {
    ThermalModel model{BuildingThermalParams{}};
    const auto run = [&](int n) {
        return model.step({21.0, 21.0}, 7.0, 1.0, HvacMode::Heating, 1.0, n).t_in_c;
    };
    const double reference = run(3600);
    const double e40 = std::fabs(run(40) - reference);
    const double e80 = std::fabs(run(80) - reference);
    const double e160 = std::fabs(run(160) - reference);
    REQUIRE(e80 > 0.0);
    REQUIRE(e160 > 0.0);
    CHECK(e40 / e80 >= 8.0);
    CHECK(e80 / e160 >= 8.0);
}

TEST_CASE("free-running convergence to ambient within 500 slots", "[pcm]") {
    // Randomized building-scale parameters; the slowest admissible envelope
    // time constant still settles to within 0.01 C of ambient in 500 hours.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> r_in(3e-4, 2e-3), r_out(0.008, 0.02),
        r_dw(0.02, 0.08), c_env(1e6, 6e6), c_air(2e5, 8e5), mass(0.0, 800.0),
        hot(28.0, 36.0), cold(2.0, 12.0);
    for (int draw = 0; draw < 15; ++draw) {
        BuildingThermalParams p;
        p.r_in_k_per_w = r_in(rng);
        p.r_out_k_per_w = r_out(rng);
        p.r_dw_k_per_w = r_dw(rng);
        p.c_envelope_j_per_k = c_env(rng);
        p.air_heat_capacity_j_per_k = c_air(rng);
        p.c_pcm_mass_kg = mass(rng);
        ThermalModel model{p};
        // Ambient targets sit outside the melt zone so the slow latent
        // plateau is crossed, not parked on.
        const double t_out = draw % 2 ? hot(rng) : cold(rng);
        ThermalState s{20.0, 20.0};
        bool settled = false;
        for (int slot = 0; slot < 500; ++slot) {
            s = model.step(s, t_out, 0.0, HvacMode::Cooling, 1.0, 60);
            if (std::max(std::fabs(s.t_in_c - t_out), std::fabs(s.t_e_c - t_out)) < 0.01) {
                settled = true;
                break;
            }
        }
        INFO("draw " << draw << " ambient " << t_out);
        CHECK(settled);
    }
}

TEST_CASE("PCM mass damps the indoor swing under a daily cycle", "[pcm]") {
    BuildingThermalParams with_pcm;
    BuildingThermalParams without_pcm;
    without_pcm.c_pcm_mass_kg = 0.0;
    ThermalModel m1{with_pcm}, m0{without_pcm};
    const auto swing = [](ThermalModel& m) {
        ThermalState s{24.0, 24.0};
        double lo = 1e9, hi = -1e9;
        for (int h = 0; h < 96; ++h) {
            const double t_out = 24.0 + 6.0 * std::sin(2.0 * M_PI * (h % 24 - 10) / 24.0);
            s = m.step(s, t_out, 0.0, HvacMode::Cooling, 1.0, 60);
            if (h >= 48) { // measure once the start transient has washed out
                lo = std::min(lo, s.t_in_c);
                hi = std::max(hi, s.t_in_c);
            }
        }
        return hi - lo;
    };
    CHECK(swing(m1) < swing(m0));
}

TEST_CASE("integration surfaces instability with the substep index", "[pcm]") {
    BuildingThermalParams p;
    p.air_heat_capacity_j_per_k = 1.0; // absurdly stiff air node
    ThermalModel model{p};
    try {
        model.step({20.0, 20.0}, -40.0, 0.0, HvacMode::Heating, 1.0, 32);
        FAIL("expected NumericInstabilityError");
    } catch (const NumericInstabilityError& e) {
        CHECK(e.substep() >= 0);
        CHECK(e.substep() < 32);
    }
}

TEST_CASE("step preconditions are enforced", "[pcm]") {
    ThermalModel model{BuildingThermalParams{}};
    CHECK_THROWS_AS(model.step({22, 22}, 22.0, 1.5, HvacMode::Cooling, 1.0, 60),
                    std::invalid_argument);
    CHECK_THROWS_AS(model.step({22, 22}, 22.0, 0.5, HvacMode::Cooling, 1.0, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(model.step({22, 22}, 22.0, 0.5, HvacMode::Cooling, -1.0, 60),
                    std::invalid_argument);
}

TEST_CASE("building parameter validation names the offending field", "[pcm]") {
    BuildingThermalParams p;
    p.r_in_k_per_w = -0.1;
    try {
        ThermalModel model{p};
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == std::string("r_in_k_per_w"));
    }
}
