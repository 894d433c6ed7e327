#pragma once

// =============================================================================
// Two-node RC thermal model of a PCM building
// =============================================================================
// Nodes: indoor air temperature T_in and envelope/PCM surface temperature T_e.
//
//   dT_e/dt  = [ (T_in - T_e)/R_in + (T_out - T_e)/R_out ] / (C_e + C_pcm(T_e))
//   dT_in/dt = [ (T_out - T_in)/R_dw + (T_e - T_in)/R_in
//                + Q_hvac + Q_inf ] / (m_a c_a)
//
// C_pcm(T_e) = pcm mass * c_pcm(T_e), with c_pcm the two-branch specific-heat
// characteristic of the phase change material (exponential approach below the
// melting point, Gaussian decay above it). The branch join at the melting
// point is only C0, so the curve is smoothed before it enters the ODEs.
//
//   Q_hvac = +/- cop * rated_electrical * fraction   (sign by heating/cooling)
//   Q_inf  = ach * volume * rho_air * c_air * (T_out - T_in) / 3600
// =============================================================================

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hemdp/errors.hpp"

namespace hemdp {

enum class HvacMode { Heating, Cooling };

inline constexpr double kAirDensityKgPerM3 = 1.2;
inline constexpr double kAirSpecificHeatJPerKgK = 1005.0;

struct PcmSmoothing {
    enum class Kind { BlendWindow, PolyFit };

    Kind kind = Kind::BlendWindow;
    // BlendWindow: C1 cosine blend of the two branches over melting point +/- half_width.
    double blend_half_width_c = 0.05;
    // PolyFit: least-squares polynomial replacing the curve inside [fit_low, fit_high].
    int polyfit_degree = 10;
    double fit_low_c = 15.0;
    double fit_high_c = 35.0;
};

struct PcmCurveParams {
    double melting_point_c = 25.1;
    double base_solid = 1200.0;   // J/(kg K)
    double amp_solid = 18800.0;   // J/(kg K)
    double solid_decay_c = 1.5;   // deg C
    double base_liquid = 1300.0;  // J/(kg K)
    double amp_liquid = 18700.0;  // J/(kg K)
    double liquid_width = 4.0;    // 1/(deg C)^2
    PcmSmoothing smoothing{};
};

// Validated, evaluation-ready PCM specific-heat curve. For PolyFit smoothing
// the least-squares fit is performed once at construction (Chebyshev basis on
// the scaled fit interval) and the fitted curve is checked to stay strictly
// positive; parameter sets that fit to a non-positive curve are rejected.
class PcmCurve {
public:
    explicit PcmCurve(const PcmCurveParams& params) : p_(params) {
        if (!std::isfinite(p_.melting_point_c))
            throw ValidationError("melting_point_c", "must be finite");
        if (!(p_.amp_solid > 0.0)) throw ValidationError("amp_solid", "must be > 0");
        if (!(p_.amp_liquid > 0.0)) throw ValidationError("amp_liquid", "must be > 0");
        if (!(p_.solid_decay_c > 0.0)) throw ValidationError("solid_decay_c", "must be > 0");
        if (!(p_.base_solid > 0.0)) throw ValidationError("base_solid", "must be > 0");
        if (!(p_.base_liquid > 0.0)) throw ValidationError("base_liquid", "must be > 0");
        if (!(p_.liquid_width > 0.0)) throw ValidationError("liquid_width", "must be > 0");
        if (p_.smoothing.kind == PcmSmoothing::Kind::BlendWindow) {
            if (!(p_.smoothing.blend_half_width_c >= 0.0))
                throw ValidationError("blend_half_width_c", "must be >= 0");
        } else {
            fit_polynomial();
        }
    }

    const PcmCurveParams& params() const { return p_; }

    // Smoothed specific heat in J/(kg K); equals the raw branch formula outside
    // the smoothing window. Throws on non-finite input.
    double specific_heat(double t_c) const {
        if (!std::isfinite(t_c)) throw std::invalid_argument("specific_heat: non-finite temperature");
        return specific_heat_unchecked(t_c);
    }

    // No finiteness check; NaN propagates. Used inside the ODE integrator so
    // that instability is reported by the integrator, with its substep index.
    double specific_heat_unchecked(double t_c) const {
        if (p_.smoothing.kind == PcmSmoothing::Kind::PolyFit) {
            if (t_c < p_.smoothing.fit_low_c || t_c > p_.smoothing.fit_high_c) return branch(t_c);
            return eval_chebyshev(t_c);
        }
        const double h = p_.smoothing.blend_half_width_c;
        const double tp = p_.melting_point_c;
        if (h <= 0.0 || t_c <= tp - h || t_c >= tp + h) return branch(t_c);
        // C1 join: weight has zero slope at both window edges.
        const double s = (t_c - (tp - h)) / (2.0 * h);
        const double w = 0.5 * (1.0 - std::cos(M_PI * s));
        return (1.0 - w) * solid_branch(t_c) + w * liquid_branch(t_c);
    }

    double operator()(double t_c) const { return specific_heat(t_c); }

    double solid_branch(double t_c) const {
        return p_.base_solid + p_.amp_solid * std::exp(-(p_.melting_point_c - t_c) / p_.solid_decay_c);
    }

    double liquid_branch(double t_c) const {
        const double d = p_.melting_point_c - t_c;
        return p_.base_liquid + p_.amp_liquid * std::exp(-p_.liquid_width * d * d);
    }

    double branch(double t_c) const {
        return t_c < p_.melting_point_c ? solid_branch(t_c) : liquid_branch(t_c);
    }

private:
    void fit_polynomial() {
        const auto& s = p_.smoothing;
        if (s.polyfit_degree < 1) throw ValidationError("polyfit_degree", "must be >= 1");
        if (!(s.fit_high_c > s.fit_low_c))
            throw ValidationError("fit_range_c", "fit_high must exceed fit_low");
        const int n = s.polyfit_degree + 1;
        const int samples = std::max(64 * n, 2048);
        // Normal equations in the Chebyshev basis on u in [-1, 1]; with dense
        // uniform sampling the Gram matrix is well conditioned at these degrees.
        std::vector<double> gram(static_cast<std::size_t>(n) * n, 0.0);
        std::vector<double> rhs(n, 0.0);
        std::vector<double> basis(n);
        for (int i = 0; i < samples; ++i) {
            const double u = -1.0 + 2.0 * i / (samples - 1);
            const double t = s.fit_low_c + 0.5 * (u + 1.0) * (s.fit_high_c - s.fit_low_c);
            chebyshev_basis(u, basis);
            const double y = branch(t);
            for (int a = 0; a < n; ++a) {
                rhs[a] += basis[a] * y;
                for (int b = 0; b <= a; ++b) gram[a * n + b] += basis[a] * basis[b];
            }
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) gram[a * n + b] = gram[b * n + a];
        coeffs_ = solve_spd(gram, rhs, n);

        // Invariant: the evaluated curve must stay strictly positive.
        double min_val = eval_chebyshev(s.fit_low_c);
        for (int i = 1; i <= 4096; ++i) {
            const double t = s.fit_low_c + (s.fit_high_c - s.fit_low_c) * i / 4096.0;
            min_val = std::min(min_val, eval_chebyshev(t));
        }
        if (!(min_val > 0.0))
            throw ValidationError("smoothing",
                                  "polynomial fit dips to " + std::to_string(min_val) +
                                      " J/(kg K); raise the degree or narrow the fit range");
    }

    static void chebyshev_basis(double u, std::vector<double>& out) {
        out[0] = 1.0;
        if (out.size() > 1) out[1] = u;
        for (std::size_t i = 2; i < out.size(); ++i) out[i] = 2.0 * u * out[i - 1] - out[i - 2];
    }

    double eval_chebyshev(double t_c) const {
        const auto& s = p_.smoothing;
        const double u = (2.0 * t_c - s.fit_low_c - s.fit_high_c) / (s.fit_high_c - s.fit_low_c);
        // Clenshaw recurrence.
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t i = coeffs_.size(); i-- > 1;) {
            const double b0 = 2.0 * u * b1 - b2 + coeffs_[i];
            b2 = b1;
            b1 = b0;
        }
        return u * b1 - b2 + coeffs_[0];
    }

    static std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, int n) {
        // Gaussian elimination with partial pivoting; n <= ~20.
        for (int col = 0; col < n; ++col) {
            int piv = col;
            for (int r = col + 1; r < n; ++r)
                if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
            if (std::fabs(a[piv * n + col]) < 1e-300)
                throw ValidationError("polyfit_degree", "singular least-squares system");
            if (piv != col) {
                for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
                std::swap(b[piv], b[col]);
            }
            for (int r = col + 1; r < n; ++r) {
                const double f = a[r * n + col] / a[col * n + col];
                if (f == 0.0) continue;
                for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
                b[r] -= f * b[col];
            }
        }
        std::vector<double> x(n);
        for (int r = n - 1; r >= 0; --r) {
            double acc = b[r];
            for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
            x[r] = acc / a[r * n + r];
        }
        return x;
    }

    PcmCurveParams p_;
    std::vector<double> coeffs_; // Chebyshev coefficients when PolyFit
};

// Defaults describe a single-zone 48 m^2 lightweight house with a PCM layer
// under the plasterboard. The interior-surface coupling (r_in) is the full
// wall/roof film conductance, so one full-power hour moves the air node a few
// degrees rather than running away from the envelope.
struct BuildingThermalParams {
    double r_dw_k_per_w = 0.08;          // doors/windows path (12.5 W/K)
    double r_in_k_per_w = 2.0e-4;        // interior surfaces to indoor air (5000 W/K)
    double r_out_k_per_w = 0.025;        // envelope node to ambient (40 W/K)
    double c_envelope_j_per_k = 4.0e6;   // C_e
    double c_pcm_mass_kg = 1800.0;       // mass carrying the PCM specific heat
    double air_heat_capacity_j_per_k = 5.0e5; // m_a c_a, air plus light furnishings
    // Sized near three times the design-day load; one full-power hour then
    // moves the zone by roughly 1.5 degrees, so hourly schedules can hold the
    // band and a single on-hour outweighs a night's free drift.
    double hvac_rated_electrical_kw = 1.0;
    double hvac_cop = 3.0;
    double infiltration_ach = 0.2;
    double zone_volume_m3 = 129.6;
    PcmCurveParams pcm{};

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be > 0 and finite");
        };
        positive(r_dw_k_per_w, "r_dw_k_per_w");
        positive(r_in_k_per_w, "r_in_k_per_w");
        positive(r_out_k_per_w, "r_out_k_per_w");
        positive(c_envelope_j_per_k, "c_envelope_j_per_k");
        positive(air_heat_capacity_j_per_k, "air_heat_capacity_j_per_k");
        positive(hvac_rated_electrical_kw, "hvac_rated_electrical_kw");
        positive(hvac_cop, "hvac_cop");
        positive(zone_volume_m3, "zone_volume_m3");
        if (!(infiltration_ach >= 0.0) || !std::isfinite(infiltration_ach))
            throw ValidationError("infiltration_ach", "must be >= 0 and finite");
        if (!(c_pcm_mass_kg >= 0.0) || !std::isfinite(c_pcm_mass_kg))
            throw ValidationError("c_pcm_mass_kg", "must be >= 0 and finite");
    }
};

struct ThermalState {
    double t_in_c = 0.0;
    double t_e_c = 0.0;
};

// Validated building parameters plus the prepared PCM curve.
class ThermalModel {
public:
    explicit ThermalModel(const BuildingThermalParams& params)
        : p_(params), curve_(params.pcm) {
        p_.validate();
    }

    const BuildingThermalParams& params() const { return p_; }
    const PcmCurve& pcm_curve() const { return curve_; }

    // Integrates the coupled ODEs over slot_hours with a fixed-step classical
    // RK4 scheme, re-evaluating the PCM capacitance at every stage evaluation.
    // Deterministic for fixed inputs.
    ThermalState step(ThermalState state, double t_out_c, double hvac_fraction, HvacMode mode,
                      double slot_hours, int substeps) const {
        if (!(hvac_fraction >= 0.0 && hvac_fraction <= 1.0))
            throw std::invalid_argument("step: hvac_fraction must be in [0, 1]");
        if (substeps < 1) throw std::invalid_argument("step: substeps must be >= 1");
        if (!(slot_hours > 0.0)) throw std::invalid_argument("step: slot_hours must be > 0");

        const double q_hvac_w = (mode == HvacMode::Heating ? 1.0 : -1.0) * p_.hvac_cop *
                                p_.hvac_rated_electrical_kw * 1000.0 * hvac_fraction;
        const double inf_w_per_k = p_.infiltration_ach * p_.zone_volume_m3 * kAirDensityKgPerM3 *
                                   kAirSpecificHeatJPerKgK / 3600.0;
        const double dt = slot_hours * 3600.0 / substeps;

        double t_in = state.t_in_c;
        double t_e = state.t_e_c;
        for (int i = 0; i < substeps; ++i) {
            double k1i, k1e, k2i, k2e, k3i, k3e, k4i, k4e;
            derivatives(t_in, t_e, t_out_c, q_hvac_w, inf_w_per_k, k1i, k1e);
            derivatives(t_in + 0.5 * dt * k1i, t_e + 0.5 * dt * k1e, t_out_c, q_hvac_w, inf_w_per_k, k2i, k2e);
            derivatives(t_in + 0.5 * dt * k2i, t_e + 0.5 * dt * k2e, t_out_c, q_hvac_w, inf_w_per_k, k3i, k3e);
            derivatives(t_in + dt * k3i, t_e + dt * k3e, t_out_c, q_hvac_w, inf_w_per_k, k4i, k4e);
            t_in += dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
            t_e += dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
            if (!std::isfinite(t_in) || !std::isfinite(t_e)) throw NumericInstabilityError(i);
        }
        return {t_in, t_e};
    }

private:
    void derivatives(double t_in, double t_e, double t_out, double q_hvac_w, double inf_w_per_k,
                     double& d_t_in, double& d_t_e) const {
        const double c_pcm = p_.c_pcm_mass_kg * curve_.specific_heat_unchecked(t_e);
        d_t_e = ((t_in - t_e) / p_.r_in_k_per_w + (t_out - t_e) / p_.r_out_k_per_w) /
                (p_.c_envelope_j_per_k + c_pcm);
        const double q_inf_w = inf_w_per_k * (t_out - t_in);
        d_t_in = ((t_out - t_in) / p_.r_dw_k_per_w + (t_e - t_in) / p_.r_in_k_per_w + q_hvac_w +
                  q_inf_w) /
                 p_.air_heat_capacity_j_per_k;
    }

    BuildingThermalParams p_;
    PcmCurve curve_;
};

// Free-function form of the one-slot integration.
inline ThermalState step_dynamics(const BuildingThermalParams& params, ThermalState state,
                                  double t_out_c, double hvac_fraction, HvacMode mode,
                                  double slot_hours, int substeps) {
    return ThermalModel(params).step(state, t_out_c, hvac_fraction, mode, slot_hours, substeps);
}

} // namespace hemdp
