#pragma once

#include <cmath>

#include "casim/errors.hpp"

namespace casim::sorption {

/// Generalized correlations fitted to the moving-plane numerical experiments.
/// All inputs are SI (m, s, mol/m^3, Pa); the fitted constants are
/// dimensional. Outside the fitted parameter window the value is still
/// computed but flagged as extrapolated.
struct CorrelationValue {
    double value = 0.0;
    bool extrapolated = false;
};

namespace fitted_range {
inline constexpr double kDiffusionLo = 0.04e-9; // [m^2/s]
inline constexpr double kDiffusionHi = 5.73e-9; // [m^2/s]
inline constexpr double kPressureLo = 0.9e3;    // [Pa]
inline constexpr double kPressureHi = 1.3e3;    // [Pa]
inline constexpr double kSolubilityCap = 2.371; // upper bound on C_B H / P

inline bool diffusion_ok(double d) { return d >= kDiffusionLo && d <= kDiffusionHi; }
inline bool pressure_ok(double p) { return p >= kPressureLo && p <= kPressureHi; }
} // namespace fitted_range

/// t_p = 13.6 (1 + 0.018 C_B H / P)^0.786 (D_A/D_B)^-3.44   [s]
inline CorrelationValue correlation_tp(double c_b, double henry, double pressure,
                                       double d_a, double d_b)
{
    if (!(pressure > 0.0)) throw domain_error("correlation_tp: P must be > 0");
    if (!(d_b > 0.0)) throw domain_error("correlation_tp: D_B must be > 0");
    CorrelationValue r;
    r.value = 13.6 * std::pow(1.0 + 0.018 * c_b * henry / pressure, 0.786) *
              std::pow(d_a / d_b, -3.44);
    r.extrapolated = !fitted_range::diffusion_ok(d_a) || !fitted_range::diffusion_ok(d_b) ||
                     !fitted_range::pressure_ok(pressure);
    return r;
}

/// h_p = 7.72e-5 (1 + D_E/D_B)^-0.18 (D_A/D_B)^0.781   [m]
inline CorrelationValue correlation_hp(double d_e, double d_b, double d_a)
{
    if (!(d_b > 0.0)) throw domain_error("correlation_hp: D_B must be > 0");
    CorrelationValue r;
    r.value = 7.72e-5 * std::pow(1.0 + d_e / d_b, -0.18) * std::pow(d_a / d_b, 0.781);
    r.extrapolated = !fitted_range::diffusion_ok(d_a) || !fitted_range::diffusion_ok(d_b) ||
                     !fitted_range::diffusion_ok(d_e);
    return r;
}

/// C_AS / C_B = (2.371 - C_B H / P)^0.802 (t/t_p)^0.408   [-]
inline CorrelationValue correlation_surface_a(double c_b, double henry, double pressure,
                                              double t, double t_p)
{
    if (!(pressure > 0.0)) throw domain_error("correlation_surface_a: P must be > 0");
    if (t < 0.0) throw domain_error("correlation_surface_a: t must be >= 0");
    if (!(t_p > 0.0)) throw domain_error("correlation_surface_a: t_p must be > 0");
    const double group = c_b * henry / pressure;
    if (group >= fitted_range::kSolubilityCap)
        throw correlation_range_error("correlation_surface_a: C_B H / P >= 2.371 is outside the correlation range");
    CorrelationValue r;
    r.value = std::pow(fitted_range::kSolubilityCap - group, 0.802) * std::pow(t / t_p, 0.408);
    r.extrapolated = !fitted_range::pressure_ok(pressure);
    return r;
}

/// C_Efr / C_Efr(0) = exp[-(D_E/D_A)^0.45 (t/t_p)^0.652]   [-]
inline CorrelationValue correlation_product_decay(double d_e, double d_a, double t, double t_p)
{
    if (!(d_a > 0.0)) throw domain_error("correlation_product_decay: D_A must be > 0");
    if (!(t_p > 0.0)) throw domain_error("correlation_product_decay: t_p must be > 0");
    if (t < 0.0) throw domain_error("correlation_product_decay: t must be >= 0");
    CorrelationValue r;
    r.value = std::exp(-std::pow(d_e / d_a, 0.45) * std::pow(t / t_p, 0.652));
    r.extrapolated = !fitted_range::diffusion_ok(d_a) || !fitted_range::diffusion_ok(d_e);
    return r;
}

/// alpha_l = alpha [2.451 (P/C_B)(2.371 - C_B H/P)^-0.802 - H]   [m/s]
inline CorrelationValue correlation_liquid_mtc(double alpha, double pressure, double c_b,
                                               double henry)
{
    if (!(c_b > 0.0)) throw domain_error("correlation_liquid_mtc: C_B must be > 0");
    if (!(pressure > 0.0)) throw domain_error("correlation_liquid_mtc: P must be > 0");
    const double group = c_b * henry / pressure;
    if (group >= fitted_range::kSolubilityCap)
        throw correlation_range_error("correlation_liquid_mtc: C_B H / P >= 2.371 is outside the correlation range");
    CorrelationValue r;
    r.value = alpha * (2.451 * (pressure / c_b) *
                           std::pow(fitted_range::kSolubilityCap - group, -0.802) -
                       henry);
    if (r.value < 0.0)
        throw correlation_range_error("correlation_liquid_mtc: negative coefficient, input outside correlation range");
    r.extrapolated = !fitted_range::pressure_ok(pressure);
    return r;
}

} // namespace casim::sorption
