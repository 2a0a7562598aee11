#pragma once

#include <cmath>
#include <string>

#include "casim/errors.hpp"

namespace casim::scale {

/// Inputs of the two-zone large-scale-effect model.
struct ScaleEffectParams {
    double k_ms = 0.0;       // average mass transfer coefficient in the spreading zone [m/s]
    double k_m = 0.0;        // empirical coefficient outside the spreading zone [m/s]
    double source_flow = 0.0;    // I, per-source flow [m^3/s]
    double unit_radius = 0.0;    // a [m]
    double source_step = 0.0;    // d0, step between point sources [m]
    double gas_flow = 0.0;       // G, continuous-phase flow rate [m^3/s]
    double cross_section = 0.0;  // F [m^2]
    double k_bar = 0.0;          // volumetric mass transfer coefficient [1/s]
    double height = 0.0;         // H, apparatus height [m]
    double spreading_height = 0.0; // H_s [m]
    double absorption_factor = 0.0; // lambda [-]
    double htu_uniform = 0.0;    // h~* [m]

    void validate() const
    {
        if (!(k_m > 0.0)) throw validation_error("ScaleEffectParams: k_m must be > 0");
        if (!(spreading_height > 0.0) || !(height >= spreading_height))
            throw validation_error("ScaleEffectParams: need 0 < H_s <= H");
        if (!(absorption_factor > 0.0)) throw validation_error("ScaleEffectParams: lambda must be > 0");
        if (!(cross_section > 0.0) || !(gas_flow > 0.0) || !(k_bar > 0.0))
            throw validation_error("ScaleEffectParams: F, G, K must be > 0");
    }
};

struct ScaleEffectReport {
    double gamma = 0.0;    // coefficient of worsening [-]
    double i_min = 0.0;    // minimum local intensity [m^3/(m^2 s)]
    double chi = 0.0;      // outlet conversion degree [-]
    double ntu = 0.0;      // number of transfer units [-]
    double htu = 0.0;      // effective HTU [m]
    double delta_htu = 0.0; // HTU penalty [m]
};

/// gamma = k_ms / k_m.
inline double worsening_coefficient(double k_ms, double k_m)
{
    if (!(k_m > 0.0)) throw domain_error("worsening_coefficient: k_m must be > 0");
    return k_ms / k_m;
}

/// Minimum local intensity between point sources spaced d0 apart,
/// i_min = 4 I sqrt(a/(pi d0)) exp(-d0/(4a)).
/// The printed fraction is ambiguous; this product reading decays with the
/// source spacing. The literal denominator reading is kept alongside for the
/// record (it grows with d0).
inline double min_local_intensity(double source_flow, double unit_radius, double source_step)
{
    if (!(unit_radius > 0.0) || !(source_step > 0.0))
        throw domain_error("min_local_intensity: a and d0 must be > 0");
    return 4.0 * source_flow * std::sqrt(unit_radius / (M_PI * source_step)) *
           std::exp(-source_step / (4.0 * unit_radius));
}

inline double min_local_intensity_printed(double source_flow, double unit_radius, double source_step)
{
    if (!(unit_radius > 0.0) || !(source_step > 0.0))
        throw domain_error("min_local_intensity_printed: a and d0 must be > 0");
    return 4.0 * source_flow * std::sqrt(unit_radius / (M_PI * source_step)) /
           std::exp(-source_step / (4.0 * unit_radius));
}

namespace detail {
inline constexpr double kLambdaUnitTol = 1e-8;
}

/// Conversion degree at the apparatus outlet with the spreading-zone penalty
/// folded into an effective height H_eff = H - (1-gamma) H_s.
inline double conversion_degree(const ScaleEffectParams& p, double gamma)
{
    if (!(gamma > 0.0) || gamma > 1.0)
        throw domain_error("conversion_degree: gamma must lie in (0, 1]");
    const double h_eff = p.height - (1.0 - gamma) * p.spreading_height;
    if (!(h_eff > 0.0))
        throw validation_error("conversion_degree: spreading-zone penalty exceeds column height");
    const double lambda = p.absorption_factor;
    const double n_eff = p.cross_section * p.k_bar * h_eff / p.gas_flow;
    if (std::abs(lambda - 1.0) < detail::kLambdaUnitTol) {
        // chi -> N/(N+1) as lambda -> 1; first-order correction in (lambda-1)
        const double base = n_eff / (n_eff + 1.0);
        const double corr = (lambda - 1.0) * (n_eff / 2.0 - (n_eff + n_eff * n_eff / 2.0) / (1.0 + n_eff));
        return base * (1.0 + corr);
    }
    const double e = std::exp((lambda - 1.0) * n_eff);
    return (e - 1.0) / (lambda * e - 1.0);
}

/// N = ln((1-chi)/(1-lambda chi)) / (lambda-1), with the lambda = 1 limit
/// branch N = chi/(1-chi).
inline double ntu_from_conversion(double chi, double lambda)
{
    if (!(chi >= 0.0) || chi >= 1.0)
        throw domain_error("ntu_from_conversion: chi must lie in [0, 1)");
    if (lambda * chi >= 1.0)
        throw domain_error("ntu_from_conversion: lambda*chi >= 1 (pinch)");
    if (std::abs(lambda - 1.0) < detail::kLambdaUnitTol) {
        const double base = chi / (1.0 - chi);
        return base * (1.0 + (lambda - 1.0) * chi / (2.0 * (1.0 - chi)));
    }
    return std::log((1.0 - chi) / (1.0 - lambda * chi)) / (lambda - 1.0);
}

struct TransferUnitHeight {
    double htu;       // h~ [m]
    double delta_htu; // [m]
};

/// h~ = h~* + (1-gamma) H_s / N.
inline TransferUnitHeight transfer_unit_height(double htu_uniform, double gamma,
                                               double spreading_height, double ntu)
{
    if (!(ntu > 0.0)) throw domain_error("transfer_unit_height: N must be > 0");
    const double delta = (1.0 - gamma) * spreading_height / ntu;
    return {htu_uniform + delta, delta};
}

inline ScaleEffectReport evaluate(const ScaleEffectParams& p)
{
    p.validate();
    ScaleEffectReport r;
    r.gamma = worsening_coefficient(p.k_ms, p.k_m);
    r.i_min = min_local_intensity(p.source_flow, p.unit_radius, p.source_step);
    r.chi = conversion_degree(p, r.gamma);
    r.ntu = ntu_from_conversion(r.chi, p.absorption_factor);
    const auto h = transfer_unit_height(p.htu_uniform, r.gamma, p.spreading_height, r.ntu);
    r.htu = h.htu;
    r.delta_htu = h.delta_htu;
    return r;
}

} // namespace casim::scale
