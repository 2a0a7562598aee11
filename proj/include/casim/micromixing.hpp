#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "casim/errors.hpp"

namespace casim::mixing {

/// Residence-time distribution: the named exponential form, or a tabulated
/// density. Tabulated densities are interpreted as piecewise linear and must
/// integrate to 1 within 1e-6; beyond the last table point the density is 0.
struct Rtd {
    enum class Kind { exponential, tabulated };
    Kind kind = Kind::exponential;
    std::vector<double> age;     // [s], strictly increasing (tabulated only)
    std::vector<double> density; // [1/s]

    void validate(double t_bar) const
    {
        if (kind == Kind::exponential) {
            if (!(t_bar > 0.0)) throw validation_error("Rtd: exponential form needs t_bar > 0");
            return;
        }
        if (age.size() < 2 || age.size() != density.size())
            throw validation_error("Rtd: tabulated form needs >= 2 (age, density) pairs");
        for (std::size_t i = 0; i < age.size(); ++i) {
            if (density[i] < 0.0) throw validation_error("Rtd: tabulated density must be >= 0");
            if (i > 0 && !(age[i] > age[i - 1]))
                throw validation_error("Rtd: ages must be strictly increasing");
        }
        double integral = 0.0;
        for (std::size_t i = 1; i < age.size(); ++i)
            integral += 0.5 * (density[i] + density[i - 1]) * (age[i] - age[i - 1]);
        if (std::abs(integral - 1.0) > 1e-6)
            throw validation_error("Rtd: tabulated density must integrate to 1 within 1e-6");
    }
};

struct MixingModel {
    double volume = 0.0;  // V [m^3]
    double t_bar = 0.0;   // average element life time [s]
    double gamma = 0.0;   // specific rate parameter [1/s]
    Rtd rtd;
    double crucial_age = std::numeric_limits<double>::infinity(); // [s]

    void validate() const
    {
        if (!(volume > 0.0) || !(t_bar > 0.0))
            throw validation_error("MixingModel: V and t_bar must be > 0");
        if (gamma < 0.0) throw validation_error("MixingModel: gamma must be >= 0");
        if (crucial_age < 0.0) throw validation_error("MixingModel: crucial age must be >= 0");
        rtd.validate(t_bar);
    }
};

namespace detail {

/// Integral of exp(-gamma (s - lambda)) * (piecewise linear density) over one
/// table interval [s0, s1]; series fallback keeps gamma*h -> 0 well behaved.
inline double weighted_segment(double s0, double s1, double f0, double f1,
                               double gamma, double lambda)
{
    const double h = s1 - s0;
    const double w0 = std::exp(-gamma * (s0 - lambda));
    const double gh = gamma * h;
    double i0, i1; // integrals of e^{-gamma(s-s0)} and (s-s0)/h * e^{-gamma(s-s0)}
    if (std::abs(gh) < 1e-6) {
        i0 = h * (1.0 - gh / 2.0 + gh * gh / 6.0);
        i1 = h * (0.5 - gh / 3.0 + gh * gh / 8.0);
    } else {
        const double em = std::expm1(-gh);
        i0 = -em / gamma;
        i1 = (-em - gh * std::exp(-gh)) / (gamma * gh);
    }
    return w0 * (f0 * i0 + (f1 - f0) * i1);
}

} // namespace detail

/// Rate of transfer from complete segregation to complete micro-mixing for
/// elements with expecting time in [lambda, lambda + d_lambda]:
///   dG = V dlambda (1/t_bar) Int_0^inf exp(-gamma a) F(a + lambda) da.
inline double segregation_transfer_rate(const MixingModel& model, double lambda_wait,
                                        double d_lambda)
{
    model.validate();
    if (lambda_wait < 0.0) throw validation_error("segregation_transfer_rate: lambda must be >= 0");
    if (!(d_lambda > 0.0)) throw validation_error("segregation_transfer_rate: d_lambda must be > 0");

    if (model.rtd.kind == Rtd::Kind::exponential) {
        // closed form: Int = exp(-lambda/t_bar) / (gamma t_bar + 1)
        const double t = model.t_bar;
        return model.volume * d_lambda * std::exp(-lambda_wait / t) /
               (model.gamma * t * t + t);
    }

    const auto& age = model.rtd.age;
    const auto& f = model.rtd.density;
    double integral = 0.0;
    for (std::size_t i = 1; i < age.size(); ++i) {
        const double s0 = age[i - 1], s1 = age[i];
        if (s1 <= lambda_wait) continue;
        const double lo = std::max(s0, lambda_wait);
        const double f_lo = f[i - 1] + (f[i] - f[i - 1]) * (lo - s0) / (s1 - s0);
        integral += detail::weighted_segment(lo, s1, f_lo, f[i], model.gamma, lambda_wait);
    }
    // tail truncation estimate: density is 0 beyond the table by contract,
    // but a table that has not decayed signals an unresolved integral
    const double f_last = f.back();
    const double f_max = *std::max_element(f.begin(), f.end());
    if (f_max > 0.0 && f_last > 1e-6 * f_max) {
        const double residual = f_last / std::max(model.gamma, 1.0 / model.t_bar);
        if (residual > 1e-6 * std::max(integral, 1e-300))
            throw solver_error("segregation_transfer_rate: tabulated RTD tail has not decayed; "
                               "estimated truncation residual " + std::to_string(residual));
    }
    return model.volume * d_lambda * integral / model.t_bar;
}

/// One cell of the segregation/micromixing sequence. A mixed cell responds
/// with its exponential RTD. A segregated cell responds with its own RTD up
/// to the crucial age; elements older than that are handed over to complete
/// micro-mixing (exponential tail carrying the surviving mass).
struct MixingCell {
    enum class Kind { segregated, mixed };
    Kind kind = Kind::mixed;
    double t_bar = 0.0;
    Rtd rtd; // used by segregated cells; defaults to the exponential form
    double crucial_age = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double rtd_density(const Rtd& rtd, double t_bar, double s)
{
    if (rtd.kind == Rtd::Kind::exponential)
        return std::exp(-s / t_bar) / t_bar;
    const auto& a = rtd.age;
    if (s < a.front() || s > a.back()) return 0.0;
    const auto it = std::upper_bound(a.begin(), a.end(), s);
    const std::size_t i = static_cast<std::size_t>(std::distance(a.begin(), it));
    if (i == 0) return rtd.density.front();
    if (i >= a.size()) return rtd.density.back();
    const double w = (s - a[i - 1]) / (a[i] - a[i - 1]);
    return rtd.density[i - 1] * (1.0 - w) + rtd.density[i] * w;
}

/// Kernel density of one cell at age s, with the crucial-age handover.
inline double cell_kernel(const MixingCell& cell, double s)
{
    if (cell.kind == MixingCell::Kind::mixed)
        return std::exp(-s / cell.t_bar) / cell.t_bar;
    if (s <= cell.crucial_age) return rtd_density(cell.rtd, cell.t_bar, s);
    // surviving mass at the crucial age leaves through the mixed route
    double survived = 1.0;
    if (cell.rtd.kind == Rtd::Kind::exponential) {
        survived = std::exp(-cell.crucial_age / cell.t_bar);
    } else {
        double passed = 0.0;
        const auto& a = cell.rtd.age;
        for (std::size_t i = 1; i < a.size(); ++i) {
            const double hi = std::min(a[i], cell.crucial_age);
            if (hi <= a[i - 1]) break;
            const double f_hi = rtd_density(cell.rtd, cell.t_bar, hi);
            passed += 0.5 * (cell.rtd.density[i - 1] + f_hi) * (hi - a[i - 1]);
        }
        survived = std::max(0.0, 1.0 - passed);
    }
    return survived * std::exp(-(s - cell.crucial_age) / cell.t_bar) / cell.t_bar;
}

} // namespace detail

/// Convolves an inlet signal (density samples on a uniform grid of step dt)
/// through the cell sequence in order. Each cell kernel is integrated over
/// centered bins and normalized to unit mass, so the signal integral is
/// conserved by construction.
inline std::vector<double> cell_sequence_response(const std::vector<MixingCell>& cells,
                                                  std::span<const double> inlet, double dt)
{
    if (cells.empty()) throw validation_error("cell_sequence_response: empty cell sequence");
    if (!(dt > 0.0)) throw validation_error("cell_sequence_response: dt must be > 0");
    if (inlet.size() < 2) throw validation_error("cell_sequence_response: inlet too short");
    for (const auto& c : cells) {
        if (!(c.t_bar > 0.0)) throw validation_error("cell_sequence_response: cell t_bar must be > 0");
        if (c.kind == MixingCell::Kind::segregated) c.rtd.validate(c.t_bar);
    }

    const std::size_t n = inlet.size();
    std::vector<double> signal(inlet.begin(), inlet.end());
    std::vector<double> kernel(n), next(n);
    for (const auto& cell : cells) {
        // bin-averaged kernel mass, bin j covering [(j-1/2) dt, (j+1/2) dt]
        double mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = j == 0 ? 0.0 : (j - 0.5) * dt;
            const double hi = (j + 0.5) * dt;
            // 3-point Gauss-Legendre per bin
            static constexpr double kNode = 0.7745966692414834;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            const double v = (5.0 * detail::cell_kernel(cell, mid - half * kNode) +
                              8.0 * detail::cell_kernel(cell, mid) +
                              5.0 * detail::cell_kernel(cell, mid + half * kNode)) / 18.0;
            kernel[j] = v * (hi - lo);
            mass += kernel[j];
        }
        if (!(mass > 0.0))
            throw validation_error("cell_sequence_response: cell kernel has no mass on the time grid");
        for (auto& k : kernel) k /= mass;

        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (kernel[j] == 0.0) continue;
            for (std::size_t i = 0; i + j < n; ++i) next[i + j] += signal[i] * kernel[j];
        }
        signal.swap(next);
    }
    return signal;
}

} // namespace casim::mixing
