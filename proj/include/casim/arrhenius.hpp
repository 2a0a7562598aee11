#pragma once

#include <cmath>

#include "casim/errors.hpp"

namespace casim::reactor {

inline constexpr double kGasConstant = 8.314462618; // J/(mol K)

enum class Branch { forward, reverse };

/// Rate constants of the reversible first-order pair X <-> Y,
/// k(T) = k0 * exp(-Ea / (R T)).
struct ArrheniusKinetics {
    double k0_forward = 0.0;  // [1/s]
    double ea_forward = 0.0;  // [J/mol]
    double k0_reverse = 0.0;  // [1/s]
    double ea_reverse = 0.0;  // [J/mol]
    double gas_constant = kGasConstant;

    void validate() const
    {
        if (k0_forward < 0.0 || k0_reverse < 0.0)
            throw validation_error("ArrheniusKinetics: pre-exponential factors must be >= 0");
        if (ea_forward < 0.0 || ea_reverse < 0.0)
            throw validation_error("ArrheniusKinetics: activation energies must be >= 0");
        if (!(gas_constant > 0.0))
            throw validation_error("ArrheniusKinetics: gas constant must be > 0");
    }
};

inline double arrhenius_rate(const ArrheniusKinetics& k, double temperature, Branch branch)
{
    if (!(temperature > 0.0))
        throw domain_error("arrhenius_rate: temperature must be > 0");
    const double k0 = branch == Branch::forward ? k.k0_forward : k.k0_reverse;
    const double ea = branch == Branch::forward ? k.ea_forward : k.ea_reverse;
    return k0 * std::exp(-ea / (k.gas_constant * temperature));
}

/// d k / d T = k * Ea / (R T^2); needed by the stability Jacobian.
inline double arrhenius_rate_derivative(const ArrheniusKinetics& k, double temperature, Branch branch)
{
    const double rate = arrhenius_rate(k, temperature, branch);
    const double ea = branch == Branch::forward ? k.ea_forward : k.ea_reverse;
    return rate * ea / (k.gas_constant * temperature * temperature);
}

} // namespace casim::reactor
