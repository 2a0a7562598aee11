#pragma once

#include <string>
#include <vector>

#include "casim/errors.hpp"

namespace casim {

enum class QuantityKind { concentration, temperature, intensity };

inline const char* to_string(QuantityKind k)
{
    switch (k) {
        case QuantityKind::concentration: return "concentration [mol/m^3]";
        case QuantityKind::temperature: return "temperature [K]";
        case QuantityKind::intensity: return "intensity [m^3/(m^2 s)]";
    }
    return "?";
}

/// A quantity sampled on a strictly increasing 1-D grid.
struct ScalarField1D {
    std::vector<double> grid;    // [m]
    std::vector<double> values;
    QuantityKind kind = QuantityKind::concentration;

    void validate() const
    {
        if (grid.size() < 2)
            throw validation_error("ScalarField1D: grid needs at least 2 nodes");
        if (grid.size() != values.size())
            throw validation_error("ScalarField1D: grid/value size mismatch");
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (!(grid[i] > grid[i - 1]))
                throw validation_error("ScalarField1D: grid must be strictly increasing");
    }
};

inline std::vector<double> make_uniform_grid(double length, std::size_t nodes)
{
    if (nodes < 2 || !(length > 0.0))
        throw validation_error("make_uniform_grid: need length > 0 and >= 2 nodes");
    std::vector<double> g(nodes);
    const double dz = length / static_cast<double>(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) g[i] = static_cast<double>(i) * dz;
    g.back() = length;
    return g;
}

/// Trapezoid integral of nodal values over the field grid.
inline double integrate(const std::vector<double>& grid, const std::vector<double>& v)
{
    double acc = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        acc += 0.5 * (v[i] + v[i - 1]) * (grid[i] - grid[i - 1]);
    return acc;
}

} // namespace casim
