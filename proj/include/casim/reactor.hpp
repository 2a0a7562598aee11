#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "casim/arrhenius.hpp"
#include "casim/errors.hpp"
#include "casim/field.hpp"
#include "casim/tridiag.hpp"

namespace casim::reactor {

/// Tubular through-reactor with the reversible first-order pair X <-> Y and
/// the heat balance carrying the latent heat of reaction.
struct ReactorConfig {
    double d_x = 0.0;      // [m^2/s]
    double d_y = 0.0;      // [m^2/s]
    double chi_bar = 0.0;  // averaged temperature conductivity [m^2/s]
    double flow_velocity = 0.0; // j/S [m/s], signed
    bool advect_downstream = true; // positive velocity transports toward +z
    double rho_bar = 0.0;  // [kg/m^3]
    double cp_bar = 0.0;   // [J/(kg K)]
    double delta_h = 0.0;  // total latent heat of reaction [J/mol]
    double length = 0.0;   // [m]
    double c_x0 = 0.0;     // inlet concentration of X [mol/m^3]
    bool adiabatic = true;
    double wall_heat_coefficient = 0.0; // [1/s], non-adiabatic only
    double t_wall = 0.0;   // [K]
    ArrheniusKinetics kinetics;

    double beta() const { return delta_h / (rho_bar * cp_bar); } // [K m^3/mol]
    double wall_w() const { return adiabatic ? 0.0 : wall_heat_coefficient; }
    double advection() const { return advect_downstream ? flow_velocity : -flow_velocity; }

    void validate() const
    {
        if (!(d_x > 0.0) || !(d_y > 0.0) || !(chi_bar > 0.0))
            throw validation_error("ReactorConfig: D_X, D_Y, chi must be > 0");
        if (!(length > 0.0)) throw validation_error("ReactorConfig: length must be > 0");
        if (!(rho_bar > 0.0) || !(cp_bar > 0.0))
            throw validation_error("ReactorConfig: rho and c_p must be > 0");
        if (c_x0 < 0.0) throw validation_error("ReactorConfig: C_X0 must be >= 0");
        if (!adiabatic && wall_heat_coefficient < 0.0)
            throw validation_error("ReactorConfig: wall heat coefficient must be >= 0");
        kinetics.validate();
    }
};

enum class BoundaryKind { danckwerts, dirichlet, zero_flux, periodic };

/// inlet/outlet hold (C_X, C_Y, T). Danckwerts uses inlet as the feed state;
/// Dirichlet pins both ends; the other kinds ignore the values.
struct BoundarySpec {
    BoundaryKind kind = BoundaryKind::danckwerts;
    std::array<double, 3> inlet{0.0, 0.0, 300.0};
    std::array<double, 3> outlet{0.0, 0.0, 300.0};
};

struct ReactorState {
    std::vector<double> c_x, c_y, temperature;
};

struct StabilityResult {
    double wavenumber = 0.0; // [1/m]
    std::array<std::complex<double>, 3> sigma; // growth rates [1/s]
};

// --------------------------------------------------------------------------
// transient solver
// --------------------------------------------------------------------------

struct TransientOptions {
    double dt = 0.0;    // [s]
    double t_end = 0.0; // [s]
    int record_every = 1;
    double newton_tol = 1e-10; // relative residual
    int max_newton = 12;
    double instability_factor = 1e6;  // field-norm growth bound
    double positivity_tol_factor = 1e-12; // clip tolerance relative to C_X0
};

struct TransientResult {
    std::vector<double> grid;
    std::vector<double> times;
    std::vector<ReactorState> states;
    bool positivity_clipped = false;
};

namespace detail {

struct ReactorOperator {
    const ReactorConfig* cfg;
    const BoundarySpec* bc;
    int nodes = 0;
    double dz = 0.0;
    bool periodic = false;

    int idx(int species, int node) const { return species * nodes + node; }

    // transport stencil for one species row; returns (lower, diag, upper,
    // wrap_lo, wrap_hi, constant) where wrap entries serve periodic corners
    struct Row {
        double lower = 0.0, diag = 0.0, upper = 0.0;
        double wrap_lo = 0.0, wrap_hi = 0.0; // coupling to the far end (periodic)
        double constant = 0.0;
        bool algebraic = false; // Dirichlet row
        double algebraic_value = 0.0;
    };

    Row transport_row(int species, int node, double diffusivity, double feed) const
    {
        const double u = cfg->advection();
        const double inv = 1.0 / (dz * dz);
        Row r;
        if (periodic) {
            r.diag = -2.0 * diffusivity * inv;
            const double lo = diffusivity * inv + u / (2.0 * dz);
            const double hi = diffusivity * inv - u / (2.0 * dz);
            if (node == 0) {
                r.wrap_hi = lo; // couples to node n-1
                r.upper = hi;
            } else if (node == nodes - 1) {
                r.lower = lo;
                r.wrap_lo = hi; // couples to node 0
            } else {
                r.lower = lo;
                r.upper = hi;
            }
            return r;
        }
        if (node == 0) {
            switch (bc->kind) {
                case BoundaryKind::dirichlet:
                    r.algebraic = true;
                    r.algebraic_value = feed;
                    return r;
                case BoundaryKind::zero_flux:
                    r.diag = -2.0 * diffusivity * inv;
                    r.upper = 2.0 * diffusivity * inv;
                    return r;
                case BoundaryKind::danckwerts: {
                    // ghost from u c0 - D c'(0) = u c_in (mirror when u = 0)
                    r.diag = -2.0 * diffusivity * inv - 2.0 * u / dz - u * u / diffusivity;
                    r.upper = 2.0 * diffusivity * inv;
                    r.constant = (2.0 * u / dz + u * u / diffusivity) * feed;
                    return r;
                }
                case BoundaryKind::periodic: break;
            }
        }
        if (node == nodes - 1) {
            switch (bc->kind) {
                case BoundaryKind::dirichlet: {
                    r.algebraic = true;
                    r.algebraic_value = bc->outlet[static_cast<std::size_t>(species)];
                    return r;
                }
                case BoundaryKind::zero_flux:
                case BoundaryKind::danckwerts:
                    r.diag = -2.0 * diffusivity * inv;
                    r.lower = 2.0 * diffusivity * inv;
                    return r;
                case BoundaryKind::periodic: break;
            }
        }
        r.lower = diffusivity * inv + u / (2.0 * dz);
        r.diag = -2.0 * diffusivity * inv;
        r.upper = diffusivity * inv - u / (2.0 * dz);
        return r;
    }

    double feed_of(int species) const { return bc->inlet[static_cast<std::size_t>(species)]; }

    double diffusivity_of(int species) const
    {
        return species == 0 ? cfg->d_x : (species == 1 ? cfg->d_y : cfg->chi_bar);
    }

    /// source terms (reaction + wall cooling) at one node
    Eigen::Vector3d source(double cx, double cy, double temp) const
    {
        const double k1 = arrhenius_rate(cfg->kinetics, temp, Branch::forward);
        const double k2 = arrhenius_rate(cfg->kinetics, temp, Branch::reverse);
        const double net = k1 * cx - k2 * cy;
        Eigen::Vector3d s;
        s[0] = -net;
        s[1] = net;
        s[2] = cfg->beta() * net - cfg->wall_w() * (temp - cfg->t_wall);
        return s;
    }

    Eigen::Matrix3d source_jacobian(double cx, double cy, double temp) const
    {
        const double k1 = arrhenius_rate(cfg->kinetics, temp, Branch::forward);
        const double k2 = arrhenius_rate(cfg->kinetics, temp, Branch::reverse);
        const double dk1 = arrhenius_rate_derivative(cfg->kinetics, temp, Branch::forward);
        const double dk2 = arrhenius_rate_derivative(cfg->kinetics, temp, Branch::reverse);
        const double q = dk1 * cx - dk2 * cy;
        const double beta = cfg->beta();
        Eigen::Matrix3d j;
        j << -k1, k2, -q,
             k1, -k2, q,
             beta * k1, -beta * k2, beta * q - cfg->wall_w();
        return j;
    }
};

} // namespace detail

/// Crank-Nicolson in the transport terms with Newton iteration on the
/// Arrhenius-coupled source, on a uniform grid. Periodic runs use nodes at
/// z = i L / n (no duplicate end node); the other boundary kinds span [0, L].
inline TransientResult simulate_transient(const ReactorConfig& config,
                                          const BoundarySpec& boundary,
                                          const ReactorState& initial,
                                          const TransientOptions& options)
{
    config.validate();
    if (!(options.dt > 0.0)) throw validation_error("simulate_transient: dt must be > 0");
    if (!(options.t_end > 0.0)) throw validation_error("simulate_transient: t_end must be > 0");
    const int n = static_cast<int>(initial.c_x.size());
    if (n < 16) throw validation_error("simulate_transient: need at least 16 grid nodes");
    if (boundary.kind == BoundaryKind::danckwerts && config.advection() < 0.0)
        throw validation_error("simulate_transient: danckwerts boundary assumes non-negative "
                               "advection (inlet at z = 0)");
    if (initial.c_y.size() != static_cast<std::size_t>(n) ||
        initial.temperature.size() != static_cast<std::size_t>(n))
        throw validation_error("simulate_transient: initial fields must share one grid");

    detail::ReactorOperator op;
    op.cfg = &config;
    op.bc = &boundary;
    op.nodes = n;
    op.periodic = boundary.kind == BoundaryKind::periodic;
    op.dz = op.periodic ? config.length / n : config.length / (n - 1);

    const int total = 3 * n;
    Eigen::VectorXd u(total);
    for (int i = 0; i < n; ++i) {
        u[op.idx(0, i)] = initial.c_x[i];
        u[op.idx(1, i)] = initial.c_y[i];
        u[op.idx(2, i)] = initial.temperature[i];
    }

    // transport matrix and constant vector are fixed for the run
    std::vector<detail::ReactorOperator::Row> rows(static_cast<std::size_t>(total));
    Eigen::VectorXd transport_const = Eigen::VectorXd::Zero(total);
    std::vector<char> algebraic(static_cast<std::size_t>(total), 0);
    Eigen::SparseMatrix<double> ltr(total, total);
    {
        std::vector<Eigen::Triplet<double>> trips;
        for (int s = 0; s < 3; ++s)
            for (int i = 0; i < n; ++i) {
                const int row = op.idx(s, i);
                const auto r = op.transport_row(s, i, op.diffusivity_of(s), op.feed_of(s));
                rows[static_cast<std::size_t>(row)] = r;
                if (r.algebraic) {
                    algebraic[static_cast<std::size_t>(row)] = 1;
                    continue;
                }
                trips.emplace_back(row, row, r.diag);
                if (r.lower != 0.0) trips.emplace_back(row, op.idx(s, i - 1), r.lower);
                if (r.upper != 0.0) trips.emplace_back(row, op.idx(s, i + 1), r.upper);
                if (r.wrap_lo != 0.0) trips.emplace_back(row, op.idx(s, 0), r.wrap_lo);
                if (r.wrap_hi != 0.0) trips.emplace_back(row, op.idx(s, n - 1), r.wrap_hi);
                transport_const[row] = r.constant;
            }
        ltr.setFromTriplets(trips.begin(), trips.end());
    }

    auto rhs_of = [&](const Eigen::VectorXd& v) {
        Eigen::VectorXd f = ltr * v + transport_const;
        for (int i = 0; i < n; ++i) {
            const auto s = op.source(v[op.idx(0, i)], v[op.idx(1, i)], v[op.idx(2, i)]);
            f[op.idx(0, i)] += s[0];
            f[op.idx(1, i)] += s[1];
            f[op.idx(2, i)] += s[2];
        }
        for (int r = 0; r < total; ++r)
            if (algebraic[static_cast<std::size_t>(r)]) f[r] = 0.0;
        return f;
    };

    TransientResult out;
    out.grid.resize(n);
    for (int i = 0; i < n; ++i) out.grid[i] = i * op.dz;
    auto record = [&](double t) {
        ReactorState st;
        st.c_x.assign(n, 0.0);
        st.c_y.assign(n, 0.0);
        st.temperature.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            st.c_x[i] = u[op.idx(0, i)];
            st.c_y[i] = u[op.idx(1, i)];
            st.temperature[i] = u[op.idx(2, i)];
        }
        out.times.push_back(t);
        out.states.push_back(std::move(st));
    };
    record(0.0);

    const double norm0 = std::max(u.lpNorm<Eigen::Infinity>(), 1e-12);
    const double clip_tol = options.positivity_tol_factor * std::max(config.c_x0, 1e-300);
    const double scale = std::max({config.c_x0, u.lpNorm<Eigen::Infinity>(), 1.0});

    Eigen::SparseMatrix<double> jac(total, total);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    std::vector<Eigen::Triplet<double>> trips;
    bool pattern_ready = false;

    const long steps = static_cast<long>(std::ceil(options.t_end / options.dt - 1e-12));
    double t = 0.0;
    for (long step = 1; step <= steps; ++step) {
        const double dt = std::min(options.dt, options.t_end - t);
        const Eigen::VectorXd f_old = rhs_of(u);
        Eigen::VectorXd v = u; // Newton iterate for u^{n+1}

        for (int it = 0;; ++it) {
            Eigen::VectorXd g = v - u - 0.5 * dt * (rhs_of(v) + f_old);
            for (int r = 0; r < total; ++r)
                if (algebraic[static_cast<std::size_t>(r)])
                    g[r] = v[r] - rows[static_cast<std::size_t>(r)].algebraic_value;
            const double res = g.lpNorm<Eigen::Infinity>() / scale;
            if (res < options.newton_tol) break;
            if (it >= options.max_newton)
                throw solver_error("simulate_transient: Newton iteration stalled at relative "
                                   "residual " + std::to_string(res) + "; reduce dt");

            trips.clear();
            for (int s = 0; s < 3; ++s)
                for (int i = 0; i < n; ++i) {
                    const int row = op.idx(s, i);
                    const auto& r = rows[static_cast<std::size_t>(row)];
                    if (r.algebraic) {
                        trips.emplace_back(row, row, 1.0);
                        continue;
                    }
                    trips.emplace_back(row, row, 1.0 - 0.5 * dt * r.diag);
                    if (r.lower != 0.0) trips.emplace_back(row, op.idx(s, i - 1), -0.5 * dt * r.lower);
                    if (r.upper != 0.0) trips.emplace_back(row, op.idx(s, i + 1), -0.5 * dt * r.upper);
                    if (r.wrap_lo != 0.0) trips.emplace_back(row, op.idx(s, 0), -0.5 * dt * r.wrap_lo);
                    if (r.wrap_hi != 0.0) trips.emplace_back(row, op.idx(s, n - 1), -0.5 * dt * r.wrap_hi);
                }
            for (int i = 0; i < n; ++i) {
                const auto js = op.source_jacobian(v[op.idx(0, i)], v[op.idx(1, i)],
                                                   v[op.idx(2, i)]);
                for (int a = 0; a < 3; ++a) {
                    const int row = op.idx(a, i);
                    if (algebraic[static_cast<std::size_t>(row)]) continue;
                    for (int b = 0; b < 3; ++b)
                        trips.emplace_back(row, op.idx(b, i), -0.5 * dt * js(a, b));
                }
            }
            jac.setFromTriplets(trips.begin(), trips.end());
            if (!pattern_ready) {
                lu.analyzePattern(jac);
                pattern_ready = true;
            }
            lu.factorize(jac);
            if (lu.info() != Eigen::Success)
                throw solver_error("simulate_transient: singular Newton system");
            v -= lu.solve(g);
        }

        u = v;
        t += dt;

        // positivity contract for the concentration fields
        for (int s = 0; s < 2; ++s)
            for (int i = 0; i < n; ++i) {
                double& val = u[op.idx(s, i)];
                if (val < -clip_tol)
                    throw solver_error("simulate_transient: concentration dropped below the "
                                       "clipping tolerance (solver failure)");
                if (val < 0.0) {
                    val = 0.0;
                    out.positivity_clipped = true;
                }
            }

        if (u.lpNorm<Eigen::Infinity>() > options.instability_factor * norm0)
            throw solver_error("simulate_transient: field norm exceeded the configured growth "
                               "bound; the time step is likely unstable, reduce dt");

        if (step % options.record_every == 0 || step == steps) record(t);
    }
    return out;
}

// --------------------------------------------------------------------------
// steady state at fixed temperature
// --------------------------------------------------------------------------

namespace detail {

/// One finite-difference solve of the steady isothermal two-point boundary
/// problem on `n` nodes; 2x2 block-tridiagonal elimination.
inline std::pair<std::vector<double>, std::vector<double>>
steady_fd(const ReactorConfig& cfg, double k1, double k2, const BoundarySpec& bc, int n)
{
    const double dz = cfg.length / (n - 1);
    const double u = cfg.advection();
    const double inv = 1.0 / (dz * dz);
    std::vector<Eigen::Matrix2d> lower(n), diag(n), upper(n);
    std::vector<Eigen::Vector2d> rhs(n, Eigen::Vector2d::Zero());
    const Eigen::Matrix2d kin = (Eigen::Matrix2d() << -k1, k2, k1, -k2).finished();
    const Eigen::Vector2d d_vec(cfg.d_x, cfg.d_y);

    for (int i = 0; i < n; ++i) {
        lower[i].setZero();
        diag[i].setZero();
        upper[i].setZero();
        const bool interior = i > 0 && i < n - 1;
        if (interior) {
            for (int s = 0; s < 2; ++s) {
                lower[i](s, s) = d_vec[s] * inv + u / (2.0 * dz);
                diag[i](s, s) = -2.0 * d_vec[s] * inv;
                upper[i](s, s) = d_vec[s] * inv - u / (2.0 * dz);
            }
            diag[i] += kin;
            continue;
        }
        if (bc.kind == BoundaryKind::dirichlet) {
            diag[i].setIdentity();
            rhs[i] = i == 0 ? Eigen::Vector2d(bc.inlet[0], bc.inlet[1])
                            : Eigen::Vector2d(bc.outlet[0], bc.outlet[1]);
            continue;
        }
        if (bc.kind != BoundaryKind::danckwerts && bc.kind != BoundaryKind::zero_flux)
            throw validation_error("steady_state_isothermal: periodic ends make the steady "
                                   "problem singular (translation invariance); use danckwerts, "
                                   "dirichlet or zero_flux");
        // ghost-eliminated PDE row at the boundary node
        for (int s = 0; s < 2; ++s) {
            const double d = d_vec[s];
            if (i == 0) {
                const bool danck = bc.kind == BoundaryKind::danckwerts;
                const double feed = danck ? bc.inlet[static_cast<std::size_t>(s)] : 0.0;
                const double c1 = danck ? 2.0 * u / dz + u * u / d : 0.0;
                diag[i](s, s) = -2.0 * d * inv - c1;
                upper[i](s, s) = 2.0 * d * inv;
                    rhs[i][s] = -c1 * feed; // constant term moved to the right side
            } else { // outlet: zero gradient mirror
                diag[i](s, s) = -2.0 * d * inv;
                lower[i](s, s) = 2.0 * d * inv;
            }
        }
        diag[i] += kin;
    }

    casim::detail::solve_block2_tridiagonal(lower, diag, upper, rhs);
    std::vector<double> cx(n), cy(n);
    for (int i = 0; i < n; ++i) {
        cx[i] = rhs[i][0];
        cy[i] = rhs[i][1];
        if (!std::isfinite(cx[i]) || !std::isfinite(cy[i]))
            throw validation_error("steady_state_isothermal: singular boundary system — the "
                                   "steady state is undetermined (no reaction, no through-flow "
                                   "and flux-free ends leave the level unset)");
    }
    return {std::move(cx), std::move(cy)};
}

} // namespace detail

/// Steady concentration profiles at a fixed temperature. Solved on the
/// requested grid and once more on the doubled grid; the returned profile is
/// the Richardson combination, accurate to fourth order for smooth data.
inline std::pair<ScalarField1D, ScalarField1D>
steady_state_isothermal(const ReactorConfig& config, double t_fixed,
                        const BoundarySpec& boundary, int nodes = 257)
{
    config.validate();
    if (!(t_fixed > 0.0)) throw domain_error("steady_state_isothermal: temperature must be > 0");
    if (nodes < 8) throw validation_error("steady_state_isothermal: need >= 8 nodes");
    if (boundary.kind == BoundaryKind::danckwerts && config.advection() < 0.0)
        throw validation_error("steady_state_isothermal: danckwerts boundary assumes "
                               "non-negative advection (inlet at z = 0)");
    const double k1 = arrhenius_rate(config.kinetics, t_fixed, Branch::forward);
    const double k2 = arrhenius_rate(config.kinetics, t_fixed, Branch::reverse);

    const auto coarse = detail::steady_fd(config, k1, k2, boundary, nodes);
    const auto fine = detail::steady_fd(config, k1, k2, boundary, 2 * nodes - 1);

    ScalarField1D cx, cy;
    cx.kind = QuantityKind::concentration;
    cy.kind = QuantityKind::concentration;
    cx.grid = make_uniform_grid(config.length, static_cast<std::size_t>(nodes));
    cy.grid = cx.grid;
    cx.values.resize(nodes);
    cy.values.resize(nodes);
    for (int i = 0; i < nodes; ++i) {
        cx.values[i] = (4.0 * fine.first[2 * i] - coarse.first[i]) / 3.0;
        cy.values[i] = (4.0 * fine.second[2 * i] - coarse.second[i]) / 3.0;
    }
    return {std::move(cx), std::move(cy)};
}

// --------------------------------------------------------------------------
// linear stability about a uniform state
// --------------------------------------------------------------------------

struct UniformState {
    double c_x = 0.0, c_y = 0.0, temperature = 0.0;
};

/// 3x3 linearization about a kinetically steady uniform state under the
/// Fourier mode exp(i k z + sigma t).
inline Eigen::Matrix3cd stability_matrix(const ReactorConfig& config, const UniformState& s,
                                         double k)
{
    const auto j_src = [&] {
        detail::ReactorOperator op;
        op.cfg = &config;
        return op.source_jacobian(s.c_x, s.c_y, s.temperature);
    }();
    const std::complex<double> i_unit(0.0, 1.0);
    Eigen::Matrix3cd j = j_src.cast<std::complex<double>>();
    const double u = config.advection();
    const Eigen::Vector3d diffusion(config.d_x, config.d_y, config.chi_bar);
    for (int a = 0; a < 3; ++a)
        j(a, a) += -diffusion[a] * k * k - i_unit * u * k;
    return j;
}

inline void require_kinetically_steady(const ReactorConfig& config, const UniformState& s,
                                       double tol = 1e-8)
{
    const double k1 = arrhenius_rate(config.kinetics, s.temperature, Branch::forward);
    const double k2 = arrhenius_rate(config.kinetics, s.temperature, Branch::reverse);
    const double net = k1 * s.c_x - k2 * s.c_y;
    const double scale_c = std::max({k1 * s.c_x, k2 * s.c_y, 1e-300});
    const double thermal = config.beta() * net -
                           config.wall_w() * (s.temperature - config.t_wall);
    const double scale_t = std::max({std::abs(config.beta()) * scale_c,
                                     config.wall_w() * std::max(s.temperature, 1.0), 1e-300});
    if (std::abs(net) > tol * scale_c || std::abs(thermal) > tol * scale_t)
        throw validation_error("linear_stability: state is not a steady state of the kinetic "
                               "source (residuals " + std::to_string(net) + ", " +
                               std::to_string(thermal) + ")");
}

inline std::vector<StabilityResult> linear_stability(const ReactorConfig& config,
                                                     const UniformState& state,
                                                     const std::vector<double>& wavenumbers,
                                                     double steady_tol = 1e-8)
{
    config.validate();
    require_kinetically_steady(config, state, steady_tol);
    std::vector<StabilityResult> out;
    out.reserve(wavenumbers.size());
    for (double k : wavenumbers) {
        Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(stability_matrix(config, state, k));
        StabilityResult r;
        r.wavenumber = k;
        for (int i = 0; i < 3; ++i) r.sigma[static_cast<std::size_t>(i)] = solver.eigenvalues()[i];
        out.push_back(r);
    }
    return out;
}

struct MinLengthOptions {
    double k_lo = 0.0;  // 0 = auto: 2 pi / (10^3 L)
    double k_hi = 0.0;  // 0 = auto: 2 pi 10^3 / L
    int samples = 600;
    int bisection_iters = 80;
};

/// Largest unstable wavenumber over a logarithmic scan; the minimum reactor
/// length admitting a spatial structure is the wavelength of that mode.
/// Empty result = no unstable band ("no structure").
inline std::optional<double> min_reactor_length(const ReactorConfig& config,
                                                const UniformState& state,
                                                const MinLengthOptions& options = {})
{
    config.validate();
    require_kinetically_steady(config, state);
    const double base = 2.0 * M_PI / config.length;
    double k_lo = options.k_lo > 0.0 ? options.k_lo : base * 1e-3;
    double k_hi = options.k_hi > 0.0 ? options.k_hi : base * 1e3;

    auto max_growth = [&](double k) {
        Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(stability_matrix(config, state, k));
        double re = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) re = std::max(re, solver.eigenvalues()[i].real());
        return re;
    };

    // diffusion guarantees stability at large k; extend the window until the
    // top sample is stable
    for (int tries = 0; tries < 12 && max_growth(k_hi) > 0.0; ++tries) k_hi *= 10.0;

    double k_last_unstable = -1.0, k_first_stable_above = -1.0;
    const double ratio = std::pow(k_hi / k_lo, 1.0 / (options.samples - 1));
    double k = k_lo;
    for (int i = 0; i < options.samples; ++i, k *= ratio) {
        if (max_growth(k) > 0.0) {
            k_last_unstable = k;
            k_first_stable_above = -1.0;
        } else if (k_last_unstable > 0.0 && k_first_stable_above < 0.0) {
            k_first_stable_above = k;
        }
    }
    if (k_last_unstable < 0.0) return std::nullopt; // no structure
    double lo = k_last_unstable;
    double hi = k_first_stable_above > 0.0 ? k_first_stable_above : k_hi;
    for (int i = 0; i < options.bisection_iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (max_growth(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return 2.0 * M_PI / (0.5 * (lo + hi));
}

// --------------------------------------------------------------------------
// structure classification
// --------------------------------------------------------------------------

enum class StructureClass { stationary, stable_oscillation, decaying_oscillation, destroying };

inline const char* to_string(StructureClass c)
{
    switch (c) {
        case StructureClass::stationary: return "stationary";
        case StructureClass::stable_oscillation: return "stable_oscillation";
        case StructureClass::decaying_oscillation: return "decaying_oscillation";
        case StructureClass::destroying: return "destroying";
    }
    return "?";
}

struct ClassifyOptions {
    double min_periods = 5.0;
    double envelope_tol = 1e-3;     // |d ln A / dt| * period threshold
    double blowup_factor = 1e3;     // versus the initial field norm
    double detection_floor = 0.0;   // absolute amplitude floor; 0 = 1e-10 * max|c_x|
};

/// Tracks the dominant spatial Fourier mode of C_X and classifies the run by
/// the envelope of its amplitude. Phase rotation and envelope ripple both
/// feed the oscillation-frequency estimate; either one alone suffices.
inline StructureClass classify_structures(const TransientResult& series,
                                          const ClassifyOptions& options = {})
{
    const std::size_t nt = series.states.size();
    if (nt < 8) throw validation_error("classify_structures: series too short (need >= 8 records)");
    const std::size_t nx = series.grid.size();

    // blow-up / positivity screen
    double norm0 = 0.0, norm_max = 0.0, cx_scale = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        double norm = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            norm = std::max({norm, std::abs(series.states[t].c_x[i]),
                             std::abs(series.states[t].c_y[i])});
            cx_scale = std::max(cx_scale, std::abs(series.states[t].c_x[i]));
        }
        if (t == 0) norm0 = std::max(norm, 1e-300);
        norm_max = std::max(norm_max, norm);
    }
    if (norm_max > options.blowup_factor * norm0) return StructureClass::destroying;
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t i = 0; i < nx; ++i)
            if (series.states[t].c_x[i] < -1e-9 * cx_scale ||
                series.states[t].c_y[i] < -1e-9 * cx_scale)
                return StructureClass::destroying;

    // dominant spatial mode of the mean-free C_X field
    const std::size_t n_modes = nx / 2;
    std::vector<double> avg_amp(n_modes + 1, 0.0);
    auto mode_coeff = [&](std::size_t t, std::size_t m) {
        std::complex<double> acc(0.0, 0.0);
        double mean = 0.0;
        for (std::size_t i = 0; i < nx; ++i) mean += series.states[t].c_x[i];
        mean /= static_cast<double>(nx);
        for (std::size_t i = 0; i < nx; ++i) {
            const double phase = -2.0 * M_PI * static_cast<double>(m * i) / static_cast<double>(nx);
            acc += (series.states[t].c_x[i] - mean) *
                   std::complex<double>(std::cos(phase), std::sin(phase));
        }
        return acc * (2.0 / static_cast<double>(nx));
    };
    for (std::size_t m = 1; m <= n_modes; ++m)
        for (std::size_t t = nt / 2; t < nt; t += std::max<std::size_t>(1, nt / 16))
            avg_amp[m] += std::abs(mode_coeff(t, m));
    std::size_t dominant = 1;
    for (std::size_t m = 2; m <= n_modes; ++m)
        if (avg_amp[m] > avg_amp[dominant]) dominant = m;

    std::vector<double> amp(nt), phase(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto c = mode_coeff(t, dominant);
        amp[t] = std::abs(c);
        phase[t] = std::arg(c);
    }
    const double floor = options.detection_floor > 0.0 ? options.detection_floor
                                                       : 1e-10 * std::max(cx_scale, 1e-300);
    const double amp_max = *std::max_element(amp.begin(), amp.end());
    if (amp_max < floor) return StructureClass::stationary;

    // envelope fit over the second half of the series
    const std::size_t lo = nt / 2;
    std::vector<double> tt, la;
    for (std::size_t t = lo; t < nt; ++t) {
        if (amp[t] < floor) continue;
        tt.push_back(series.times[t]);
        la.push_back(std::log(amp[t]));
    }
    if (tt.size() < 4) return StructureClass::stationary; // amplitude died away
    const double span = tt.back() - tt.front();
    double mean_t = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < tt.size(); ++i) {
        mean_t += tt[i];
        mean_y += la[i];
    }
    mean_t /= static_cast<double>(tt.size());
    mean_y /= static_cast<double>(tt.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < tt.size(); ++i) {
        sxx += (tt[i] - mean_t) * (tt[i] - mean_t);
        sxy += (tt[i] - mean_t) * (la[i] - mean_y);
    }
    const double slope = sxy / std::max(sxx, 1e-300);

    // oscillation frequency: unwrapped phase drift or envelope ripple
    double unwrapped = 0.0;
    double prev = phase[lo];
    for (std::size_t t = lo + 1; t < nt; ++t) {
        double d = phase[t] - prev;
        while (d > M_PI) d -= 2.0 * M_PI;
        while (d < -M_PI) d += 2.0 * M_PI;
        unwrapped += d;
        prev = phase[t];
    }
    const double omega_phase = std::abs(unwrapped) / std::max(span, 1e-300);

    std::size_t sign_changes = 0;
    double residual_rms = 0.0;
    {
        double prev_res = 0.0;
        bool have_prev = false;
        for (std::size_t i = 0; i < tt.size(); ++i) {
            const double res = la[i] - (mean_y + slope * (tt[i] - mean_t));
            residual_rms += res * res;
            if (have_prev && res * prev_res < 0.0) ++sign_changes;
            prev_res = res;
            have_prev = true;
        }
        residual_rms = std::sqrt(residual_rms / static_cast<double>(tt.size()));
    }
    const double omega_ripple = static_cast<double>(sign_changes) * M_PI / (2.0 * std::max(span, 1e-300));

    double omega = 0.0;
    if (omega_phase * span > M_PI) omega = omega_phase;
    else if (sign_changes >= 4 && residual_rms > 0.02) omega = omega_ripple;

    if (omega > 0.0) {
        const double period = 2.0 * M_PI / omega;
        const double periods_resolved = (series.times.back() - series.times.front()) / period;
        if (periods_resolved < options.min_periods)
            throw validation_error("classify_structures: series resolves only " +
                                   std::to_string(periods_resolved) +
                                   " oscillation periods; need >= " +
                                   std::to_string(options.min_periods));
        const double drift = std::abs(slope) * period;
        if (drift < options.envelope_tol) return StructureClass::stable_oscillation;
        return slope < 0.0 ? StructureClass::decaying_oscillation : StructureClass::destroying;
    }

    // non-oscillatory: sustained growth means the structure is still building
    if (slope * span > 1.0) return StructureClass::destroying;
    return StructureClass::stationary;
}

} // namespace casim::reactor
