#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "casim/errors.hpp"
#include "casim/sorption_analytic.hpp"
#include "casim/sorption_correlations.hpp"
#include "casim/tridiag.hpp"

namespace casim::sorption {

struct MovingPlaneOptions {
    double t_end = 0.0;  // [s], must exceed t*
    int cells = 800;     // lattice cells over [0, L]
    double dt_init_fraction = 1.0 / 200.0; // dt0 = fraction * t*
    double max_cell_crossing = 0.8;        // plane cells per step cap
    double dt_growth = 1.06;
    double interface_tol = 1e-8;   // relative flux-balance residual
    int max_interface_iters = 60;
    double sweep_tol = 1e-11;      // separate-driving fixed point (relative)
    int max_sweep_iters = 300;
    int max_dt_halvings = 8;
    int snapshot_count = 0;
    bool check_resolution = true;  // enforce >= 10 cells inside the h_p estimate
};

/// Full run record of one chemisorption solve past the breakthrough time.
struct MovingPlaneSolution {
    double t_star = 0.0;

    std::vector<double> times;     // step-end times, t > t*
    std::vector<double> plane;     // y(t) [m]
    std::vector<double> velocity;  // V_f = dy/dt over the step [m/s]
    std::vector<double> surface_a; // C_AS(t) [mol/m^3]
    std::vector<double> surface_b; // C_BS(t); identically 0 once the plane detached
    std::vector<double> front_e;   // C_Efr(t) [mol/m^3]

    double t_p = 0.0; // time of the velocity maximum [s]
    double h_p = 0.0; // plane position at t_p [m]

    struct Snapshot {
        double t = 0.0, y = 0.0;
        std::vector<double> x, c_a, c_b, c_e;
    };
    std::vector<Snapshot> snapshots;

    // species accounting over the whole run (surface-reaction phase included)
    double absorbed_a = 0.0; // gas uptake integral [mol/m^2]
    double stored_a = 0.0;   // A held in zone I at t_end
    double consumed_b = 0.0; // total B reacted: deficit plus far-boundary supply
    double stored_e = 0.0;   // E held in the layer at t_end
    double boundary_supply_b = 0.0; // B drawn in through x = L over the run
    double boundary_leak_e = 0.0;   // E lost through x = L over the run

    double max_flux_residual = 0.0; // worst |j_E - 2 j_B| / |j_E| over accepted steps
    double max_plane_conc = 0.0;    // worst |C| enforced at the plane

    // integrated plane fluxes (diagnostics for the conservation audit)
    double plane_flux_a = 0.0;
    double plane_flux_b = 0.0;

    // steps spent in the sub-cell bootstrap; shape diagnostics (t_p, the
    // velocity maximum) consider the series from here on
    std::size_t startup_steps = 0;
};

namespace detail {

/// Derivative of the quadratic through (z0,f0),(z1,f1),(z2,f2) at `at`.
inline double lagrange3_deriv(double z0, double f0, double z1, double f1, double z2,
                              double f2, double at)
{
    return f0 * (2.0 * at - z1 - z2) / ((z0 - z1) * (z0 - z2)) +
           f1 * (2.0 * at - z0 - z2) / ((z1 - z0) * (z1 - z2)) +
           f2 * (2.0 * at - z0 - z1) / ((z2 - z0) * (z2 - z1));
}

/// Value of the same quadratic at `at`.
inline double lagrange3_value(double z0, double f0, double z1, double f1, double z2,
                              double f2, double at)
{
    return f0 * (at - z1) * (at - z2) / ((z0 - z1) * (z0 - z2)) +
           f1 * (at - z0) * (at - z2) / ((z1 - z0) * (z1 - z2)) +
           f2 * (at - z0) * (at - z1) / ((z2 - z0) * (z2 - z1));
}

} // namespace detail

/// Front-tracking solver for the moving-plane phase in conservative
/// finite-volume form on a fixed lattice. A and B live on their own zones
/// with a cut cell against the plane; E is one continuous field fed by an
/// exactly stoichiometric source R_A + R_B at the plane, so the species
/// bookkeeping closes to the coordination tolerance. The method of separate
/// driving sweeps one species at a time (tridiagonal solves) to the coupled
/// fixed point; the interface-coordination loop then relocates the plane
/// until the A and B arrival rates agree. Faces near the front use backward
/// Euler, the rest Crank-Nicolson.
class MovingPlaneSolver {
public:
    MovingPlaneSolver(const SorptionParams& params, const LaplaceCoefficients& coeffs,
                      const MovingPlaneOptions& options)
        : p_(params), c_(coeffs), o_(options), n_(options.cells),
          dx_(params.layer_depth / options.cells)
    {
        p_.validate();
        if (n_ < 32) throw validation_error("solve_moving_plane: need at least 32 cells");
        t_star_ = compute_tstar(p_, c_);
        if (!(o_.t_end > t_star_))
            throw validation_error("solve_moving_plane: t_end must exceed t*");
        if (o_.check_resolution) {
            const double hp_est = correlation_hp(p_.diffusion_be.d22, p_.diffusion_be.d11,
                                                 p_.diffusion_ae.d11).value;
            if (dx_ > hp_est / 10.0)
                throw validation_error(
                    "solve_moving_plane: grid does not resolve the penetration depth "
                    "(need >= 10 cells inside h_p ~ " + std::to_string(hp_est) + " m)");
        }
    }

    MovingPlaneSolution run()
    {
        init_fields();
        MovingPlaneSolution sol;
        sol.t_star = t_star_;

        double t = t_star_;
        double dt = t_star_ * o_.dt_init_fraction;
        double next_snapshot = o_.snapshot_count > 0
                                   ? t_star_
                                   : std::numeric_limits<double>::infinity();
        const double snapshot_step = o_.snapshot_count > 0
                                         ? (o_.t_end - t_star_) / o_.snapshot_count
                                         : 0.0;

        while (t < o_.t_end * (1.0 - 1e-12)) {
            dt = std::min(dt, o_.t_end - t);
            Trial step;
            int halvings = 0;
            for (;;) {
                try {
                    step = advance(dt);
                    break;
                } catch (const solver_error&) {
                    if (++halvings > o_.max_dt_halvings) throw;
                    dt *= 0.5;
                }
            }
            commit(step, dt);
            t += dt;

            sol.times.push_back(t);
            sol.plane.push_back(y_);
            sol.velocity.push_back(step.velocity);
            sol.surface_a.push_back(step.c_as);
            sol.surface_b.push_back(0.0);
            sol.front_e.push_back(front_e_value());
            if (!step.pinned)
                sol.max_flux_residual = std::max(sol.max_flux_residual, step.residual);

            if (t >= next_snapshot) {
                sol.snapshots.push_back(make_snapshot(t));
                next_snapshot += snapshot_step;
            }

            if (y_ > 0.9 * p_.layer_depth)
                throw solver_error("solve_moving_plane: reaction plane reached the domain "
                                   "truncation; enlarge layer_depth");

            const double speed = std::max(step.velocity, 1e-300);
            dt = std::min(dt * o_.dt_growth, o_.max_cell_crossing * dx_ / speed);
        }

        finalize(sol);
        return sol;
    }

private:
    struct Trial {
        std::vector<double> a, b, e;
        double y = 0.0;
        double velocity = 0.0;
        double r_a = 0.0, r_b = 0.0;  // plane arrival rates [mol/(m^2 s)]
        double swept_b = 0.0;         // standing B mass swept by the plane
        double c_as = 0.0;
        double uptake = 0.0;          // surface gas uptake rate (new time)
        double far_b = 0.0, far_e = 0.0; // far-face fluxes (new time)
        double residual = 0.0;        // |R_A - R_B| / max
        bool bootstrap = false;
        bool pinned = false;          // start-up step with the plane held at the surface
    };

    double x_of(int i) const { return i * dx_; }

    double gas_uptake(double c_as) const
    {
        return p_.alpha * p_.c_a_inf * (1.0 - p_.henry * c_as / p_.p_a);
    }

    /// keeps the plane clear of lattice nodes so the cut-cell stencils stay
    /// well conditioned
    double nudge(double y) const
    {
        const double s = y / dx_;
        const double near = std::round(s);
        if (std::abs(s - near) < 1e-3 && near >= 0.0)
            return (near + (s >= near ? 1e-3 : -1e-3)) * dx_;
        return y;
    }

    void init_fields()
    {
        c_a_.assign(n_ + 1, 0.0);
        c_b_.assign(n_ + 1, 0.0);
        c_e_.assign(n_ + 1, 0.0);
        for (int i = 0; i <= n_; ++i) {
            const auto be = pre_tstar_profiles(p_, c_, x_of(i), t_star_);
            c_b_[i] = std::max(0.0, be.first);
            c_e_[i] = std::max(0.0, be.second);
        }
        c_b_[0] = 0.0; // C_BS(t*) = 0 by the definition of t*
        y_ = 0.0;
        uptake_acc_ = p_.alpha * p_.c_a_inf * t_star_; // surface-reaction phase
        plane_a_acc_ = p_.alpha * p_.c_a_inf * t_star_;
        plane_b_acc_ = p_.alpha * p_.c_a_inf * t_star_;
        supply_b_acc_ = 0.0;
        leak_e_acc_ = 0.0;
    }

    double front_e_value() const
    {
        const int j0 = std::min(static_cast<int>(std::floor(y_ / dx_)) + 1, n_ - 2);
        return detail::lagrange3_value(x_of(j0), c_e_[j0], x_of(j0 + 1), c_e_[j0 + 1],
                                       x_of(j0 + 2), c_e_[j0 + 2], y_);
    }

    /// Finite-volume mass convention: each control volume is piecewise
    /// constant at its nodal value except next to the plane, where the
    /// density tapers linearly to zero (the plane concentration). The
    /// old-time masses and the swept strip are integrals of this density,
    /// so the cut-cell budget telescopes exactly across steps.
    double density_b_old(double x) const
    {
        const int j1_old = static_cast<int>(std::floor(y_ / dx_));
        const int j0_old = j1_old + 1;
        if (x <= y_) return 0.0;
        if (x < x_of(j0_old)) // taper of the old cut cell
            return c_b_[j0_old] * (x - y_) / (x_of(j0_old) - y_);
        const int j = std::min(static_cast<int>(std::floor(x / dx_ + 0.5)), n_);
        return c_b_[j];
    }

    double old_mass_b(double lo, double hi) const
    {
        if (hi <= lo) return 0.0;
        // integrate the piecewise density: linear on [y_old, x_j0_old],
        // piecewise constant beyond (breaks at volume faces)
        const int j1_old = static_cast<int>(std::floor(y_ / dx_));
        const int j0_old = j1_old + 1;
        double acc = 0.0;
        const double taper_hi = std::min(hi, x_of(j0_old));
        const double taper_lo = std::max(lo, y_);
        if (taper_hi > taper_lo) {
            const double mid = 0.5 * (taper_lo + taper_hi);
            acc += density_b_old(mid) * (taper_hi - taper_lo); // exact for linear
        }
        double seg_lo = std::max(lo, x_of(j0_old));
        for (int j = j0_old; j <= n_ && seg_lo < hi; ++j) {
            const double v_hi = j == n_ ? x_of(n_) : x_of(j) + 0.5 * dx_;
            const double b = std::min(hi, v_hi);
            if (b > seg_lo) acc += c_b_[j] * (b - seg_lo);
            seg_lo = std::max(seg_lo, v_hi);
        }
        return acc;
    }

    double old_mass_a(double lo, double hi) const
    {
        if (hi <= lo) return 0.0;
        const int j1_old = static_cast<int>(std::floor(y_ / dx_));
        if (j1_old > n_) return 0.0;
        double acc = 0.0;
        // constant pieces up to the old cut node, then the taper to the plane
        double seg_lo = lo;
        for (int j = 0; j <= std::min(j1_old, n_) && seg_lo < hi; ++j) {
            const double v_hi = j == j1_old ? x_of(j1_old) : x_of(j) + 0.5 * dx_;
            const double b = std::min(hi, v_hi);
            if (b > seg_lo) acc += c_a_[j] * (b - seg_lo);
            seg_lo = std::max(seg_lo, v_hi);
        }
        const double taper_lo = std::max(lo, x_of(std::max(j1_old, 0)));
        const double taper_hi = std::min(hi, y_);
        if (j1_old >= 0 && taper_hi > taper_lo && y_ > x_of(j1_old)) {
            const double mid = 0.5 * (taper_lo + taper_hi);
            const double rho = c_a_[j1_old] * (y_ - mid) / (y_ - x_of(j1_old));
            acc += rho * (taper_hi - taper_lo);
        }
        return acc;
    }

    /// time weight of one face: backward Euler within the front band, else CN
    double face_theta(double face_x, double y_new) const
    {
        const double band = 3.0 * dx_;
        if (std::abs(face_x - y_new) <= band || std::abs(face_x - y_) <= band) return 1.0;
        return 0.5;
    }

    // -------------------------------------------------------------- B solve
    /// zone II nodes j0..n with a cut cell at j0 against the plane; returns
    /// the plane-face arrival rate (the implied discrete consumption of B)
    double solve_b(std::vector<double>& b, const std::vector<double>& e_new, double y,
                   double dt) const
    {
        const auto& d = p_.diffusion_be;
        const int j1 = static_cast<int>(std::floor(y / dx_));
        const int j0 = j1 + 1;
        if (j0 >= n_ - 2)
            throw solver_error("zone II collapsed; plane too close to the far boundary");
        const int m = n_ - j0 + 1;
        casim::detail::Tridiagonal sys(m);

        // dB/dx at the plane from the quadratic (y: 0, x_j0, x_j0+1)
        const double z0 = y, z1 = x_of(j0), z2 = x_of(j0 + 1);
        const double cb1 = (z0 - z2) / ((z1 - z0) * (z1 - z2)); // coefficient of u_j0
        const double cb2 = (z0 - z1) / ((z2 - z0) * (z2 - z1)); // coefficient of u_j0+1
        const double de_plane = detail::lagrange3_deriv(z1, e_new[j0], z2, e_new[j0 + 1],
                                                        x_of(j0 + 2), e_new[j0 + 2], y);
        // tapered cut volume: linear rise over [y, x_j0] plus the half cell
        const double cut_volume = 0.5 * (x_of(j0) - y) + 0.5 * dx_;
        const double m_old = old_mass_b(y, x_of(j0) + 0.5 * dx_);

        auto cross_new = [&](int i) { // face i+1/2, +x flux from the E iterate
            return -d.d12 * (e_new[i + 1] - e_new[i]) / dx_;
        };
        auto cross_old = [&](int i) { return -d.d12 * (c_e_[i + 1] - c_e_[i]) / dx_; };
        auto main_old = [&](int i) { return -d.d11 * (c_b_[i + 1] - c_b_[i]) / dx_; };

        for (int k = 0; k < m; ++k) {
            const int node = j0 + k;
            if (node == n_) {
                sys.diag(k) = 1.0;
                sys.rhs(k) = p_.c_b_inf;
                continue;
            }
            const double vol = node == j0 ? cut_volume : dx_;
            const double old_mass = node == j0 ? m_old : dx_ * c_b_[node];
            double diag = vol / dt, lower = 0.0, upper = 0.0, rhs = old_mass / dt;

            if (node == j0) {
                // plane face, backward Euler: inflow +F with
                // F = -(Dbb dB + Dbe dE)|_y and dB implicit via cb1, cb2
                diag += d.d11 * cb1;
                upper += d.d11 * cb2;
                rhs += -d.d12 * de_plane;
            } else {
                const double th = face_theta(x_of(node) - 0.5 * dx_, y);
                diag += th * d.d11 / dx_;
                lower += -th * d.d11 / dx_;
                rhs += th * cross_new(node - 1) +
                       (1.0 - th) * (main_old(node - 1) + cross_old(node - 1));
            }
            {
                const double th = face_theta(x_of(node) + 0.5 * dx_, y);
                diag += th * d.d11 / dx_;
                if (node + 1 == n_) rhs += th * d.d11 / dx_ * p_.c_b_inf;
                else upper += -th * d.d11 / dx_;
                rhs += -th * cross_new(node) -
                       (1.0 - th) * (main_old(node) + cross_old(node));
            }
            sys.diag(k) = diag;
            sys.lower(k) = lower;
            sys.upper(k) = upper;
            sys.rhs(k) = rhs;
        }
        const auto sol = sys.solve();
        for (int k = 0; k < m; ++k) b[j0 + k] = sol[k];
        for (int i = 0; i <= j1; ++i) b[i] = 0.0;

        const double db_plane = cb1 * b[j0] + cb2 * b[j0 + 1];
        return d.d11 * db_plane + d.d12 * de_plane; // arrival rate R_B
    }

    // -------------------------------------------------------------- A solve
    struct ASolve {
        double r_a = 0.0;
        double c_as = 0.0;
        double uptake = 0.0;
        bool bootstrap = false;
    };

    ASolve solve_a(std::vector<double>& a, const std::vector<double>& e_new, double y,
                   double dt) const
    {
        const auto& d = p_.diffusion_ae;
        const double phi0 = p_.alpha * p_.c_a_inf;
        const double kappa = p_.alpha * p_.c_a_inf * p_.henry / p_.p_a;
        const int j1 = static_cast<int>(std::floor(y / dx_));
        ASolve out;

        if (j1 < 1) {
            // quasi-steady thin zone: the no-escape condition for E forces
            // E' = -(D_EA/D_EE) A', which cancels the E flux through the zone
            // and leaves A with the effective diffusivity det(D)/D_EE
            out.bootstrap = true;
            const double d_eff = d.det() / d.d22;
            const double slope = phi0 / (d_eff + kappa * y);
            out.c_as = slope * y;
            out.r_a = d_eff * slope;
            out.uptake = gas_uptake(out.c_as);
            std::fill(a.begin(), a.end(), 0.0);
            a[0] = out.c_as;
            return out;
        }

        const int m = j1 + 1;
        casim::detail::Tridiagonal sys(m);

        // dA/dx at the plane from the quadratic (x_j1-1, x_j1, y: 0)
        const double z0 = x_of(j1 - 1), z1 = x_of(j1), z2 = y;
        const double ca0 = (z2 - z1) / ((z0 - z1) * (z0 - z2));
        const double ca1 = (z2 - z0) / ((z1 - z0) * (z1 - z2));
        double de_plane;
        if (j1 >= 2)
            de_plane = detail::lagrange3_deriv(x_of(j1 - 2), e_new[j1 - 2], z0, e_new[j1 - 1],
                                               z1, e_new[j1], y);
        else
            de_plane = (e_new[j1] - e_new[0]) / dx_;

        const double cut_volume = 0.5 * (y - x_of(j1)) + 0.5 * dx_;
        const double m_old = old_mass_a(x_of(j1) - 0.5 * dx_, y);

        auto cross_new = [&](int i) { return -d.d12 * (e_new[i + 1] - e_new[i]) / dx_; };

        // zone I stays backward Euler throughout; it is thin
        for (int k = 0; k < m; ++k) {
            const double vol = k == 0 ? 0.5 * dx_ : (k == j1 ? cut_volume : dx_);
            const double old_mass = k == 0 ? 0.5 * dx_ * c_a_[0]
                                           : (k == j1 ? m_old : dx_ * c_a_[k]);
            double diag = vol / dt, lower = 0.0, upper = 0.0, rhs = old_mass / dt;

            if (k == 0) {
                diag += kappa; // gas-side Robin uptake, implicit in A_0
                rhs += phi0;
            } else {
                diag += d.d11 / dx_;
                lower += -d.d11 / dx_;
                rhs += cross_new(k - 1);
            }
            if (k == j1) {
                // plane face: the update carries +F_R = -(Daa dA + Dae dE)|_y
                lower += -d.d11 * ca0;
                diag += -d.d11 * ca1;
                rhs += d.d12 * de_plane;
            } else {
                diag += d.d11 / dx_;
                upper += -d.d11 / dx_;
                rhs += -cross_new(k);
            }
            sys.diag(k) = diag;
            sys.lower(k) = lower;
            sys.upper(k) = upper;
            sys.rhs(k) = rhs;
        }
        const auto sol = sys.solve();
        for (int k = 0; k < m; ++k) a[k] = sol[k];
        for (int i = j1 + 1; i <= n_; ++i) a[i] = 0.0;

        const double da_plane = ca0 * a[j1 - 1] + ca1 * a[j1];
        out.r_a = -(d.d11 * da_plane + d.d12 * de_plane);
        out.c_as = a[0];
        out.uptake = gas_uptake(out.c_as);
        return out;
    }

    // -------------------------------------------------------------- E solve
    /// one continuous field over the whole layer; cross-diffusion enters via
    /// face fluxes from whichever species lives on that side of the plane,
    /// and the reaction feeds the two nodes bracketing the plane with the
    /// exactly stoichiometric production R_A + R_B
    double solve_e(std::vector<double>& e, const std::vector<double>& a_new,
                   const std::vector<double>& b_new, double y, double production,
                   double dt, bool bootstrap) const
    {
        const double dee = p_.diffusion_be.d22;
        const double deb = p_.diffusion_be.d21;
        const double dea = p_.diffusion_ae.d21;
        const int j1 = static_cast<int>(std::floor(y / dx_));
        const int j1_old = static_cast<int>(std::floor(y_ / dx_));
        casim::detail::Tridiagonal sys(n_ + 1);

        auto cross_new = [&](int i) { // face i+1/2
            if (i >= j1 + 1) return -deb * (b_new[i + 1] - b_new[i]) / dx_;
            if (i + 1 <= j1 && !bootstrap) return -dea * (a_new[i + 1] - a_new[i]) / dx_;
            return 0.0;
        };
        auto cross_old = [&](int i) {
            if (i >= j1_old + 1) return -deb * (c_b_[i + 1] - c_b_[i]) / dx_;
            if (i + 1 <= j1_old && j1_old >= 1) return -dea * (c_a_[i + 1] - c_a_[i]) / dx_;
            return 0.0;
        };
        auto main_old = [&](int i) { return -dee * (c_e_[i + 1] - c_e_[i]) / dx_; };

        const double frac = y / dx_ - j1; // deposition split between j1 and j1+1

        for (int i = 0; i <= n_; ++i) {
            if (i == n_) {
                sys.diag(i) = 1.0;
                sys.rhs(i) = 0.0;
                continue;
            }
            const double vol = i == 0 ? 0.5 * dx_ : dx_;
            double diag = vol / dt, lower = 0.0, upper = 0.0;
            double rhs = vol / dt * c_e_[i];

            if (i > 0) { // left face (the surface face carries no E flux)
                const double th = face_theta(x_of(i) - 0.5 * dx_, y);
                diag += th * dee / dx_;
                lower += -th * dee / dx_;
                rhs += th * cross_new(i - 1) +
                       (1.0 - th) * (main_old(i - 1) + cross_old(i - 1));
            }
            { // right face
                const double th = face_theta(x_of(i) + 0.5 * dx_, y);
                diag += th * dee / dx_;
                if (i + 1 < n_) upper += -th * dee / dx_;
                rhs += -th * cross_new(i) - (1.0 - th) * (main_old(i) + cross_old(i));
            }
            if (i == j1) rhs += production * (1.0 - frac);
            if (i == j1 + 1) rhs += production * frac;

            sys.diag(i) = diag;
            sys.lower(i) = lower;
            sys.upper(i) = upper;
            sys.rhs(i) = rhs;
        }
        const auto sol = sys.solve();
        double change = 0.0;
        for (int i = 0; i <= n_; ++i) {
            change = std::max(change, std::abs(sol[i] - e[i]));
            e[i] = sol[i];
        }
        return change;
    }

    // ------------------------------------------------------ one trial solve
    Trial evaluate(double y_try, double dt) const
    {
        Trial t;
        t.y = y_try;
        t.a = c_a_;
        t.b = c_b_;
        t.e = c_e_;
        const double scale = std::max({p_.c_b_inf, max_product_surface_conc(p_, c_), 1.0});
        // standing B mass swept by the advancing plane reacts along with the
        // flux-borne supply; it joins the Stefan balance and the E source
        t.swept_b = old_mass_b(y_, y_try);
        const double sweep_rate = t.swept_b / dt;
        for (int it = 0; it < o_.max_sweep_iters; ++it) {
            const double r_b = solve_b(t.b, t.e, y_try, dt);
            const auto a = solve_a(t.a, t.e, y_try, dt);
            const double change =
                solve_e(t.e, t.a, t.b, y_try, a.r_a + r_b + sweep_rate, dt, a.bootstrap);
            t.r_a = a.r_a;
            t.r_b = r_b;
            t.c_as = a.c_as;
            t.uptake = a.uptake;
            t.bootstrap = a.bootstrap;
            if (change < o_.sweep_tol * scale) break;
            if (it + 1 == o_.max_sweep_iters)
                throw solver_error("separate-driving iteration did not converge");
        }
        const auto& d = p_.diffusion_be;
        const double db = (t.b[n_] - t.b[n_ - 1]) / dx_;
        const double de = (t.e[n_] - t.e[n_ - 1]) / dx_;
        t.far_b = d.d11 * db + d.d12 * de;    // inward B supply
        t.far_e = -(d.d21 * db + d.d22 * de); // outward E leak
        const double denom = std::max({t.r_a, t.r_b, 1e-12 * p_.alpha * p_.c_a_inf});
        t.residual = std::abs(t.r_a - t.r_b - sweep_rate) / denom;
        return t;
    }

    Trial advance(double dt)
    {
        const double move_cap = 2.0 * std::max(o_.max_cell_crossing, 1.0) * dx_;
        Trial ta = evaluate(nudge(y_), dt);
        if (ta.residual <= o_.interface_tol) {
            ta.velocity = 0.0; // fluxes balanced without moving: momentary stall
            return ta;
        }
        if (ta.r_a < ta.r_b + ta.swept_b / dt) {
            // Just after breakthrough the discrete B supply can still exceed
            // the gas-side delivery while the front sits inside the first
            // cells: the reaction is then effectively still pinned to the
            // surface. Hold the plane for this step; depletion lifts the
            // imbalance within a few steps.
            if (y_ < 2.0 * dx_) {
                ta.velocity = 0.0;
                ta.pinned = true;
                return ta;
            }
            throw solver_error("interface coordination: B arrival exceeds A arrival at the "
                               "current plane position");
        }
        double yb = std::min(y_ + move_cap, 0.95 * p_.layer_depth);
        Trial tb = evaluate(nudge(yb), dt);
        auto signed_r = [&](const Trial& t) { return t.r_a - t.r_b - t.swept_b / dt; };
        {
            // cheap pinning probe: if the balance flips within a millionth of
            // a cell, the plane is stationary at this step's resolution
            Trial tp = evaluate(nudge(y_ + 1e-6 * dx_), dt);
            if (signed_r(tp) <= 0.0) {
                ta.velocity = 0.0;
                ta.pinned = true;
                return ta;
            }
        }
        int expand = 0;
        while (signed_r(tb) > 0.0 && expand < 4) {
            yb = std::min(tb.y + move_cap, 0.95 * p_.layer_depth);
            tb = evaluate(nudge(yb), dt);
            ++expand;
        }
        if (signed_r(tb) > 0.0)
            throw solver_error("interface coordination: could not bracket the plane position");

        double ra = signed_r(ta);
        double rb = signed_r(tb);
        double lo = ta.y, hi = tb.y;
        Trial t_lo = ta; // last trial on the supply-excess side
        for (int it = 0; it < o_.max_interface_iters; ++it) {
            if (hi - lo < 1e-6 * dx_) {
                // the balance point collapsed onto the current position: the
                // plane is pinned at this step's resolution
                t_lo.velocity = (t_lo.y - y_) / dt;
                t_lo.pinned = true;
                return t_lo;
            }
            double y_try = hi - rb * (hi - lo) / (rb - ra + (rb == ra ? 1e-300 : 0.0));
            if (!(y_try > lo) || !(y_try < hi)) y_try = 0.5 * (lo + hi);
            Trial tc = evaluate(nudge(y_try), dt);
            if (tc.residual <= o_.interface_tol) {
                tc.velocity = (tc.y - y_) / dt;
                return tc;
            }
            const double rc = signed_r(tc);
            if (rc > 0.0) {
                lo = tc.y;
                ra = rc;
                t_lo = tc;
            } else {
                hi = tc.y;
                rb = rc;
            }
        }
        throw solver_error("interface coordination: plane iteration did not converge");
    }

    void commit(const Trial& t, double dt)
    {
        // accounting mirrors the scheme's own quadrature: surface and plane
        // faces are backward Euler, the far faces Crank-Nicolson
        const auto& d = p_.diffusion_be;
        const double db_old = (c_b_[n_] - c_b_[n_ - 1]) / dx_;
        const double de_old = (c_e_[n_] - c_e_[n_ - 1]) / dx_;
        const double far_b_old = d.d11 * db_old + d.d12 * de_old;
        const double far_e_old = -(d.d21 * db_old + d.d22 * de_old);
        supply_b_acc_ += 0.5 * (far_b_old + t.far_b) * dt;
        leak_e_acc_ += 0.5 * (far_e_old + t.far_e) * dt;
        uptake_acc_ += t.uptake * dt;
        plane_a_acc_ += t.r_a * dt;
        plane_b_acc_ += t.r_b * dt + t.swept_b;

        c_a_ = t.a;
        c_b_ = t.b;
        c_e_ = t.e;
        y_ = t.y;
    }

    MovingPlaneSolution::Snapshot make_snapshot(double t) const
    {
        MovingPlaneSolution::Snapshot snap;
        snap.t = t;
        snap.y = y_;
        snap.x.resize(n_ + 1);
        for (int i = 0; i <= n_; ++i) snap.x[i] = x_of(i);
        snap.c_a = c_a_;
        snap.c_b = c_b_;
        snap.c_e = c_e_;
        return snap;
    }

    void finalize(MovingPlaneSolution& sol) const
    {
        const auto& v = sol.velocity;
        if (!v.empty()) {
            // the sub-cell bootstrap steps are scheme start-up, not resolved
            // plane dynamics; the peak search begins once the plane has
            // cleared two cells
            std::size_t start = 0;
            while (start + 1 < v.size() && sol.plane[start] < 2.0 * dx_) ++start;
            sol.startup_steps = start;
            std::size_t k = start;
            for (std::size_t i = start + 1; i < v.size(); ++i)
                if (v[i] > v[k]) k = i;
            auto mid = [&](std::size_t i) {
                const double t_hi = sol.times[i];
                const double t_lo = i == 0 ? sol.t_star : sol.times[i - 1];
                return 0.5 * (t_lo + t_hi);
            };
            if (k > 0 && k + 1 < v.size()) {
                const double t0 = mid(k - 1), t1 = mid(k), t2 = mid(k + 1);
                const double f0 = v[k - 1], f1 = v[k], f2 = v[k + 1];
                const double denom = (t0 - t1) * (t0 - t2) * (t1 - t2);
                const double aa = (t2 * (f1 - f0) + t1 * (f0 - f2) + t0 * (f2 - f1)) / denom;
                const double bb = (t2 * t2 * (f0 - f1) + t1 * t1 * (f2 - f0) +
                                   t0 * t0 * (f1 - f2)) /
                                  denom;
                sol.t_p = std::abs(aa) > 0.0 ? -bb / (2.0 * aa) : t1;
            } else {
                sol.t_p = mid(k);
            }
            sol.h_p = sol.plane[k];
            for (std::size_t i = 1; i < sol.times.size(); ++i) {
                if (sol.times[i] >= sol.t_p) {
                    const double w = (sol.t_p - sol.times[i - 1]) /
                                     (sol.times[i] - sol.times[i - 1]);
                    sol.h_p = sol.plane[i - 1] + w * (sol.plane[i] - sol.plane[i - 1]);
                    break;
                }
            }
        }

        sol.absorbed_a = uptake_acc_;
        double stored_a = 0.0, stored_e = 0.0, deficit_b = 0.0;
        for (int i = 1; i <= n_; ++i) {
            stored_a += 0.5 * (c_a_[i] + c_a_[i - 1]) * dx_;
            stored_e += 0.5 * (c_e_[i] + c_e_[i - 1]) * dx_;
            deficit_b += 0.5 * ((p_.c_b_inf - c_b_[i]) + (p_.c_b_inf - c_b_[i - 1])) * dx_;
        }
        sol.stored_a = stored_a;
        sol.stored_e = stored_e;
        sol.boundary_supply_b = supply_b_acc_;
        sol.boundary_leak_e = leak_e_acc_;
        sol.consumed_b = deficit_b + supply_b_acc_;
        sol.plane_flux_a = plane_a_acc_;
        sol.plane_flux_b = plane_b_acc_;
    }

    SorptionParams p_;
    LaplaceCoefficients c_;
    MovingPlaneOptions o_;
    int n_;
    double dx_;
    double t_star_ = 0.0;

    std::vector<double> c_a_, c_b_, c_e_;
    double y_ = 0.0;
    double uptake_acc_ = 0.0;
    double plane_a_acc_ = 0.0;
    double plane_b_acc_ = 0.0;
    double supply_b_acc_ = 0.0;
    double leak_e_acc_ = 0.0;
};

inline MovingPlaneSolution solve_moving_plane(const SorptionParams& params,
                                              const LaplaceCoefficients& coeffs,
                                              const MovingPlaneOptions& options)
{
    MovingPlaneSolver solver(params, coeffs, options);
    return solver.run();
}

} // namespace casim::sorption
