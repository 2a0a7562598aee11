#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "casim/micromixing.hpp"
#include "casim/packing.hpp"
#include "casim/reactor.hpp"
#include "casim/scale_effect.hpp"
#include "casim/sorption_analytic.hpp"
#include "casim/tridiag.hpp"

namespace casim::verify {

namespace detail {

struct Reporter {
    std::ostream& out;
    bool all_ok = true;

    void check(const std::string& name, bool ok, double metric)
    {
        out << (ok ? "ok   " : "FAIL ") << name << " (" << metric << ")\n";
        all_ok = all_ok && ok;
    }
};

/// Brute-force Crank-Nicolson solve of the coupled pre-breakthrough system
/// with the constant-flux surface conditions; independent of the analytic
/// path it cross-checks.
struct SurfacePhaseFd {
    std::vector<double> x, c_b, c_e;
    double dx = 0.0;

    SurfacePhaseFd(const sorption::SorptionParams& p, double domain, int cells, double t_end,
                   int steps)
        : x(cells + 1), c_b(cells + 1, p.c_b_inf), c_e(cells + 1, 0.0),
          dx(domain / cells)
    {
        for (int i = 0; i <= cells; ++i) x[i] = i * dx;
        const auto& d = p.diffusion_be;
        const double dt = t_end / steps;
        const double inv = 1.0 / (dx * dx);
        const double flux_b = p.alpha * p.c_a_inf;        // D_BB B' + D_BE E' =  flux_b
        const double flux_e = -2.0 * p.alpha * p.c_a_inf; // D_EB B' + D_EE E' = -2 flux_b
        // ghost values from the flux conditions: the gradient pair at x = 0
        // solves the 2x2 system above
        const double det = d.d11 * d.d22 - d.d12 * d.d21;
        const double gb = (d.d22 * flux_b - d.d12 * flux_e) / det;  // B'(0)
        const double ge = (-d.d21 * flux_b + d.d11 * flux_e) / det; // E'(0)

        const int n = cells + 1;
        casim::detail::Tridiagonal sys(n);
        std::vector<double> b_new = c_b, e_new = c_e;
        for (int step = 0; step < steps; ++step) {
            for (int sweep = 0; sweep < 60; ++sweep) {
                auto solve_one = [&](const std::vector<double>& u_old,
                                     const std::vector<double>& partner_new,
                                     const std::vector<double>& partner_old, double dm,
                                     double dc, double ghost_self, double ghost_partner,
                                     double far_value) {
                    sys.clear();
                    for (int i = 0; i < n; ++i) {
                        if (i == n - 1) {
                            sys.diag(i) = 1.0;
                            sys.rhs(i) = far_value;
                            continue;
                        }
                        double lap_old_self, lap_new_partner, lap_old_partner;
                        double dl = 0.0, dcen, dr;
                        double rhs_extra = 0.0;
                        if (i == 0) {
                            // mirror-with-slope ghost: u(-1) = u(1) - 2 dx * grad
                            dcen = -2.0 * inv;
                            dr = 2.0 * inv;
                            rhs_extra = -2.0 * ghost_self / dx;
                            lap_old_self = (2.0 * u_old[1] - 2.0 * u_old[0]) * inv -
                                           2.0 * ghost_self / dx;
                            lap_new_partner = (2.0 * partner_new[1] - 2.0 * partner_new[0]) * inv -
                                              2.0 * ghost_partner / dx;
                            lap_old_partner = (2.0 * partner_old[1] - 2.0 * partner_old[0]) * inv -
                                              2.0 * ghost_partner / dx;
                        } else {
                            dl = inv;
                            dcen = -2.0 * inv;
                            dr = inv;
                            lap_old_self = (u_old[i - 1] - 2.0 * u_old[i] + u_old[i + 1]) * inv;
                            lap_new_partner =
                                (partner_new[i - 1] - 2.0 * partner_new[i] + partner_new[i + 1]) * inv;
                            lap_old_partner =
                                (partner_old[i - 1] - 2.0 * partner_old[i] + partner_old[i + 1]) * inv;
                        }
                        sys.diag(i) = 1.0 / dt - 0.5 * dm * dcen;
                        if (i > 0) sys.lower(i) = -0.5 * dm * dl;
                        sys.upper(i) = -0.5 * dm * dr;
                        sys.rhs(i) = u_old[i] / dt +
                                     0.5 * (dm * (lap_old_self) + dm * rhs_extra +
                                            dc * (lap_new_partner + lap_old_partner));
                    }
                    auto sol = sys.solve();
                    std::vector<double> next(sol.begin(), sol.end());
                    return next;
                };
                const std::vector<double> b_prev = b_new, e_prev = e_new;
                b_new = solve_one(c_b, e_new, c_e, d.d11, d.d12, gb, ge, p.c_b_inf);
                e_new = solve_one(c_e, b_new, c_b, d.d22, d.d21, ge, gb, 0.0);
                double change = 0.0;
                for (int i = 0; i < n; ++i)
                    change = std::max(change, std::abs(b_new[i] - b_prev[i]) +
                                                  std::abs(e_new[i] - e_prev[i]));
                if (change < 1e-13 * p.c_b_inf) break;
            }
            c_b = b_new;
            c_e = e_new;
        }
    }

    double sample(const std::vector<double>& f, double at) const
    {
        const double s = at / dx;
        const std::size_t i = std::min(static_cast<std::size_t>(s), f.size() - 2);
        const double w = s - static_cast<double>(i);
        return f[i] * (1.0 - w) + f[i + 1] * w;
    }
};

} // namespace detail

inline bool verify_sorption(std::ostream& out)
{
    detail::Reporter rep{out};
    sorption::SorptionParams p;
    p.diffusion_be = {1.5e-9, 0.25e-9, 0.12e-9, 1.0e-9};
    p.diffusion_ae = {1.73e-9, 0.1e-9, 0.05e-9, 1.0e-9};
    p.alpha = 2e-3;
    p.c_a_inf = 0.4;
    p.c_b_inf = 50.0;
    p.henry = 2.0;
    p.p_a = 1000.0;
    p.layer_depth = 1e-3;

    const auto coeffs = sorption::derive_laplace_coefficients(p);
    const double t_star = sorption::compute_tstar(p, coeffs);
    const double mu_max = 1.0 / std::min(coeffs.s1, coeffs.s2);
    const double domain = 14.0 * std::sqrt(mu_max * t_star);
    detail::SurfacePhaseFd fd(p, domain, 1600, t_star, 1200);

    double worst = 0.0;
    for (double frac : {0.1, 0.35, 0.7, 1.0}) {
        const double xx = frac * 4.0 * std::sqrt(mu_max * t_star);
        const auto an = sorption::pre_tstar_profiles(p, coeffs, xx, t_star);
        const double b_fd = fd.sample(fd.c_b, xx);
        const double e_fd = fd.sample(fd.c_e, xx);
        worst = std::max(worst, std::abs(an.first - b_fd) / p.c_b_inf);
        worst = std::max(worst, std::abs(an.second - e_fd) /
                                    std::max(std::abs(e_fd), 1e-3 * p.c_b_inf));
    }
    rep.check("surface-phase profiles vs finite-difference oracle", worst < 1e-3, worst);

    const double cbs_fd = fd.c_b[0];
    rep.check("surface B depleted at t* in the oracle",
              std::abs(cbs_fd) < 0.02 * p.c_b_inf, cbs_fd / p.c_b_inf);

    const auto ces = sorption::surface_concentrations(p, coeffs, t_star).second;
    const double ces_closed = sorption::max_product_surface_conc(p, coeffs);
    const double rel = std::abs(ces - ces_closed) / ces_closed;
    rep.check("surface E maximum consistent with the closed form", rel < 1e-12, rel);
    return rep.all_ok;
}

inline bool verify_reactor(std::ostream& out)
{
    detail::Reporter rep{out};
    reactor::ReactorConfig cfg;
    cfg.d_x = 1e-5;
    cfg.d_y = 2e-5;
    cfg.chi_bar = 1.5e-5;
    cfg.flow_velocity = 0.0;
    cfg.rho_bar = 1000.0;
    cfg.cp_bar = 4000.0;
    cfg.delta_h = 0.0;
    cfg.length = 1.0;
    cfg.c_x0 = 100.0;
    cfg.kinetics = {0.5, 0.0, 0.25, 0.0};

    reactor::BoundarySpec bc;
    bc.kind = reactor::BoundaryKind::zero_flux;
    const int n = 64;
    reactor::ReactorState init;
    init.c_x.assign(n, 0.0);
    init.c_y.assign(n, 0.0);
    init.temperature.assign(n, 300.0);
    for (int i = 0; i < n; ++i) {
        const double z = i / double(n - 1);
        init.c_x[i] = 100.0 * (1.0 + 0.3 * std::cos(M_PI * z));
        init.c_y[i] = 20.0 * (1.0 - z);
    }
    reactor::TransientOptions opts;
    opts.dt = 2e-3;
    opts.t_end = 0.5;
    opts.record_every = 50;
    const auto series = reactor::simulate_transient(cfg, bc, init, opts);

    auto total = [&](const reactor::ReactorState& st) {
        std::vector<double> sum(st.c_x.size());
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = st.c_x[i] + st.c_y[i];
        return integrate(series.grid, sum);
    };
    const double drift = std::abs(total(series.states.back()) - total(series.states.front())) /
                         total(series.states.front());
    rep.check("mass conservation drift (zero-flux, dH=0)", drift < 1e-8, drift);

    // analytic source Jacobian against central finite differences
    reactor::detail::ReactorOperator op;
    op.cfg = &cfg;
    double worst = 0.0;
    const double cx = 40.0, cy = 70.0, tt = 320.0;
    const auto jac = op.source_jacobian(cx, cy, tt);
    const double steps[3] = {1e-4 * cx, 1e-4 * cy, 1e-4 * tt};
    for (int col = 0; col < 3; ++col) {
        double vp[3] = {cx, cy, tt}, vm[3] = {cx, cy, tt};
        vp[col] += steps[col];
        vm[col] -= steps[col];
        const auto sp = op.source(vp[0], vp[1], vp[2]);
        const auto sm = op.source(vm[0], vm[1], vm[2]);
        for (int row = 0; row < 3; ++row) {
            const double fd = (sp[row] - sm[row]) / (2.0 * steps[col]);
            const double scale = std::max(std::abs(jac(row, col)), 1e-8);
            worst = std::max(worst, std::abs(fd - jac(row, col)) / scale);
        }
    }
    rep.check("stability Jacobian vs finite differences", worst < 1e-6, worst);

    // k = 0 kinetic block: one conserved mode and one relaxing at -(k1+k2)
    reactor::UniformState us;
    us.temperature = 300.0;
    const double k1 = arrhenius_rate(cfg.kinetics, us.temperature, reactor::Branch::forward);
    const double k2 = arrhenius_rate(cfg.kinetics, us.temperature, reactor::Branch::reverse);
    us.c_x = 100.0;
    us.c_y = us.c_x * k1 / k2;
    const auto res = reactor::linear_stability(cfg, us, {0.0});
    double zero_mode = 1e300, relax = 1e300;
    for (const auto& sig : res[0].sigma) {
        zero_mode = std::min(zero_mode, std::abs(sig));
        relax = std::min(relax, std::abs(sig - std::complex<double>(-(k1 + k2), 0.0)));
    }
    rep.check("k=0 conserved kinetic mode", zero_mode < 1e-12 * (k1 + k2), zero_mode);
    rep.check("k=0 relaxation eigenvalue -(k1+k2)", relax < 1e-10 * (k1 + k2), relax);
    return rep.all_ok;
}

inline bool verify_mixing(std::ostream& out)
{
    detail::Reporter rep{out};
    double worst = 0.0;
    for (double gamma : {0.0, 0.05, 0.4}) {
        for (double lambda : {0.0, 2.0, 11.0}) {
            mixing::MixingModel m;
            m.volume = 0.67;
            m.t_bar = 7.0;
            m.gamma = gamma;
            const double got = mixing::segregation_transfer_rate(m, lambda, 0.5);
            const double want = m.volume * 0.5 * std::exp(-lambda / m.t_bar) /
                                (gamma * m.t_bar * m.t_bar + m.t_bar);
            worst = std::max(worst, std::abs(got - want) / want);
        }
    }
    rep.check("transfer rate vs exponential closed form", worst < 1e-12, worst);

    // tabulated path against the same closed form
    mixing::MixingModel m;
    m.volume = 1.0;
    m.t_bar = 5.0;
    m.gamma = 0.12;
    m.rtd.kind = mixing::Rtd::Kind::tabulated;
    const int pts = 4000;
    const double span = 90.0;
    for (int i = 0; i <= pts; ++i) {
        const double a = span * i / pts;
        m.rtd.age.push_back(a);
        m.rtd.density.push_back(std::exp(-a / m.t_bar) / m.t_bar);
    }
    const double norm = 1.0 - std::exp(-span / m.t_bar);
    for (auto& f : m.rtd.density) f /= norm;
    const double got = mixing::segregation_transfer_rate(m, 3.0, 1.0);
    const double want = m.volume * std::exp(-3.0 / m.t_bar) /
                        (m.gamma * m.t_bar * m.t_bar + m.t_bar);
    const double rel = std::abs(got - want) / want;
    rep.check("tabulated quadrature vs closed form", rel < 1e-4, rel);
    return rep.all_ok;
}

inline bool verify_packing(std::ostream& out)
{
    detail::Reporter rep{out};
    const auto g = packing::make_geometry(1.0, 0.05, 0.1, 40, packing::WallRule::reflect);
    const auto layout = packing::make_centered_layout(g, 1e-3);
    const auto f1 = packing::random_walk_simulate(g, layout, 200'000, 1234);
    const auto f2 = packing::random_walk_simulate(g, layout, 200'000, 1234);
    bool identical = f1.raw() == f2.raw();
    rep.check("seeded rerun bit-identical", identical, identical ? 0.0 : 1.0);

    double worst_cons = 0.0;
    for (int level = 0; level < f1.levels(); ++level)
        worst_cons = std::max(worst_cons,
                              std::abs(f1.level_flow(level) - layout.total_flow) /
                                  layout.total_flow);
    rep.check("per-level flow conservation (reflect)", worst_cons < 1e-12, worst_cons);

    // shape against the image formula at two depths
    double worst_l1 = 0.0;
    for (int level : {10, 30}) {
        const double z = f1.depth(level);
        std::vector<double> ref(f1.cells());
        double ref_flow = 0.0, mc_flow = 0.0;
        for (int c = 0; c < f1.cells(); ++c) {
            const double r = std::abs(f1.cell_position(c) - g.column_diameter / 2.0);
            ref[c] = packing::analytic_intensity(r, z, layout.total_flow, g.layer_height,
                                                 g.unit_radius, g.column_diameter);
            ref_flow += ref[c] * f1.cell_width(c);
            mc_flow += f1.row(level)[c] * f1.cell_width(c);
        }
        double l1 = 0.0;
        for (int c = 0; c < f1.cells(); ++c)
            l1 += std::abs(f1.row(level)[c] / mc_flow - ref[c] / ref_flow) * f1.cell_width(c);
        worst_l1 = std::max(worst_l1, l1);
    }
    rep.check("single-source profile vs image formula (L1)", worst_l1 < 0.04, worst_l1);
    return rep.all_ok;
}

inline bool verify_scale(std::ostream& out)
{
    detail::Reporter rep{out};
    scale::ScaleEffectParams p;
    p.k_ms = 0.8;
    p.k_m = 1.0;
    p.source_flow = 1e-4;
    p.unit_radius = 0.05;
    p.source_step = 0.2;
    p.gas_flow = 0.4;
    p.cross_section = 1.2;
    p.k_bar = 0.8;
    p.height = 6.0;
    p.spreading_height = 2.0;
    p.absorption_factor = 1.7;
    p.htu_uniform = 0.5;

    const double gamma = scale::worsening_coefficient(p.k_ms, p.k_m);
    const double chi = scale::conversion_degree(p, gamma);
    const double n = scale::ntu_from_conversion(chi, p.absorption_factor);
    const double h_eff = n * p.gas_flow / (p.cross_section * p.k_bar);
    const double want = p.height - (1.0 - gamma) * p.spreading_height;
    const double rel = std::abs(h_eff - want) / want;
    rep.check("conversion <-> NTU round trip", rel < 1e-10, rel);

    const auto h = scale::transfer_unit_height(0.5, 0.8, 2.0, 4.0);
    rep.check("HTU penalty anchor", std::abs(h.delta_htu - 0.1) < 1e-15, h.delta_htu);

    scale::ScaleEffectParams p1 = p;
    p1.k_ms = p1.k_m; // gamma = 1 collapses the two-zone model
    const double chi1 = scale::conversion_degree(p1, 1.0);
    scale::ScaleEffectParams p_flat = p1;
    p_flat.spreading_height = p1.height; // irrelevant when gamma = 1
    const double chi2 = scale::conversion_degree(p_flat, 1.0);
    rep.check("gamma=1 one-zone collapse", std::abs(chi1 - chi2) < 1e-15,
              std::abs(chi1 - chi2));
    return rep.all_ok;
}

inline bool run_model(const std::string& model, std::ostream& out)
{
    if (model == "reactor") return verify_reactor(out);
    if (model == "sorption") return verify_sorption(out);
    if (model == "mixing") return verify_mixing(out);
    if (model == "packing") return verify_packing(out);
    if (model == "scale") return verify_scale(out);
    throw validation_error("verify: unknown model \"" + model + "\"");
}

} // namespace casim::verify
