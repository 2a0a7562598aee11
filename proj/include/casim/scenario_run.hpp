#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "casim/csv.hpp"
#include "casim/micromixing.hpp"
#include "casim/moving_plane.hpp"
#include "casim/packing.hpp"
#include "casim/reactor.hpp"
#include "casim/scale_effect.hpp"
#include "casim/scenario.hpp"
#include "casim/sorption_correlations.hpp"
#include "casim/verify.hpp"

namespace casim::scenario {

namespace fs = std::filesystem;

struct RunOverrides {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<bool> strict;
    std::optional<std::string> format;
};

namespace detail {

/// Writes a table either as CSV or as a JSON column/row document, honoring
/// the scenario's format choice.
inline void write_table(const fs::path& dir, const std::string& stem,
                        const std::string& format, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows)
{
    if (format == "json") {
        json j;
        j["columns"] = header;
        j["rows"] = rows;
        io::write_file_atomic(dir / (stem + ".json"), j.dump(2) + "\n");
        return;
    }
    io::CsvWriter csv(header);
    for (const auto& r : rows) csv.row_values(r);
    io::write_file_atomic(dir / (stem + ".csv"), csv.str());
}

// --- reactor ---------------------------------------------------------------

inline json run_reactor(const Scenario& s, const fs::path& dir)
{
    const auto& r = *s.reactor_block;
    json report;
    if (r.transient) {
        const auto& tb = *r.transient;
        const bool periodic = r.boundary.kind == reactor::BoundaryKind::periodic;
        const int n = tb.nodes;
        reactor::ReactorState init;
        init.c_x.assign(n, tb.initial_c_x);
        init.c_y.assign(n, tb.initial_c_y);
        init.temperature.assign(n, tb.initial_temperature);
        const double span = periodic ? r.config.length : r.config.length;
        for (int i = 0; i < n; ++i) {
            const double z = periodic ? i * r.config.length / n
                                      : i * r.config.length / (n - 1);
            init.c_x[i] += tb.perturbation_amplitude *
                           std::cos(2.0 * M_PI * tb.perturbation_mode * z / span);
        }
        reactor::TransientOptions opts;
        opts.dt = tb.dt;
        opts.t_end = tb.t_end;
        opts.record_every = tb.record_every;
        const auto series = reactor::simulate_transient(r.config, r.boundary, init, opts);

        std::vector<std::vector<double>> rows;
        for (std::size_t t = 0; t < series.times.size(); ++t)
            for (std::size_t i = 0; i < series.grid.size(); ++i)
                rows.push_back({series.times[t], series.grid[i], series.states[t].c_x[i],
                                series.states[t].c_y[i], series.states[t].temperature[i]});
        write_table(dir, "transient", s.output.format, {"t", "z", "C_X", "C_Y", "T"}, rows);
        report["transient"] = {{"steps_recorded", series.times.size()},
                               {"positivity_clipped", series.positivity_clipped}};
        if (tb.classify)
            report["classification"] = reactor::to_string(reactor::classify_structures(series));
    }
    if (r.stability) {
        const auto& sb = *r.stability;
        if (!(sb.k_min > 0.0) || !(sb.k_max > sb.k_min) || sb.samples < 2)
            throw validation_error("reactor.stability: need 0 < k_min < k_max and >= 2 samples");
        std::vector<double> ks(static_cast<std::size_t>(sb.samples));
        const double ratio = std::pow(sb.k_max / sb.k_min, 1.0 / (sb.samples - 1));
        double k = sb.k_min;
        for (auto& v : ks) {
            v = k;
            k *= ratio;
        }
        const auto res = reactor::linear_stability(r.config, sb.state, ks);
        std::vector<std::vector<double>> rows;
        for (const auto& sr : res)
            rows.push_back({sr.wavenumber, sr.sigma[0].real(), sr.sigma[1].real(),
                            sr.sigma[2].real(), sr.sigma[0].imag(), sr.sigma[1].imag(),
                            sr.sigma[2].imag()});
        write_table(dir, "stability", s.output.format,
                    {"k", "re_sigma1", "re_sigma2", "re_sigma3", "im_sigma1", "im_sigma2",
                     "im_sigma3"},
                    rows);
        if (sb.min_length) {
            const auto lmin = reactor::min_reactor_length(r.config, sb.state);
            if (lmin) report["min_reactor_length"] = *lmin;
            else report["min_reactor_length"] = "no structure";
        }
    }
    return report;
}

// --- sorption ----------------------------------------------------------------

inline sorption::MovingPlaneSolution run_one_sorption(const sorption::SorptionParams& params,
                                                      const SorptionScenario& sc)
{
    const auto coeffs = sorption::derive_laplace_coefficients(params);
    sorption::MovingPlaneOptions opts;
    opts.cells = sc.cells;
    const double t_star = sorption::compute_tstar(params, coeffs);
    opts.t_end = sc.t_end > 0.0 ? sc.t_end : t_star * sc.t_end_over_tstar;
    opts.snapshot_count = sc.snapshots;
    return sorption::solve_moving_plane(params, coeffs, opts);
}

inline void write_sorption_summary(const Scenario& s, const fs::path& dir,
                                   const std::string& stem,
                                   const sorption::MovingPlaneSolution& sol)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sol.times.size(); ++i)
        rows.push_back({sol.times[i], sol.plane[i], sol.velocity[i], sol.surface_a[i],
                        sol.surface_b[i], sol.front_e[i]});
    write_table(dir, stem, s.output.format, {"t", "y", "V_f", "C_AS", "C_BS", "C_Efr"}, rows);
}

inline json correlation_report(const sorption::SorptionParams& p, double t, bool strict)
{
    using namespace sorption;
    json out;
    out["inputs"] = {{"t", t}};
    auto put = [&](const char* name, auto fn) {
        try {
            const CorrelationValue v = fn();
            out[name] = {{"value", v.value}, {"extrapolated", v.extrapolated}};
            if (strict && v.extrapolated)
                throw correlation_range_error(std::string(name) +
                                              ": input outside the fitted parameter window");
        } catch (const correlation_range_error&) {
            if (strict) throw;
            out[name] = {{"error", "out of correlation range"}};
        }
    };
    const double d_a = p.diffusion_ae.d11, d_b = p.diffusion_be.d11, d_e = p.diffusion_be.d22;
    const auto tp = correlation_tp(p.c_b_inf, p.henry, p.p_a, d_a, d_b);
    put("t_p", [&] { return tp; });
    put("h_p", [&] { return correlation_hp(d_e, d_b, d_a); });
    put("surface_a", [&] { return correlation_surface_a(p.c_b_inf, p.henry, p.p_a, t, tp.value); });
    put("product_decay", [&] { return correlation_product_decay(d_e, d_a, t, tp.value); });
    put("liquid_mtc", [&] { return correlation_liquid_mtc(p.alpha, p.p_a, p.c_b_inf, p.henry); });
    return out;
}

inline json run_sorption(const Scenario& s, const fs::path& dir)
{
    const auto& sc = *s.sorption_block;
    json report;
    const auto coeffs = sorption::derive_laplace_coefficients(sc.params);
    report["t_star"] = sorption::compute_tstar(sc.params, coeffs);
    report["max_surface_e"] = sorption::max_product_surface_conc(sc.params, coeffs);

    if (!sc.sweep) {
        const auto sol = run_one_sorption(sc.params, sc);
        write_sorption_summary(s, dir, "summary", sol);
        report["t_p"] = sol.t_p;
        report["h_p"] = sol.h_p;
        report["max_velocity"] = sol.velocity.empty()
                                     ? 0.0
                                     : *std::max_element(sol.velocity.begin(), sol.velocity.end());
        report["max_flux_residual"] = sol.max_flux_residual;
        if (!sol.snapshots.empty()) {
            std::vector<std::vector<double>> rows;
            for (const auto& snap : sol.snapshots)
                for (std::size_t i = 0; i < snap.x.size(); ++i)
                    rows.push_back({snap.t, snap.x[i], snap.c_a[i], snap.c_b[i], snap.c_e[i],
                                    snap.x[i] <= snap.y ? 1.0 : 2.0});
            write_table(dir, "snapshots", s.output.format, {"t", "x", "C_A", "C_B", "C_E", "zone"},
                        rows);
        }
    } else {
        // figure-style sweep: one two-column series per parameter value
        json manifest = json::array();
        for (std::size_t i = 0; i < sc.sweep->values.size(); ++i) {
            const double v = sc.sweep->values[i];
            sorption::SorptionParams p = sc.params;
            std::string ycol;
            if (sc.sweep->parameter == "d_aa") {
                p.diffusion_ae.d11 = v;
                ycol = "V_f";
            } else if (sc.sweep->parameter == "p_a") {
                // bulk gas concentration scales with the partial pressure
                p.c_a_inf = sc.params.c_a_inf * v / sc.params.p_a;
                p.p_a = v;
                ycol = "C_AS";
            } else if (sc.sweep->parameter == "c_b_inf") {
                p.c_b_inf = v;
                ycol = "V_f";
            } else if (sc.sweep->parameter == "d_ee") {
                p.diffusion_be.d22 = v;
                p.diffusion_ae.d22 = v;
                ycol = "C_Efr";
            } else {
                throw validation_error("sorption.sweep: unknown parameter \"" +
                                       sc.sweep->parameter + "\"");
            }
            const auto sol = run_one_sorption(p, sc);
            std::vector<std::vector<double>> rows;
            for (std::size_t k = 0; k < sol.times.size(); ++k) {
                double y = 0.0;
                if (ycol == "V_f") y = sol.velocity[k];
                else if (ycol == "C_AS") y = sol.surface_a[k];
                else y = sol.front_e[k];
                rows.push_back({sol.times[k], y});
            }
            const std::string stem = "series_" + sc.sweep->parameter + "_" + std::to_string(i);
            write_table(dir, stem, s.output.format, {"t", ycol}, rows);
            manifest.push_back({{"file", stem}, {"value", v}, {"t_p", sol.t_p},
                                {"h_p", sol.h_p},
                                {"max_velocity",
                                 sol.velocity.empty()
                                     ? 0.0
                                     : *std::max_element(sol.velocity.begin(), sol.velocity.end())}});
        }
        report["sweep"] = manifest;
    }

    if (sc.correlation_time)
        report["correlations"] = correlation_report(sc.params, *sc.correlation_time, s.strict);
    return report;
}

// --- mixing ------------------------------------------------------------------

inline json run_mixing(const Scenario& s, const fs::path& dir)
{
    const auto& m = *s.mixing_block;
    json report;
    if (m.transfer) {
        const auto& tb = *m.transfer;
        if (!(tb.lambda_max > 0.0) || tb.samples < 2)
            throw validation_error("mixing.transfer: need lambda_max > 0 and >= 2 samples");
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < tb.samples; ++i) {
            const double lambda = tb.lambda_max * i / (tb.samples - 1);
            rows.push_back({lambda,
                            mixing::segregation_transfer_rate(m.model, lambda, tb.d_lambda)});
        }
        write_table(dir, "transfer", s.output.format, {"lambda", "dG"}, rows);
        report["transfer_samples"] = tb.samples;
    }
    if (!m.cells.empty()) {
        if (!m.inlet) throw validation_error("mixing: cells given but no inlet signal");
        const auto& in = *m.inlet;
        if (!(in.dt > 0.0) || !(in.t_end > in.dt))
            throw validation_error("mixing.inlet: need dt > 0 and t_end > dt");
        const std::size_t n = static_cast<std::size_t>(std::floor(in.t_end / in.dt)) + 1;
        std::vector<double> inlet(n, 0.0);
        if (in.kind == "impulse") inlet[0] = 1.0 / in.dt;
        else std::fill(inlet.begin(), inlet.end(), 1.0);
        const auto resp = mixing::cell_sequence_response(m.cells, inlet, in.dt);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < resp.size(); ++i)
            rows.push_back({static_cast<double>(i) * in.dt, resp[i]});
        write_table(dir, "response", s.output.format, {"t", "response"}, rows);
        report["cells"] = m.cells.size();
    }
    return report;
}

// --- packing -----------------------------------------------------------------

inline json run_packing(const Scenario& s, const fs::path& dir)
{
    const auto& p = *s.packing_block;
    json report;
    const auto geometry = packing::make_geometry(p.column_diameter, p.unit_radius,
                                                 p.layer_height, p.levels, p.wall_rule, p.kernel);
    packing::IrrigationLayout layout;
    if (p.layout.grid_n > 0) {
        layout = packing::make_interior_grid_layout(geometry, p.layout.grid_n,
                                                    p.layout.total_flow);
    } else {
        for (const auto& sp : p.layout.sources) layout.sources.push_back({sp.first, sp.second});
        layout.total_flow = p.layout.total_flow;
    }

    const auto field = packing::random_walk_simulate(geometry, layout, p.walkers, s.seed);

    std::vector<std::vector<double>> rows;
    for (int level = 0; level < field.levels(); ++level)
        for (int c = 0; c < field.cells(); ++c)
            rows.push_back({static_cast<double>(level), field.depth(level),
                            static_cast<double>(c), field.cell_position(c),
                            field.row(level)[c]});
    write_table(dir, "intensity", s.output.format, {"level", "z", "cell", "x", "intensity"},
                rows);

    std::vector<std::vector<double>> ku_rows;
    for (int level = 0; level < field.levels(); ++level) {
        const auto u = packing::unevenness_coefficient(field, level);
        ku_rows.push_back({static_cast<double>(level), field.depth(level),
                           u.dry ? -1.0 : u.max_over_min, u.axis_over_wall});
    }
    write_table(dir, "unevenness", s.output.format, {"level", "z", "k_u", "axis_over_wall"},
                ku_rows);

    const auto zone = packing::spreading_zone_from_field(field, p.k_u_target);
    const auto stab = packing::stabilized_radius_empirical(field);
    const auto r_last = field.row(field.levels() - 1);
    const double i_min = *std::min_element(r_last.begin(), r_last.end());
    report["lateral_cells"] = geometry.lateral_cells;
    report["pitch"] = geometry.pitch;
    report["p_side"] = geometry.p_side;
    report["H_s"] = zone.reached ? json(zone.height) : json("not reached");
    report["deepest_k_u"] = zone.deepest_k_u;
    report["R_a"] = stab.degenerate ? json("degenerate") : json(stab.r_a);
    report["H_a"] = stab.stabilized ? json(stab.h_a) : json("not stabilized");
    report["i_min"] = i_min;
    report["R_S_estimate"] = packing::characteristic_radius(p.column_diameter, p.unit_radius);

    if (p.fig8) {
        json manifest = json::array();
        for (std::size_t di = 0; di < p.fig8->d_over_a.size(); ++di) {
            const double ratio = p.fig8->d_over_a[di];
            std::vector<std::vector<double>> series;
            for (int n : p.fig8->n_values) {
                const double d = ratio * p.unit_radius;
                const int levels = std::max(30, static_cast<int>(std::ceil(
                                                    ratio * ratio / 4.64 * 1.6)) + 10);
                const auto g = packing::make_geometry(d, p.unit_radius, p.layer_height, levels,
                                                      packing::WallRule::reflect, p.kernel);
                const auto lay = packing::make_interior_grid_layout(g, n, p.layout.total_flow);
                const auto zone_n = packing::spreading_zone_height(g, lay, p.k_u_target,
                                                                   p.fig8->walkers, s.seed);
                series.push_back({static_cast<double>(n),
                                  zone_n.reached ? zone_n.height / p.layer_height : -1.0});
            }
            const std::string stem = "fig8_da_" + std::to_string(static_cast<int>(ratio));
            write_table(dir, stem, s.output.format, {"n", "Hs_over_h"}, series);
            manifest.push_back({{"file", stem}, {"d_over_a", ratio}});
        }
        report["fig8"] = manifest;
    }
    return report;
}

// --- scale -------------------------------------------------------------------

inline json run_scale(const Scenario& s, const fs::path& dir)
{
    const auto& p = s.scale_block->params;
    const auto r = scale::evaluate(p);
    std::vector<std::vector<double>> rows{{r.gamma, r.i_min, r.chi, r.ntu, r.htu, r.delta_htu}};
    write_table(dir, "report", s.output.format,
                {"gamma", "i_min", "chi", "N", "htu", "delta_htu"}, rows);
    json report;
    report["gamma"] = r.gamma;
    report["i_min"] = r.i_min;
    report["chi"] = r.chi;
    report["N"] = r.ntu;
    report["htu"] = r.htu;
    report["delta_htu"] = r.delta_htu;
    // interpretation choices recorded with the numbers they affect
    report["eq43_interpretation"] = "product: 4 I sqrt(a/(pi d0)) exp(-d0/(4a))";
    report["eq43_printed_reading"] =
        scale::min_local_intensity_printed(p.source_flow, p.unit_radius, p.source_step);
    report["eq44_interpretation"] = "effective height H - (1-gamma) H_s";
    return report;
}

} // namespace detail

/// Executes one scenario file. Returns the process exit code contract:
/// 0 success, 2 validation error, 3 solver failure, 4 hard correlation-range
/// stop under --strict. Errors are also emitted as one JSON diagnostic line
/// on stderr.
inline int run_scenario(const fs::path& path, const RunOverrides& overrides = {},
                        std::ostream& err = std::cerr)
{
    auto diag = [&](const char* type, const std::string& message) {
        json d;
        d["error"] = {{"type", type}, {"message", message}, {"scenario", path.string()}};
        err << d.dump() << "\n";
    };
    try {
        Scenario s = load_scenario(path);
        if (overrides.out_dir) s.output.dir = *overrides.out_dir;
        if (overrides.seed) {
            s.seed = *overrides.seed;
            s.seed_present = true;
        }
        if (overrides.strict) s.strict = *overrides.strict;
        if (overrides.format) {
            if (*overrides.format != "csv" && *overrides.format != "json")
                throw validation_error("format must be csv or json");
            s.output.format = *overrides.format;
        }

        const fs::path dir = s.output.dir;
        fs::create_directories(dir);
        io::write_file_atomic(dir / "scenario_echo.json", echo_scenario(s).dump(2) + "\n");

        json report;
        report["model"] = to_string(s.model);
        if (s.verify) {
            const bool ok = verify::run_model(to_string(s.model), std::cout);
            report["verify"] = ok ? "pass" : "fail";
            if (!ok) {
                io::write_file_atomic(dir / "report.json", report.dump(2) + "\n");
                diag("solver", "built-in verification suite failed");
                return 3;
            }
        }
        switch (s.model) {
            case Model::reactor: report.update(detail::run_reactor(s, dir)); break;
            case Model::sorption: report.update(detail::run_sorption(s, dir)); break;
            case Model::mixing: report.update(detail::run_mixing(s, dir)); break;
            case Model::packing: report.update(detail::run_packing(s, dir)); break;
            case Model::scale: report.update(detail::run_scale(s, dir)); break;
        }
        io::write_file_atomic(dir / "report.json", report.dump(2) + "\n");
        return 0;
    } catch (const correlation_range_error& e) {
        diag("correlation_range", e.what());
        return 4;
    } catch (const solver_error& e) {
        diag("solver", e.what());
        return 3;
    } catch (const validation_error& e) {
        diag("validation", e.what());
        return 2;
    } catch (const domain_error& e) {
        diag("validation", e.what());
        return 2;
    } catch (const std::exception& e) {
        diag("validation", e.what());
        return 2;
    }
}

/// Runs every *.json scenario under `dir` concurrently, each into its own
/// subdirectory of the sweep output root. Returns the worst exit code.
inline int run_sweep(const fs::path& dir, const RunOverrides& overrides = {},
                     std::ostream& err = std::cerr)
{
    std::vector<fs::path> scenarios;
    if (!fs::is_directory(dir)) {
        json d;
        d["error"] = {{"type", "validation"}, {"message", "sweep directory not found"},
                      {"scenario", dir.string()}};
        err << d.dump() << "\n";
        return 2;
    }
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            scenarios.push_back(entry.path());
    std::sort(scenarios.begin(), scenarios.end());
    if (scenarios.empty()) {
        json d;
        d["error"] = {{"type", "validation"}, {"message", "no scenario files in sweep directory"},
                      {"scenario", dir.string()}};
        err << d.dump() << "\n";
        return 2;
    }

    const std::string root = overrides.out_dir ? *overrides.out_dir : "sweep_out";
    std::vector<std::future<int>> futures;
    std::vector<std::ostringstream> errs(scenarios.size());
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        RunOverrides local = overrides;
        local.out_dir = (fs::path(root) / scenarios[i].stem()).string();
        futures.push_back(std::async(std::launch::async,
                                     [i, path = scenarios[i], local, &errs] {
                                         return run_scenario(path, local, errs[i]);
                                     }));
    }
    int worst = 0;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        const int code = futures[i].get();
        err << errs[i].str();
        worst = std::max(worst, code);
    }
    return worst;
}

} // namespace casim::scenario
