#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "casim/errors.hpp"
#include "casim/micromixing.hpp"
#include "casim/packing.hpp"
#include "casim/reactor.hpp"
#include "casim/scale_effect.hpp"
#include "casim/sorption_analytic.hpp"

namespace casim::scenario {

using nlohmann::json;

enum class Model { reactor, sorption, mixing, packing, scale };

inline const char* to_string(Model m)
{
    switch (m) {
        case Model::reactor: return "reactor";
        case Model::sorption: return "sorption";
        case Model::mixing: return "mixing";
        case Model::packing: return "packing";
        case Model::scale: return "scale";
    }
    return "?";
}

namespace detail {

inline const json& need(const json& j, const char* key, const char* ctx)
{
    auto it = j.find(key);
    if (it == j.end())
        throw validation_error(std::string("scenario: missing \"") + key + "\" in " + ctx);
    return *it;
}

inline double num(const json& j, const char* key, const char* ctx)
{
    const json& v = need(j, key, ctx);
    if (!v.is_number())
        throw validation_error(std::string("scenario: \"") + key + "\" in " + ctx +
                               " must be a number");
    return v.get<double>();
}

inline double num_or(const json& j, const char* key, double fallback)
{
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<double>();
}

inline int integer_or(const json& j, const char* key, int fallback)
{
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<int>();
}

inline bool flag_or(const json& j, const char* key, bool fallback)
{
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<bool>();
}

inline std::string str_or(const json& j, const char* key, const std::string& fallback)
{
    auto it = j.find(key);
    return it == j.end() ? fallback : it->get<std::string>();
}

} // namespace detail

// --- per-model blocks -------------------------------------------------------

struct ReactorTransientBlock {
    int nodes = 128;
    double dt = 0.0;
    double t_end = 0.0;
    int record_every = 1;
    double initial_c_x = 0.0, initial_c_y = 0.0, initial_temperature = 300.0;
    double perturbation_amplitude = 0.0;
    int perturbation_mode = 1;
    bool classify = false;
};

struct ReactorStabilityBlock {
    reactor::UniformState state;
    double k_min = 0.0, k_max = 0.0;
    int samples = 200;
    bool min_length = true;
};

struct ReactorScenario {
    reactor::ReactorConfig config;
    reactor::BoundarySpec boundary;
    std::optional<ReactorTransientBlock> transient;
    std::optional<ReactorStabilityBlock> stability;
};

struct SorptionSweep {
    std::string parameter; // d_aa | p_a | c_b_inf | d_ee
    std::vector<double> values;
};

struct SorptionScenario {
    sorption::SorptionParams params;
    int cells = 800;
    double t_end_over_tstar = 30.0; // used when t_end <= 0
    double t_end = 0.0;
    int snapshots = 0;
    std::optional<double> correlation_time;
    std::optional<SorptionSweep> sweep;
};

struct MixingTransferBlock {
    double lambda_max = 0.0;
    int samples = 100;
    double d_lambda = 1.0;
};

struct MixingInletBlock {
    std::string kind = "impulse"; // impulse | step
    double dt = 0.0;
    double t_end = 0.0;
};

struct MixingScenario {
    mixing::MixingModel model;
    std::optional<MixingTransferBlock> transfer;
    std::vector<mixing::MixingCell> cells;
    std::optional<MixingInletBlock> inlet;
};

struct PackingLayoutSpec {
    int grid_n = 0; // > 0: interior-grid layout with n sources
    std::vector<std::pair<double, double>> sources; // explicit (position, flow)
    double total_flow = 0.0;
};

struct Fig8Block {
    std::vector<double> d_over_a{5.0, 10.0, 15.0, 20.0};
    std::vector<int> n_values{1, 2, 4, 8};
    std::uint64_t walkers = 400'000;
};

struct PackingScenario {
    double column_diameter = 0.0, unit_radius = 0.0, layer_height = 0.0;
    int levels = 0;
    packing::WallRule wall_rule = packing::WallRule::reflect;
    packing::KernelKind kernel = packing::KernelKind::calibrated3;
    PackingLayoutSpec layout;
    std::uint64_t walkers = 100'000;
    double k_u_target = 1.15;
    std::optional<Fig8Block> fig8;
};

struct ScaleScenario {
    scale::ScaleEffectParams params;
};

struct OutputSpec {
    std::string dir = "out";
    std::string format = "csv"; // csv | json
};

struct Scenario {
    int schema_version = 1;
    Model model = Model::reactor;
    OutputSpec output;
    std::uint64_t seed = 0;
    bool seed_present = false;
    bool verify = false;
    bool strict = false;

    std::optional<ReactorScenario> reactor_block;
    std::optional<SorptionScenario> sorption_block;
    std::optional<MixingScenario> mixing_block;
    std::optional<PackingScenario> packing_block;
    std::optional<ScaleScenario> scale_block;
};

// --- parsing ----------------------------------------------------------------

namespace detail {

inline reactor::BoundarySpec parse_boundary(const json& j)
{
    reactor::BoundarySpec bc;
    const std::string kind = str_or(j, "kind", "danckwerts");
    if (kind == "danckwerts") bc.kind = reactor::BoundaryKind::danckwerts;
    else if (kind == "dirichlet") bc.kind = reactor::BoundaryKind::dirichlet;
    else if (kind == "zero_flux") bc.kind = reactor::BoundaryKind::zero_flux;
    else if (kind == "periodic") bc.kind = reactor::BoundaryKind::periodic;
    else throw validation_error("scenario: unknown boundary kind \"" + kind + "\"");
    if (auto it = j.find("inlet"); it != j.end())
        for (std::size_t i = 0; i < 3; ++i) bc.inlet[i] = (*it).at(i).get<double>();
    if (auto it = j.find("outlet"); it != j.end())
        for (std::size_t i = 0; i < 3; ++i) bc.outlet[i] = (*it).at(i).get<double>();
    return bc;
}

inline ReactorScenario parse_reactor(const json& j)
{
    ReactorScenario r;
    auto& c = r.config;
    c.d_x = num(j, "d_x", "reactor");
    c.d_y = num(j, "d_y", "reactor");
    c.chi_bar = num(j, "chi_bar", "reactor");
    c.flow_velocity = num_or(j, "flow_velocity", 0.0);
    c.advect_downstream = flag_or(j, "advect_downstream", true);
    c.rho_bar = num(j, "rho_bar", "reactor");
    c.cp_bar = num(j, "cp_bar", "reactor");
    c.delta_h = num_or(j, "delta_h", 0.0);
    c.length = num(j, "length", "reactor");
    c.c_x0 = num(j, "c_x0", "reactor");
    c.adiabatic = flag_or(j, "adiabatic", true);
    c.wall_heat_coefficient = num_or(j, "wall_heat_coefficient", 0.0);
    c.t_wall = num_or(j, "t_wall", 300.0);
    const json& kin = need(j, "kinetics", "reactor");
    c.kinetics.k0_forward = num(kin, "k0_forward", "kinetics");
    c.kinetics.ea_forward = num(kin, "ea_forward", "kinetics");
    c.kinetics.k0_reverse = num(kin, "k0_reverse", "kinetics");
    c.kinetics.ea_reverse = num(kin, "ea_reverse", "kinetics");
    c.kinetics.gas_constant = num_or(kin, "gas_constant", reactor::kGasConstant);
    if (auto it = j.find("boundary"); it != j.end()) r.boundary = parse_boundary(*it);

    if (auto it = j.find("transient"); it != j.end()) {
        ReactorTransientBlock t;
        t.nodes = integer_or(*it, "nodes", 128);
        t.dt = num(*it, "dt", "reactor.transient");
        t.t_end = num(*it, "t_end", "reactor.transient");
        t.record_every = integer_or(*it, "record_every", 1);
        if (auto in = it->find("initial"); in != it->end()) {
            t.initial_c_x = num_or(*in, "c_x", 0.0);
            t.initial_c_y = num_or(*in, "c_y", 0.0);
            t.initial_temperature = num_or(*in, "temperature", 300.0);
            t.perturbation_amplitude = num_or(*in, "perturbation_amplitude", 0.0);
            t.perturbation_mode = integer_or(*in, "perturbation_mode", 1);
        }
        t.classify = flag_or(*it, "classify", false);
        r.transient = t;
    }
    if (auto it = j.find("stability"); it != j.end()) {
        ReactorStabilityBlock s;
        const json& st = need(*it, "state", "reactor.stability");
        s.state.c_x = num(st, "c_x", "reactor.stability.state");
        s.state.c_y = num(st, "c_y", "reactor.stability.state");
        s.state.temperature = num(st, "temperature", "reactor.stability.state");
        s.k_min = num(*it, "k_min", "reactor.stability");
        s.k_max = num(*it, "k_max", "reactor.stability");
        s.samples = integer_or(*it, "samples", 200);
        s.min_length = flag_or(*it, "min_length", true);
        r.stability = s;
    }
    return r;
}

inline SorptionScenario parse_sorption(const json& j)
{
    SorptionScenario s;
    const json& be = need(j, "diffusion_be", "sorption");
    s.params.diffusion_be = {num(be, "bb", "diffusion_be"), num_or(be, "be", 0.0),
                             num_or(be, "eb", 0.0), num(be, "ee", "diffusion_be")};
    const json& ae = need(j, "diffusion_ae", "sorption");
    s.params.diffusion_ae = {num(ae, "aa", "diffusion_ae"), num_or(ae, "ae", 0.0),
                             num_or(ae, "ea", 0.0), s.params.diffusion_be.d22};
    s.params.alpha = num(j, "alpha", "sorption");
    s.params.c_a_inf = num(j, "c_a_inf", "sorption");
    s.params.c_b_inf = num(j, "c_b_inf", "sorption");
    s.params.henry = num(j, "henry", "sorption");
    s.params.p_a = num(j, "p_a", "sorption");
    s.params.layer_depth = num(j, "layer_depth", "sorption");
    s.cells = integer_or(j, "cells", 800);
    s.t_end = num_or(j, "t_end", 0.0);
    s.t_end_over_tstar = num_or(j, "t_end_over_tstar", 30.0);
    s.snapshots = integer_or(j, "snapshots", 0);
    if (auto it = j.find("correlations"); it != j.end())
        s.correlation_time = num(*it, "t", "sorption.correlations");
    if (auto it = j.find("sweep"); it != j.end()) {
        SorptionSweep sweep;
        sweep.parameter = need(*it, "parameter", "sorption.sweep").get<std::string>();
        for (const auto& v : need(*it, "values", "sorption.sweep"))
            sweep.values.push_back(v.get<double>());
        if (sweep.values.empty())
            throw validation_error("scenario: sorption.sweep.values must not be empty");
        s.sweep = sweep;
    }
    return s;
}

inline mixing::Rtd parse_rtd(const json& j)
{
    mixing::Rtd rtd;
    const std::string kind = str_or(j, "kind", "exponential");
    if (kind == "exponential") {
        rtd.kind = mixing::Rtd::Kind::exponential;
    } else if (kind == "tabulated") {
        rtd.kind = mixing::Rtd::Kind::tabulated;
        for (const auto& v : need(j, "age", "rtd")) rtd.age.push_back(v.get<double>());
        for (const auto& v : need(j, "density", "rtd")) rtd.density.push_back(v.get<double>());
    } else {
        throw validation_error("scenario: unknown rtd kind \"" + kind + "\"");
    }
    return rtd;
}

inline MixingScenario parse_mixing(const json& j)
{
    MixingScenario m;
    m.model.volume = num(j, "volume", "mixing");
    m.model.t_bar = num(j, "t_bar", "mixing");
    m.model.gamma = num(j, "gamma", "mixing");
    if (auto it = j.find("rtd"); it != j.end()) m.model.rtd = parse_rtd(*it);
    if (auto it = j.find("crucial_age"); it != j.end() && !it->is_null())
        m.model.crucial_age = it->get<double>();
    if (auto it = j.find("transfer"); it != j.end()) {
        MixingTransferBlock t;
        t.lambda_max = num(*it, "lambda_max", "mixing.transfer");
        t.samples = integer_or(*it, "samples", 100);
        t.d_lambda = num_or(*it, "d_lambda", 1.0);
        m.transfer = t;
    }
    if (auto it = j.find("cells"); it != j.end()) {
        for (const auto& cj : *it) {
            mixing::MixingCell cell;
            const std::string kind = str_or(cj, "kind", "mixed");
            if (kind == "mixed") cell.kind = mixing::MixingCell::Kind::mixed;
            else if (kind == "segregated") cell.kind = mixing::MixingCell::Kind::segregated;
            else throw validation_error("scenario: unknown cell kind \"" + kind + "\"");
            cell.t_bar = num(cj, "t_bar", "mixing.cells[]");
            if (auto r = cj.find("rtd"); r != cj.end()) cell.rtd = parse_rtd(*r);
            if (auto a = cj.find("crucial_age"); a != cj.end() && !a->is_null())
                cell.crucial_age = a->get<double>();
            m.cells.push_back(cell);
        }
    }
    if (auto it = j.find("inlet"); it != j.end()) {
        MixingInletBlock in;
        in.kind = str_or(*it, "kind", "impulse");
        if (in.kind != "impulse" && in.kind != "step")
            throw validation_error("scenario: mixing inlet kind must be impulse or step");
        in.dt = num(*it, "dt", "mixing.inlet");
        in.t_end = num(*it, "t_end", "mixing.inlet");
        m.inlet = in;
    }
    return m;
}

inline PackingScenario parse_packing(const json& j)
{
    PackingScenario p;
    const json& g = need(j, "geometry", "packing");
    p.column_diameter = num(g, "column_diameter", "packing.geometry");
    p.unit_radius = num(g, "unit_radius", "packing.geometry");
    p.layer_height = num(g, "layer_height", "packing.geometry");
    p.levels = integer_or(g, "levels", 100);
    const std::string wall = str_or(g, "wall_rule", "reflect");
    if (wall == "reflect") p.wall_rule = packing::WallRule::reflect;
    else if (wall == "drain") p.wall_rule = packing::WallRule::drain;
    else throw validation_error("scenario: unknown wall rule \"" + wall + "\"");
    const std::string kernel = str_or(g, "kernel", "calibrated3");
    if (kernel == "calibrated3") p.kernel = packing::KernelKind::calibrated3;
    else if (kernel == "fixed3") p.kernel = packing::KernelKind::fixed3;
    else throw validation_error("scenario: unknown kernel \"" + kernel + "\"");

    const json& l = need(j, "layout", "packing");
    p.layout.total_flow = num(l, "total_flow", "packing.layout");
    if (auto it = l.find("grid_n"); it != l.end()) {
        p.layout.grid_n = it->get<int>();
    } else {
        for (const auto& sj : need(l, "sources", "packing.layout"))
            p.layout.sources.emplace_back(sj.at(0).get<double>(), sj.at(1).get<double>());
    }
    p.walkers = static_cast<std::uint64_t>(num_or(j, "walkers", 100'000.0));
    p.k_u_target = num_or(j, "k_u_target", 1.15);
    if (auto it = j.find("fig8"); it != j.end()) {
        Fig8Block f;
        if (auto d = it->find("d_over_a"); d != it->end()) {
            f.d_over_a.clear();
            for (const auto& v : *d) f.d_over_a.push_back(v.get<double>());
        }
        if (auto nv = it->find("n"); nv != it->end()) {
            f.n_values.clear();
            for (const auto& v : *nv) f.n_values.push_back(v.get<int>());
        }
        f.walkers = static_cast<std::uint64_t>(num_or(*it, "walkers", 400'000.0));
        p.fig8 = f;
    }
    return p;
}

inline ScaleScenario parse_scale(const json& j)
{
    ScaleScenario s;
    auto& p = s.params;
    p.k_ms = num(j, "k_ms", "scale");
    p.k_m = num(j, "k_m", "scale");
    p.source_flow = num(j, "source_flow", "scale");
    p.unit_radius = num(j, "unit_radius", "scale");
    p.source_step = num(j, "source_step", "scale");
    p.gas_flow = num(j, "gas_flow", "scale");
    p.cross_section = num(j, "cross_section", "scale");
    p.k_bar = num(j, "k_bar", "scale");
    p.height = num(j, "height", "scale");
    p.spreading_height = num(j, "spreading_height", "scale");
    p.absorption_factor = num(j, "absorption_factor", "scale");
    p.htu_uniform = num(j, "htu_uniform", "scale");
    return s;
}

} // namespace detail

inline Scenario parse_scenario(const json& j)
{
    Scenario s;
    s.schema_version = detail::need(j, "schema_version", "scenario").get<int>();
    if (s.schema_version != 1)
        throw validation_error("scenario: unsupported schema_version " +
                               std::to_string(s.schema_version));
    const std::string model = detail::need(j, "model", "scenario").get<std::string>();
    int blocks = 0;
    for (const char* key : {"reactor", "sorption", "mixing", "packing", "scale"})
        if (j.contains(key)) ++blocks;
    if (blocks != 1)
        throw validation_error("scenario: exactly one model block must be present");

    if (auto it = j.find("output"); it != j.end()) {
        s.output.dir = detail::str_or(*it, "dir", "out");
        s.output.format = detail::str_or(*it, "format", "csv");
        if (s.output.format != "csv" && s.output.format != "json")
            throw validation_error("scenario: output format must be csv or json");
    }
    if (auto it = j.find("seed"); it != j.end()) {
        s.seed = it->get<std::uint64_t>();
        s.seed_present = true;
    }
    s.verify = detail::flag_or(j, "verify", false);
    s.strict = detail::flag_or(j, "strict", false);

    if (model == "reactor") {
        s.model = Model::reactor;
        s.reactor_block = detail::parse_reactor(detail::need(j, "reactor", "scenario"));
    } else if (model == "sorption") {
        s.model = Model::sorption;
        s.sorption_block = detail::parse_sorption(detail::need(j, "sorption", "scenario"));
    } else if (model == "mixing") {
        s.model = Model::mixing;
        s.mixing_block = detail::parse_mixing(detail::need(j, "mixing", "scenario"));
    } else if (model == "packing") {
        s.model = Model::packing;
        if (!s.seed_present)
            throw validation_error("scenario: packing model requires a seed");
        s.packing_block = detail::parse_packing(detail::need(j, "packing", "scenario"));
    } else if (model == "scale") {
        s.model = Model::scale;
        s.scale_block = detail::parse_scale(detail::need(j, "scale", "scenario"));
    } else {
        throw validation_error("scenario: unknown model \"" + model + "\"");
    }
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw validation_error("scenario not found: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw validation_error("scenario parse error in " + path.string() + ": " + e.what());
    }
    return parse_scenario(j);
}

// --- canonical echo ---------------------------------------------------------

namespace detail {

inline json echo_boundary(const reactor::BoundarySpec& b)
{
    const char* kind = "danckwerts";
    switch (b.kind) {
        case reactor::BoundaryKind::danckwerts: kind = "danckwerts"; break;
        case reactor::BoundaryKind::dirichlet: kind = "dirichlet"; break;
        case reactor::BoundaryKind::zero_flux: kind = "zero_flux"; break;
        case reactor::BoundaryKind::periodic: kind = "periodic"; break;
    }
    return json{{"kind", kind},
                {"inlet", {b.inlet[0], b.inlet[1], b.inlet[2]}},
                {"outlet", {b.outlet[0], b.outlet[1], b.outlet[2]}}};
}

inline json echo_rtd(const mixing::Rtd& r)
{
    if (r.kind == mixing::Rtd::Kind::exponential) return json{{"kind", "exponential"}};
    return json{{"kind", "tabulated"}, {"age", r.age}, {"density", r.density}};
}

} // namespace detail

/// Canonical re-emission of the parsed configuration; re-parsing the echo
/// must reproduce the identical in-memory scenario.
inline json echo_scenario(const Scenario& s)
{
    json j;
    j["schema_version"] = s.schema_version;
    j["model"] = to_string(s.model);
    j["output"] = {{"dir", s.output.dir}, {"format", s.output.format}};
    if (s.seed_present) j["seed"] = s.seed;
    j["verify"] = s.verify;
    j["strict"] = s.strict;

    if (s.reactor_block) {
        const auto& r = *s.reactor_block;
        json rj{{"d_x", r.config.d_x},
                {"d_y", r.config.d_y},
                {"chi_bar", r.config.chi_bar},
                {"flow_velocity", r.config.flow_velocity},
                {"advect_downstream", r.config.advect_downstream},
                {"rho_bar", r.config.rho_bar},
                {"cp_bar", r.config.cp_bar},
                {"delta_h", r.config.delta_h},
                {"length", r.config.length},
                {"c_x0", r.config.c_x0},
                {"adiabatic", r.config.adiabatic},
                {"wall_heat_coefficient", r.config.wall_heat_coefficient},
                {"t_wall", r.config.t_wall},
                {"kinetics",
                 {{"k0_forward", r.config.kinetics.k0_forward},
                  {"ea_forward", r.config.kinetics.ea_forward},
                  {"k0_reverse", r.config.kinetics.k0_reverse},
                  {"ea_reverse", r.config.kinetics.ea_reverse},
                  {"gas_constant", r.config.kinetics.gas_constant}}},
                {"boundary", detail::echo_boundary(r.boundary)}};
        if (r.transient) {
            const auto& t = *r.transient;
            rj["transient"] = {{"nodes", t.nodes},
                               {"dt", t.dt},
                               {"t_end", t.t_end},
                               {"record_every", t.record_every},
                               {"classify", t.classify},
                               {"initial",
                                {{"c_x", t.initial_c_x},
                                 {"c_y", t.initial_c_y},
                                 {"temperature", t.initial_temperature},
                                 {"perturbation_amplitude", t.perturbation_amplitude},
                                 {"perturbation_mode", t.perturbation_mode}}}};
        }
        if (r.stability) {
            const auto& st = *r.stability;
            rj["stability"] = {{"state",
                                {{"c_x", st.state.c_x},
                                 {"c_y", st.state.c_y},
                                 {"temperature", st.state.temperature}}},
                               {"k_min", st.k_min},
                               {"k_max", st.k_max},
                               {"samples", st.samples},
                               {"min_length", st.min_length}};
        }
        j["reactor"] = rj;
    }
    if (s.sorption_block) {
        const auto& p = *s.sorption_block;
        json sj{{"diffusion_be",
                 {{"bb", p.params.diffusion_be.d11},
                  {"be", p.params.diffusion_be.d12},
                  {"eb", p.params.diffusion_be.d21},
                  {"ee", p.params.diffusion_be.d22}}},
                {"diffusion_ae",
                 {{"aa", p.params.diffusion_ae.d11},
                  {"ae", p.params.diffusion_ae.d12},
                  {"ea", p.params.diffusion_ae.d21}}},
                {"alpha", p.params.alpha},
                {"c_a_inf", p.params.c_a_inf},
                {"c_b_inf", p.params.c_b_inf},
                {"henry", p.params.henry},
                {"p_a", p.params.p_a},
                {"layer_depth", p.params.layer_depth},
                {"cells", p.cells},
                {"t_end", p.t_end},
                {"t_end_over_tstar", p.t_end_over_tstar},
                {"snapshots", p.snapshots}};
        if (p.correlation_time) sj["correlations"] = {{"t", *p.correlation_time}};
        if (p.sweep) sj["sweep"] = {{"parameter", p.sweep->parameter}, {"values", p.sweep->values}};
        j["sorption"] = sj;
    }
    if (s.mixing_block) {
        const auto& m = *s.mixing_block;
        json mj{{"volume", m.model.volume},
                {"t_bar", m.model.t_bar},
                {"gamma", m.model.gamma},
                {"rtd", detail::echo_rtd(m.model.rtd)}};
        if (std::isfinite(m.model.crucial_age)) mj["crucial_age"] = m.model.crucial_age;
        if (m.transfer)
            mj["transfer"] = {{"lambda_max", m.transfer->lambda_max},
                              {"samples", m.transfer->samples},
                              {"d_lambda", m.transfer->d_lambda}};
        if (!m.cells.empty()) {
            json cells = json::array();
            for (const auto& c : m.cells) {
                json cj{{"kind", c.kind == mixing::MixingCell::Kind::mixed ? "mixed" : "segregated"},
                        {"t_bar", c.t_bar}};
                if (c.kind == mixing::MixingCell::Kind::segregated) cj["rtd"] = detail::echo_rtd(c.rtd);
                if (std::isfinite(c.crucial_age)) cj["crucial_age"] = c.crucial_age;
                cells.push_back(cj);
            }
            mj["cells"] = cells;
        }
        if (m.inlet)
            mj["inlet"] = {{"kind", m.inlet->kind}, {"dt", m.inlet->dt}, {"t_end", m.inlet->t_end}};
        j["mixing"] = mj;
    }
    if (s.packing_block) {
        const auto& p = *s.packing_block;
        json pj{{"geometry",
                 {{"column_diameter", p.column_diameter},
                  {"unit_radius", p.unit_radius},
                  {"layer_height", p.layer_height},
                  {"levels", p.levels},
                  {"wall_rule", p.wall_rule == packing::WallRule::reflect ? "reflect" : "drain"},
                  {"kernel",
                   p.kernel == packing::KernelKind::calibrated3 ? "calibrated3" : "fixed3"}}},
                {"walkers", static_cast<double>(p.walkers)},
                {"k_u_target", p.k_u_target}};
        json lj{{"total_flow", p.layout.total_flow}};
        if (p.layout.grid_n > 0) {
            lj["grid_n"] = p.layout.grid_n;
        } else {
            json src = json::array();
            for (const auto& sp : p.layout.sources) src.push_back({sp.first, sp.second});
            lj["sources"] = src;
        }
        pj["layout"] = lj;
        if (p.fig8)
            pj["fig8"] = {{"d_over_a", p.fig8->d_over_a},
                          {"n", p.fig8->n_values},
                          {"walkers", static_cast<double>(p.fig8->walkers)}};
        j["packing"] = pj;
    }
    if (s.scale_block) {
        const auto& p = s.scale_block->params;
        j["scale"] = {{"k_ms", p.k_ms},
                      {"k_m", p.k_m},
                      {"source_flow", p.source_flow},
                      {"unit_radius", p.unit_radius},
                      {"source_step", p.source_step},
                      {"gas_flow", p.gas_flow},
                      {"cross_section", p.cross_section},
                      {"k_bar", p.k_bar},
                      {"height", p.height},
                      {"spreading_height", p.spreading_height},
                      {"absorption_factor", p.absorption_factor},
                      {"htu_uniform", p.htu_uniform}};
    }
    return j;
}

} // namespace casim::scenario
