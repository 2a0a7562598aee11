// casim — scenario-driven simulation of through-reactors, chemisorption with
// a moving reaction plane, micromixing transfer, liquid distribution over
// regular packings, and the large-scale-effect estimates.
//
// Exit codes: 0 success, 2 validation error, 3 solver failure,
// 4 out-of-correlation-range hard stop (--strict).

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "casim/scenario_run.hpp"
#include "casim/verify.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"chemical apparatus simulation toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, sweep_dir, model, out_dir, format;
    std::uint64_t seed = 0;
    bool strict = false;
    bool seed_set = false, out_set = false, format_set = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", out_dir, "output directory")->each([&](const std::string&) {
            out_set = true;
        });
        cmd->add_option("--seed", seed, "random seed (stochastic models)")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_flag("--strict", strict,
                      "treat out-of-range correlation inputs as hard errors (exit 4)");
        cmd->add_option("--format", format, "output table format: csv|json")
            ->each([&](const std::string&) { format_set = true; });
    };

    auto* run = app.add_subcommand("run", "execute one scenario file");
    run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    add_common(run);

    auto* sweep = app.add_subcommand("sweep", "run every scenario in a directory concurrently");
    sweep->add_option("dir", sweep_dir, "directory of scenario JSON files")->required();
    add_common(sweep);

    auto* verify = app.add_subcommand("verify", "run a model's built-in oracle suite");
    verify->add_option("model", model, "reactor|sorption|mixing|packing|scale")->required();

    CLI11_PARSE(app, argc, argv);

    casim::scenario::RunOverrides overrides;
    if (out_set) overrides.out_dir = out_dir;
    if (seed_set) overrides.seed = seed;
    if (strict) overrides.strict = true;
    if (format_set) overrides.format = format;

    try {
        if (run->parsed()) return casim::scenario::run_scenario(scenario_path, overrides);
        if (sweep->parsed()) return casim::scenario::run_sweep(sweep_dir, overrides);
        if (verify->parsed()) return casim::verify::run_model(model, std::cout) ? 0 : 3;
    } catch (const casim::validation_error& e) {
        std::cerr << R"({"error":{"type":"validation","message":")" << e.what() << "\"}}\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << R"({"error":{"type":"validation","message":")" << e.what() << "\"}}\n";
        return 2;
    }
    return 2;
}
