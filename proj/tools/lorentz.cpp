// Command-line front end: one subcommand per experiment.

#include <algorithm>
#include <chrono>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lorentz/config.hpp"
#include "lorentz/errors.hpp"
#include "lorentz/experiments.hpp"
#include "lorentz/report.hpp"

namespace
{
using lorentz::Config;

constexpr int exit_config = 2;
constexpr int exit_guard = 3;

// Shorthand flags and the config keys they set
std::map<std::string, std::vector<std::pair<std::string, std::string>>> const
    shorthands = {
        {"scatter-table",
         {{"--alpha", "barrier.alpha"},
          {"--epsilon", "barrier.epsilon"},
          {"--speed", "barrier.speed"},
          {"--samples", "samples"}}},
        {"b-divergence",
         {{"--alpha", "barrier.alpha"}, {"--eps", "eps"}, {"--mu", "medium.mu"}}},
        {"kinetic-compare",
         {{"--alpha", "barrier.alpha"},
          {"--eps-ladder", "eps_ladder"},
          {"--time", "time"},
          {"--samples", "samples"}}},
        {"thermalization",
         {{"--alpha", "barrier.alpha"},
          {"--eps-ladder", "eps_ladder"},
          {"--samples", "samples"}}},
        {"diffusion",
         {{"--B", "B"}, {"--paths", "paths"}, {"--t", "t"}, {"--dt", "dt"}}},
        {"fick-slab",
         {{"--L", "slab.L"},
          {"--rho1", "slab.rho1"},
          {"--rho2", "slab.rho2"},
          {"--mu", "medium.mu"},
          {"--epsilon", "medium.epsilon"},
          {"--eta", "medium.eta"},
          {"--injections", "injections"}}},
        {"pathology-scan",
         {{"--alpha", "barrier.alpha"},
          {"--eps-ladder", "eps_ladder"},
          {"--time", "time"},
          {"--trajectories", "trajectories"}}},
        {"diffusive-scale",
         {{"--alpha", "barrier.alpha"},
          {"--eps-ladder", "eps_ladder"},
          {"--time", "time"},
          {"--trajectories", "trajectories"}}},
};

struct Invocation
{
    std::string config_path;
    std::vector<std::string> overrides;
    std::map<std::string, std::string> shorthand_values;
    unsigned threads = 1;
    std::string out;
    bool summary = false;
};

std::string schema_help(lorentz::ExperimentInfo const& info)
{
    std::string text = "Config keys (default):\n";
    for (auto const& k : info.schema)
        text += "  " + k.key + " = " + k.default_value + "    " + k.help + "\n";
    return text;
}

int execute(std::string const& name, Invocation const& inv)
{
    Config user;
    if (!inv.config_path.empty())
        user = Config::load(inv.config_path);
    for (auto const& [key, value] : inv.shorthand_values)
        user.set(key, value);
    for (auto const& o : inv.overrides)
        user.apply_override(o);

    Config resolved;
    auto const start = std::chrono::steady_clock::now();
    auto const report
        = lorentz::run_experiment(name, user, {inv.threads}, &resolved);
    double const wall = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();

    for (auto const& w : report.warnings)
        std::cerr << "warning: " << w << '\n';
    if (inv.out.empty())
        std::cout << report.table.to_csv();
    else
        lorentz::write_report(report, resolved, inv.out, wall, inv.threads);
    if (inv.summary)
    {
        std::cerr << lorentz::report_metadata(report, resolved, wall, inv.threads)
                         .dump(2)
                  << '\n';
    }
    return 0;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random Lorentz gas simulation laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", LORENTZ_VERSION);

    std::map<std::string, Invocation> invocations;
    for (auto const& info : lorentz::experiment_registry())
        invocations[info.name];

    for (auto const& info : lorentz::experiment_registry())
    {
        Invocation& inv = invocations[info.name];
        auto* sub = app.add_subcommand(info.name, info.description);
        sub->footer(schema_help(info));
        sub->add_option("-c,--config", inv.config_path, "key = value config file")
            ->check(CLI::ExistingFile);
        sub->add_option("-s,--set", inv.overrides, "override, key=value")
            ->take_all();
        sub->add_option("-j,--threads", inv.threads, "worker threads")
            ->check(CLI::Range(1u, 1024u));
        sub->add_option("-o,--out", inv.out,
                        "CSV output path (JSON sidecar written next to it)");
        sub->add_flag("--summary", inv.summary, "print run metadata to stderr");
        if (auto it = shorthands.find(info.name); it != shorthands.end())
        {
            for (auto const& [flag, key] : it->second)
                sub->add_option(flag, inv.shorthand_values[key], "sets " + key);
        }
        bool const has_seed
            = std::any_of(info.schema.begin(), info.schema.end(),
                          [](auto const& k) { return k.key == "seed"; });
        if (has_seed)
            sub->add_option("--seed", inv.shorthand_values["seed"], "master seed");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    for (auto* sub : app.get_subcommands())
    {
        Invocation inv = invocations[sub->get_name()];
        // Unset shorthands stay empty and must not override the config file
        for (auto it = inv.shorthand_values.begin();
             it != inv.shorthand_values.end();)
        {
            it = it->second.empty() ? inv.shorthand_values.erase(it)
                                    : std::next(it);
        }
        try
        {
            return execute(sub->get_name(), inv);
        }
        catch (lorentz::NumericalGuardError const& e)
        {
            std::cerr << "numerical guard: " << e.what() << '\n';
            return exit_guard;
        }
        catch (lorentz::ConfigError const& e)
        {
            std::cerr << "config error: " << e.what() << '\n';
            return exit_config;
        }
        catch (std::invalid_argument const& e)
        {
            std::cerr << "invalid parameter: " << e.what() << '\n';
            return exit_config;
        }
        catch (std::domain_error const& e)
        {
            std::cerr << "invalid regime: " << e.what() << '\n';
            return exit_config;
        }
    }
    return 0;
}
