#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lorentz/config.hpp"
#include "lorentz/report.hpp"

namespace lorentz
{
struct RunContext
{
    unsigned threads = 1;
};

using ExperimentRunner = std::function<Report(Config const&, RunContext const&)>;

struct ExperimentInfo
{
    std::string name;
    std::string description;
    std::vector<KeySpec> schema;
    ExperimentRunner run;  //!< receives the resolved config
};

//! Every subcommand, in CLI order.
std::vector<ExperimentInfo> const& experiment_registry();

//! Throws ConfigError for an unknown name.
ExperimentInfo const& find_experiment(std::string const& name);

/*!
 * Validate `user` against the experiment schema, run it, and return the
 * report. The resolved config is stored in `resolved` when given.
 */
Report run_experiment(std::string const& name,
                      Config const& user,
                      RunContext const& context,
                      Config* resolved = nullptr);

// Individual runners; each expects a resolved config
Report run_scatter_table(Config const& cfg, RunContext const& ctx);
Report run_b_divergence(Config const& cfg, RunContext const& ctx);
Report run_kinetic_compare(Config const& cfg, RunContext const& ctx);
Report run_thermalization(Config const& cfg, RunContext const& ctx);
Report run_diffusion(Config const& cfg, RunContext const& ctx);
Report run_fick_slab(Config const& cfg, RunContext const& ctx);
Report run_pathology_scan(Config const& cfg, RunContext const& ctx);
Report run_diffusive_scale(Config const& cfg, RunContext const& ctx);

//! Decades between two powers of ten given as "1e-4..1e-12".
std::vector<double> parse_decade_range(std::string const& text);

}  // namespace lorentz
