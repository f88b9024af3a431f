// SPDX-License-Identifier: Apache-2.0
//! \file spinport_cli.cpp
//! Batch front end: spinport {teleport|scatter-check|bellscan|experiment}.
#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "spinport/commands.hpp"

namespace fs = std::filesystem;
using namespace spinport;

namespace
{
struct Flags
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::uint64_t> trials;
    std::optional<unsigned> threads;
    std::string amplitude_file;
    std::optional<bool> identical;
};

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config, "JSON run configuration")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "64-bit seed (overrides config)");
    sub->add_option("--out", f.out,
                    "directory for output files (stdout if omitted)");
    sub->add_option("--threads", f.threads, "worker threads")
        ->check(CLI::PositiveNumber);
}

RunConfig resolve(Flags const& f)
{
    RunConfig cfg;
    if (!f.config.empty())
    {
        cfg = load_config(f.config);
        auto& path = cfg.scatter_check.amplitude_file;
        if (!path.empty() && fs::path(path).is_relative())
        {
            path = (fs::path(f.config).parent_path() / path).string();
        }
    }
    if (f.seed)
        cfg.seed = *f.seed;
    if (f.threads)
        cfg.threads = *f.threads;
    if (f.trials)
    {
        cfg.teleport.trials = *f.trials;
        cfg.bellscan.samples = *f.trials;
        cfg.experiment.events = *f.trials;
    }
    if (!f.amplitude_file.empty())
        cfg.scatter_check.amplitude_file = f.amplitude_file;
    if (f.identical)
        cfg.scatter_check.identical_nucleons = *f.identical;
    return cfg;
}

int emit(CommandOutput const& out, std::string const& dir)
{
    if (dir.empty())
    {
        for (auto const& file : out.files)
        {
            std::cout << file.contents;
        }
    }
    else
    {
        fs::create_directories(dir);
        for (auto const& file : out.files)
        {
            auto const path = fs::path(dir) / file.name;
            std::ofstream os(path, std::ios::binary);
            os << file.contents;
            if (!os)
            {
                std::cerr << "error: cannot write " << path << "\n";
                return kExitUsage;
            }
            std::cout << path.string() << "\n";
        }
    }
    std::cerr << out.diagnostics;
    return out.exit_code;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spin-1/2 teleportation via nuclear scattering: batch simulations"};
    app.require_subcommand(1);
    Flags f;

    auto* teleport = app.add_subcommand("teleport", "run the teleportation protocol");
    add_common(teleport, f);
    teleport->add_option("--trials", f.trials, "number of protocol runs");

    auto* scatter = app.add_subcommand(
        "scatter-check", "algebraic checks of a tabulated scattering operator");
    add_common(scatter, f);
    scatter->add_option("--amplitude-file", f.amplitude_file,
                        "amplitude table (overrides config)");
    scatter->add_option("--identical-nucleons", f.identical,
                        "treat the table as identical-nucleon scattering");

    auto* bellscan = app.add_subcommand(
        "bellscan", "anticorrelation probability versus tilt angle");
    add_common(bellscan, f);
    bellscan->add_option("--trials", f.trials, "Monte Carlo samples per angle");

    auto* experiment = app.add_subcommand(
        "experiment", "event-level Monte Carlo of the scattering experiment");
    add_common(experiment, f);
    experiment->add_option("--trials", f.trials, "number of beam events");

    CLI11_PARSE(app, argc, argv);

    try
    {
        auto const cfg = resolve(f);
        if (teleport->parsed())
            return emit(cmd_teleport(cfg), f.out);
        if (bellscan->parsed())
            return emit(cmd_bellscan(cfg), f.out);
        if (experiment->parsed())
            return emit(cmd_experiment(cfg), f.out);
        if (cfg.scatter_check.amplitude_file.empty())
        {
            std::cerr << "error: scatter-check needs an amplitude file\n";
            return kExitUsage;
        }
        auto const table = load_amplitude_table(cfg.scatter_check.amplitude_file);
        return emit(cmd_scatter_check(cfg, table), f.out);
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
