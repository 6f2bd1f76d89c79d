// Command-line experiment runner: isokin <verify|dichotomy|scan|lyapunov>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "isokin/config.hpp"
#include "isokin/errors.hpp"
#include "isokin/experiment.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Isokinetic thermostat experiments"};
    app.set_version_flag("--version", isokin::code_version());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    unsigned threads = 0;
    std::uint64_t seed = 0;
    bool quiet = false;

    for (auto const* name : {"verify", "dichotomy", "scan", "lyapunov"})
    {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "Experiment config (YAML)")
            ->required();
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--threads", threads, "Worker threads")
            ->envname("ISOKIN_THREADS")
            ->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Override run.seed");
        sub->add_flag("-q,--quiet", quiet, "No progress messages");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    auto* sub = app.get_subcommands().front();
    std::string const name = sub->get_name();
    isokin::RunOptions opts;
    if (sub->count("--threads"))
        opts.threads = threads;
    if (sub->count("--seed"))
        opts.seed = seed;
    if (!out_dir.empty())
        opts.out_dir = out_dir;
    opts.log = quiet ? nullptr : &std::cerr;

    try
    {
        auto cfg = isokin::load_config(config_path);
        auto outcome = isokin::run_subcommand(name, cfg, opts);
        if (!outcome.failures.empty())
        {
            if (name == "verify")
            {
                std::cerr << "isokin: " << outcome.failures.size()
                          << " identity check(s) failed; see "
                          << (outcome.directory / "results.csv").string()
                          << "\n";
                return exit_ok;
            }
            std::cerr << "isokin: numerical failure in stage '"
                      << outcome.failed_stage << "' ("
                      << outcome.failures.size() << " row(s) failed):\n";
            for (auto const& f : outcome.failures)
                std::cerr << "  " << f << "\n";
            return exit_numerical;
        }
        std::cerr << "isokin: wrote " << outcome.directory.string() << "\n";
        return exit_ok;
    }
    catch (isokin::ConfigError const& e)
    {
        std::cerr << config_path << ": " << e.what() << "\n";
        return exit_config;
    }
    catch (isokin::NumericalError const& e)
    {
        std::cerr << "isokin: numerical failure in stage '" << e.stage()
                  << "': " << e.what() << "\n";
        return exit_numerical;
    }
    catch (isokin::PreconditionError const& e)
    {
        std::cerr << config_path << ": " << e.what() << "\n";
        return exit_config;
    }
    catch (std::filesystem::filesystem_error const& e)
    {
        std::cerr << "isokin: " << e.what() << "\n";
        return exit_config;
    }
}
