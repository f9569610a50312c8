// lemult: margin scans, Hardy checks and mode evolutions for the radial
// multiplier on higher-dimensional Schwarzschild.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lemult/errors.hpp"
#include "lemult/report.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"lemult: multiplier margin scans, Hardy checks and mode evolutions"};
    app.set_version_flag("--version", lemult::code_version());
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    std::string d_list;
    std::optional<std::size_t> grid_points;
    std::optional<int> refine;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool quiet = false;

    app.add_option("--config", config_path, "INI configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (default from config, else ./lemult-out)");
    app.add_option("--d", d_list, "dimensions d = n - 3, e.g. 1,3 or 1-7");
    app.add_option("--grid-points", grid_points, "points per scan grid");
    app.add_flag("--refine{2}", refine, "refinement passes near the minimum (bare flag: 2)");
    app.add_option("--seed", seed, "seed for the jittered Hardy bump family");
    app.add_option("--threads", threads, "worker threads (0: all cores)");
    app.add_flag("-q,--quiet", quiet, "print nothing but errors");

    for (const char* name : {"verify", "budget", "hardy", "evolve", "all"}) {
        app.add_subcommand(name, std::string("run ") + name)->fallthrough();
    }
    app.get_subcommand("verify")->description("scan every sign and margin check");
    app.get_subcommand("budget")->description("check the absorption budget");
    app.get_subcommand("hardy")->description("Hardy ratio over the sliding-bump family");
    app.get_subcommand("evolve")->description("evolve modes, track energy and localized energy");
    app.get_subcommand("all")->description("everything above");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : lemult::kExitConfig;
    }

    lemult::RunConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = lemult::load_config(config_path);
        }
        cfg.mode = *lemult::mode_from_string(app.get_subcommands().front()->get_name());
        if (!out_dir.empty()) {
            cfg.out_dir = out_dir;
        }
        if (!d_list.empty()) {
            cfg.d = lemult::parse_int_list(d_list);
        }
        if (grid_points) {
            cfg.grid_points = *grid_points;
        }
        if (refine) {
            cfg.refine = *refine;
        }
        if (seed) {
            cfg.seed = *seed;
        }
        if (threads) {
            cfg.threads = *threads;
        }
        cfg.validate();
    } catch (const lemult::ConfigError& e) {
        std::cerr << "lemult: " << e.what() << "\n";
        return lemult::kExitConfig;
    }

    const auto res = lemult::run(cfg);
    if (!quiet) {
        std::cout << "config " << lemult::config_hash(cfg) << ", " << res.files.size() << " files in "
                  << cfg.out_dir.string() << "\n";
        for (const auto& f : res.failures) {
            std::cout << "FAIL " << f << "\n";
        }
        std::cout << (res.exit_code == lemult::kExitOk ? "all checks passed" : "exit " + std::to_string(res.exit_code))
                  << "\n";
    }
    if (res.exit_code == lemult::kExitConfig || res.exit_code == lemult::kExitNumerical) {
        std::cerr << "lemult: see " << (cfg.out_dir / "summary.json").string() << " for the error\n";
    }
    return res.exit_code;
}
