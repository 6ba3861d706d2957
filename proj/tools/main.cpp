#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"

#include "gs/commands.hpp"
#include "gs/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"EV gearshift optimization: fitted powertrain model, exhaustive and "
                 "neural-network MPC gear selection, closed-loop benchmarking"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir;
    std::string cycle;
    std::uint64_t seed = 0;
    app.add_option("--config", config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "override the training seed");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--cycle", cycle, "driving cycle: 'nedc' or a CSV path");

    auto* fit = app.add_subcommand("fit-motor", "fit the power polynomial to the motor map");
    auto* gen = app.add_subcommand("gen-cycle", "emit the configured driving cycle as CSV");
    auto* tr = app.add_subcommand("train", "train the gear-selection network");
    auto* cmp = app.add_subcommand("compare", "closed-loop comparison of all strategies");
    auto* bench = app.add_subcommand("bench", "per-solve timing of nn and exhaustive");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }

    try {
        gs::RunConfig cfg = gs::load_run_config(config_path);
        if (seed_opt->count() > 0) cfg.train.seed = seed;
        if (!out_dir.empty()) cfg.paths.out = out_dir;
        if (!cycle.empty()) {
            cfg.paths.cycle = cycle;
            if (cycle != "nedc" && !std::filesystem::exists(cycle))
                throw gs::ConfigError("cycle file not found: " + cycle);
        }

        if (*fit) gs::cmd_fit_motor(cfg);
        if (*gen) gs::cmd_gen_cycle(cfg);
        if (*tr) gs::cmd_train(cfg);
        if (*cmp) gs::cmd_compare(cfg);
        if (*bench) gs::cmd_bench(cfg);
        return 0;
    } catch (const gs::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const gs::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
