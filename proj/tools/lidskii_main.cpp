// Command-line front end: loads an experiment config, runs the requested
// pipeline and writes deterministic reports plus a manifest.

#include "lidskii/reporting.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Abel-Lidskii root-vector summation laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;

    const std::vector<std::string> tasks = {"analyze-exponent", "decompose",      "sum",
                                            "contour-verify",   "evolve",         "full-verify"};
    for (const auto& task : tasks) {
        auto* sub = app.add_subcommand(task);
        sub->add_option("--config", config_path, "experiment config JSON")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "seed override")->each([&](const std::string&) {
            seed_given = true;
        });
        sub->add_option("--threads", threads, "worker count (also LIDSKII_THREADS)");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        lidskii::ExperimentConfig cfg = lidskii::load_config(config_path);
        cfg.task = app.get_subcommands().front()->get_name();
        cfg.out_dir = out_dir;
        if (seed_given) cfg.seed = seed;
        if (threads > 0) {
            cfg.threads = threads;
        } else if (const char* env = std::getenv("LIDSKII_THREADS")) {
            cfg.threads = std::max(1, std::atoi(env));
        }
        return lidskii::run_experiment(cfg);
    } catch (const lidskii::Error& e) {
        std::fprintf(stderr, "input error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
