#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ergolab/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for 1D symmetric diffusions"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    long long seed = -1;
    int threads = -1;
    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "path to config.json")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_option("--seed", seed, "RNG seed (overrides config)");
    run->add_option("--threads", threads, "worker threads (overrides config and env)");

    bool as_json = false;
    auto* list = app.add_subcommand("list", "list available experiments");
    list->add_flag("--json", as_json, "machine-readable listing");

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        std::cout << ergolab::list_experiments(as_json);
        return 0;
    }

    try {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot open config \"" << config_path << "\"\n";
            return 2;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const std::exception& e) {
            std::cerr << "error: config is not valid JSON: " << e.what() << "\n";
            return 2;
        }
        ergolab::ExperimentConfig cfg = ergolab::parse_config(j);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (threads >= 0) {
            cfg.threads = threads;
        } else if (cfg.threads == 0) {
            if (const char* env = std::getenv("ERGOLAB_THREADS")) cfg.threads = std::atoi(env);
        }
        const int rc = ergolab::run_experiment(cfg);
        std::cout << "experiment " << cfg.experiment << ": "
                  << (rc == 0 ? "all checks passed" : "CHECK FAILURE") << " (artifacts in "
                  << cfg.out_dir << ")\n";
        return rc;
    } catch (const ergolab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
