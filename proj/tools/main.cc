#include <CLI11.hpp>

#include "fermirot/cli.h"

int main(int argc, char** argv) {
    CLI::App app{"Exact closed-form fermionic rotations: transform, downfold, dynamics, inspect"};
    app.require_subcommand(1);

    fermirot::CliOptions options;
    int (*runner)(const fermirot::CliOptions&) = nullptr;

    for (const auto& [name, desc, fn] :
         {std::tuple{"transform", "Classify and rotate a single operator product",
                     &fermirot::cmd_transform},
          std::tuple{"downfold", "Adaptive block-diagonalization of a Hamiltonian",
                     &fermirot::cmd_downfold},
          std::tuple{"dynamics", "Trotterized Heisenberg dynamics of an observable",
                     &fermirot::cmd_dynamics},
          std::tuple{"inspect", "Summarize an operator JSON file", &fermirot::cmd_inspect}}) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", options.config_path, "Configuration file")->required();
        sub->add_option("--out", options.out_dir, "Output directory (default: .)");
        sub->add_option("--threads", options.threads, "Worker threads for pool scans");
        sub->add_option("--seed", options.seed, "Seed echoed into the run summary");
        sub->callback([&runner, fn]() { runner = fn; });
    }

    CLI11_PARSE(app, argc, argv);
    return runner ? runner(options) : 2;
}
