#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "oldroyd/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Compressible Oldroyd-B fixed-point solver and estimate checker"};
    app.require_subcommand(1, 1);

    std::string config;
    oldroyd::CommandOptions opts;
    opts.log = &std::cout;
    std::string out;

    const char* commands[][2] = {
        {"run", "solve by fixed-point iteration and check every monitored invariant"},
        {"mms", "manufactured-solution and self-convergence order studies"},
        {"uniqueness", "paired runs against the difference-energy envelope"},
        {"probe", "continuity probe of the fixed-point map"},
    };
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("--config", config, "configuration file")->required();
        sub->add_option("--jobs", opts.jobs, "parallel independent grids")->check(CLI::PositiveNumber);
        sub->add_option("--out", out, "output directory (overrides output.dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : oldroyd::kExitConfig;
    }
    opts.out_dir = out;
    return oldroyd::run_command(app.get_subcommands().front()->get_name(), config, opts);
}
