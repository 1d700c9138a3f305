#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "resetgraph/commands.hpp"
#include "resetgraph/util.hpp"

namespace {

using resetgraph::commands::kExitConfig;
using resetgraph::commands::kExitSolver;

resetgraph::io::json load_config(const std::string& path) {
    return resetgraph::io::read_json_file(path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scaled-graph analysis and design of reset control systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    int threads = 0;
    std::uint64_t seed = 0;

    app.add_option("--threads", threads, "cap on worker threads (0 = hardware)");

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
    };

    CLI::App* sg = app.add_subcommand("sg", "SG over-approximation region");
    add_common(sg, true);
    CLI::App* patch = app.add_subcommand("patch", "patched base-linear SG region");
    add_common(patch, true);
    CLI::App* admissible = app.add_subcommand("admissible", "reset-map admissibility check");
    add_common(admissible, true);
    CLI::App* stability = app.add_subcommand("stability", "closed-loop stability certificate");
    add_common(stability, true);
    CLI::App* design = app.add_subcommand("design", "three-step reset controller synthesis");
    add_common(design, true);
    CLI::App* simulate = app.add_subcommand("simulate", "reset / closed-loop simulation");
    add_common(simulate, true);
    CLI::App* sgcloud = app.add_subcommand("sgcloud", "sampled hard-SG point cloud");
    add_common(sgcloud, true);
    CLI::App* reproduce =
        app.add_subcommand("reproduce-example", "pinned worked-example pipeline");
    add_common(reproduce, false);
    reproduce->add_option("--seed", seed, "seed for the validation cloud");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    if (const char* env = std::getenv("RESETGRAPH_THREADS"); env && threads == 0)
        threads = std::atoi(env);
    resetgraph::set_max_threads(threads);

    using namespace resetgraph::commands;
    try {
        if (sg->parsed()) return cmd_sg(load_config(config_path), out_dir, false);
        if (patch->parsed()) return cmd_sg(load_config(config_path), out_dir, true);
        if (admissible->parsed()) return cmd_admissible(load_config(config_path), out_dir);
        if (stability->parsed()) return cmd_stability(load_config(config_path), out_dir);
        if (design->parsed()) return cmd_design(load_config(config_path), out_dir);
        if (simulate->parsed()) return cmd_simulate(load_config(config_path), out_dir);
        if (sgcloud->parsed()) return cmd_sgcloud(load_config(config_path), out_dir);
        if (reproduce->parsed()) return cmd_reproduce_example(out_dir, seed);
    } catch (const resetgraph::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitConfig;
}
