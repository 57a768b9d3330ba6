#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stab/commands.hpp"

namespace {

struct SubArgs {
    std::string config;
    std::string out;
    bool svg = false;
    bool degrees = false;
    bool verify = false;
};

void add_common_options(CLI::App* sub, SubArgs& args) {
    sub->add_option("--config", args.config, "JSON analysis config")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory (default: out_dir from the config)");
    sub->add_flag("--svg", args.svg, "also write SVG charts where supported");
    sub->add_flag("--degrees", args.degrees, "display angles in degrees (files stay in radians)");
    sub->add_flag("--verify", args.verify,
                  "cross-check analytic gradients against finite differences first");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Potential-energy stability analysis for a spring-restrained "
                 "universal-joint mechanism"};
    app.require_subcommand(1);

    using Command = int (*)(const stab::AnalysisConfig&, const stab::CommandOptions&,
                            std::ostream&, std::ostream&);
    struct Entry {
        CLI::App* sub;
        SubArgs args;
        Command run;
    };
    std::vector<Entry> entries;
    entries.reserve(5);

    const auto add = [&](const char* name, const char* help, Command run) {
        entries.push_back({app.add_subcommand(name, help), {}, run});
        add_common_options(entries.back().sub, entries.back().args);
    };
    add("landscape", "tabulate the energy over beta and mark the minimum", stab::cmd_landscape);
    add("equilibria", "find and classify stationary points", stab::cmd_equilibria);
    add("sweep", "equilibrium deflection across the configured stiffness list", stab::cmd_sweep);
    add("critical-k", "minimal stiffness meeting the deflection bound", stab::cmd_critical_k);
    add("fit", "fit reduced coefficients to the geometric model", stab::cmd_fit);

    CLI11_PARSE(app, argc, argv);

    for (Entry& entry : entries) {
        if (!entry.sub->parsed()) continue;
        try {
            std::vector<std::string> notes;
            const stab::AnalysisConfig cfg = stab::load_config(entry.args.config, &notes);
            for (const std::string& note : notes) std::cerr << "config: " << note << "\n";
            std::cerr << stab::describe(cfg);

            stab::CommandOptions opt;
            opt.out_dir = entry.args.out;
            opt.svg = entry.args.svg;
            opt.degrees = entry.args.degrees;
            opt.verify = entry.args.verify;
            return entry.run(cfg, opt, std::cout, std::cerr);
        } catch (const stab::ConfigError& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return 1;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 1;  // unreachable: require_subcommand(1)
}
