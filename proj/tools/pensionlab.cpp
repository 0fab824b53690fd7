#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "pensionlab/commands.hpp"
#include "pensionlab/config.hpp"
#include "pensionlab/errors.hpp"

namespace {

int run(const std::string& command, const pensionlab::RunConfig& cfg,
        const std::filesystem::path& out) {
    using namespace pensionlab;
    FileList files;
    std::string summary;
    if (command == "solve") {
        files = cmd_solve(cfg, out);
    } else if (command == "distribution") {
        files = cmd_distribution(cfg, out);
    } else if (command == "simulate") {
        files = cmd_simulate(cfg, out);
    } else if (command == "scenarios") {
        files = cmd_scenarios(cfg, out);
    } else {
        files = cmd_converge(cfg, out, &summary);
    }
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
    if (!summary.empty()) std::cout << summary << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pensionlab: optimal consumption and investment for collective pension funds"};
    std::string command;
    std::string config_path;
    std::string out_dir;
    bool print_config = false;
    app.add_option("command", command, "solve | distribution | simulate | scenarios | converge")
        ->required()
        ->check(CLI::IsMember({"solve", "distribution", "simulate", "scenarios", "converge"}));
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_flag("--print-config", print_config, "echo the parsed configuration and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        auto cfg = pensionlab::load_config(config_path);
        if (!out_dir.empty()) cfg.output = out_dir;
        if (print_config) {
            std::cout << pensionlab::to_json(cfg).dump(2) << '\n';
            return 0;
        }
        return run(command, cfg, cfg.output);
    } catch (const pensionlab::DivergenceError& e) {
        std::cerr << "error: " << e.what() << " (t index " << e.grid_index() << ", survivors "
                  << e.survivors() << ")\n";
        return 3;
    } catch (const pensionlab::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const pensionlab::IngestionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const pensionlab::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
