// discount-reach <solve-ra|solve-rclvf|solve-sa|simulate|export> --config <path> [--out <dir>] [--threads N]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dreach/commands.hpp"
#include "dreach/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Discounted reach-avoid and stabilize-avoid solver", "discount-reach"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out;
    std::string field;
    std::size_t threads = 0;

    const auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides output_dir)");
        sub->add_option("--threads", threads, "worker threads (default: $DISCOUNT_REACH_THREADS or 1)")
            ->check(CLI::PositiveNumber);
        return sub;
    };
    add("solve-ra", "discounted reach-avoid value function")->get_option("--config")->required();
    add("solve-rclvf", "robust control Lyapunov-value function")->get_option("--config")->required();
    add("solve-sa", "stabilize-avoid pipeline")->get_option("--config")->required();
    add("simulate", "closed-loop rollouts from stored solves")->get_option("--config")->required();
    auto* exp = add("export", "binary fields to CSV");
    exp->add_option("--field", field, "single field file to convert");
    exp->get_option("--out")->description("output directory, or CSV path together with --field");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : dreach::exit_code::config_error;
    }

    if (threads == 0) {
        if (const char* env = std::getenv("DISCOUNT_REACH_THREADS")) {
            try {
                threads = std::stoul(env);
            } catch (const std::exception&) {
                std::cerr << "ignoring DISCOUNT_REACH_THREADS='" << env << "'\n";
            }
        }
    }
    if (threads > 0) dreach::set_thread_count(threads);

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "export" && config.empty() && field.empty()) {
        std::cerr << "export: pass --config or --field\n";
        return dreach::exit_code::config_error;
    }
    const auto opt = [](const std::string& s) {
        return s.empty() ? std::nullopt : std::optional<std::filesystem::path>(s);
    };
    return dreach::run_command(command, config, opt(out), opt(field), std::cerr);
}
