// delaygame: command-line front end. Reports go to stdout as JSON,
// diagnostics to stderr.

#include "delaygame/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using delaygame::cli::CommandResult;
using delaygame::io::json;

// Line and column of a byte offset, for parse diagnostics.
std::string locate(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

int load_config(const std::string& path, json& out) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "config error: cannot open '" << path << "'\n";
        return delaygame::cli::kConfigError;
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        out = json::parse(text);
    } catch (const json::parse_error& e) {
        std::cerr << "config error: " << path << ": " << locate(text, e.byte > 0 ? e.byte - 1 : 0) << ": " << e.what()
                  << "\n";
        return delaygame::cli::kConfigError;
    }
    return delaygame::cli::kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-sum differential games with time delay: simulation, Hamiltonians, values, verification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::int64_t seed = -1;
    double tolerance = -1.0;
    app.add_option("--config", config_path, "RunConfig JSON file")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Overrides the config seed")->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_path, "Output file (CSV for simulate, JSON otherwise)");
    app.add_option("--tolerance", tolerance, "Residual tolerance for verify")->check(CLI::NonNegativeNumber);

    for (const char* name : {"simulate", "hamiltonian", "value", "verify", "audit"}) {
        auto* sub = app.add_subcommand(name);
        sub->fallthrough();
    }
    app.get_subcommand("simulate")->description("Integrate one motion; CSV trajectory and payoff summary");
    app.get_subcommand("hamiltonian")->description("Grid min-max and max-min of the pre-Hamiltonian");
    app.get_subcommand("value")->description("Lower, upper and programmed maximin values by game-tree search");
    app.get_subcommand("verify")->description("Check the viscosity inequalities of a registered functional");
    app.get_subcommand("audit")->description("Sample the growth, Lipschitz and saddle-point conditions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : delaygame::cli::kConfigError;
    }

    json config;
    if (const int rc = load_config(config_path, config); rc != 0) return rc;

    delaygame::cli::RunOptions opts;
    if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
    if (tolerance >= 0.0) opts.tolerance = tolerance;

    const std::string command = app.get_subcommands().front()->get_name();
    const CommandResult res = delaygame::cli::run_command(command, config, opts);
    if (!res.message.empty()) std::cerr << res.message << "\n";
    if (!res.report.is_null()) std::cout << res.report.dump(2) << "\n";

    if (!out_path.empty() && (res.exit_code == 0 || res.exit_code == 1)) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "cannot write '" << out_path << "'\n";
            return delaygame::cli::kConfigError;
        }
        if (command == "simulate") out << res.csv;
        else out << res.report.dump(2) << "\n";
    }
    return res.exit_code;
}
