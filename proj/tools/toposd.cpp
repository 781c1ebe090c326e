#include "toposd/app.hpp"
#include "toposd/error.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace toposd;

int main(int argc, char **argv)
{
    CLI::App app{"Topological state derivative lab: P1 finite elements on 2-D hold-all domains"};
    app.require_subcommand(1);

    std::string config_path;
    RunFlags flags;
    int threads = 0;
    const std::vector<std::pair<Command, std::string>> commands{
        {Command::solve, "Solve the state problem and write the nodal field"},
        {Command::state_derivative, "Compute U0 along the configured routes and compare them"},
        {Command::rate_study, "Sweep epsilon, measure ||U_eps - U0|| and fit the log-log slope"},
        {Command::topo_derivative, "Topological derivative of a functional by adjoint, chain rule and FD"},
        {Command::mesh_info, "Build the configured mesh and report its statistics"},
    };
    std::vector<std::pair<CLI::App *, Command>> subs;
    for (const auto &[cmd, help] : commands) {
        CLI::App *s = app.add_subcommand(to_string(cmd), help);
        s->add_option("--config", config_path, "Config file (TOML)")->required()->check(CLI::ExistingFile);
        s->add_option("--out", flags.out_dir, "Output directory")->capture_default_str();
        s->add_flag("--deterministic", flags.deterministic, "Sequential solves, null timestamps");
        s->add_option("--threads", threads, "Concurrent sweep members")->check(CLI::PositiveNumber);
        s->add_flag("--smoke", flags.smoke, "Reduced resolution for quick checks");
        subs.emplace_back(s, cmd);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    if (threads > 0)
        flags.threads = threads;

    Command cmd = Command::solve;
    for (const auto &[s, c] : subs)
        if (s->parsed())
            cmd = c;

    try {
        const RunConfig config = load_config(config_path);
        const RunResult r = run_command(cmd, config, flags);
        std::cout << to_string(cmd) << ": wrote " << r.files.size() << " files to " << flags.out_dir
                  << " (config " << r.config_hash.substr(0, 12) << ")\n";
        return 0;
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception &e) {
        std::cerr << "error: InternalError: " << e.what() << "\n";
        return 3;
    }
}
