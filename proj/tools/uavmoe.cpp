// Command-line front end: train, eval, diagnose, sweep-noise, ablate.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 runtime abort.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uavmoe/checkpoint.hpp"
#include "uavmoe/errors.hpp"
#include "uavmoe/experiments.hpp"
#include "uavmoe/run_config.hpp"

namespace fs = std::filesystem;
using namespace uavmoe;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs
{
    std::string config;
    std::optional<std::size_t> seed;
    std::string algo;
    std::vector<std::string> overrides;
    std::string out;
    std::optional<std::size_t> total_steps;
};

void add_common(CLI::App* cmd, CommonArgs& a)
{
    cmd->add_option("--config", a.config, "Configuration file (defaults are used when omitted)");
    cmd->add_option("--seed", a.seed, "Random seed");
    cmd->add_option("--algo", a.algo, "Algorithm: mlp, moe, smoe or pemamoe");
    cmd->add_option("--set", a.overrides, "Override a key, e.g. --set train.lr=1e-3 (repeatable)");
    cmd->add_option("--out", a.out, "Output directory");
    cmd->add_option("--total-steps", a.total_steps, "Override train.total_steps");
}

cli::RunConfig build_config(const CommonArgs& a)
{
    cli::RunConfig cfg = a.config.empty() ? cli::RunConfig{} : cli::load_run_config(a.config);
    for (const auto& o : a.overrides)
        cli::apply_override(cfg, o);
    if (a.seed)
        cfg.seed = *a.seed;
    if (!a.algo.empty())
        cli::set_value(cfg, "run.algo", a.algo);
    if (a.total_steps)
        cfg.train.total_steps = *a.total_steps;
    cfg.validate();
    return cfg;
}

fs::path output_root(const cli::RunConfig& cfg)
{
    if (const char* env = std::getenv("UAVMOE_OUT_ROOT"); env && *env)
        return env;
    return cfg.out_dir;
}

fs::path output_dir(const CommonArgs& a, const cli::RunConfig& cfg, const std::string& leaf)
{
    if (!a.out.empty())
        return a.out;
    return output_root(cfg) / leaf;
}

std::string run_leaf(const cli::RunConfig& cfg)
{
    return std::string(nn::algo_name(cfg.algo)) + "_seed" + std::to_string(cfg.seed);
}

fs::path find_run_config(const fs::path& checkpoint)
{
    for (fs::path dir = checkpoint.parent_path(); !dir.empty(); dir = dir.parent_path()) {
        if (fs::exists(dir / "config.cfg"))
            return dir / "config.cfg";
        if (dir == dir.parent_path())
            break;
    }
    return {};
}

void write_text(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    std::ofstream(path) << text;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-UAV phase-aware mixture-of-experts MAPPO harness"};
    app.require_subcommand(1);

    CommonArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train one policy");
    add_common(train_cmd, train_args);

    CommonArgs eval_args;
    std::string checkpoint;
    std::size_t episodes = 32;
    auto* eval_cmd = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
    add_common(eval_cmd, eval_args);
    eval_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
    eval_cmd->add_option("--episodes", episodes, "Number of evaluation episodes");

    std::vector<std::string> run_dirs;
    double fraction = 1.0 / 3.0;
    std::string table_out;
    auto* diag_cmd = app.add_subcommand("diagnose", "Compare finished runs");
    diag_cmd->add_option("--runs", run_dirs, "Run directories")->required();
    diag_cmd->add_option("--fraction", fraction, "Trailing fraction of each run to summarise");
    diag_cmd->add_option("--out", table_out, "Write the table to this file as well");

    CommonArgs sweep_args;
    std::vector<double> gammas = cli::kDefaultNoiseGammas;
    auto* sweep_cmd = app.add_subcommand("sweep-noise", "Expert noise scale sweep");
    add_common(sweep_cmd, sweep_args);
    sweep_cmd->add_option("--gammas", gammas, "Noise scales")->delimiter(',');

    CommonArgs ablate_args;
    std::vector<std::string> components = cli::kAblationComponents;
    auto* ablate_cmd = app.add_subcommand("ablate", "Remove one controller component at a time");
    add_common(ablate_cmd, ablate_args);
    ablate_cmd->add_option("--component", components, "Components to remove")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*train_cmd) {
            const auto cfg = build_config(train_args);
            const auto dir = output_dir(train_args, cfg, run_leaf(cfg));
            const auto res = cli::run_training(cfg, dir, &std::cerr);
            std::cout << "run complete: " << res.records.size() << " iterations in " << dir.string() << '\n';
        } else if (*eval_cmd) {
            if (eval_args.config.empty()) {
                const auto found = find_run_config(checkpoint);
                if (found.empty())
                    throw ConfigError("--config", "no config.cfg next to the checkpoint; pass --config");
                eval_args.config = found.string();
            }
            const auto cfg = build_config(eval_args);
            if (!fs::exists(checkpoint))
                throw ConfigError(checkpoint, "checkpoint file not found");
            const auto summary = cli::evaluate(cfg, checkpoint, episodes, cfg.seed);
            std::cout << summary.to_json() << '\n';
            if (!eval_args.out.empty())
                write_text(fs::path(eval_args.out) / "eval_summary.json", summary.to_json() + "\n");
        } else if (*diag_cmd) {
            std::vector<fs::path> dirs(run_dirs.begin(), run_dirs.end());
            const auto table = cli::diagnose_runs(dirs, fraction);
            std::cout << table;
            if (!table_out.empty())
                write_text(table_out, table);
        } else if (*sweep_cmd) {
            auto cfg = build_config(sweep_args);
            cfg.algo = nn::Algo::pemamoe;
            const auto root = output_dir(sweep_args, cfg, "sweep_noise");
            const auto table = cli::sweep_noise(cfg, gammas, root, &std::cerr);
            write_text(root / "sweep_noise.tsv", table);
            std::cout << table;
        } else if (*ablate_cmd) {
            const auto cfg = build_config(ablate_args);
            const auto root = output_dir(ablate_args, cfg, "ablate");
            const auto table = cli::ablate(cfg, components, root, &std::cerr);
            write_text(root / "ablate.tsv", table);
            std::cout << table;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
