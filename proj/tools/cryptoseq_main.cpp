#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cryptoseq/errors.hpp"
#include "cryptoseq/experiment.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "Path to a key = value config file");
    cmd->add_option("--out", opts.out_dir, "Output directory (default: runs/<config hash>)");
    cmd->add_option("--seed", opts.seed, "Override the config seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
}

int dispatch(const std::string& command, const CommonOptions& opts) {
    cryptoseq::cli::ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = cryptoseq::cli::load_config_file(opts.config_path);
    }
    if (opts.seed_set) {
        cfg.seed = opts.seed;
    }
    std::string out_dir = opts.out_dir;
    if (out_dir.empty()) {
        out_dir = "runs/" + cryptoseq::cli::config_hash(cfg);
    }
    cryptoseq::cli::run_command(command, cfg, out_dir);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bitcoin next-day price prediction pipeline: recurrent networks, "
                 "SARIMA baseline and trading-strategy backtests"};
    app.require_subcommand(1);

    CommonOptions opts;
    for (const auto& name : {"synth", "features", "train", "evaluate", "backtest", "pipeline"}) {
        add_common(app.add_subcommand(name), opts);
    }

    CLI11_PARSE(app, argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, opts);
    } catch (const cryptoseq::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const cryptoseq::IoError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const cryptoseq::SchemaError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const cryptoseq::DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
