#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cryptoseq/errors.hpp"
#include "cryptoseq/experiment.hpp"

using namespace cryptoseq;
using namespace cryptoseq::cli;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Small synthetic experiment: 400 generated days starting 2013-01-01.
ExperimentConfig tiny_config(const fs::path& data_dir) {
    ExperimentConfig cfg;
    cfg.data_dir = data_dir.string();
    cfg.synth_days = 400;
    cfg.synth_features = 3;
    cfg.model_family = "GRU1";
    cfg.lookback = 10;
    cfg.lookbacks = {5, 8};
    cfg.epochs = 2;
    cfg.batch_size = 32;
    cfg.volatility_window = 20;
    cfg.train_start = "2013-01-01";
    cfg.train_end = "2013-10-31";
    cfg.val_start = "2013-11-01";
    cfg.val_end = "2013-12-15";
    cfg.test_start = "2013-12-16";
    cfg.test_end = "2014-02-04";
    cfg.seed = 7;
    return cfg;
}

} // namespace

TEST_CASE("an empty config file yields the documented defaults") {
    const ExperimentConfig cfg = parse_config("");
    CHECK(cfg.lookback == 30);
    CHECK(cfg.model_family == "GRU1RecurrentDropout");
    CHECK(cfg.epochs == 100);
    CHECK(cfg.learning_rate == doctest::Approx(0.001));
    CHECK(cfg.batch_size == 0);
    CHECK(cfg.strategy == "long_short");
    CHECK(cfg.fee == doctest::Approx(0.008));
    CHECK(cfg.train_start == "2010-01-01");
    CHECK(cfg.test_end == "2019-06-30");
    CHECK(cfg.prune_threshold == doctest::Approx(0.8));
    CHECK_FALSE(cfg.paper_mode_normalization);
}

TEST_CASE("keys parse with comments and whitespace") {
    const ExperimentConfig cfg = parse_config(
        "# experiment\n"
        "lookback = 30\n"
        "model_family = GRU2Dropout  # two recurrent layers\n"
        "forced_drops = Miner Revenue, Block size\n"
        "paper_mode_normalization = true\n"
        "\n"
        "seed = 99\n");
    CHECK(cfg.lookback == 30);
    CHECK(cfg.model_family == "GRU2Dropout");
    CHECK(cfg.forced_drops == std::vector<std::string>{"Miner Revenue", "Block size"});
    CHECK(cfg.paper_mode_normalization);
    CHECK(cfg.seed == 99);
}

TEST_CASE("malformed values name the key and line") {
    try {
        parse_config("lookback = banana\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("lookback") != std::string::npos);
        CHECK(what.find("line 1") != std::string::npos);
    }
}

TEST_CASE("unknown keys name the key and line") {
    try {
        parse_config("# fine\nlookback = 15\nlookbak = 30\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("lookbak") != std::string::npos);
        CHECK(what.find("line 3") != std::string::npos);
    }
}

TEST_CASE("invalid dates, families and strategies are rejected") {
    CHECK_THROWS_AS(parse_config("train_start = 2019-13-01\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model_family = GRU9\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("strategy = martingale\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("lookback\n"), ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
    const ExperimentConfig base;
    CHECK(config_hash(base) == config_hash(ExperimentConfig{}));
    ExperimentConfig changed;
    changed.seed = 43;
    CHECK(config_hash(base) != config_hash(changed));
    CHECK(config_hash(base).size() == 16);
}

TEST_CASE("synth writes mergeable source files") {
    TempDir dir("cryptoseq_exp_synth");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    run_synth(cfg);
    CHECK(fs::exists(dir.path / "data" / "synth_price.csv"));
    CHECK(fs::exists(dir.path / "data" / "synth_factors.csv"));

    const TimeSeriesFrame price = read_csv((dir.path / "data" / "synth_price.csv").string());
    const TimeSeriesFrame factors =
        read_csv((dir.path / "data" / "synth_factors.csv").string());
    CHECK(price.column_count() == 1);
    CHECK(factors.column_count() == 3);
    CHECK(price.row_count() == 400);
    const TimeSeriesFrame merged = merge_frames({price, factors});
    CHECK(merged.column_count() == 4);
}

TEST_CASE("prepare_data selects features and normalizes the train range") {
    TempDir dir("cryptoseq_exp_prepare");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    run_synth(cfg);
    const PreparedData data = prepare_data(cfg);

    CHECK(data.normalized.column_names().front() == "price");
    CHECK(data.raw.has_column("macd"));
    CHECK(data.raw.has_column("volatility"));
    CHECK(data.raw.has_column("returns"));

    // Train-range moments of the normalized target: mean 0, std 1.
    const auto begin = data.normalized.row_for_date(parse_date(cfg.train_start));
    const auto end = data.normalized.row_for_date(parse_date(cfg.train_end));
    const auto& col = data.normalized.column("price");
    const std::size_t b = begin ? *begin : 0;
    const std::size_t e = end ? *end + 1 : col.size();
    double mean = 0.0;
    for (std::size_t r = b; r < e; ++r) mean += col[r];
    mean /= static_cast<double>(e - b);
    CHECK(std::abs(mean) < 1e-9);

    CHECK(data.splits.train.row_count() > 0);
    CHECK(data.splits.validation.row_count() == 45);
    CHECK(data.splits.test.row_count() == 51);
}

TEST_CASE("pipeline emits every artifact and is byte-deterministic") {
    TempDir dir("cryptoseq_exp_pipeline");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    cfg.strategy = "buy_sell";
    run_synth(cfg);

    const fs::path out_a = dir.path / "run_a";
    const fs::path out_b = dir.path / "run_b";
    run_command("pipeline", cfg, out_a.string());
    run_command("pipeline", cfg, out_b.string());

    const std::vector<std::string> artifacts{
        "features.json",       "train_report.csv", "train_summary.json",
        "predictions.csv",     "model.bin",        "portfolio_buy_sell.csv",
        "ledger_buy_sell.csv",
    };
    for (const auto& name : artifacts) {
        INFO("artifact ", name);
        REQUIRE(fs::exists(out_a / name));
        REQUIRE(fs::exists(out_b / name));
        CHECK(slurp(out_a / name) == slurp(out_b / name));
    }

    // A different seed must change the trained artifacts.
    ExperimentConfig reseeded = cfg;
    reseeded.seed = 8;
    run_synth(reseeded); // regenerate data under the new seed
    const fs::path out_c = dir.path / "run_c";
    run_command("pipeline", reseeded, out_c.string());
    CHECK(slurp(out_a / "predictions.csv") != slurp(out_c / "predictions.csv"));
}

TEST_CASE("train artifacts have the declared schemas") {
    TempDir dir("cryptoseq_exp_train");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    run_synth(cfg);
    const fs::path out = dir.path / "out";
    run_command("train", cfg, out.string());

    const std::string report = slurp(out / "train_report.csv");
    CHECK(report.rfind("epoch,train_loss,val_loss\n", 0) == 0);
    CHECK(std::count(report.begin(), report.end(), '\n') == 3); // header + 2 epochs

    const std::string summary = slurp(out / "train_summary.json");
    CHECK(summary.find("\"best_epoch\"") != std::string::npos);
    CHECK(summary.find("\"rmse_train\"") != std::string::npos);
    CHECK(summary.find("\"rmse_test\"") != std::string::npos);

    const TimeSeriesFrame preds = read_csv((out / "predictions.csv").string());
    CHECK(preds.column_names() == std::vector<std::string>{"predicted", "actual"});
    CHECK(preds.row_count() == 51);
    CHECK(preds.dates().front() == parse_date("2013-12-16"));
}

TEST_CASE("train with zero epochs still writes a valid empty-curve report") {
    TempDir dir("cryptoseq_exp_zero_epochs");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    cfg.epochs = 0;
    run_synth(cfg);
    const fs::path out = dir.path / "out";
    run_command("train", cfg, out.string());
    CHECK(slurp(out / "train_report.csv") == "epoch,train_loss,val_loss\n");
    const std::string summary = slurp(out / "train_summary.json");
    CHECK(summary.find("\"best_epoch\": -1") != std::string::npos);
    CHECK(fs::exists(out / "predictions.csv"));
}

TEST_CASE("evaluate sweeps the configured lookbacks") {
    TempDir dir("cryptoseq_exp_eval");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    run_synth(cfg);
    const fs::path out = dir.path / "out";
    run_command("evaluate", cfg, out.string());
    const std::string csv = slurp(out / "lookback_rmse.csv");
    CHECK(csv.rfind("lookback,rmse_train,rmse_test\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3); // header + {5, 8}
    CHECK(csv.find("\n5,") != std::string::npos);
    CHECK(csv.find("\n8,") != std::string::npos);
}

TEST_CASE("backtest consumes saved predictions and enforces prerequisites") {
    TempDir dir("cryptoseq_exp_bt");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    run_synth(cfg);
    const fs::path out = dir.path / "out";

    CHECK_THROWS_AS(run_command("backtest", cfg, out.string()), IoError);

    run_command("train", cfg, out.string());
    run_command("backtest", cfg, out.string());
    CHECK(fs::exists(out / "portfolio_long_short.csv"));
    CHECK(fs::exists(out / "ledger_long_short.csv"));

    const std::string portfolio = slurp(out / "portfolio_long_short.csv");
    CHECK(portfolio.rfind("date,signal,portfolio_value\n", 0) == 0);
    CHECK(std::count(portfolio.begin(), portfolio.end(), '\n') == 51); // header + 50 days

    const std::string ledger = slurp(out / "ledger_long_short.csv");
    CHECK(ledger.rfind("date,side,price,notional,fee\n", 0) == 0);
}

TEST_CASE("strategy none skips the backtest outputs") {
    TempDir dir("cryptoseq_exp_none");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    cfg.strategy = "none";
    run_synth(cfg);
    const fs::path out = dir.path / "out";
    run_command("pipeline", cfg, out.string());
    CHECK(!fs::exists(out / "portfolio_long_short.csv"));
    CHECK(fs::exists(out / "predictions.csv"));
}

TEST_CASE("an optional buy-and-hold reference series can be emitted") {
    TempDir dir("cryptoseq_exp_bh");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    cfg.emit_buy_hold = true;
    run_synth(cfg);
    const fs::path out = dir.path / "out";
    run_command("pipeline", cfg, out.string());
    REQUIRE(fs::exists(out / "buy_hold.csv"));
    const std::string csv = slurp(out / "buy_hold.csv");
    CHECK(csv.rfind("date,buy_hold_value\n", 0) == 0);
}

TEST_CASE("the sarima baseline artifact is written when enabled") {
    TempDir dir("cryptoseq_exp_sarima");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    cfg.sarima_baseline = true;
    run_synth(cfg);
    const fs::path out = dir.path / "out";
    run_command("train", cfg, out.string());
    REQUIRE(fs::exists(out / "sarima.json"));
    const std::string json = slurp(out / "sarima.json");
    CHECK(json.find("\"order\"") != std::string::npos);
    CHECK(json.find("\"rmse_test\"") != std::string::npos);
    CHECK(json.find("\"aic\"") != std::string::npos);
}

TEST_CASE("unknown commands and missing data directories fail loudly") {
    TempDir dir("cryptoseq_exp_err");
    ExperimentConfig cfg = tiny_config(dir.path / "data");
    CHECK_THROWS_AS(run_command("explode", cfg, (dir.path / "out").string()), ConfigError);
    CHECK_THROWS_AS(run_command("train", cfg, (dir.path / "out").string()), IoError);
}

#ifdef CRYPTOSEQ_CLI_PATH
namespace {

int run_cli(const std::string& args, const fs::path& cwd) {
    const std::string command =
        "cd '" + cwd.string() + "' && '" + CRYPTOSEQ_CLI_PATH + "' " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("the cryptoseq binary wires commands, flags and exit codes") {
    TempDir dir("cryptoseq_cli_e2e");
    std::ofstream(dir.path / "exp.cfg")
        << "synth_days = 400\nsynth_features = 3\nmodel_family = GRU1\nlookback = 10\n"
        << "epochs = 1\nbatch_size = 32\nvolatility_window = 20\n"
        << "train_start = 2013-01-01\ntrain_end = 2013-10-31\n"
        << "val_start = 2013-11-01\nval_end = 2013-12-15\n"
        << "test_start = 2013-12-16\ntest_end = 2014-02-04\nseed = 3\n";

    CHECK(run_cli("synth --config exp.cfg", dir.path) == 0);
    CHECK(fs::exists(dir.path / "data" / "synth_price.csv"));
    CHECK(run_cli("pipeline --config exp.cfg --out run1", dir.path) == 0);
    CHECK(fs::exists(dir.path / "run1" / "train_summary.json"));

    // Default out dir is derived from the config hash.
    CHECK(run_cli("features --config exp.cfg", dir.path) == 0);
    bool found_hash_dir = false;
    if (fs::exists(dir.path / "runs")) {
        for (const auto& entry : fs::directory_iterator(dir.path / "runs")) {
            if (fs::exists(entry.path() / "features.json")) found_hash_dir = true;
        }
    }
    CHECK(found_hash_dir);

    // Exit codes: 1 = config error, 2 = missing inputs.
    std::ofstream(dir.path / "bad.cfg") << "no_such_key = 1\n";
    CHECK(run_cli("train --config bad.cfg", dir.path) == 1);
    CHECK(run_cli("backtest --config exp.cfg --out empty_dir", dir.path) == 2);
    std::ofstream(dir.path / "missing_data.cfg") << "data_dir = nowhere\n";
    CHECK(run_cli("train --config missing_data.cfg", dir.path) == 2);

    // --seed overrides the config seed, changing the artifacts.
    CHECK(run_cli("pipeline --config exp.cfg --out run2 --seed 4", dir.path) == 0);
    CHECK(slurp(dir.path / "run1" / "predictions.csv") !=
          slurp(dir.path / "run2" / "predictions.csv"));
}
#endif
