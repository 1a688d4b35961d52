#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cryptoseq/dataset.hpp"
#include "cryptoseq/features.hpp"
#include "cryptoseq/training.hpp"

namespace cryptoseq::cli {

enum class Strategy { LongShort, BuySell, None };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy s);

/// One experiment, fully determined by a key=value config file. Every key has
/// a default mirroring the daily-Bitcoin protocol (GRU with recurrent dropout,
/// 30-day lookback, rates 0.1, batch 100).
struct ExperimentConfig {
    std::string data_dir = "data";
    std::string target_column = "price";
    std::string model_family = "GRU1RecurrentDropout";
    std::size_t lookback = 30;
    std::vector<std::size_t> lookbacks = {15, 30, 45, 60}; // evaluate sweep

    std::string train_start = "2010-01-01";
    std::string train_end = "2018-06-30";
    std::string val_start = "2018-07-01";
    std::string val_end = "2018-12-31";
    std::string test_start = "2019-01-01";
    std::string test_end = "2019-06-30";

    std::size_t epochs = 100;
    std::size_t batch_size = 0; // 0 = family default (125 dense, 100 recurrent)
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 5.0;
    double dropout = -1.0;           // < 0 = family default
    double recurrent_dropout = -1.0; // < 0 = family default

    std::string strategy = "long_short";
    double fee = 0.008;
    bool emit_buy_hold = false;

    std::vector<std::string> forced_drops;
    double prune_threshold = 0.8;
    bool paper_mode_normalization = false; // fit the normalizer on all rows, not just train
    bool derive_indicators = true;
    std::size_t volatility_window = 30;
    bool sarima_baseline = false;

    std::uint64_t seed = 42;
    std::size_t synth_days = 2000;
    std::size_t synth_features = 4;
};

/// Parses `key = value` lines with `#` comments. Unknown keys and malformed
/// values raise ConfigError naming the key and line.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config_file(const std::string& path);

/// Resolved config as sorted `key = value` lines; hashed for the run directory.
std::string canonical_config_text(const ExperimentConfig& cfg);

/// FNV-1a 64 over the canonical text, as 16 hex chars.
std::string config_hash(const ExperimentConfig& cfg);

/// Prepared inputs shared by every model-facing command.
struct PreparedData {
    TimeSeriesFrame raw;        // ingested + indicators, price units
    TimeSeriesFrame normalized; // selected columns, z-scored
    FeatureReport feature_report;
    Normalizer normalizer;
    SplitFrames splits; // of the normalized frame
    SplitSpec split_spec;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct TrainedModel {
    RecurrentNetwork net;
    TrainReport report;
    std::vector<Date> test_dates;
    std::vector<double> predicted_prices; // denormalized
    std::vector<double> actual_prices;
};

TrainedModel train_model(const ExperimentConfig& cfg, const PreparedData& data,
                         std::size_t lookback);

void run_synth(const ExperimentConfig& cfg);
void run_features(const ExperimentConfig& cfg, const std::string& out_dir);
void run_train(const ExperimentConfig& cfg, const std::string& out_dir);
void run_evaluate(const ExperimentConfig& cfg, const std::string& out_dir);
void run_backtest(const ExperimentConfig& cfg, const std::string& out_dir);
void run_pipeline(const ExperimentConfig& cfg, const std::string& out_dir);

/// Dispatch by subcommand name; creates out_dir if needed.
void run_command(const std::string& command, const ExperimentConfig& cfg,
                 const std::string& out_dir);

} // namespace cryptoseq::cli
