#include "cryptoseq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "cryptoseq/backtest.hpp"
#include "cryptoseq/errors.hpp"
#include "cryptoseq/model_io.hpp"
#include "cryptoseq/sarima.hpp"

namespace fs = std::filesystem;

namespace cryptoseq::cli {

namespace {

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("CRYPTOSEQ_LOG");
        if (env == nullptr) return 1;
        const std::string v(env);
        if (v == "off" || v == "0") return 0;
        if (v == "debug") return 3;
        if (v == "info") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[cryptoseq] " << msg << '\n';
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i > 0) out += ",";
        out += items[i];
    }
    return out;
}

} // namespace

Strategy parse_strategy(const std::string& name) {
    if (name == "long_short") return Strategy::LongShort;
    if (name == "buy_sell") return Strategy::BuySell;
    if (name == "none") return Strategy::None;
    throw ConfigError("unknown strategy '" + name + "'");
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::LongShort: return "long_short";
        case Strategy::BuySell: return "buy_sell";
        case Strategy::None: return "none";
    }
    return "none";
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;

    auto fail = [&](const std::string& what) -> void {
        throw ConfigError(what + " at line " + std::to_string(line_no));
    };
    auto parse_u64 = [&](const std::string& key, const std::string& v) -> std::uint64_t {
        try {
            std::size_t used = 0;
            const unsigned long long out = std::stoull(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            fail("malformed value '" + v + "' for key '" + key + "'");
        }
        return 0;
    };
    auto parse_double = [&](const std::string& key, const std::string& v) -> double {
        try {
            std::size_t used = 0;
            const double out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            fail("malformed value '" + v + "' for key '" + key + "'");
        }
        return 0.0;
    };
    auto parse_bool = [&](const std::string& key, const std::string& v) -> bool {
        if (v == "true" || v == "1") return true;
        if (v == "false" || v == "0") return false;
        fail("malformed value '" + v + "' for key '" + key + "' (expected true/false)");
        return false;
    };
    auto parse_date_str = [&](const std::string& key, const std::string& v) -> std::string {
        try {
            parse_date(v);
        } catch (const std::exception&) {
            fail("malformed value '" + v + "' for key '" + key + "' (expected YYYY-MM-DD)");
        }
        return v;
    };

    while (std::getline(ss, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail("expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "data_dir") cfg.data_dir = value;
        else if (key == "target_column") cfg.target_column = value;
        else if (key == "model_family") {
            try {
                parse_family(value);
            } catch (const std::exception&) {
                fail("malformed value '" + value + "' for key 'model_family'");
            }
            cfg.model_family = value;
        } else if (key == "lookback") {
            cfg.lookback = parse_u64(key, value);
            if (cfg.lookback == 0) fail("lookback must be positive");
        } else if (key == "lookbacks") {
            cfg.lookbacks.clear();
            for (const auto& item : split_list(value)) {
                cfg.lookbacks.push_back(parse_u64(key, item));
            }
            if (cfg.lookbacks.empty()) fail("lookbacks must be nonempty");
        } else if (key == "train_start") cfg.train_start = parse_date_str(key, value);
        else if (key == "train_end") cfg.train_end = parse_date_str(key, value);
        else if (key == "val_start") cfg.val_start = parse_date_str(key, value);
        else if (key == "val_end") cfg.val_end = parse_date_str(key, value);
        else if (key == "test_start") cfg.test_start = parse_date_str(key, value);
        else if (key == "test_end") cfg.test_end = parse_date_str(key, value);
        else if (key == "epochs") cfg.epochs = parse_u64(key, value);
        else if (key == "batch_size") cfg.batch_size = parse_u64(key, value);
        else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
        else if (key == "beta1") cfg.beta1 = parse_double(key, value);
        else if (key == "beta2") cfg.beta2 = parse_double(key, value);
        else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
        else if (key == "clip_norm") cfg.clip_norm = parse_double(key, value);
        else if (key == "dropout") cfg.dropout = parse_double(key, value);
        else if (key == "recurrent_dropout") cfg.recurrent_dropout = parse_double(key, value);
        else if (key == "strategy") {
            try {
                parse_strategy(value);
            } catch (const std::exception&) {
                fail("malformed value '" + value + "' for key 'strategy'");
            }
            cfg.strategy = value;
        } else if (key == "fee") cfg.fee = parse_double(key, value);
        else if (key == "emit_buy_hold") cfg.emit_buy_hold = parse_bool(key, value);
        else if (key == "forced_drops") cfg.forced_drops = split_list(value);
        else if (key == "prune_threshold") cfg.prune_threshold = parse_double(key, value);
        else if (key == "paper_mode_normalization")
            cfg.paper_mode_normalization = parse_bool(key, value);
        else if (key == "derive_indicators") cfg.derive_indicators = parse_bool(key, value);
        else if (key == "volatility_window") {
            cfg.volatility_window = parse_u64(key, value);
            if (cfg.volatility_window < 2) fail("volatility_window must be >= 2");
        } else if (key == "sarima_baseline") cfg.sarima_baseline = parse_bool(key, value);
        else if (key == "seed") cfg.seed = parse_u64(key, value);
        else if (key == "synth_days") cfg.synth_days = parse_u64(key, value);
        else if (key == "synth_features") cfg.synth_features = parse_u64(key, value);
        else {
            fail("unknown key '" + key + "'");
        }
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
    std::vector<std::string> lookbacks;
    for (std::size_t l : cfg.lookbacks) lookbacks.push_back(std::to_string(l));
    std::vector<std::string> lines = {
        "batch_size = " + std::to_string(cfg.batch_size),
        "beta1 = " + format_double(cfg.beta1),
        "beta2 = " + format_double(cfg.beta2),
        "clip_norm = " + format_double(cfg.clip_norm),
        "data_dir = " + cfg.data_dir,
        "derive_indicators = " + std::string(cfg.derive_indicators ? "true" : "false"),
        "dropout = " + format_double(cfg.dropout),
        "emit_buy_hold = " + std::string(cfg.emit_buy_hold ? "true" : "false"),
        "epochs = " + std::to_string(cfg.epochs),
        "epsilon = " + format_double(cfg.epsilon),
        "fee = " + format_double(cfg.fee),
        "forced_drops = " + join(cfg.forced_drops),
        "learning_rate = " + format_double(cfg.learning_rate),
        "lookback = " + std::to_string(cfg.lookback),
        "lookbacks = " + join(lookbacks),
        "model_family = " + cfg.model_family,
        "paper_mode_normalization = " +
            std::string(cfg.paper_mode_normalization ? "true" : "false"),
        "prune_threshold = " + format_double(cfg.prune_threshold),
        "recurrent_dropout = " + format_double(cfg.recurrent_dropout),
        "sarima_baseline = " + std::string(cfg.sarima_baseline ? "true" : "false"),
        "seed = " + std::to_string(cfg.seed),
        "strategy = " + cfg.strategy,
        "synth_days = " + std::to_string(cfg.synth_days),
        "synth_features = " + std::to_string(cfg.synth_features),
        "target_column = " + cfg.target_column,
        "test_end = " + cfg.test_end,
        "test_start = " + cfg.test_start,
        "train_end = " + cfg.train_end,
        "train_start = " + cfg.train_start,
        "val_end = " + cfg.val_end,
        "val_start = " + cfg.val_start,
        "volatility_window = " + std::to_string(cfg.volatility_window),
    };
    std::string out;
    for (const auto& l : lines) out += l + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = canonical_config_text(cfg);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

namespace {

TimeSeriesFrame ingest(const ExperimentConfig& cfg) {
    if (!fs::is_directory(cfg.data_dir)) {
        throw IoError("data_dir '" + cfg.data_dir + "' does not exist");
    }
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(cfg.data_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") {
            paths.push_back(entry.path().string());
        }
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) {
        throw IoError("data_dir '" + cfg.data_dir + "' holds no .csv files");
    }
    std::vector<TimeSeriesFrame> frames;
    frames.reserve(paths.size());
    for (const auto& path : paths) {
        log_info("reading " + path);
        frames.push_back(read_csv(path));
    }
    TimeSeriesFrame merged = merge_frames(frames);

    // Trim rows before the latest first observation so no column leads with a gap.
    std::size_t start_row = 0;
    for (std::size_t c = 0; c < merged.column_count(); ++c) {
        const auto& col = merged.column(c);
        std::size_t first = 0;
        while (first < col.size() && is_missing(col[first])) ++first;
        start_row = std::max(start_row, first);
    }
    if (start_row >= merged.row_count()) {
        throw SchemaError("ingest: no rows with data in every column");
    }
    if (start_row > 0) {
        log_info("trimming " + std::to_string(start_row) + " leading rows with gaps");
        merged = merged.slice_rows(start_row, merged.row_count());
    }
    return forward_fill(merged, merged.column_names());
}

void add_series_column(TimeSeriesFrame& frame, const std::string& name,
                       const std::vector<double>& values, std::size_t pad) {
    if (frame.has_column(name)) return; // a source file already supplies it
    std::vector<double> column(frame.row_count(), missing_value());
    for (std::size_t i = 0; i < values.size(); ++i) column[i + pad] = values[i];
    frame.add_column(name, column);
}

TimeSeriesFrame with_indicators(const ExperimentConfig& cfg, TimeSeriesFrame frame) {
    const auto& price = frame.column(cfg.target_column);
    const std::vector<double> returns = daily_returns(price);
    add_series_column(frame, "returns", returns, 1);
    const std::vector<double> vol = annualized_volatility(returns, cfg.volatility_window);
    add_series_column(frame, "volatility", vol, cfg.volatility_window);
    const MacdResult m = macd(price);
    add_series_column(frame, "macd", m.macd_line, 0);
    add_series_column(frame, "macd_signal", m.signal_line, 0);
    add_series_column(frame, "macd_hist", m.histogram, 0);
    return frame;
}

SplitSpec split_spec_from(const ExperimentConfig& cfg) {
    SplitSpec spec;
    spec.train = {parse_date(cfg.train_start), parse_date(cfg.train_end)};
    spec.validation = {parse_date(cfg.val_start), parse_date(cfg.val_end)};
    spec.test = {parse_date(cfg.test_start), parse_date(cfg.test_end)};
    return spec;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw IoError("failed writing '" + path + "'");
    }
}

TimeSeriesFrame stack_frames(const TimeSeriesFrame& a, const TimeSeriesFrame& b) {
    std::vector<Date> dates = a.dates();
    dates.insert(dates.end(), b.dates().begin(), b.dates().end());
    std::vector<std::vector<double>> cols;
    for (std::size_t c = 0; c < a.column_count(); ++c) {
        std::vector<double> col = a.column(c);
        const auto& tail = b.column(c);
        col.insert(col.end(), tail.begin(), tail.end());
        cols.push_back(std::move(col));
    }
    return TimeSeriesFrame(std::move(dates), a.column_names(), std::move(cols));
}

} // namespace

PreparedData prepare_data(const ExperimentConfig& cfg) {
    PreparedData data;
    TimeSeriesFrame frame = ingest(cfg);
    if (cfg.derive_indicators) {
        frame = with_indicators(cfg, frame);
    }
    const std::size_t complete = frame.first_complete_row();
    if (complete >= frame.row_count()) {
        throw SchemaError("prepare_data: no complete rows after indicator warm-up");
    }
    frame = frame.slice_rows(complete, frame.row_count());
    data.raw = frame;

    data.feature_report =
        prune_collinear(frame, cfg.target_column, cfg.prune_threshold, cfg.forced_drops);

    std::vector<std::string> selected{cfg.target_column};
    selected.insert(selected.end(), data.feature_report.kept.begin(),
                    data.feature_report.kept.end());
    TimeSeriesFrame selected_frame = frame.select(selected);

    data.split_spec = split_spec_from(cfg);

    // Normalizer statistics come from the training rows unless the config
    // asks for the leaky normalize-before-split ordering.
    std::size_t fit_begin = 0;
    std::size_t fit_end = selected_frame.row_count();
    if (!cfg.paper_mode_normalization) {
        const auto begin_row = selected_frame.row_for_date(data.split_spec.train.begin);
        const auto end_row = selected_frame.row_for_date(data.split_spec.train.end);
        std::size_t begin_idx = begin_row ? *begin_row : 0;
        std::size_t end_idx = end_row ? *end_row + 1 : selected_frame.row_count();
        // Clamp to the frame if the configured range extends past the data.
        if (begin_idx >= end_idx) {
            throw ValueError("prepare_data: train range holds no rows");
        }
        fit_begin = begin_idx;
        fit_end = end_idx;
    }
    data.normalizer = fit_normalizer(selected_frame, fit_begin, fit_end);
    data.normalized =
        apply_normalizer(data.normalizer, selected_frame, NormalizeDirection::Forward);
    data.splits = split(data.normalized, data.split_spec);
    return data;
}

TrainedModel train_model(const ExperimentConfig& cfg, const PreparedData& data,
                         std::size_t lookback) {
    const ModelFamily family = parse_family(cfg.model_family);
    const std::size_t width = data.normalized.column_count();
    const NetworkSpec spec =
        make_spec(family, lookback, width, cfg.dropout, cfg.recurrent_dropout);

    const WindowedDataset train_set =
        make_windows(data.splits.train, lookback, cfg.target_column);
    const WindowedDataset val_set =
        make_windows(data.splits.validation, lookback, cfg.target_column, &data.splits.train);
    const TimeSeriesFrame train_val = stack_frames(data.splits.train, data.splits.validation);
    const WindowedDataset test_set =
        make_windows(data.splits.test, lookback, cfg.target_column, &train_val);

    RandomStream master(cfg.seed);
    RandomStream init_rng = master.fork();

    TrainedModel model;
    model.net = init_network(spec, init_rng);

    TrainConfig tcfg;
    tcfg.epochs = cfg.epochs;
    tcfg.batch_size = cfg.batch_size > 0 ? cfg.batch_size : default_batch_size(family);
    tcfg.learning_rate = cfg.learning_rate;
    tcfg.beta1 = cfg.beta1;
    tcfg.beta2 = cfg.beta2;
    tcfg.epsilon = cfg.epsilon;
    tcfg.clip_norm = cfg.clip_norm;
    tcfg.seed = master.next_u64();

    log_info("training " + cfg.model_family + " lookback " + std::to_string(lookback) + " on " +
             std::to_string(train_set.size()) + " samples");
    model.report = train(model.net, train_set, val_set, tcfg);
    model.report.rmse_test = evaluate_rmse(model.net, test_set);

    const std::vector<double> predictions = predict_all(model.net, test_set);
    const auto& actual_raw = data.raw.column(cfg.target_column);
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const Date d = test_set.samples[i].target_date;
        model.test_dates.push_back(d);
        model.predicted_prices.push_back(
            denormalize_value(data.normalizer, cfg.target_column, predictions[i]));
        const auto row = data.raw.row_for_date(d);
        if (!row) {
            throw ValueError("train_model: test date missing from the raw frame");
        }
        model.actual_prices.push_back(actual_raw[*row]);
    }
    return model;
}

void run_synth(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.data_dir);
    const TimeSeriesFrame frame =
        synth_generate(cfg.seed, cfg.synth_days, cfg.synth_features);
    write_csv(frame.select({"price"}), (fs::path(cfg.data_dir) / "synth_price.csv").string());
    std::vector<std::string> covariates;
    for (const auto& name : frame.column_names()) {
        if (name != "price") covariates.push_back(name);
    }
    write_csv(frame.select(covariates),
              (fs::path(cfg.data_dir) / "synth_factors.csv").string());
    log_info("wrote synthetic data to " + cfg.data_dir);
}

void run_features(const ExperimentConfig& cfg, const std::string& out_dir) {
    const PreparedData data = prepare_data(cfg);
    write_text_file((fs::path(out_dir) / "features.json").string(),
                    feature_report_to_json(data.feature_report));
}

namespace {

std::string train_report_csv(const TrainReport& report) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < report.train_loss_curve.size(); ++e) {
        out += std::to_string(e) + "," + format_double(report.train_loss_curve[e]) + "," +
               format_double(report.val_loss_curve[e]) + "\n";
    }
    return out;
}

std::string summary_json(const ExperimentConfig& cfg, std::size_t lookback,
                         const TrainReport& report) {
    nlohmann::json j;
    j["best_epoch"] = report.best_epoch;
    j["rmse_train"] = report.rmse_train;
    j["rmse_test"] = report.rmse_test;
    j["model_family"] = cfg.model_family;
    j["lookback"] = lookback;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

std::string predictions_csv(const TrainedModel& model) {
    std::string out = "date,predicted,actual\n";
    for (std::size_t i = 0; i < model.test_dates.size(); ++i) {
        out += format_date(model.test_dates[i]) + "," +
               format_double(model.predicted_prices[i]) + "," +
               format_double(model.actual_prices[i]) + "\n";
    }
    return out;
}

void write_sarima_baseline(const ExperimentConfig& cfg, const PreparedData& data,
                           const std::string& out_dir) {
    // Rolling one-step forecasts over the normalized test range, matching the
    // neural next-day protocol; the fit is chosen once on the pre-test rows.
    const auto& target = data.normalized.column(cfg.target_column);
    const auto first_test_row =
        data.normalized.row_for_date(data.splits.test.dates().front());
    if (!first_test_row) {
        throw ValueError("sarima baseline: test range missing from the frame");
    }
    const std::size_t test_rows = data.splits.test.row_count();
    std::vector<double> history(target.begin(),
                                target.begin() + static_cast<std::ptrdiff_t>(*first_test_row));
    const sarima::SarimaFit fit = sarima::fit(history, sarima::default_grid());

    std::vector<double> preds;
    std::vector<double> actual;
    for (std::size_t i = 0; i < test_rows; ++i) {
        preds.push_back(sarima::forecast(fit, history, 1)[0]);
        history.push_back(target[*first_test_row + i]);
        actual.push_back(target[*first_test_row + i]);
    }
    nlohmann::json j = nlohmann::json::parse(sarima::fit_to_json(fit));
    j["rmse_test"] = rmse(preds, actual);
    write_text_file((fs::path(out_dir) / "sarima.json").string(), j.dump(2) + "\n");
}

void write_train_artifacts(const ExperimentConfig& cfg, const PreparedData& data,
                           const TrainedModel& model, const std::string& out_dir) {
    write_text_file((fs::path(out_dir) / "train_report.csv").string(),
                    train_report_csv(model.report));
    write_text_file((fs::path(out_dir) / "train_summary.json").string(),
                    summary_json(cfg, model.net.spec.lookback, model.report));
    write_text_file((fs::path(out_dir) / "predictions.csv").string(), predictions_csv(model));
    save_network(model.net, (fs::path(out_dir) / "model.bin").string());
    if (cfg.sarima_baseline) {
        write_sarima_baseline(cfg, data, out_dir);
    }
}

void backtest_from_predictions(const ExperimentConfig& cfg, const std::vector<Date>& dates,
                               const std::vector<double>& predicted,
                               const std::vector<double>& actual,
                               const std::string& out_dir) {
    const Strategy strategy = parse_strategy(cfg.strategy);
    if (strategy == Strategy::None) return;
    if (dates.size() < 2) {
        throw ValueError("backtest: need at least two prediction rows");
    }

    // Day i is traded against day i-1's close, so the first row only seeds
    // the prior close.
    std::vector<Date> trade_dates(dates.begin() + 1, dates.end());
    std::vector<double> preds(predicted.begin() + 1, predicted.end());
    std::vector<double> prev_closes(actual.begin(), actual.end() - 1);
    const backtest::SignalSeries sigs = backtest::signals(trade_dates, preds, prev_closes);

    const std::vector<double>& closes = actual; // length = signals + 1
    backtest::BacktestReport report;
    if (strategy == Strategy::LongShort) {
        report = backtest::run_long_short(sigs, closes, cfg.fee);
    } else {
        report = backtest::run_buy_sell(sigs, closes, cfg.fee);
    }
    const std::string name = strategy_name(strategy);
    backtest::write_report_csv(report,
                               (fs::path(out_dir) / ("portfolio_" + name + ".csv")).string());
    backtest::write_ledger_csv(report,
                               (fs::path(out_dir) / ("ledger_" + name + ".csv")).string());

    if (cfg.emit_buy_hold) {
        std::string out = "date,buy_hold_value\n";
        for (std::size_t i = 1; i < dates.size(); ++i) {
            out += format_date(dates[i]) + "," + format_double(actual[i] / actual[0]) + "\n";
        }
        write_text_file((fs::path(out_dir) / "buy_hold.csv").string(), out);
    }
}

} // namespace

void run_train(const ExperimentConfig& cfg, const std::string& out_dir) {
    const PreparedData data = prepare_data(cfg);
    const TrainedModel model = train_model(cfg, data, cfg.lookback);
    write_train_artifacts(cfg, data, model, out_dir);
}

void run_evaluate(const ExperimentConfig& cfg, const std::string& out_dir) {
    const PreparedData data = prepare_data(cfg);
    std::string csv = "lookback,rmse_train,rmse_test\n";
    for (std::size_t lookback : cfg.lookbacks) {
        const TrainedModel model = train_model(cfg, data, lookback);
        csv += std::to_string(lookback) + "," + format_double(model.report.rmse_train) + "," +
               format_double(model.report.rmse_test) + "\n";
    }
    write_text_file((fs::path(out_dir) / "lookback_rmse.csv").string(), csv);
}

void run_backtest(const ExperimentConfig& cfg, const std::string& out_dir) {
    const std::string predictions_path = (fs::path(out_dir) / "predictions.csv").string();
    if (!fs::exists(predictions_path)) {
        throw IoError("backtest: missing '" + predictions_path + "' (run train first)");
    }
    const TimeSeriesFrame preds = read_csv(predictions_path);
    backtest_from_predictions(cfg, preds.dates(), preds.column("predicted"),
                              preds.column("actual"), out_dir);
}

void run_pipeline(const ExperimentConfig& cfg, const std::string& out_dir) {
    const PreparedData data = prepare_data(cfg);
    write_text_file((fs::path(out_dir) / "features.json").string(),
                    feature_report_to_json(data.feature_report));
    const TrainedModel model = train_model(cfg, data, cfg.lookback);
    write_train_artifacts(cfg, data, model, out_dir);
    backtest_from_predictions(cfg, model.test_dates, model.predicted_prices,
                              model.actual_prices, out_dir);
}

void run_command(const std::string& command, const ExperimentConfig& cfg,
                 const std::string& out_dir) {
    if (command == "synth") {
        run_synth(cfg);
        return;
    }
    fs::create_directories(out_dir);
    if (command == "features") run_features(cfg, out_dir);
    else if (command == "train") run_train(cfg, out_dir);
    else if (command == "evaluate") run_evaluate(cfg, out_dir);
    else if (command == "backtest") run_backtest(cfg, out_dir);
    else if (command == "pipeline") run_pipeline(cfg, out_dir);
    else throw ConfigError("unknown command '" + command + "'");
}

} // namespace cryptoseq::cli
