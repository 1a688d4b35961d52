#include "cryptoseq/backtest.hpp"

#include <cstdio>
#include <fstream>

#include "cryptoseq/errors.hpp"

namespace cryptoseq::backtest {

namespace {

void check_inputs(const SignalSeries& sigs, const std::vector<double>& closes) {
    if (sigs.dates.size() != sigs.values.size()) {
        throw ValueError("backtest: signal dates and values differ in length");
    }
    if (closes.size() != sigs.size() + 1) {
        throw ValueError("backtest: need " + std::to_string(sigs.size() + 1) +
                         " closes (prior close + one per signal day), got " +
                         std::to_string(closes.size()));
    }
    for (double p : closes) {
        if (!(p > 0.0)) {
            throw ValueError("backtest: prices must be positive");
        }
    }
}

void write_number(std::ofstream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
}

} // namespace

SignalSeries signals(const std::vector<Date>& dates, const std::vector<double>& predicted,
                     const std::vector<double>& actual_prev_close) {
    if (predicted.size() != actual_prev_close.size() || predicted.size() != dates.size()) {
        throw ValueError("signals: dates, predictions and prior closes must align, got " +
                         std::to_string(dates.size()) + "/" + std::to_string(predicted.size()) +
                         "/" + std::to_string(actual_prev_close.size()));
    }
    SignalSeries out;
    out.dates = dates;
    out.values.reserve(predicted.size());
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        int s = 0;
        if (predicted[i] > actual_prev_close[i]) s = +1;
        else if (predicted[i] < actual_prev_close[i]) s = -1;
        out.values.push_back(s);
    }
    return out;
}

BacktestReport run_long_short(const SignalSeries& sigs, const std::vector<double>& closes,
                              double fee) {
    check_inputs(sigs, closes);
    BacktestReport report;
    report.dates = sigs.dates;
    report.signal_values = sigs.values;

    double value = 1.0;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        const int s = sigs.values[i];
        if (s != 0 && !report.bankrupt) {
            const double entry_price = closes[i];
            const double exit_price = closes[i + 1];
            const double day_return = exit_price / entry_price - 1.0;

            const double entry_notional = value;
            const double entry_fee = fee * entry_notional;
            report.trades.push_back({sigs.dates[i], s > 0 ? "buy" : "short", entry_price,
                                     entry_notional, entry_fee});
            const double at_risk = value * (1.0 - fee);
            const double settled = at_risk * (1.0 + s * day_return);
            const double exit_fee = fee * settled;
            report.trades.push_back({sigs.dates[i], s > 0 ? "sell" : "cover", exit_price,
                                     settled, exit_fee});
            value = settled * (1.0 - fee);
            if (!(value > 0.0)) {
                value = 0.0;
                report.bankrupt = true;
                report.bankrupt_date = sigs.dates[i];
            }
        }
        report.daily_value.push_back(value);
    }
    report.final_value = value;
    return report;
}

BacktestReport run_buy_sell(const SignalSeries& sigs, const std::vector<double>& closes,
                            double fee) {
    check_inputs(sigs, closes);
    BacktestReport report;
    report.dates = sigs.dates;
    report.signal_values = sigs.values;

    double cash = 1.0;
    double coins = 0.0;
    bool invested = false;
    for (std::size_t i = 0; i < sigs.size(); ++i) {
        const int s = sigs.values[i];
        const double open_price = closes[i]; // trade at the beginning of the day
        if (!report.bankrupt) {
            if (!invested && s > 0) {
                const double notional = cash;
                const double buy_fee = fee * notional;
                coins = (cash - buy_fee) / open_price;
                report.trades.push_back({sigs.dates[i], "buy", open_price, notional, buy_fee});
                cash = 0.0;
                invested = true;
            } else if (invested && s < 0) {
                const double proceeds = coins * open_price;
                const double sell_fee = fee * proceeds;
                report.trades.push_back({sigs.dates[i], "sell", open_price, proceeds, sell_fee});
                cash = proceeds - sell_fee;
                coins = 0.0;
                invested = false;
                if (!(cash > 0.0)) {
                    cash = 0.0;
                    report.bankrupt = true;
                    report.bankrupt_date = sigs.dates[i];
                }
            }
        }
        const double value = invested ? coins * closes[i + 1] : cash;
        report.daily_value.push_back(value);
    }
    report.final_value = report.daily_value.empty() ? 1.0 : report.daily_value.back();
    return report;
}

void write_report_csv(const BacktestReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_report_csv: cannot open '" + path + "'");
    }
    out << "date,signal,portfolio_value\n";
    for (std::size_t i = 0; i < report.dates.size(); ++i) {
        out << format_date(report.dates[i]) << ',' << report.signal_values[i] << ',';
        write_number(out, report.daily_value[i]);
        out << '\n';
    }
}

void write_ledger_csv(const BacktestReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_ledger_csv: cannot open '" + path + "'");
    }
    out << "date,side,price,notional,fee\n";
    for (const Trade& t : report.trades) {
        out << format_date(t.date) << ',' << t.side << ',';
        write_number(out, t.price);
        out << ',';
        write_number(out, t.notional);
        out << ',';
        write_number(out, t.fee);
        out << '\n';
    }
}

} // namespace cryptoseq::backtest
