#pragma once

#include <string>
#include <vector>

#include "cryptoseq/date.hpp"

namespace cryptoseq::backtest {

/// Daily trade direction: +1 long, -1 short/sell, 0 stay out.
struct SignalSeries {
    std::vector<Date> dates;
    std::vector<int> values;

    std::size_t size() const { return values.size(); }
};

/// +1 when the predicted price exceeds the prior close, -1 when below,
/// 0 on exact equality (no position, no fee).
SignalSeries signals(const std::vector<Date>& dates, const std::vector<double>& predicted,
                     const std::vector<double>& actual_prev_close);

struct Trade {
    Date date;
    std::string side; // buy / sell / short / cover
    double price = 0.0;
    double notional = 0.0; // gross amount traded; fee = fee_rate * notional
    double fee = 0.0;
};

struct BacktestReport {
    std::vector<Date> dates;
    std::vector<int> signal_values;
    std::vector<double> daily_value; // portfolio value at each day's close, initial 1.0
    std::vector<Trade> trades;
    double final_value = 1.0;
    bool bankrupt = false;
    Date bankrupt_date{};
};

/// Daily-settled strategy: each day with a nonzero signal commits the whole
/// portfolio at the prior close and settles at the day's close, paying the fee
/// on entry and exit notional. closes must hold signals.size() + 1 prices:
/// the close preceding the first signal day, then one close per signal day.
BacktestReport run_long_short(const SignalSeries& sigs, const std::vector<double>& closes,
                              double fee);

/// CASH/INVESTED state machine: a buy signal in CASH invests the full balance
/// at the day's opening price (the prior close), a sell signal while INVESTED
/// liquidates at the prior close; every other (state, signal) pair holds.
/// Holdings are marked at each day's close. closes as in run_long_short.
BacktestReport run_buy_sell(const SignalSeries& sigs, const std::vector<double>& closes,
                            double fee);

/// `date,signal,portfolio_value` rows.
void write_report_csv(const BacktestReport& report, const std::string& path);

/// `date,side,price,notional,fee` rows.
void write_ledger_csv(const BacktestReport& report, const std::string& path);

} // namespace cryptoseq::backtest
