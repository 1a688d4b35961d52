#pragma once

#include <map>
#include <string>
#include <vector>

#include "cryptoseq/dataset.hpp"

namespace cryptoseq {

/// Exponential moving average, multiplier 2/(period+1), seeded with the first
/// observation so output length equals input length.
std::vector<double> ema(const std::vector<double>& series, std::size_t period);

struct MacdResult {
    std::vector<double> macd_line;   // 12-period EMA minus 26-period EMA
    std::vector<double> signal_line; // 9-period EMA of the MACD line
    std::vector<double> histogram;   // macd_line minus signal_line
};

MacdResult macd(const std::vector<double>& price);

/// Simple returns p_t / p_{t-1} - 1; output is one shorter than the input.
std::vector<double> daily_returns(const std::vector<double>& price);

/// Rolling population standard deviation of returns over each trailing window,
/// scaled by sqrt(365). Output length = returns.size() - window + 1.
std::vector<double> annualized_volatility(const std::vector<double>& returns,
                                          std::size_t window);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Per-column z-score parameters (population standard deviation).
struct Normalizer {
    std::map<std::string, double> mean;
    std::map<std::string, double> stddev;
};

enum class NormalizeDirection { Forward, Inverse };

/// Moments captured from rows [fit_begin, fit_end) only.
Normalizer fit_normalizer(const TimeSeriesFrame& frame, std::size_t fit_begin,
                          std::size_t fit_end);

TimeSeriesFrame apply_normalizer(const Normalizer& n, const TimeSeriesFrame& frame,
                                 NormalizeDirection direction);

double normalize_value(const Normalizer& n, const std::string& column, double value);
double denormalize_value(const Normalizer& n, const std::string& column, double value);

struct DroppedFeature {
    std::string name;
    std::string reason;
};

struct FeatureReport {
    std::map<std::string, double> spearman_to_target;
    std::vector<std::string> kept;
    std::vector<DroppedFeature> dropped;
};

/// Greedy collinearity pruning. Features are processed in name order; for each
/// still-kept pair with |spearman| >= threshold the member with the smaller
/// |spearman| to the target is dropped. forced_drops are removed first,
/// unconditionally.
FeatureReport prune_collinear(const TimeSeriesFrame& frame, const std::string& target,
                              double threshold, const std::vector<std::string>& forced_drops);

std::string feature_report_to_json(const FeatureReport& report);

} // namespace cryptoseq
