#include "cryptoseq/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cryptoseq/errors.hpp"

namespace cryptoseq {

std::vector<double> ema(const std::vector<double>& series, std::size_t period) {
    if (series.empty()) {
        throw ValueError("ema: empty series");
    }
    if (period < 1) {
        throw ValueError("ema: period must be >= 1");
    }
    const double k = 2.0 / (static_cast<double>(period) + 1.0);
    std::vector<double> out(series.size());
    out[0] = series[0];
    for (std::size_t t = 1; t < series.size(); ++t) {
        out[t] = k * series[t] + (1.0 - k) * out[t - 1];
    }
    return out;
}

MacdResult macd(const std::vector<double>& price) {
    if (price.empty()) {
        throw ValueError("macd: empty series");
    }
    MacdResult result;
    const std::vector<double> fast = ema(price, 12);
    const std::vector<double> slow = ema(price, 26);
    result.macd_line.resize(price.size());
    for (std::size_t t = 0; t < price.size(); ++t) {
        result.macd_line[t] = fast[t] - slow[t];
    }
    result.signal_line = ema(result.macd_line, 9);
    result.histogram.resize(price.size());
    for (std::size_t t = 0; t < price.size(); ++t) {
        result.histogram[t] = result.macd_line[t] - result.signal_line[t];
    }
    return result;
}

std::vector<double> daily_returns(const std::vector<double>& price) {
    if (price.size() < 2) {
        throw ValueError("daily_returns: need at least 2 prices");
    }
    std::vector<double> out(price.size() - 1);
    for (std::size_t t = 1; t < price.size(); ++t) {
        if (!(price[t - 1] > 0.0) || !(price[t] > 0.0)) {
            throw ValueError("daily_returns: nonpositive price at index " + std::to_string(t));
        }
        out[t - 1] = price[t] / price[t - 1] - 1.0;
    }
    return out;
}

std::vector<double> annualized_volatility(const std::vector<double>& returns,
                                          std::size_t window) {
    if (window < 2) {
        throw ValueError("annualized_volatility: window must be >= 2");
    }
    if (returns.size() < window) {
        throw ValueError("annualized_volatility: window " + std::to_string(window) +
                         " exceeds series length " + std::to_string(returns.size()));
    }
    const double annualizer = std::sqrt(365.0);
    std::vector<double> out;
    out.reserve(returns.size() - window + 1);
    for (std::size_t end = window; end <= returns.size(); ++end) {
        double mean = 0.0;
        for (std::size_t i = end - window; i < end; ++i) mean += returns[i];
        mean /= static_cast<double>(window);
        double var = 0.0;
        for (std::size_t i = end - window; i < end; ++i) {
            const double d = returns[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(window);
        out.push_back(std::sqrt(var) * annualizer);
    }
    return out;
}

namespace {

/// Average ranks (ties get the mean of the ranks they occupy), 1-based.
std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ValueError("spearman: correlation undefined for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw ValueError("spearman: need equal lengths >= 2, got " + std::to_string(x.size()) +
                         " and " + std::to_string(y.size()));
    }
    return pearson(average_ranks(x), average_ranks(y));
}

Normalizer fit_normalizer(const TimeSeriesFrame& frame, std::size_t fit_begin,
                          std::size_t fit_end) {
    if (fit_begin >= fit_end || fit_end > frame.row_count()) {
        throw ValueError("fit_normalizer: empty or invalid fit range");
    }
    Normalizer n;
    const double count = static_cast<double>(fit_end - fit_begin);
    for (std::size_t c = 0; c < frame.column_count(); ++c) {
        const auto& col = frame.column(c);
        double mean = 0.0;
        for (std::size_t r = fit_begin; r < fit_end; ++r) mean += col[r];
        mean /= count;
        double var = 0.0;
        for (std::size_t r = fit_begin; r < fit_end; ++r) {
            const double d = col[r] - mean;
            var += d * d;
        }
        var /= count;
        if (var <= 0.0) {
            throw ValueError("fit_normalizer: column '" + frame.column_names()[c] +
                             "' is constant over the fit range");
        }
        n.mean[frame.column_names()[c]] = mean;
        n.stddev[frame.column_names()[c]] = std::sqrt(var);
    }
    return n;
}

TimeSeriesFrame apply_normalizer(const Normalizer& n, const TimeSeriesFrame& frame,
                                 NormalizeDirection direction) {
    std::vector<std::vector<double>> cols;
    cols.reserve(frame.column_count());
    for (std::size_t c = 0; c < frame.column_count(); ++c) {
        const std::string& name = frame.column_names()[c];
        const auto mean_it = n.mean.find(name);
        const auto std_it = n.stddev.find(name);
        if (mean_it == n.mean.end() || std_it == n.stddev.end()) {
            throw SchemaError("apply_normalizer: unknown column '" + name + "'");
        }
        std::vector<double> col = frame.column(c);
        for (double& v : col) {
            if (direction == NormalizeDirection::Forward) {
                v = (v - mean_it->second) / std_it->second;
            } else {
                v = v * std_it->second + mean_it->second;
            }
        }
        cols.push_back(std::move(col));
    }
    return TimeSeriesFrame(frame.dates(), frame.column_names(), std::move(cols));
}

double normalize_value(const Normalizer& n, const std::string& column, double value) {
    const auto mean_it = n.mean.find(column);
    const auto std_it = n.stddev.find(column);
    if (mean_it == n.mean.end() || std_it == n.stddev.end()) {
        throw SchemaError("normalize_value: unknown column '" + column + "'");
    }
    return (value - mean_it->second) / std_it->second;
}

double denormalize_value(const Normalizer& n, const std::string& column, double value) {
    const auto mean_it = n.mean.find(column);
    const auto std_it = n.stddev.find(column);
    if (mean_it == n.mean.end() || std_it == n.stddev.end()) {
        throw SchemaError("denormalize_value: unknown column '" + column + "'");
    }
    return value * std_it->second + mean_it->second;
}

FeatureReport prune_collinear(const TimeSeriesFrame& frame, const std::string& target,
                              double threshold, const std::vector<std::string>& forced_drops) {
    frame.column_index(target);
    for (const auto& name : forced_drops) {
        if (name == target) {
            throw ValueError("prune_collinear: target '" + target + "' listed in forced_drops");
        }
    }

    // Name-sorted processing keeps the result independent of column order.
    std::vector<std::string> features;
    for (const auto& name : frame.column_names()) {
        if (name != target) features.push_back(name);
    }
    std::sort(features.begin(), features.end());

    FeatureReport report;
    const auto& target_col = frame.column(target);
    for (const auto& name : features) {
        report.spearman_to_target[name] = spearman(frame.column(name), target_col);
    }

    std::map<std::string, bool> kept;
    for (const auto& name : features) kept[name] = true;

    for (const auto& name : forced_drops) {
        if (!kept.count(name)) {
            throw SchemaError("prune_collinear: forced drop of unknown column '" + name + "'");
        }
        kept[name] = false;
        report.dropped.push_back({name, "forced"});
    }

    for (std::size_t i = 0; i < features.size(); ++i) {
        for (std::size_t j = i + 1; j < features.size(); ++j) {
            const std::string& a = features[i];
            const std::string& b = features[j];
            if (!kept[a] || !kept[b]) continue;
            const double rho = spearman(frame.column(a), frame.column(b));
            if (std::abs(rho) < threshold) continue;
            const double ta = std::abs(report.spearman_to_target[a]);
            const double tb = std::abs(report.spearman_to_target[b]);
            // Keep the feature more correlated with the target; ties drop the
            // lexicographically later name.
            const std::string& victim = ta < tb ? a : (tb < ta ? b : b);
            const std::string& keeper = victim == a ? b : a;
            kept[victim] = false;
            char buf[96];
            std::snprintf(buf, sizeof buf, "collinear with %s (|rho|=%.4f)", keeper.c_str(),
                          std::abs(rho));
            report.dropped.push_back({victim, buf});
        }
    }

    for (const auto& name : features) {
        if (kept[name]) report.kept.push_back(name);
    }
    return report;
}

std::string feature_report_to_json(const FeatureReport& report) {
    nlohmann::json j;
    nlohmann::json rho = nlohmann::json::object();
    for (const auto& [name, value] : report.spearman_to_target) rho[name] = value;
    j["spearman_to_target"] = rho;
    j["kept"] = report.kept;
    nlohmann::json dropped = nlohmann::json::array();
    for (const auto& d : report.dropped) {
        dropped.push_back({{"feature", d.name}, {"reason", d.reason}});
    }
    j["dropped"] = dropped;
    return j.dump(2) + "\n";
}

} // namespace cryptoseq
