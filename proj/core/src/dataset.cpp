#include "cryptoseq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "cryptoseq/errors.hpp"
#include "cryptoseq/random.hpp"

namespace cryptoseq {

double missing_value() {
    return std::numeric_limits<double>::quiet_NaN();
}

bool is_missing(double v) {
    return std::isnan(v);
}

TimeSeriesFrame::TimeSeriesFrame(std::vector<Date> dates, std::vector<std::string> names,
                                 std::vector<std::vector<double>> columns)
    : dates_(std::move(dates)), names_(std::move(names)), columns_(std::move(columns)) {
    if (names_.size() != columns_.size()) {
        throw SchemaError("TimeSeriesFrame: " + std::to_string(names_.size()) + " names for " +
                          std::to_string(columns_.size()) + " columns");
    }
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].size() != dates_.size()) {
            throw SchemaError("TimeSeriesFrame: column '" + names_[i] + "' has " +
                              std::to_string(columns_[i].size()) + " rows, expected " +
                              std::to_string(dates_.size()));
        }
    }
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (!(dates_[i - 1] < dates_[i])) {
            throw SchemaError("TimeSeriesFrame: dates not strictly increasing at " +
                              format_date(dates_[i]));
        }
    }
}

bool TimeSeriesFrame::has_column(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t TimeSeriesFrame::column_index(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        throw SchemaError("unknown column '" + name + "'");
    }
    return static_cast<std::size_t>(it - names_.begin());
}

const std::vector<double>& TimeSeriesFrame::column(const std::string& name) const {
    return columns_[column_index(name)];
}

TimeSeriesFrame TimeSeriesFrame::slice_rows(std::size_t begin, std::size_t end) const {
    if (begin > end || end > dates_.size()) {
        throw ValueError("slice_rows: invalid range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") for " + std::to_string(dates_.size()) + " rows");
    }
    std::vector<Date> dates(dates_.begin() + begin, dates_.begin() + end);
    std::vector<std::vector<double>> cols;
    cols.reserve(columns_.size());
    for (const auto& col : columns_) {
        cols.emplace_back(col.begin() + begin, col.begin() + end);
    }
    return TimeSeriesFrame(std::move(dates), names_, std::move(cols));
}

TimeSeriesFrame TimeSeriesFrame::select(const std::vector<std::string>& names) const {
    std::vector<std::vector<double>> cols;
    cols.reserve(names.size());
    for (const auto& name : names) {
        cols.push_back(column(name));
    }
    return TimeSeriesFrame(dates_, names, std::move(cols));
}

void TimeSeriesFrame::add_column(const std::string& name, std::vector<double> values) {
    if (has_column(name)) {
        throw SchemaError("add_column: duplicate column '" + name + "'");
    }
    if (values.size() != dates_.size()) {
        throw SchemaError("add_column: column '" + name + "' has " +
                          std::to_string(values.size()) + " rows, expected " +
                          std::to_string(dates_.size()));
    }
    names_.push_back(name);
    columns_.push_back(std::move(values));
}

std::size_t TimeSeriesFrame::first_complete_row() const {
    for (std::size_t r = 0; r < dates_.size(); ++r) {
        bool complete = true;
        for (const auto& col : columns_) {
            if (!std::isfinite(col[r])) {
                complete = false;
                break;
            }
        }
        if (complete) return r;
    }
    return dates_.size();
}

bool TimeSeriesFrame::is_daily_contiguous() const {
    for (std::size_t i = 1; i < dates_.size(); ++i) {
        if (dates_[i].serial != dates_[i - 1].serial + 1) return false;
    }
    return true;
}

std::optional<std::size_t> TimeSeriesFrame::row_for_date(Date d) const {
    const auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end() || !(*it == d)) return std::nullopt;
    return static_cast<std::size_t>(it - dates_.begin());
}

TimeSeriesFrame merge_frames(const std::vector<TimeSeriesFrame>& frames) {
    std::vector<std::string> names;
    for (const auto& frame : frames) {
        for (const auto& name : frame.column_names()) {
            if (std::find(names.begin(), names.end(), name) != names.end()) {
                throw SchemaError("merge_frames: duplicate column '" + name + "'");
            }
            names.push_back(name);
        }
    }

    std::vector<Date> dates;
    for (const auto& frame : frames) {
        dates.insert(dates.end(), frame.dates().begin(), frame.dates().end());
    }
    std::sort(dates.begin(), dates.end());
    dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

    std::vector<std::vector<double>> columns;
    columns.reserve(names.size());
    for (const auto& frame : frames) {
        for (std::size_t c = 0; c < frame.column_count(); ++c) {
            std::vector<double> merged(dates.size(), missing_value());
            const auto& src = frame.column(c);
            for (std::size_t r = 0; r < frame.row_count(); ++r) {
                const auto it =
                    std::lower_bound(dates.begin(), dates.end(), frame.dates()[r]);
                merged[static_cast<std::size_t>(it - dates.begin())] = src[r];
            }
            columns.push_back(std::move(merged));
        }
    }
    return TimeSeriesFrame(std::move(dates), std::move(names), std::move(columns));
}

TimeSeriesFrame forward_fill(const TimeSeriesFrame& frame,
                             const std::vector<std::string>& columns) {
    std::vector<std::vector<double>> cols;
    cols.reserve(frame.column_count());
    for (std::size_t c = 0; c < frame.column_count(); ++c) cols.push_back(frame.column(c));

    for (const auto& name : columns) {
        auto& col = cols[frame.column_index(name)];
        if (!col.empty() && is_missing(col[0])) {
            throw ValueError("forward_fill: column '" + name + "' starts with a gap at " +
                             format_date(frame.dates()[0]));
        }
        for (std::size_t r = 1; r < col.size(); ++r) {
            if (is_missing(col[r])) col[r] = col[r - 1];
        }
    }
    return TimeSeriesFrame(frame.dates(), frame.column_names(), std::move(cols));
}

namespace {

TimeSeriesFrame rows_in_range(const TimeSeriesFrame& frame, const DateRange& range,
                              const char* part) {
    std::size_t begin = frame.row_count();
    std::size_t end = 0;
    for (std::size_t r = 0; r < frame.row_count(); ++r) {
        const Date d = frame.dates()[r];
        if (range.begin <= d && d <= range.end) {
            begin = std::min(begin, r);
            end = std::max(end, r + 1);
        }
    }
    if (begin >= end) {
        throw ValueError(std::string("split: empty ") + part + " range " +
                         format_date(range.begin) + ".." + format_date(range.end));
    }
    return frame.slice_rows(begin, end);
}

} // namespace

SplitFrames split(const TimeSeriesFrame& frame, const SplitSpec& spec) {
    if (!(spec.train.end < spec.validation.begin) || !(spec.validation.end < spec.test.begin)) {
        throw ValueError("split: ranges must be disjoint and ordered");
    }
    SplitFrames out;
    out.train = rows_in_range(frame, spec.train, "train");
    out.validation = rows_in_range(frame, spec.validation, "validation");
    out.test = rows_in_range(frame, spec.test, "test");
    return out;
}

WindowedDataset make_windows(const TimeSeriesFrame& frame, std::size_t lookback,
                             const std::string& target_column, const TimeSeriesFrame* context) {
    if (lookback == 0) {
        throw ValueError("make_windows: lookback must be >= 1");
    }
    frame.column_index(target_column); // validates presence

    TimeSeriesFrame combined = frame;
    std::size_t first_target_row = lookback;
    if (context != nullptr) {
        if (context->column_names() != frame.column_names()) {
            throw SchemaError("make_windows: context columns do not match the frame");
        }
        if (context->row_count() == 0 ||
            context->dates().back().next() != frame.dates().front()) {
            throw ValueError("make_windows: context must end the day before the frame starts");
        }
        const std::size_t take = std::min<std::size_t>(lookback, context->row_count());
        const TimeSeriesFrame head =
            context->slice_rows(context->row_count() - take, context->row_count());
        std::vector<Date> dates = head.dates();
        dates.insert(dates.end(), frame.dates().begin(), frame.dates().end());
        std::vector<std::vector<double>> cols;
        for (std::size_t c = 0; c < frame.column_count(); ++c) {
            std::vector<double> col = head.column(c);
            const auto& tail = frame.column(c);
            col.insert(col.end(), tail.begin(), tail.end());
            cols.push_back(std::move(col));
        }
        combined = TimeSeriesFrame(std::move(dates), frame.column_names(), std::move(cols));
    }

    if (!combined.is_daily_contiguous()) {
        for (std::size_t i = 1; i < combined.row_count(); ++i) {
            if (combined.dates()[i].serial != combined.dates()[i - 1].serial + 1) {
                throw ValueError("make_windows: date gap between " +
                                 format_date(combined.dates()[i - 1]) + " and " +
                                 format_date(combined.dates()[i]));
            }
        }
    }

    if (combined.row_count() <= first_target_row) {
        const std::size_t missing = first_target_row + 1 - combined.row_count();
        throw ValueError("make_windows: insufficient history, " + std::to_string(missing) +
                         " more row(s) needed for lookback " + std::to_string(lookback));
    }

    // Targets are restricted to dates of the original frame.
    const Date first_frame_date = frame.dates().front();
    const std::size_t feature_count = combined.column_count();
    const std::size_t target_idx = combined.column_index(target_column);

    WindowedDataset out;
    out.feature_names = combined.column_names();
    for (std::size_t t = first_target_row; t < combined.row_count(); ++t) {
        if (combined.dates()[t] < first_frame_date) continue;
        WindowSample sample;
        sample.window = Matrix(lookback, feature_count);
        for (std::size_t k = 0; k < lookback; ++k) {
            const std::size_t row = t - lookback + k;
            for (std::size_t c = 0; c < feature_count; ++c) {
                sample.window(k, c) = combined.column(c)[row];
            }
        }
        sample.target = combined.column(target_idx)[t];
        sample.target_date = combined.dates()[t];
        out.samples.push_back(std::move(sample));
    }
    if (out.samples.empty()) {
        throw ValueError("make_windows: no samples could be formed");
    }
    return out;
}

TimeSeriesFrame synth_generate(std::uint64_t seed, std::size_t days, std::size_t features) {
    if (days < 100) {
        throw ValueError("synth_generate: need at least 100 days, got " + std::to_string(days));
    }
    if (features == 0) {
        throw ValueError("synth_generate: need at least one covariate");
    }
    RandomStream rng(seed);

    // Latent AR(1) log price: x_t = drift + phi * x_{t-1} + sigma * eps.
    // phi = 0.98 with drift 0.1 gives a stationary mean of 5, so the level
    // drifts upward from the 4.0 start and exp() keeps the price positive.
    const double phi = 0.98;
    const double drift = 0.1;
    const double sigma = 0.02;
    std::vector<double> log_price(days + 1);
    log_price[0] = 4.0;
    for (std::size_t t = 1; t <= days; ++t) {
        log_price[t] = drift + phi * log_price[t - 1] + sigma * rng.next_normal();
    }

    std::vector<Date> dates(days);
    const Date start = date_from_ymd(2013, 1, 1);
    for (std::size_t t = 0; t < days; ++t) dates[t] = start.plus_days(static_cast<int>(t));

    std::vector<std::string> names{"price"};
    std::vector<std::vector<double>> columns;
    std::vector<double> price(days);
    for (std::size_t t = 0; t < days; ++t) price[t] = std::exp(log_price[t]);
    columns.push_back(std::move(price));

    const double covariate_noise = 0.005;
    for (std::size_t k = 1; k <= features; ++k) {
        std::vector<double> cov(days);
        if (k == 1) {
            names.push_back("lead_signal");
            for (std::size_t t = 0; t < days; ++t) {
                cov[t] = log_price[t + 1] + covariate_noise * rng.next_normal();
            }
        } else if (k == 2) {
            names.push_back("level_echo");
            for (std::size_t t = 0; t < days; ++t) {
                cov[t] = log_price[t] + covariate_noise * rng.next_normal();
            }
        } else {
            names.push_back("noise_" + std::to_string(k - 2));
            for (std::size_t t = 0; t < days; ++t) {
                cov[t] = rng.next_normal();
            }
        }
        columns.push_back(std::move(cov));
    }
    return TimeSeriesFrame(std::move(dates), std::move(names), std::move(columns));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

} // namespace

TimeSeriesFrame read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("read_csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError("read_csv: '" + path + "' is empty");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 2 || header[0] != "date") {
        throw SchemaError("read_csv: '" + path + "' header must be 'date,<column...>'");
    }
    std::vector<std::string> names(header.begin() + 1, header.end());

    std::vector<Date> dates;
    std::vector<std::vector<double>> columns(names.size());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size()) {
            throw SchemaError("read_csv: '" + path + "' line " + std::to_string(line_no) +
                              " has " + std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        }
        dates.push_back(parse_date(cells[0]));
        for (std::size_t c = 0; c < names.size(); ++c) {
            const std::string& cell = cells[c + 1];
            if (cell.empty()) {
                columns[c].push_back(missing_value());
            } else {
                try {
                    std::size_t consumed = 0;
                    const double v = std::stod(cell, &consumed);
                    if (consumed != cell.size()) throw std::invalid_argument(cell);
                    columns[c].push_back(v);
                } catch (const std::exception&) {
                    throw SchemaError("read_csv: '" + path + "' line " +
                                      std::to_string(line_no) + ": bad number '" + cell + "'");
                }
            }
        }
    }
    return TimeSeriesFrame(std::move(dates), std::move(names), std::move(columns));
}

void write_csv(const TimeSeriesFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("write_csv: cannot open '" + path + "' for writing");
    }
    out << "date";
    for (const auto& name : frame.column_names()) out << ',' << name;
    out << '\n';
    char buf[40];
    for (std::size_t r = 0; r < frame.row_count(); ++r) {
        out << format_date(frame.dates()[r]);
        for (std::size_t c = 0; c < frame.column_count(); ++c) {
            const double v = frame.column(c)[r];
            if (is_missing(v)) {
                out << ',';
            } else {
                std::snprintf(buf, sizeof buf, "%.17g", v);
                out << ',' << buf;
            }
        }
        out << '\n';
    }
    if (!out) {
        throw IoError("write_csv: failed writing '" + path + "'");
    }
}

} // namespace cryptoseq
