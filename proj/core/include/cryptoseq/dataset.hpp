#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cryptoseq/date.hpp"
#include "cryptoseq/matrix.hpp"

namespace cryptoseq {

/// Date-indexed table of named real-valued series. Missing cells are NaN.
/// Dates are strictly increasing with daily granularity; all columns share the
/// date axis. Frames are immutable by convention: operations return new frames.
class TimeSeriesFrame {
public:
    TimeSeriesFrame() = default;
    TimeSeriesFrame(std::vector<Date> dates, std::vector<std::string> names,
                    std::vector<std::vector<double>> columns);

    std::size_t row_count() const { return dates_.size(); }
    std::size_t column_count() const { return names_.size(); }

    const std::vector<Date>& dates() const { return dates_; }
    const std::vector<std::string>& column_names() const { return names_; }

    bool has_column(const std::string& name) const;
    std::size_t column_index(const std::string& name) const; // throws SchemaError
    const std::vector<double>& column(const std::string& name) const;
    const std::vector<double>& column(std::size_t index) const { return columns_[index]; }
    std::vector<double>& column_mut(std::size_t index) { return columns_[index]; }

    /// Rows [begin, end) as a new frame.
    TimeSeriesFrame slice_rows(std::size_t begin, std::size_t end) const;

    /// New frame restricted to the named columns, in the given order.
    TimeSeriesFrame select(const std::vector<std::string>& names) const;

    void add_column(const std::string& name, std::vector<double> values); // throws on duplicate

    /// First row index at which every column holds a finite value.
    std::size_t first_complete_row() const;

    /// True when the date axis has no gaps (every step is exactly one day).
    bool is_daily_contiguous() const;

    std::optional<std::size_t> row_for_date(Date d) const;

private:
    std::vector<Date> dates_;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
};

double missing_value();
bool is_missing(double v);

struct DateRange {
    Date begin; // inclusive
    Date end;   // inclusive
};

/// The three chronological evaluation ranges. Defaults reproduce the daily
/// Bitcoin protocol: train 2010-01-01..2018-06-30, validation to 2018-12-31,
/// test to 2019-06-30.
struct SplitSpec {
    DateRange train{date_from_ymd(2010, 1, 1), date_from_ymd(2018, 6, 30)};
    DateRange validation{date_from_ymd(2018, 7, 1), date_from_ymd(2018, 12, 31)};
    DateRange test{date_from_ymd(2019, 1, 1), date_from_ymd(2019, 6, 30)};
};

struct SplitFrames {
    TimeSeriesFrame train;
    TimeSeriesFrame validation;
    TimeSeriesFrame test;
};

struct WindowSample {
    Matrix window; // lookback rows x feature cols, oldest day first
    double target = 0.0;
    Date target_date{};
};

struct WindowedDataset {
    std::vector<WindowSample> samples;
    std::vector<std::string> feature_names;

    std::size_t size() const { return samples.size(); }
    std::size_t feature_count() const { return feature_names.size(); }
};

/// Outer join on the union of dates; absent cells become missing markers.
/// Column names must be globally unique across frames.
TimeSeriesFrame merge_frames(const std::vector<TimeSeriesFrame>& frames);

/// Each missing cell takes the most recent prior value in its column. A column
/// whose first cell is missing raises a leading-gap error naming column and date.
TimeSeriesFrame forward_fill(const TimeSeriesFrame& frame, const std::vector<std::string>& columns);

/// Row partition by date-range membership.
SplitFrames split(const TimeSeriesFrame& frame, const SplitSpec& spec);

/// One sample per date with full history: window = the lookback rows strictly
/// before the target date, target = target_column at the target date. When the
/// earliest targets need history from before this frame, `context` supplies the
/// immediately preceding rows (same columns, ending the day before the frame).
WindowedDataset make_windows(const TimeSeriesFrame& frame, std::size_t lookback,
                             const std::string& target_column,
                             const TimeSeriesFrame* context = nullptr);

/// Seed-deterministic synthetic market: a latent AR(1) log price (coefficient
/// 0.98, positive drift, multiplicative noise via exp) plus covariates with
/// planted relations to the next day's price:
///   - covariate 1 ("lead_signal") tracks the NEXT day's log price plus small noise,
///   - covariate 2 ("level_echo") tracks the current log price plus noise,
///   - further covariates are unrelated noise.
/// Dates start at 2013-01-01. `features` counts the covariate columns; the
/// frame holds "price" plus that many covariates.
TimeSeriesFrame synth_generate(std::uint64_t seed, std::size_t days, std::size_t features);

TimeSeriesFrame read_csv(const std::string& path);
void write_csv(const TimeSeriesFrame& frame, const std::string& path);

} // namespace cryptoseq
