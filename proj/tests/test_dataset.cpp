#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cryptoseq/dataset.hpp"
#include "cryptoseq/errors.hpp"
#include "cryptoseq/features.hpp"

using namespace cryptoseq;

namespace {

Date day(int offset) {
    return date_from_ymd(2018, 1, 1).plus_days(offset);
}

TimeSeriesFrame daily_frame(int start_offset, int days, const std::string& name,
                            double base = 1.0) {
    std::vector<Date> dates(days);
    std::vector<double> col(days);
    for (int i = 0; i < days; ++i) {
        dates[i] = day(start_offset + i);
        col[i] = base + i;
    }
    return TimeSeriesFrame(dates, {name}, {col});
}

} // namespace

TEST_CASE("frames require strictly increasing dates") {
    const std::vector<Date> bad{day(0), day(0)};
    CHECK_THROWS_AS(TimeSeriesFrame(bad, {"a"}, {{1.0, 2.0}}), SchemaError);
}

TEST_CASE("merge of aligned frames concatenates columns") {
    const TimeSeriesFrame a = daily_frame(0, 5, "a");
    const TimeSeriesFrame b = daily_frame(0, 5, "b", 10.0);
    const TimeSeriesFrame merged = merge_frames({a, b});
    CHECK(merged.column_count() == 2);
    CHECK(merged.row_count() == 5);
    CHECK(merged.column("a")[2] == doctest::Approx(3.0));
    CHECK(merged.column("b")[2] == doctest::Approx(12.0));
}

TEST_CASE("merge takes the union of dates with missing markers") {
    const TimeSeriesFrame a = daily_frame(0, 2, "a"); // d0, d1
    const TimeSeriesFrame b = daily_frame(1, 2, "b"); // d1, d2
    const TimeSeriesFrame merged = merge_frames({a, b});
    CHECK(merged.row_count() == 3);
    CHECK(is_missing(merged.column("b")[0]));
    CHECK(is_missing(merged.column("a")[2]));
    CHECK(!is_missing(merged.column("a")[0]));
    int missing_cells = 0;
    for (std::size_t c = 0; c < merged.column_count(); ++c) {
        for (double v : merged.column(c)) {
            if (is_missing(v)) ++missing_cells;
        }
    }
    CHECK(missing_cells == 2);
}

TEST_CASE("merging a single frame is the identity") {
    const TimeSeriesFrame a = daily_frame(0, 4, "a");
    const TimeSeriesFrame merged = merge_frames({a});
    CHECK(merged.row_count() == 4);
    CHECK(merged.column("a") == a.column("a"));
}

TEST_CASE("merge rejects duplicate column names") {
    const TimeSeriesFrame a = daily_frame(0, 3, "price");
    const TimeSeriesFrame b = daily_frame(0, 3, "price");
    CHECK_THROWS_AS(merge_frames({a, b}), SchemaError);
}

TEST_CASE("forward fill carries Friday over the weekend") {
    std::vector<Date> dates{day(4), day(5), day(6)}; // Fri, Sat, Sun
    std::vector<double> gold{10.0, missing_value(), missing_value()};
    const TimeSeriesFrame frame(dates, {"gold"}, {gold});
    const TimeSeriesFrame filled = forward_fill(frame, {"gold"});
    CHECK(filled.column("gold")[1] == doctest::Approx(10.0));
    CHECK(filled.column("gold")[2] == doctest::Approx(10.0));
}

TEST_CASE("forward fill leaves complete frames unchanged") {
    const TimeSeriesFrame frame = daily_frame(0, 6, "a");
    const TimeSeriesFrame filled = forward_fill(frame, {"a"});
    CHECK(filled.column("a") == frame.column("a"));
}

TEST_CASE("forward fill bridges a four-day gap with one value") {
    std::vector<Date> dates;
    std::vector<double> col;
    for (int i = 0; i < 7; ++i) {
        dates.push_back(day(i));
        col.push_back(i == 0 || i == 6 ? 5.0 + i : missing_value());
    }
    const TimeSeriesFrame filled = forward_fill(TimeSeriesFrame(dates, {"x"}, {col}), {"x"});
    for (int i = 1; i <= 5; ++i) {
        CHECK(filled.column("x")[i] == doctest::Approx(5.0));
    }
    CHECK(filled.column("x")[6] == doctest::Approx(11.0));
}

TEST_CASE("forward fill rejects a leading gap, naming column and date") {
    std::vector<Date> dates{day(0), day(1)};
    std::vector<double> col{missing_value(), 2.0};
    try {
        forward_fill(TimeSeriesFrame(dates, {"vix"}, {col}), {"vix"});
        FAIL("expected ValueError");
    } catch (const ValueError& e) {
        const std::string what = e.what();
        CHECK(what.find("vix") != std::string::npos);
        CHECK(what.find("2018-01-01") != std::string::npos);
    }
}

TEST_CASE("forward fill twice equals once") {
    std::vector<Date> dates;
    std::vector<double> col;
    for (int i = 0; i < 20; ++i) {
        dates.push_back(day(i));
        col.push_back(i % 3 == 0 ? static_cast<double>(i) : missing_value());
    }
    const TimeSeriesFrame frame(dates, {"x"}, {col});
    const TimeSeriesFrame once = forward_fill(frame, {"x"});
    const TimeSeriesFrame twice = forward_fill(once, {"x"});
    CHECK(once.column("x") == twice.column("x"));
}

TEST_CASE("split partitions by date with the default ranges") {
    // Daily frame spanning 2010-01-01 .. 2019-06-30.
    const Date start = date_from_ymd(2010, 1, 1);
    const Date stop = date_from_ymd(2019, 6, 30);
    const int n = days_between(start, stop) + 1;
    std::vector<Date> dates(n);
    std::vector<double> col(n);
    for (int i = 0; i < n; ++i) {
        dates[i] = start.plus_days(i);
        col[i] = i;
    }
    const TimeSeriesFrame frame(dates, {"p"}, {col});
    const SplitFrames parts = split(frame, SplitSpec{});

    CHECK(parts.test.row_count() == 181);
    CHECK(parts.validation.row_count() == 184);
    CHECK(parts.train.dates().front() == date_from_ymd(2010, 1, 1));
    CHECK(parts.train.dates().back() == date_from_ymd(2018, 6, 30));
    CHECK(parts.validation.dates().front() == date_from_ymd(2018, 7, 1));
    CHECK(parts.test.dates().back() == date_from_ymd(2019, 6, 30));

    // Parts are disjoint, ordered, and reassemble to the in-range frame.
    CHECK(parts.train.row_count() + parts.validation.row_count() + parts.test.row_count() ==
          static_cast<std::size_t>(n));
    CHECK(parts.train.dates().back() < parts.validation.dates().front());
    CHECK(parts.validation.dates().back() < parts.test.dates().front());
    std::vector<double> reassembled;
    for (const auto* part : {&parts.train, &parts.validation, &parts.test}) {
        reassembled.insert(reassembled.end(), part->column("p").begin(),
                           part->column("p").end());
    }
    CHECK(reassembled == col);
}

TEST_CASE("dates outside every range are excluded") {
    SplitSpec spec;
    spec.train = {day(0), day(9)};
    spec.validation = {day(20), day(24)};
    spec.test = {day(30), day(34)};
    const TimeSeriesFrame frame = daily_frame(0, 40, "p");
    const SplitFrames parts = split(frame, spec);
    CHECK(parts.train.row_count() == 10);
    CHECK(parts.validation.row_count() == 5);
    CHECK(parts.test.row_count() == 5);
}

TEST_CASE("split rejects an empty part") {
    SplitSpec spec;
    spec.train = {day(0), day(9)};
    spec.validation = {day(10), day(14)};
    spec.test = {day(100), day(120)}; // beyond the frame
    const TimeSeriesFrame frame = daily_frame(0, 20, "p");
    CHECK_THROWS_AS(split(frame, spec), ValueError);
}

TEST_CASE("make_windows counts samples as rows minus lookback") {
    const TimeSeriesFrame frame = daily_frame(0, 100, "p");
    for (std::size_t lookback : {15u, 30u, 45u, 60u}) {
        const WindowedDataset set = make_windows(frame, lookback, "p");
        CHECK(set.size() == 100 - lookback);
    }
}

TEST_CASE("windows are contiguous and end the day before the target") {
    const TimeSeriesFrame frame = daily_frame(0, 50, "p");
    const WindowedDataset set = make_windows(frame, 10, "p");
    for (const WindowSample& s : set.samples) {
        CHECK(s.window.rows() == 10);
        // Column p holds 1 + offset, so window values encode their dates.
        const double last_in_window = s.window(9, 0);
        const double target_value = s.target;
        CHECK(target_value == doctest::Approx(last_in_window + 1.0));
        for (std::size_t r = 1; r < 10; ++r) {
            CHECK(s.window(r, 0) == doctest::Approx(s.window(r - 1, 0) + 1.0));
        }
    }
}

TEST_CASE("context rows let the first target be the first frame date") {
    const TimeSeriesFrame full = daily_frame(0, 100, "p");
    const TimeSeriesFrame head = full.slice_rows(0, 70);
    const TimeSeriesFrame tail = full.slice_rows(70, 100);
    const WindowedDataset set = make_windows(tail, 30, "p", &head);
    CHECK(set.size() == 30);
    CHECK(set.samples.front().target_date == tail.dates().front());
    // The combined history must match windows built over the full frame.
    const WindowedDataset reference = make_windows(full, 30, "p");
    const WindowSample& from_context = set.samples.front();
    const WindowSample& from_full = reference.samples[70 - 30];
    CHECK(from_context.target_date == from_full.target_date);
    CHECK(from_context.window == from_full.window);
}

TEST_CASE("make_windows reports the missing history row count") {
    const TimeSeriesFrame frame = daily_frame(0, 10, "p");
    try {
        make_windows(frame, 15, "p");
        FAIL("expected ValueError");
    } catch (const ValueError& e) {
        CHECK(std::string(e.what()).find("6") != std::string::npos); // 16 needed, 10 present
    }
}

TEST_CASE("make_windows rejects gapped dates") {
    std::vector<Date> dates;
    std::vector<double> col;
    for (int i = 0; i < 30; ++i) {
        if (i == 12) continue; // hole
        dates.push_back(day(i));
        col.push_back(i);
    }
    const TimeSeriesFrame frame(dates, {"p"}, {col});
    CHECK_THROWS_AS(make_windows(frame, 5, "p"), ValueError);
}

TEST_CASE("make_windows rejects mismatched context") {
    const TimeSeriesFrame frame = daily_frame(10, 20, "p");
    const TimeSeriesFrame wrong_gap = daily_frame(0, 5, "p"); // ends day 4, frame starts day 10
    CHECK_THROWS_AS(make_windows(frame, 5, "p", &wrong_gap), ValueError);
    const TimeSeriesFrame wrong_cols = daily_frame(0, 10, "q");
    CHECK_THROWS_AS(make_windows(frame, 5, "p", &wrong_cols), SchemaError);
}

TEST_CASE("synthetic frames are seed-deterministic") {
    const TimeSeriesFrame a = synth_generate(7, 300, 3);
    const TimeSeriesFrame b = synth_generate(7, 300, 3);
    CHECK(a.column_names() == b.column_names());
    for (std::size_t c = 0; c < a.column_count(); ++c) {
        CHECK(a.column(c) == b.column(c));
    }
    const TimeSeriesFrame other = synth_generate(8, 300, 3);
    CHECK(a.column("price") != other.column("price"));
}

TEST_CASE("synthetic prices stay strictly positive across seeds") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const TimeSeriesFrame frame = synth_generate(seed, 2000, 2);
        for (double v : frame.column("price")) {
            CHECK(v > 0.0);
        }
    }
}

TEST_CASE("the planted covariate predicts the next-day price") {
    const TimeSeriesFrame frame = synth_generate(99, 2000, 3);
    const auto& price = frame.column("price");
    const auto& lead = frame.column("lead_signal");
    std::vector<double> next_day(price.begin() + 1, price.end());
    std::vector<double> lead_today(lead.begin(), lead.end() - 1);
    CHECK(spearman(lead_today, next_day) > 0.5);
}

TEST_CASE("csv round trip preserves values and missing cells") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cryptoseq_csv_test";
    fs::create_directories(dir);
    const std::string path = (dir / "frame.csv").string();

    std::vector<Date> dates{day(0), day(1), day(2)};
    std::vector<double> a{1.5, missing_value(), -3.25};
    std::vector<double> b{0.1, 0.2, 0.3};
    write_csv(TimeSeriesFrame(dates, {"a", "b"}, {a, b}), path);

    const TimeSeriesFrame frame = read_csv(path);
    CHECK(frame.row_count() == 3);
    CHECK(frame.column_names() == std::vector<std::string>{"a", "b"});
    CHECK(frame.column("a")[0] == doctest::Approx(1.5));
    CHECK(is_missing(frame.column("a")[1]));
    CHECK(frame.column("a")[2] == doctest::Approx(-3.25));
    CHECK(frame.column("b")[2] == doctest::Approx(0.3));
    fs::remove_all(dir);
}

TEST_CASE("csv reader rejects malformed input") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "cryptoseq_csv_bad";
    fs::create_directories(dir);

    const std::string no_date = (dir / "no_date.csv").string();
    std::ofstream(no_date) << "time,a\n2018-01-01,1\n";
    CHECK_THROWS_AS(read_csv(no_date), SchemaError);

    const std::string bad_cell = (dir / "bad_cell.csv").string();
    std::ofstream(bad_cell) << "date,a\n2018-01-01,banana\n";
    CHECK_THROWS_AS(read_csv(bad_cell), SchemaError);

    const std::string ragged = (dir / "ragged.csv").string();
    std::ofstream(ragged) << "date,a,b\n2018-01-01,1\n";
    CHECK_THROWS_AS(read_csv(ragged), SchemaError);

    CHECK_THROWS_AS(read_csv((dir / "absent.csv").string()), IoError);
    fs::remove_all(dir);
}
