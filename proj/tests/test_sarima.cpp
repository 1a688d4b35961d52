#include <doctest.h>

#include <cmath>

#include "cryptoseq/errors.hpp"
#include "cryptoseq/random.hpp"
#include "cryptoseq/sarima.hpp"
#include "oracles.hpp"

using namespace cryptoseq;
using namespace cryptoseq::sarima;

namespace {

std::vector<double> simulate_ar1(double phi, double mean, double sigma, std::size_t n,
                                 std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> y(n);
    y[0] = mean;
    for (std::size_t t = 1; t < n; ++t) {
        y[t] = mean + phi * (y[t - 1] - mean) + sigma * rng.next_normal();
    }
    return y;
}

std::vector<double> white_noise(std::size_t n, std::uint64_t seed) {
    RandomStream rng(seed);
    std::vector<double> y(n);
    for (double& v : y) v = rng.next_normal();
    return y;
}

SarimaCoefficients ar1_coeffs(double phi, double intercept = 0.0) {
    SarimaCoefficients c;
    c.ar = {phi};
    c.intercept = intercept;
    return c;
}

} // namespace

TEST_CASE("first differences") {
    const std::vector<double> out = difference({1.0, 3.0, 6.0}, 1, 0, 7);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == doctest::Approx(2.0));
    CHECK(out[1] == doctest::Approx(3.0));
}

TEST_CASE("seasonal differences at lag 2") {
    const std::vector<double> out = difference({1.0, 2.0, 4.0, 6.0}, 0, 1, 2);
    REQUIRE(out.size() == 2);
    CHECK(out[0] == doctest::Approx(3.0));
    CHECK(out[1] == doctest::Approx(4.0));
}

TEST_CASE("zero orders are the identity") {
    const std::vector<double> series{5.0, -1.0, 2.5};
    CHECK(difference(series, 0, 0, 7) == series);
}

TEST_CASE("difference rejects too-short series") {
    CHECK_THROWS_AS(difference({1.0, 2.0}, 1, 1, 7), ValueError);
}

TEST_CASE("difference then invert reconstructs the tail exactly") {
    RandomStream rng(42);
    std::vector<double> series(60);
    for (double& v : series) v = rng.next_uniform(-10.0, 10.0);
    struct Orders {
        int d, D, s;
    };
    for (const auto [d, D, s] :
         {Orders{1, 0, 7}, Orders{0, 1, 7}, Orders{1, 1, 7}, Orders{2, 0, 7}, Orders{1, 1, 4}}) {
        const std::vector<double> head(series.begin(), series.end() - 5);
        const DifferenceTransform head_transform(head, d, D, s);
        // Differenced values of the 5 held-out points, via the full transform.
        const DifferenceTransform full(series, d, D, s);
        const std::vector<double>& w_full = full.differenced();
        const std::vector<double> future(w_full.end() - 5, w_full.end());
        const std::vector<double> rebuilt = head_transform.invert(future);
        for (std::size_t i = 0; i < 5; ++i) {
            CHECK(std::abs(rebuilt[i] - series[series.size() - 5 + i]) < 1e-12);
        }
    }
}

TEST_CASE("css with zero coefficients sums squared observations") {
    const std::vector<double> y = white_noise(200, 3);
    SarimaCoefficients empty;
    double expected = 0.0;
    for (double v : y) expected += v * v;
    CHECK(css_loss(y, SarimaOrder{0, 0, 0, 0, 0, 0, 7}, empty) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("css at the true AR(1) coefficient beats nearby values") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::vector<double> y = simulate_ar1(0.6, 0.0, 1.0, 800, seed);
        const SarimaOrder order{1, 0, 0, 0, 0, 0, 7};
        const double at_true = css_loss(y, order, ar1_coeffs(0.6));
        CHECK(at_true < css_loss(y, order, ar1_coeffs(0.4)));
        CHECK(at_true < css_loss(y, order, ar1_coeffs(0.8)));
    }
}

TEST_CASE("a deterministic AR(1) recursion has zero loss at the true coefficient") {
    std::vector<double> y(120);
    y[0] = 1.0;
    for (std::size_t t = 1; t < y.size(); ++t) y[t] = 0.7 * y[t - 1];
    const double loss = css_loss(y, SarimaOrder{1, 0, 0, 0, 0, 0, 7}, ar1_coeffs(0.7));
    CHECK(loss < 1e-18);
}

TEST_CASE("css rejects mismatched coefficient counts") {
    const std::vector<double> y = white_noise(50, 5);
    SarimaCoefficients wrong;
    wrong.ar = {0.5, 0.1};
    CHECK_THROWS_AS(css_loss(y, SarimaOrder{1, 0, 0, 0, 0, 0, 7}, wrong), ValueError);
}

TEST_CASE("css rejects a non-invertible MA polynomial") {
    const std::vector<double> y = white_noise(50, 6);
    SarimaCoefficients bad;
    bad.ma = {1.5};
    CHECK_THROWS_AS(css_loss(y, SarimaOrder{0, 0, 1, 0, 0, 0, 7}, bad), StabilityError);
}

TEST_CASE("css is continuous in the coefficients") {
    const std::vector<double> y = simulate_ar1(0.5, 0.0, 1.0, 400, 11);
    const SarimaOrder order{1, 0, 1, 0, 0, 0, 7};
    SarimaCoefficients c;
    c.ar = {0.4};
    c.ma = {0.2};
    const double base = css_loss(y, order, c);
    SarimaCoefficients nudged = c;
    nudged.ar[0] += 1e-8;
    nudged.ma[0] -= 1e-8;
    const double moved = css_loss(y, order, nudged);
    CHECK(std::abs(moved - base) / base < 1e-4);
}

TEST_CASE("fit recovers the AR(1) coefficient in at least 9 of 10 seeds") {
    const std::vector<SarimaOrder> grid{SarimaOrder{1, 0, 0, 0, 0, 0, 7}};
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const std::vector<double> y = simulate_ar1(0.7, 0.0, 1.0, 2000, seed);
        const SarimaFit fit_result = fit(y, grid);
        const double phi = fit_result.coeffs.ar[0];
        if (phi >= 0.65 && phi <= 0.75) ++hits;
    }
    CHECK(hits >= 9);
}

TEST_CASE("AIC prefers the empty model on white noise") {
    const std::vector<SarimaOrder> grid{
        SarimaOrder{0, 0, 0, 0, 0, 0, 7},
        SarimaOrder{1, 0, 0, 0, 0, 0, 7},
        SarimaOrder{0, 0, 1, 0, 0, 0, 7},
    };
    int empty_selected = 0;
    for (std::uint64_t seed = 7001; seed <= 7010; ++seed) {
        const std::vector<double> y = white_noise(500, seed);
        const SarimaFit best = fit(y, grid);
        if (best.order.coefficient_count() == 0) ++empty_selected;
    }
    CHECK(empty_selected >= 8);
}

TEST_CASE("k = 0 AIC formula instantiation") {
    const std::vector<double> y = white_noise(300, 21);
    const SarimaFit best = fit(y, {SarimaOrder{0, 0, 0, 0, 0, 0, 7}});
    double sse = 0.0;
    const double mean = [&] {
        double m = 0.0;
        for (double v : y) m += v;
        return m / static_cast<double>(y.size());
    }();
    for (double v : y) sse += (v - mean) * (v - mean);
    const double n = static_cast<double>(y.size());
    CHECK(best.aic == doctest::Approx(n * std::log(sse / n) + 2.0).epsilon(1e-12));
    CHECK(best.sigma2 > 0.0);
}

TEST_CASE("all-orders-zero forecast is the series mean at every horizon") {
    const std::vector<double> y = white_noise(400, 31);
    const SarimaFit best = fit(y, {SarimaOrder{0, 0, 0, 0, 0, 0, 7}});
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    for (double f : forecast(best, y, 5)) {
        CHECK(f == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("AR(1) forecasts match the closed form to 1e-9") {
    const std::vector<double> y = simulate_ar1(0.7, 2.0, 1.0, 2000, 7);
    const SarimaFit fit_result = fit(y, {SarimaOrder{1, 0, 0, 0, 0, 0, 7}});
    const double phi = fit_result.coeffs.ar[0];
    const double mu = fit_result.coeffs.intercept;
    const std::vector<double> preds = forecast(fit_result, y, 10);
    for (int h = 1; h <= 10; ++h) {
        const double closed = oracles::ar1_closed_form(mu, phi, y.back(), h);
        CHECK(std::abs(preds[static_cast<std::size_t>(h - 1)] - closed) < 1e-9);
    }
}

TEST_CASE("a d=1 fit continues a linear ramp exactly") {
    std::vector<double> ramp(200);
    for (std::size_t t = 0; t < ramp.size(); ++t) ramp[t] = 3.0 + 0.5 * static_cast<double>(t);
    const SarimaFit fit_result = fit(ramp, {SarimaOrder{1, 1, 0, 0, 0, 0, 7}});
    const std::vector<double> preds = forecast(fit_result, ramp, 4);
    for (int h = 1; h <= 4; ++h) {
        const double expected = 3.0 + 0.5 * static_cast<double>(ramp.size() - 1 + h);
        CHECK(preds[static_cast<std::size_t>(h - 1)] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("fit is deterministic") {
    const std::vector<double> y = simulate_ar1(0.5, 1.0, 1.0, 600, 77);
    const std::vector<SarimaOrder> grid{
        SarimaOrder{1, 0, 0, 0, 0, 0, 7},
        SarimaOrder{0, 1, 1, 0, 0, 0, 7},
        SarimaOrder{1, 0, 1, 1, 0, 0, 7},
    };
    const SarimaFit a = fit(y, grid);
    const SarimaFit b = fit(y, grid);
    CHECK(a.order == b.order);
    CHECK(a.aic == b.aic);
    CHECK(a.coeffs.ar == b.coeffs.ar);
    CHECK(a.coeffs.ma == b.coeffs.ma);
}

TEST_CASE("fit rejects an empty grid and hopeless series") {
    CHECK_THROWS_AS(fit(white_noise(100, 1), {}), ValueError);
    CHECK_THROWS_AS(fit({1.0, 2.0, 3.0}, {SarimaOrder{0, 1, 0, 2, 1, 0, 7}}), StabilityError);
}

TEST_CASE("seasonal fit beats the nonseasonal one on a weekly pattern") {
    RandomStream rng(5);
    std::vector<double> y(700);
    for (std::size_t t = 0; t < y.size(); ++t) {
        y[t] = (t % 7 == 0 ? 4.0 : 0.0) + 0.3 * rng.next_normal();
    }
    const SarimaFit seasonal = fit(y, {SarimaOrder{0, 0, 0, 1, 1, 0, 7}});
    const SarimaFit plain = fit(y, {SarimaOrder{1, 0, 0, 0, 0, 0, 7}});
    CHECK(seasonal.aic < plain.aic);
}

TEST_CASE("fit summary serializes to JSON") {
    const std::vector<double> y = simulate_ar1(0.6, 0.0, 1.0, 300, 2);
    const SarimaFit fit_result = fit(y, {SarimaOrder{1, 0, 0, 0, 0, 0, 7}});
    const std::string json = fit_to_json(fit_result);
    CHECK(json.find("\"order\"") != std::string::npos);
    CHECK(json.find("\"aic\"") != std::string::npos);
    CHECK(json.find("\"sigma2\"") != std::string::npos);
    CHECK(json.find("\"intercept\"") != std::string::npos);
}
