#include "cryptoseq/sarima.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <tuple>

#include <json.hpp>

#include "cryptoseq/errors.hpp"

namespace cryptoseq::sarima {

namespace {

constexpr double kInfeasible = 1e300;
constexpr double kUnitRootMargin = 1e-10;

std::vector<double> diff_once(const std::vector<double>& series, int lag) {
    std::vector<double> out(series.size() - static_cast<std::size_t>(lag));
    for (std::size_t t = static_cast<std::size_t>(lag); t < series.size(); ++t) {
        out[t - static_cast<std::size_t>(lag)] = series[t] - series[t - lag];
    }
    return out;
}

/// Polynomial product; operands store the coefficient of B^i at index i.
std::vector<double> poly_multiply(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

/// AR operator phi(B) * Phi(B^s) with constant term 1 and -phi signs.
std::vector<double> ar_polynomial(const SarimaOrder& order, const SarimaCoefficients& c) {
    std::vector<double> nonseasonal(static_cast<std::size_t>(order.p) + 1, 0.0);
    nonseasonal[0] = 1.0;
    for (int i = 0; i < order.p; ++i) nonseasonal[static_cast<std::size_t>(i) + 1] = -c.ar[i];
    std::vector<double> seasonal(static_cast<std::size_t>(order.P * order.s) + 1, 0.0);
    seasonal[0] = 1.0;
    for (int i = 0; i < order.P; ++i) {
        seasonal[static_cast<std::size_t>((i + 1) * order.s)] = -c.sar[i];
    }
    return poly_multiply(nonseasonal, seasonal);
}

/// MA operator theta(B) * Theta(B^s) with constant term 1 and +theta signs.
std::vector<double> ma_polynomial(const SarimaOrder& order, const SarimaCoefficients& c) {
    std::vector<double> nonseasonal(static_cast<std::size_t>(order.q) + 1, 0.0);
    nonseasonal[0] = 1.0;
    for (int i = 0; i < order.q; ++i) nonseasonal[static_cast<std::size_t>(i) + 1] = c.ma[i];
    std::vector<double> seasonal(static_cast<std::size_t>(order.Q * order.s) + 1, 0.0);
    seasonal[0] = 1.0;
    for (int i = 0; i < order.Q; ++i) {
        seasonal[static_cast<std::size_t>((i + 1) * order.s)] = c.sma[i];
    }
    return poly_multiply(nonseasonal, seasonal);
}

/// Schur-Cohn test: true when every root of 1 + c_1 B + ... + c_k B^k lies
/// strictly outside the unit circle (margin kUnitRootMargin).
bool roots_outside_unit_circle(const std::vector<double>& poly) {
    std::vector<double> a(poly.begin() + 1, poly.end());
    while (!a.empty() && a.back() == 0.0) a.pop_back();
    while (!a.empty()) {
        const double gamma = a.back();
        if (std::abs(gamma) >= 1.0 - kUnitRootMargin) return false;
        const std::size_t k = a.size();
        if (k == 1) break;
        std::vector<double> next(k - 1);
        const double denom = 1.0 - gamma * gamma;
        for (std::size_t i = 0; i < k - 1; ++i) {
            next[i] = (a[i] - gamma * a[k - 2 - i]) / denom;
        }
        a = std::move(next);
    }
    return true;
}

struct ResidualModel {
    std::vector<double> ar_poly; // index i = coefficient of B^i, [0] == 1
    std::vector<double> ma_poly;
    std::size_t start; // first index with all AR lags available
};

ResidualModel build_model(const SarimaOrder& order, const SarimaCoefficients& c) {
    ResidualModel m;
    m.ar_poly = ar_polynomial(order, c);
    m.ma_poly = ma_polynomial(order, c);
    m.start = static_cast<std::size_t>(order.ar_span());
    return m;
}

/// One-step residuals of the demeaned differenced series, zero pre-sample
/// residuals; epsilon defined for every index, summation starts at m.start.
std::vector<double> residuals(const ResidualModel& m, const std::vector<double>& w,
                              double intercept) {
    std::vector<double> eps(w.size(), 0.0);
    for (std::size_t t = m.start; t < w.size(); ++t) {
        double e = 0.0;
        for (std::size_t i = 0; i < m.ar_poly.size() && i <= t; ++i) {
            e += m.ar_poly[i] * (w[t - i] - intercept);
        }
        for (std::size_t j = 1; j < m.ma_poly.size() && j <= t; ++j) {
            if (m.ma_poly[j] != 0.0) e -= m.ma_poly[j] * eps[t - j];
        }
        eps[t] = e;
    }
    return eps;
}

double sum_squares_from(const std::vector<double>& eps, std::size_t start) {
    double sum = 0.0;
    for (std::size_t t = start; t < eps.size(); ++t) sum += eps[t] * eps[t];
    return sum;
}

SarimaCoefficients unpack(const SarimaOrder& order, const std::vector<double>& x,
                          double intercept) {
    SarimaCoefficients c;
    std::size_t k = 0;
    c.ar.assign(x.begin(), x.begin() + order.p);
    k += static_cast<std::size_t>(order.p);
    c.ma.assign(x.begin() + k, x.begin() + k + order.q);
    k += static_cast<std::size_t>(order.q);
    c.sar.assign(x.begin() + k, x.begin() + k + order.P);
    k += static_cast<std::size_t>(order.P);
    c.sma.assign(x.begin() + k, x.begin() + k + order.Q);
    c.intercept = intercept;
    return c;
}

/// Deterministic Nelder-Mead: reflection 1, expansion 2, contraction 0.5,
/// shrink 0.5. Returns the best point found.
std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& start, double step,
                                std::size_t max_iter) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        std::vector<std::size_t> order(n + 1);
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order[0];
        const std::size_t worst = order[n];
        const std::size_t second_worst = order[n - 1];

        if (std::abs(values[worst] - values[best]) <=
            1e-12 * (1.0 + std::abs(values[best]))) {
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
        }
        for (double& v : centroid) v /= static_cast<double>(n);

        auto blend = [&](double coeff) {
            std::vector<double> x(n);
            for (std::size_t j = 0; j < n; ++j) {
                x[j] = centroid[j] + coeff * (simplex[worst][j] - centroid[j]);
            }
            return x;
        };

        const std::vector<double> reflected = blend(-1.0);
        const double f_reflected = f(reflected);
        if (f_reflected < values[best]) {
            const std::vector<double> expanded = blend(-2.0);
            const double f_expanded = f(expanded);
            if (f_expanded < f_reflected) {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if (f_reflected < values[second_worst]) {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        const std::vector<double> contracted = blend(0.5);
        const double f_contracted = f(contracted);
        if (f_contracted < values[worst]) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t j = 0; j < n; ++j) {
                simplex[i][j] = simplex[best][j] + 0.5 * (simplex[i][j] - simplex[best][j]);
            }
            values[i] = f(simplex[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[best]) best = i;
    }
    return simplex[best];
}

std::tuple<int, int, int, int, int, int, int> order_tuple(const SarimaOrder& o) {
    return {o.p, o.d, o.q, o.P, o.D, o.Q, o.s};
}

} // namespace

std::string SarimaOrder::str() const {
    return "(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) + ")(" +
           std::to_string(P) + "," + std::to_string(D) + "," + std::to_string(Q) + ")" +
           std::to_string(s);
}

std::vector<double> difference(const std::vector<double>& series, int d, int D, int s) {
    return DifferenceTransform(series, d, D, s).differenced();
}

DifferenceTransform::DifferenceTransform(const std::vector<double>& series, int d, int D, int s)
    : d_(d), D_(D), s_(s) {
    if (d < 0 || D < 0 || (D > 0 && s < 2)) {
        throw ValueError("difference: invalid orders d=" + std::to_string(d) + " D=" +
                         std::to_string(D) + " s=" + std::to_string(s));
    }
    const std::size_t consumed = static_cast<std::size_t>(d) +
                                 static_cast<std::size_t>(D) * static_cast<std::size_t>(s);
    if (series.size() <= consumed) {
        throw ValueError("difference: series length " + std::to_string(series.size()) +
                         " too short for d=" + std::to_string(d) + ", D=" + std::to_string(D) +
                         ", s=" + std::to_string(s));
    }
    std::vector<double> current = series;
    for (int k = 0; k < D; ++k) {
        stage_tails_.emplace_back(current.end() - s, current.end());
        current = diff_once(current, s);
    }
    for (int k = 0; k < d; ++k) {
        stage_tails_.emplace_back(current.end() - 1, current.end());
        current = diff_once(current, 1);
    }
    differenced_ = std::move(current);
}

std::vector<double> DifferenceTransform::invert(const std::vector<double>& future_diffs) const {
    std::vector<double> current = future_diffs;
    // Undo stages in reverse order of application.
    for (std::size_t stage = stage_tails_.size(); stage-- > 0;) {
        const int lag = stage < static_cast<std::size_t>(D_) ? s_ : 1;
        std::vector<double> buffer = stage_tails_[stage];
        std::vector<double> integrated;
        integrated.reserve(current.size());
        for (double v : current) {
            const double value = v + buffer[buffer.size() - static_cast<std::size_t>(lag)];
            buffer.push_back(value);
            integrated.push_back(value);
        }
        current = std::move(integrated);
    }
    return current;
}

double css_loss(const std::vector<double>& series, const SarimaOrder& order,
                const SarimaCoefficients& coeffs) {
    if (static_cast<int>(coeffs.ar.size()) != order.p ||
        static_cast<int>(coeffs.ma.size()) != order.q ||
        static_cast<int>(coeffs.sar.size()) != order.P ||
        static_cast<int>(coeffs.sma.size()) != order.Q) {
        throw ValueError("css_loss: coefficient counts do not match order " + order.str());
    }
    const DifferenceTransform transform(series, order.d, order.D, order.s);
    const std::vector<double>& w = transform.differenced();
    const ResidualModel model = build_model(order, coeffs);
    if (w.size() <= model.start) {
        throw ValueError("css_loss: differenced series shorter than AR span for " + order.str());
    }
    if (!roots_outside_unit_circle(model.ma_poly)) {
        throw StabilityError("css_loss: non-invertible MA polynomial for order " + order.str());
    }
    const std::vector<double> eps = residuals(model, w, coeffs.intercept);
    return sum_squares_from(eps, model.start);
}

std::vector<SarimaOrder> default_grid() {
    std::vector<SarimaOrder> grid;
    for (int p = 0; p <= 2; ++p)
        for (int d = 0; d <= 1; ++d)
            for (int q = 0; q <= 2; ++q)
                for (int P = 0; P <= 2; ++P)
                    for (int D = 0; D <= 1; ++D)
                        for (int Q = 0; Q <= 2; ++Q)
                            grid.push_back(SarimaOrder{p, d, q, P, D, Q, 7});
    return grid;
}

SarimaFit fit(const std::vector<double>& series, const std::vector<SarimaOrder>& grid) {
    if (grid.empty()) {
        throw ValueError("fit: empty order grid");
    }

    bool have_best = false;
    SarimaFit best;
    std::string diagnostics;

    for (const SarimaOrder& order : grid) {
        try {
            const DifferenceTransform transform(series, order.d, order.D, order.s);
            const std::vector<double>& w = transform.differenced();
            const std::size_t ar_span = static_cast<std::size_t>(order.ar_span());
            if (w.size() <= ar_span + 1) {
                throw ValueError("series too short after differencing");
            }
            double mean = 0.0;
            for (double v : w) mean += v;
            mean /= static_cast<double>(w.size());

            const int k = order.coefficient_count();
            std::vector<double> x(static_cast<std::size_t>(k), 0.0);

            auto objective = [&](const std::vector<double>& point) {
                const SarimaCoefficients c = unpack(order, point, mean);
                const ResidualModel model = build_model(order, c);
                if (!roots_outside_unit_circle(model.ma_poly) ||
                    !roots_outside_unit_circle(model.ar_poly)) {
                    return kInfeasible;
                }
                const std::vector<double> eps = residuals(model, w, mean);
                return sum_squares_from(eps, model.start);
            };

            if (k > 0) {
                // Zero start, then deterministic restarts with +-0.1 simplex offsets.
                x = nelder_mead(objective, x, 0.1, 400 * static_cast<std::size_t>(k));
                double fx = objective(x);
                for (int restart = 0; restart < 2; ++restart) {
                    const double step = restart % 2 == 0 ? -0.1 : 0.1;
                    const std::vector<double> candidate =
                        nelder_mead(objective, x, step, 400 * static_cast<std::size_t>(k));
                    const double fc = objective(candidate);
                    if (fc < fx - 1e-12) {
                        x = candidate;
                        fx = fc;
                    }
                }
            }

            const double sse = objective(x);
            if (sse >= kInfeasible) {
                throw StabilityError("no stable optimum found");
            }
            const double n_eff = static_cast<double>(w.size() - ar_span);
            const double sse_clamped = std::max(sse, 1e-300);

            SarimaFit candidate;
            candidate.order = order;
            candidate.coeffs = unpack(order, x, mean);
            candidate.sse = sse;
            candidate.sigma2 = sse_clamped / n_eff;
            candidate.aic = n_eff * std::log(sse_clamped / n_eff) + 2.0 * (k + 1);

            if (!have_best || candidate.aic < best.aic ||
                (candidate.aic == best.aic &&
                 order_tuple(candidate.order) < order_tuple(best.order))) {
                best = candidate;
                have_best = true;
            }
        } catch (const std::exception& e) {
            diagnostics += order.str() + ": " + e.what() + "; ";
        }
    }

    if (!have_best) {
        throw StabilityError("fit: every order failed -- " + diagnostics);
    }
    return best;
}

std::vector<double> forecast(const SarimaFit& fit, const std::vector<double>& series,
                             int horizon) {
    if (horizon < 1) {
        throw ValueError("forecast: horizon must be >= 1");
    }
    const DifferenceTransform transform(series, fit.order.d, fit.order.D, fit.order.s);
    std::vector<double> w = transform.differenced();
    const ResidualModel model = build_model(fit.order, fit.coeffs);
    const double mu = fit.coeffs.intercept;

    std::vector<double> eps = residuals(model, w, mu);
    const std::size_t n = w.size();
    std::vector<double> future;
    future.reserve(static_cast<std::size_t>(horizon));
    for (int h = 0; h < horizon; ++h) {
        const std::size_t t = n + static_cast<std::size_t>(h);
        // Future residual is zero, so solve the recursion for w_t.
        double value = mu;
        for (std::size_t i = 1; i < model.ar_poly.size(); ++i) {
            if (i > t) break;
            const double lagged = w[t - i] - mu;
            value -= model.ar_poly[i] * lagged;
        }
        for (std::size_t j = 1; j < model.ma_poly.size(); ++j) {
            if (j > t) break;
            value += model.ma_poly[j] * eps[t - j];
        }
        w.push_back(value);
        eps.push_back(0.0);
        future.push_back(value);
    }
    return transform.invert(future);
}

std::string fit_to_json(const SarimaFit& fit) {
    nlohmann::json j;
    j["order"] = {{"p", fit.order.p}, {"d", fit.order.d}, {"q", fit.order.q},
                  {"P", fit.order.P}, {"D", fit.order.D}, {"Q", fit.order.Q},
                  {"s", fit.order.s}};
    j["ar"] = fit.coeffs.ar;
    j["ma"] = fit.coeffs.ma;
    j["seasonal_ar"] = fit.coeffs.sar;
    j["seasonal_ma"] = fit.coeffs.sma;
    j["intercept"] = fit.coeffs.intercept;
    j["sigma2"] = fit.sigma2;
    j["aic"] = fit.aic;
    return j.dump(2) + "\n";
}

} // namespace cryptoseq::sarima
