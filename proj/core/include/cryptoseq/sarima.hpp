#pragma once

#include <string>
#include <vector>

namespace cryptoseq::sarima {

struct SarimaOrder {
    int p = 0, d = 0, q = 0; // nonseasonal AR / differencing / MA
    int P = 0, D = 0, Q = 0; // seasonal counterparts
    int s = 7;               // season length in days

    int coefficient_count() const { return p + q + P + Q; }
    int ar_span() const { return p + P * s; } // longest AR lag after expansion

    bool operator==(const SarimaOrder&) const = default;
    std::string str() const;
};

struct SarimaCoefficients {
    std::vector<double> ar;  // phi, length p
    std::vector<double> ma;  // theta, length q
    std::vector<double> sar; // seasonal Phi, length P
    std::vector<double> sma; // seasonal Theta, length Q
    double intercept = 0.0;  // mean of the differenced series
};

struct SarimaFit {
    SarimaOrder order;
    SarimaCoefficients coeffs;
    double sigma2 = 0.0; // residual variance over the CSS sum
    double aic = 0.0;    // n * ln(SSE/n) + 2 * (k + 1)
    double sse = 0.0;
};

/// Applies (1-B)^d (1-B^s)^D; output is shortened by d + D*s.
std::vector<double> difference(const std::vector<double>& series, int d, int D, int s);

/// Differencing with the per-stage tails retained so forecasts can be
/// integrated back to the original scale.
class DifferenceTransform {
public:
    DifferenceTransform(const std::vector<double>& series, int d, int D, int s);

    const std::vector<double>& differenced() const { return differenced_; }

    /// Integrates forecasts on the differenced scale back to the original scale.
    std::vector<double> invert(const std::vector<double>& future_diffs) const;

private:
    int d_, D_, s_;
    std::vector<double> differenced_;
    std::vector<std::vector<double>> stage_tails_; // one tail per undone stage
};

/// Conditional sum of squared one-step residuals with zero pre-sample
/// residuals. Differences the series per the order first. Throws
/// StabilityError when the expanded MA polynomial is not invertible.
double css_loss(const std::vector<double>& series, const SarimaOrder& order,
                const SarimaCoefficients& coeffs);

/// Minimizes css_loss by Nelder-Mead (zero start, deterministic +-0.1 restart
/// perturbations) for every order in the grid and returns the minimum-AIC fit.
/// Ties break lexicographically on the order tuple.
SarimaFit fit(const std::vector<double>& series, const std::vector<SarimaOrder>& grid);

/// Iterated forecasts with future residuals zero, undifferenced to the
/// original scale.
std::vector<double> forecast(const SarimaFit& fit, const std::vector<double>& series,
                             int horizon);

/// p,q,P,Q in {0,1,2}, d,D in {0,1}, s = 7.
std::vector<SarimaOrder> default_grid();

std::string fit_to_json(const SarimaFit& fit);

} // namespace cryptoseq::sarima
