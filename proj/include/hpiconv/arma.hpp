#pragma once

#include "hpiconv/series.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hpiconv {

/// ARMA(R, M) or ARMAX(R, M) with one exogenous regressor.
struct ArmaSpec {
    int ar_order = 0;
    int ma_order = 0;
    bool include_intercept = true;
    bool exogenous = false;

    void validate() const;
    /// Number of estimated parameters including the innovation variance.
    [[nodiscard]] int parameter_count() const noexcept
    {
        return ar_order + ma_order + (include_intercept ? 1 : 0) + (exogenous ? 1 : 0) + 1;
    }
    [[nodiscard]] std::string name() const;

    bool operator==(const ArmaSpec&) const = default;
};

/// Model coefficients in the form
///   x_t = intercept + sum phi_j x_{t-j} + e_t + sum theta_j e_{t-j} + beta * z_t.
struct ArmaParams {
    double intercept = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
    double beta = 0.0;
};

struct CssValue {
    double nll;     // Gaussian negative log-likelihood, sigma^2 profiled out
    double sigma2;  // mean squared innovation
    std::vector<double> innovations;
};

/// Conditional innovations and Gaussian NLL. Pre-sample observations are set to
/// `presample_mean` (default: the series mean) and pre-sample innovations to 0.
/// Returns nll = +inf when any intermediate is non-finite.
[[nodiscard]] CssValue css_objective(const ArmaParams& params, std::span<const double> series,
                                     std::span<const double> exog = {},
                                     std::optional<double> presample_mean = std::nullopt);

/// Maps unconstrained reals to the coefficients of a stationary AR polynomial
/// 1 - sum phi_j z^j: tanh gives partial autocorrelations, Durbin-Levinson gives phi.
[[nodiscard]] std::vector<double> unconstrained_to_ar(std::span<const double> raw);
/// Inverse of unconstrained_to_ar for a stationary coefficient vector.
[[nodiscard]] std::vector<double> ar_to_unconstrained(std::span<const double> phi);
/// Partial autocorrelations implied by AR coefficients (step-down recursion).
[[nodiscard]] std::vector<double> ar_to_partials(std::span<const double> phi);
[[nodiscard]] bool is_stationary(std::span<const double> phi);
/// 1 + sum theta_j z^j has all roots outside the unit circle.
[[nodiscard]] bool is_invertible(std::span<const double> theta);

struct ArmaFit {
    ArmaSpec spec;
    double intercept = 0.0;
    std::vector<double> phi;
    std::vector<double> theta;
    std::optional<double> beta_exog;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    std::vector<double> residuals;
    bool converged = false;
    std::string warning;
    int n_obs = 0;
    double presample_mean = 0.0;
    std::optional<DateRange> sample_window;
    int evaluations = 0;
    /// Objective value after each accepted optimizer step, across all stages; non-increasing.
    std::vector<double> objective_trace;

    [[nodiscard]] ArmaParams params() const;
};

struct ArmaFitOptions {
    std::uint64_t seed = 20130101;
    int restarts = 3;
    int max_cycles = 8;
    double tolerance = 1e-10;  // objective improvement across a full cycle
};

/// Conditional-likelihood fit. Stationarity and invertibility are enforced by the
/// partial-autocorrelation reparameterization of both polynomials.
[[nodiscard]] ArmaFit fit_arma(std::span<const double> series, const ArmaSpec& spec,
                               std::span<const double> exog = {}, const ArmaFitOptions& opts = {});
[[nodiscard]] ArmaFit fit_arma(const QuarterlySeries& series, const ArmaSpec& spec,
                               const std::optional<QuarterlySeries>& exog = std::nullopt,
                               const ArmaFitOptions& opts = {});

struct GridCell {
    ArmaSpec spec;
    std::optional<ArmaFit> fit;
    std::string error;
};

struct OrderSelection {
    ArmaSpec spec;
    ArmaFit fit;
    std::vector<GridCell> cells;
};

/// R in 0..4, M in 0..4.
[[nodiscard]] std::vector<std::pair<int, int>> default_order_grid();

/// Minimum-AIC converged fit; ties go to smaller R+M, then smaller R.
[[nodiscard]] OrderSelection select_order(std::span<const double> series,
                                          std::span<const double> exog,
                                          const std::vector<std::pair<int, int>>& grid,
                                          const ArmaFitOptions& opts = {});
[[nodiscard]] OrderSelection select_order(const QuarterlySeries& series,
                                          const std::optional<QuarterlySeries>& exog,
                                          const std::vector<std::pair<int, int>>& grid,
                                          const ArmaFitOptions& opts = {});

/// Innovations of `history` under the fitted coefficients (same conditioning as the fit).
[[nodiscard]] std::vector<double> arma_innovations(const ArmaFit& fit, std::span<const double> history,
                                                   std::span<const double> exog_history = {});

/// h-step forecasts from the end of `history`, future innovations set to zero.
/// ARMAX fits need `exog_history` aligned with `history` and at least h future exogenous values.
[[nodiscard]] std::vector<double> arma_forecast(const ArmaFit& fit, std::span<const double> history,
                                                std::span<const double> exog_history,
                                                std::span<const double> exog_future, int h);

/// MA(infinity) weights psi_0 .. psi_{count-1} of the ARMA polynomial pair.
[[nodiscard]] std::vector<double> psi_weights(std::span<const double> phi,
                                              std::span<const double> theta, int count);

/// 2 sigma half-widths of the 1..h step forecast errors.
[[nodiscard]] std::vector<double> forecast_bands(const ArmaFit& fit, int h);

}  // namespace hpiconv
