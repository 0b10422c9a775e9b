#pragma once

#include "hpiconv/linreg.hpp"
#include "hpiconv/series.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hpiconv {

/// Momentum indicator: 1 when the previous change is non-negative (ties go to 1).
[[nodiscard]] constexpr int heaviside(double delta_prev) noexcept { return delta_prev >= 0.0 ? 1 : 0; }

/// Regression of dy_t on I_t y_{t-1}, (1 - I_t) y_{t-1} and dy_{t-1..t-lags}, no intercept.
struct MtarDesign {
    Eigen::VectorXd dependent;
    DesignMatrix regressors;
    std::vector<int> indicator;
    DateRange usable_range;
    int lags;
};

/// First usable row drops max(lags, 1) + 1 leading observations: one for the level
/// lag and max(lags, 1) differences (the indicator's dy_{t-1} is the first lag).
[[nodiscard]] MtarDesign build_mtar_design(const DemeanedRatio& ratio, int lags = 4);

/// Same design on an undated, already demeaned path (used by the simulation).
[[nodiscard]] std::pair<Eigen::MatrixXd, Eigen::VectorXd>
mtar_design_matrix(std::span<const double> demeaned, int lags, std::vector<int>* indicator = nullptr);

[[nodiscard]] std::vector<std::string> mtar_labels(int lags);

/// Minimum series length for which the MTAR design has more rows than regressors.
[[nodiscard]] constexpr std::size_t mtar_min_length(int lags) noexcept
{
    return static_cast<std::size_t>(lags + (lags > 1 ? lags : 1) + 4);
}

struct CriticalValueRow {
    int n_obs;
    std::vector<std::pair<double, double>> quantiles;  // (quantile, value), ascending

    [[nodiscard]] std::optional<double> at(double quantile) const;
};

struct CriticalValueTable {
    std::string statistic = "phi-mu-star";
    std::string source = "simulated";  // or "published"
    std::uint64_t seed = 0;
    int replications = 0;
    int lags = 4;
    std::vector<CriticalValueRow> rows;  // ascending n_obs
};

/// Φ*μ values for 100 and 200 observations at 90% and 95% as quoted with the reference results.
[[nodiscard]] CriticalValueTable published_critical_values();

struct InterpolatedValue {
    double value;
    bool clamped;  // n outside the table's n_obs range
};

/// Linear interpolation in n between the bracketing rows; clamps outside the table.
[[nodiscard]] InterpolatedValue interpolate_critical_value(const CriticalValueTable& table,
                                                           double quantile, int n_obs);

struct MtarResult {
    OlsFit fit;
    int lags = 4;
    double f_statistic = 0.0;
    FTestResult overall_f;  // all coefficients zero, standard F reference
    std::vector<std::pair<double, double>> critical_values;  // (confidence, value at n_obs)
    bool critical_values_clamped = false;
    bool reject_90 = false;
    bool reject_95 = false;
    int n_obs = 0;     // length of the demeaned series
    int n_usable = 0;  // regression rows
    double ratio_mean = 0.0;
    DateRange sample;
    DateRange usable_range;
    std::vector<int> indicator;

    [[nodiscard]] double beta(std::size_t j) const { return fit.coefficients(static_cast<Eigen::Index>(j)); }
    [[nodiscard]] std::optional<double> critical_value(double confidence) const;
};

/// Joint F statistic for beta_1 = beta_2 = 0 from an unrestricted MTAR fit.
[[nodiscard]] double mtar_joint_f(const DesignMatrix& x, const Eigen::VectorXd& y, const OlsFit& fit);

[[nodiscard]] MtarResult mtar_test(const DemeanedRatio& ratio, const CriticalValueTable& table,
                                   int lags = 4);

struct AdfResult {
    OlsFit fit;                 // intercept, level, lagged differences
    double level_coefficient;   // phi - 1
    double t_statistic;
    int lags;
    bool trend_suspected;       // series looks like a deterministic trend; no trend term is fitted
    std::string diagnostics;
};

/// ADF regression dx_t = mu + (phi-1) x_{t-1} + sum g_j dx_{t-j}. Critical values are not bundled.
[[nodiscard]] AdfResult adf_test(const QuarterlySeries& series, int lags);
[[nodiscard]] AdfResult adf_test(std::span<const double> series, int lags);

/// Φ*μ statistics of driftless Gaussian random walks of length n_obs, demeaned by their
/// full-sample mean. Replication i draws from RandomStream(seed, stream(n_obs, i)), so the
/// output is independent of the thread count.
[[nodiscard]] std::vector<double> simulate_mtar_statistics(int n_obs, int replications,
                                                           std::uint64_t seed, int lags = 4,
                                                           unsigned threads = 0);

[[nodiscard]] CriticalValueTable simulate_critical_values(int n_obs, int replications,
                                                          std::uint64_t seed,
                                                          const std::vector<double>& quantiles,
                                                          int lags = 4, unsigned threads = 0);

/// Multi-row table; rows are simulated independently with the same seed.
[[nodiscard]] CriticalValueTable simulate_critical_values(const std::vector<int>& n_obs,
                                                          int replications, std::uint64_t seed,
                                                          const std::vector<double>& quantiles,
                                                          int lags = 4, unsigned threads = 0);

/// Linear-interpolation (type 7) empirical quantile of unsorted data.
[[nodiscard]] double empirical_quantile(std::vector<double> data, double q);

/// Disk cache of simulated tables keyed by (statistic, n_obs, replications, seed, lags).
class CriticalValueCache {
public:
    explicit CriticalValueCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    [[nodiscard]] std::filesystem::path path_for(int n_obs, int replications, std::uint64_t seed,
                                                 int lags) const;
    /// Loads the cached row or simulates and stores it.
    [[nodiscard]] CriticalValueTable get(int n_obs, int replications, std::uint64_t seed,
                                         const std::vector<double>& quantiles, int lags = 4) const;

private:
    std::filesystem::path dir_;
};

}  // namespace hpiconv
