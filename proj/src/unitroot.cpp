#include "hpiconv/unitroot.hpp"

#include "hpiconv/error.hpp"
#include "hpiconv/format.hpp"
#include "hpiconv/io.hpp"
#include "hpiconv/parallel.hpp"
#include "hpiconv/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace hpiconv {

namespace {

std::size_t first_usable(int lags) { return static_cast<std::size_t>(std::max(lags, 1)) + 1; }

}  // namespace

std::vector<std::string> mtar_labels(int lags)
{
    std::vector<std::string> labels{"I*y[t-1]", "(1-I)*y[t-1]"};
    for (int j = 1; j <= lags; ++j) labels.push_back("dy[t-" + std::to_string(j) + "]");
    return labels;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd>
mtar_design_matrix(std::span<const double> y, int lags, std::vector<int>* indicator)
{
    if (lags < 0) throw DomainError("MTAR lag count must be non-negative");
    const std::size_t n = y.size();
    if (n < mtar_min_length(lags)) {
        throw InsufficientDataError("MTAR design with " + std::to_string(lags) +
                                    " lags needs at least " +
                                    std::to_string(mtar_min_length(lags)) +
                                    " observations, got " + std::to_string(n));
    }
    const std::size_t t0 = first_usable(lags);
    const auto rows = static_cast<Eigen::Index>(n - t0);
    Eigen::MatrixXd x(rows, lags + 2);
    Eigen::VectorXd dep(rows);
    if (indicator) indicator->assign(static_cast<std::size_t>(rows), 0);
    for (std::size_t t = t0; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - t0);
        const int ind = heaviside(y[t - 1] - y[t - 2]);
        dep(r) = y[t] - y[t - 1];
        x(r, 0) = ind ? y[t - 1] : 0.0;
        x(r, 1) = ind ? 0.0 : y[t - 1];
        for (int j = 1; j <= lags; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            x(r, j + 1) = y[t - uj] - y[t - uj - 1];
        }
        if (indicator) (*indicator)[static_cast<std::size_t>(r)] = ind;
    }
    return {std::move(x), std::move(dep)};
}

MtarDesign build_mtar_design(const DemeanedRatio& ratio, int lags)
{
    std::vector<int> ind;
    auto [x, dep] = mtar_design_matrix(ratio.series.values(), lags, &ind);
    const auto t0 = static_cast<int>(first_usable(lags));
    const auto& s = ratio.series;
    DateRange usable{s.start().plus(t0), s.end()};
    return {std::move(dep), DesignMatrix(std::move(x), mtar_labels(lags), true), std::move(ind),
            usable, lags};
}

// ------------------------------------------------------------ critical values

std::optional<double> CriticalValueRow::at(double quantile) const
{
    for (const auto& [q, v] : quantiles) {
        if (std::abs(q - quantile) < 1e-9) return v;
    }
    return std::nullopt;
}

CriticalValueTable published_critical_values()
{
    CriticalValueTable t;
    t.source = "published";
    t.lags = 4;
    t.rows = {{100, {{0.90, 3.81}, {0.95, 4.72}}}, {200, {{0.90, 3.69}, {0.95, 4.71}}}};
    return t;
}

InterpolatedValue interpolate_critical_value(const CriticalValueTable& table, double quantile,
                                             int n_obs)
{
    std::vector<std::pair<int, double>> pts;
    for (const auto& row : table.rows) {
        if (auto v = row.at(quantile)) pts.emplace_back(row.n_obs, *v);
    }
    if (pts.empty()) {
        throw DomainError("critical value table has no entry for quantile " +
                          format_double(quantile));
    }
    std::sort(pts.begin(), pts.end());
    if (n_obs <= pts.front().first) return {pts.front().second, n_obs < pts.front().first};
    if (n_obs >= pts.back().first) return {pts.back().second, n_obs > pts.back().first};
    for (std::size_t i = 1; i < pts.size(); ++i) {
        if (n_obs <= pts[i].first) {
            const auto [n0, v0] = pts[i - 1];
            const auto [n1, v1] = pts[i];
            const double w = static_cast<double>(n_obs - n0) / static_cast<double>(n1 - n0);
            return {v0 + w * (v1 - v0), false};
        }
    }
    return {pts.back().second, true};
}

double empirical_quantile(std::vector<double> data, double q)
{
    if (data.empty()) throw InsufficientDataError("empirical_quantile: no data");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile must lie in [0, 1]");
    const double h = q * static_cast<double>(data.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, data.size() - 1);
    std::nth_element(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(lo), data.end());
    const double a = data[lo];
    if (hi == lo) return a;
    const double b = *std::min_element(data.begin() + static_cast<std::ptrdiff_t>(lo) + 1, data.end());
    return a + (h - static_cast<double>(lo)) * (b - a);
}

double mtar_joint_f(const DesignMatrix& x, const Eigen::VectorXd& y, const OlsFit& fit)
{
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(2, x.cols());
    r(0, 0) = 1.0;
    r(1, 1) = 1.0;
    return f_test_restrictions(fit, x, y, r, Eigen::VectorXd::Zero(2)).statistic;
}

std::optional<double> MtarResult::critical_value(double confidence) const
{
    for (const auto& [c, v] : critical_values) {
        if (std::abs(c - confidence) < 1e-9) return v;
    }
    return std::nullopt;
}

MtarResult mtar_test(const DemeanedRatio& ratio, const CriticalValueTable& table, int lags)
{
    auto design = build_mtar_design(ratio, lags);
    MtarResult res;
    res.fit = ols_fit(design.regressors, design.dependent);
    res.lags = lags;
    res.f_statistic = mtar_joint_f(design.regressors, design.dependent, res.fit);
    const auto k = design.regressors.cols();
    res.overall_f = f_test_restrictions(res.fit, design.regressors, design.dependent,
                                        Eigen::MatrixXd::Identity(k, k), Eigen::VectorXd::Zero(k));
    res.n_obs = static_cast<int>(ratio.series.size());
    res.n_usable = static_cast<int>(design.dependent.size());
    res.ratio_mean = ratio.mean;
    res.sample = ratio.series.range();
    res.usable_range = design.usable_range;
    res.indicator = std::move(design.indicator);
    for (double conf : {0.90, 0.95}) {
        const auto cv = interpolate_critical_value(table, conf, res.n_obs);
        res.critical_values.emplace_back(conf, cv.value);
        res.critical_values_clamped = res.critical_values_clamped || cv.clamped;
    }
    res.reject_90 = res.f_statistic > res.critical_values[0].second;
    res.reject_95 = res.f_statistic > res.critical_values[1].second;
    return res;
}

// ------------------------------------------------------------------------ ADF

AdfResult adf_test(std::span<const double> x, int lags)
{
    if (lags < 0) throw DomainError("ADF lag count must be non-negative");
    const std::size_t n = x.size();
    const auto lu = static_cast<std::size_t>(lags);
    // rows t = lags+1 .. n-1; need rows > regressors (lags + 2)
    if (n < 2 * lu + 4) {
        throw InsufficientDataError("ADF with " + std::to_string(lags) + " lags needs at least " +
                                    std::to_string(2 * lu + 4) + " observations, got " +
                                    std::to_string(n));
    }
    const auto rows = static_cast<Eigen::Index>(n - lu - 1);
    Eigen::MatrixXd design(rows, lags + 2);
    Eigen::VectorXd dep(rows);
    for (std::size_t t = lu + 1; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - lu - 1);
        dep(r) = x[t] - x[t - 1];
        design(r, 0) = 1.0;
        design(r, 1) = x[t - 1];
        for (std::size_t j = 1; j <= lu; ++j) {
            design(r, static_cast<Eigen::Index>(j) + 1) = x[t - j] - x[t - j - 1];
        }
    }
    std::vector<std::string> labels{"mu", "x[t-1]"};
    for (int j = 1; j <= lags; ++j) labels.push_back("dx[t-" + std::to_string(j) + "]");

    AdfResult res;
    res.lags = lags;

    // Deterministic-trend screen: regress x on (1, t).
    Eigen::MatrixXd trend(static_cast<Eigen::Index>(n), 2);
    Eigen::VectorXd xv(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) {
        trend(static_cast<Eigen::Index>(t), 0) = 1.0;
        trend(static_cast<Eigen::Index>(t), 1) = static_cast<double>(t);
        xv(static_cast<Eigen::Index>(t)) = x[t];
    }
    const auto trend_fit = ols_fit(DesignMatrix(trend, {"const", "t"}), xv);
    res.trend_suspected = trend_fit.r2 > 0.95;
    if (res.trend_suspected) {
        res.diagnostics = "series is dominated by a linear trend (R2 " +
                          format_fixed(trend_fit.r2, 4) +
                          "); the intercept-only specification has no trend term";
    }

    const double dep_scale = std::max(dep.cwiseAbs().maxCoeff(), 1e-300);
    const bool constant_changes = (dep.array() - dep(0)).abs().maxCoeff() <= 1e-12 * dep_scale;
    if (constant_changes) {
        // exact linear trend: dx is constant and the regression fits perfectly
        res.fit = OlsFit{};
        res.fit.labels = labels;
        res.level_coefficient = 0.0;
        res.t_statistic = 0.0;
        res.trend_suspected = true;
        res.diagnostics = "first differences are constant (deterministic linear trend); "
                          "the intercept-only specification has no trend term";
        return res;
    }
    res.fit = ols_fit(DesignMatrix(std::move(design), std::move(labels)), dep);
    res.level_coefficient = res.fit.coefficients(1);
    res.t_statistic = res.fit.t_statistics(1);
    return res;
}

AdfResult adf_test(const QuarterlySeries& series, int lags) { return adf_test(series.values(), lags); }

// ----------------------------------------------------------------- simulation

namespace {

std::uint64_t stream_id(int n_obs, int replication)
{
    return (static_cast<std::uint64_t>(n_obs) << 32) | static_cast<std::uint32_t>(replication);
}

double simulate_one(int n_obs, std::uint64_t seed, int replication, int lags)
{
    RandomStream rng(seed, stream_id(n_obs, replication));
    std::vector<double> path(static_cast<std::size_t>(n_obs));
    double level = 0.0;
    for (auto& v : path) {
        level += rng.normal();
        v = level;
    }
    const double mean = std::accumulate(path.begin(), path.end(), 0.0) / n_obs;
    for (auto& v : path) v -= mean;
    auto [x, y] = mtar_design_matrix(path, lags);
    const DesignMatrix design(std::move(x), mtar_labels(lags), true);
    const auto fit = ols_fit(design, y);
    return mtar_joint_f(design, y, fit);
}

}  // namespace

std::vector<double> simulate_mtar_statistics(int n_obs, int replications, std::uint64_t seed,
                                             int lags, unsigned threads)
{
    if (replications < 1) throw DomainError("replications must be positive");
    if (n_obs < static_cast<int>(mtar_min_length(lags))) {
        throw InsufficientDataError("n_obs " + std::to_string(n_obs) + " too small for " +
                                    std::to_string(lags) + " lags");
    }
    std::vector<double> stats(static_cast<std::size_t>(replications));
    parallel_for(
        stats.size(),
        [&](std::size_t i) { stats[i] = simulate_one(n_obs, seed, static_cast<int>(i), lags); },
        threads);
    return stats;
}

CriticalValueTable simulate_critical_values(int n_obs, int replications, std::uint64_t seed,
                                            const std::vector<double>& quantiles, int lags,
                                            unsigned threads)
{
    return simulate_critical_values(std::vector<int>{n_obs}, replications, seed, quantiles, lags,
                                    threads);
}

CriticalValueTable simulate_critical_values(const std::vector<int>& n_obs, int replications,
                                            std::uint64_t seed,
                                            const std::vector<double>& quantiles, int lags,
                                            unsigned threads)
{
    if (quantiles.empty()) throw DomainError("no quantiles requested");
    for (double q : quantiles) {
        if (!(q > 0.0 && q < 1.0)) throw DomainError("quantiles must lie in (0, 1)");
    }
    std::vector<double> qs = quantiles;
    std::sort(qs.begin(), qs.end());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());
    std::vector<int> ns = n_obs;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

    CriticalValueTable table;
    table.seed = seed;
    table.replications = replications;
    table.lags = lags;
    for (int n : ns) {
        auto stats = simulate_mtar_statistics(n, replications, seed, lags, threads);
        std::sort(stats.begin(), stats.end());
        CriticalValueRow row{n, {}};
        for (double q : qs) row.quantiles.emplace_back(q, empirical_quantile(stats, q));
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::filesystem::path CriticalValueCache::path_for(int n_obs, int replications, std::uint64_t seed,
                                                   int lags) const
{
    return dir_ / ("phi-mu-star_n" + std::to_string(n_obs) + "_r" + std::to_string(replications) +
                   "_s" + std::to_string(seed) + "_l" + std::to_string(lags) + ".json");
}

CriticalValueTable CriticalValueCache::get(int n_obs, int replications, std::uint64_t seed,
                                           const std::vector<double>& quantiles, int lags) const
{
    const auto path = path_for(n_obs, replications, seed, lags);
    if (std::filesystem::exists(path)) {
        auto cached = read_critical_table(path);
        const bool complete =
            cached.rows.size() == 1 &&
            std::all_of(quantiles.begin(), quantiles.end(),
                        [&](double q) { return cached.rows.front().at(q).has_value(); });
        if (complete) return cached;
    }
    auto table = simulate_critical_values(n_obs, replications, seed, quantiles, lags);
    std::filesystem::create_directories(dir_);
    write_critical_table(path, table);
    return table;
}

}  // namespace hpiconv
