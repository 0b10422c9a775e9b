#include "hpiconv/linreg.hpp"

#include "hpiconv/error.hpp"
#include "hpiconv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hpiconv {

DesignMatrix::DesignMatrix(Eigen::MatrixXd x, std::vector<std::string> labels,
                           bool allow_zero_columns)
    : x_(std::move(x)), labels_(std::move(labels))
{
    if (labels_.size() != static_cast<std::size_t>(x_.cols())) {
        throw Error("design matrix: " + std::to_string(labels_.size()) + " labels for " +
                    std::to_string(x_.cols()) + " columns");
    }
    if (x_.cols() == 0) throw Error("design matrix has no columns");
    if (x_.rows() <= x_.cols()) {
        throw InsufficientDataError("design matrix needs more rows than columns (n=" +
                                    std::to_string(x_.rows()) +
                                    ", k=" + std::to_string(x_.cols()) + ")");
    }
    if (!x_.allFinite()) throw DomainError("design matrix has non-finite entries");
    if (!allow_zero_columns) {
        for (Eigen::Index j = 0; j < x_.cols(); ++j) {
            if (x_.col(j).isZero(0.0)) {
                throw SingularityError("design column '" + labels_[static_cast<std::size_t>(j)] +
                                       "' is identically zero");
            }
        }
    }
}

OlsFit ols_fit(const DesignMatrix& design, const Eigen::VectorXd& y)
{
    const auto& x = design.matrix();
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (y.size() != n) {
        throw AlignmentError("ols_fit: y has " + std::to_string(y.size()) + " rows, X has " +
                             std::to_string(n));
    }
    if (!y.allFinite()) throw DomainError("ols_fit: non-finite response");

    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    const Eigen::MatrixXd& packed = qr.matrixQR();
    // |R_jj| is the norm of column j after projecting out columns 0..j-1.
    for (Eigen::Index j = 0; j < k; ++j) {
        const double norm = x.col(j).norm();
        if (norm == 0.0 || std::abs(packed(j, j)) < kRankTolerance * norm) {
            throw SingularityError("design column '" + design.labels()[static_cast<std::size_t>(j)] +
                                   "' is linearly dependent on preceding columns");
        }
    }
    const Eigen::MatrixXd r = packed.topLeftCorner(k, k).triangularView<Eigen::Upper>();
    const Eigen::VectorXd qty = (qr.householderQ().transpose() * y).head(k);

    OlsFit fit;
    fit.labels = design.labels();
    const auto upper = r.triangularView<Eigen::Upper>();
    fit.coefficients = upper.solve(qty);
    fit.fitted = x * fit.coefficients;
    fit.residuals = y - fit.fitted;
    fit.rss = fit.residuals.squaredNorm();
    fit.dof = static_cast<int>(n - k);
    fit.sigma2 = fit.rss / fit.dof;

    const Eigen::MatrixXd r_inv = upper.solve(Eigen::MatrixXd::Identity(k, k));
    fit.xtx_inverse = r_inv * r_inv.transpose();
    fit.covariance = fit.sigma2 * fit.xtx_inverse;
    fit.standard_errors = fit.covariance.diagonal().cwiseSqrt();
    fit.t_statistics = fit.coefficients.cwiseQuotient(fit.standard_errors);

    for (Eigen::Index j = 0; j < k && !fit.has_intercept; ++j) {
        const double c0 = x(0, j);
        fit.has_intercept = c0 != 0.0 && (x.col(j).array() == c0).all();
    }
    const double tss = (y.array() - y.mean()).square().sum();
    if (tss > 0.0) {
        fit.r2 = 1.0 - fit.rss / tss;
    } else {
        fit.r2 = fit.rss == 0.0 ? 1.0 : 0.0;
    }
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    fit.adjusted_r2 = 1.0 - (1.0 - fit.r2) * (nd - 1.0) / (nd - kd);
    return fit;
}

FTestResult f_test_restrictions(const OlsFit& fit, const DesignMatrix& design,
                                const Eigen::VectorXd& y, const Eigen::MatrixXd& r_mat,
                                const Eigen::VectorXd& r_vec)
{
    const Eigen::Index k = design.cols();
    const Eigen::Index q = r_mat.rows();
    if (q < 1) throw Error("f_test_restrictions: need at least one restriction");
    if (r_mat.cols() != k || r_vec.size() != q || fit.coefficients.size() != k) {
        throw AlignmentError("f_test_restrictions: restriction shape does not match the model");
    }
    if (q > k) throw Error("f_test_restrictions: more restrictions than coefficients");
    const Eigen::FullPivHouseholderQR<Eigen::MatrixXd> rank_check(r_mat.transpose());
    if (rank_check.rank() < q) {
        throw SingularityError("f_test_restrictions: restriction rows are linearly dependent");
    }

    // Restricted estimator: b_r = b - U R' (R U R')^{-1} (R b - r), U = (X'X)^{-1}.
    const Eigen::VectorXd discrepancy = r_mat * fit.coefficients - r_vec;
    const Eigen::MatrixXd ur = fit.xtx_inverse * r_mat.transpose();
    const Eigen::MatrixXd middle = r_mat * ur;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(middle);
    if (ldlt.info() != Eigen::Success) {
        throw SingularityError("f_test_restrictions: restriction system is infeasible");
    }
    const Eigen::VectorXd beta_r = fit.coefficients - ur * ldlt.solve(discrepancy);
    const double rss_r = (y - design.matrix() * beta_r).squaredNorm();
    const double rss_u = fit.rss;

    FTestResult res;
    res.df_numerator = static_cast<int>(q);
    res.df_denominator = fit.dof;
    const double extra = std::max(0.0, rss_r - rss_u);
    const double scale = std::max(y.squaredNorm(), std::numeric_limits<double>::min());
    if (rss_u <= 1e-26 * scale) {
        // exact fit: the restriction either holds to rounding or is violated outright
        const bool holds = extra <= 1e-20 * scale;
        res.statistic = holds ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        res.statistic = (extra / static_cast<double>(q)) / (rss_u / fit.dof);
    }
    res.p_value = stats::f_sf(res.statistic, res.df_numerator, res.df_denominator);
    return res;
}

namespace {

std::vector<double> sample_acf(std::span<const double> x, int max_lag)
{
    const auto n = x.size();
    if (max_lag < 0 || static_cast<std::size_t>(max_lag) >= n) {
        throw InsufficientDataError("acf: max_lag " + std::to_string(max_lag) +
                                    " must be below series length " + std::to_string(n));
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double denom = 0.0;
    for (double v : x) denom += (v - mean) * (v - mean);
    if (!(denom > 1e-300) || denom <= 1e-28 * mean * mean * static_cast<double>(n)) {
        throw DomainError("acf: zero-variance series");
    }
    std::vector<double> rho(static_cast<std::size_t>(max_lag) + 1);
    rho[0] = 1.0;
    for (int h = 1; h <= max_lag; ++h) {
        double s = 0.0;
        for (std::size_t t = 0; t + static_cast<std::size_t>(h) < n; ++t) {
            s += (x[t] - mean) * (x[t + static_cast<std::size_t>(h)] - mean);
        }
        rho[static_cast<std::size_t>(h)] = s / denom;
    }
    return rho;
}

}  // namespace

Correlogram acf(std::span<const double> series, int max_lag)
{
    const auto rho = sample_acf(series, max_lag);
    Correlogram c;
    c.half_width = 1.96 / std::sqrt(static_cast<double>(series.size()));
    for (int h = 0; h <= max_lag; ++h) c.values.push_back({h, rho[static_cast<std::size_t>(h)]});
    return c;
}

Correlogram pacf(std::span<const double> series, int max_lag)
{
    const auto rho = sample_acf(series, max_lag);
    Correlogram c;
    c.half_width = 1.96 / std::sqrt(static_cast<double>(series.size()));
    if (max_lag < 1) return c;

    const auto m = static_cast<std::size_t>(max_lag);
    std::vector<double> phi(m + 1, 0.0);
    std::vector<double> prev(m + 1, 0.0);
    phi[1] = rho[1];
    c.values.push_back({1, rho[1]});
    for (std::size_t k = 2; k <= m; ++k) {
        prev = phi;
        double num = rho[k];
        double den = 1.0;
        for (std::size_t j = 1; j < k; ++j) {
            num -= prev[j] * rho[k - j];
            den -= prev[j] * rho[j];
        }
        const double pkk = num / den;
        for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - pkk * prev[k - j];
        phi[k] = pkk;
        c.values.push_back({static_cast<int>(k), pkk});
    }
    return c;
}

std::string_view significance_stars(double t) noexcept
{
    const double a = std::abs(t);
    if (a >= 3.0) return "***";
    if (a >= 2.0) return "**";
    if (a >= 1.0) return "*";
    return "";
}

}  // namespace hpiconv
