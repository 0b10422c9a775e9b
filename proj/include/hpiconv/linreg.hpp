#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpiconv {

/// Regressor matrix with named columns. Requires more rows than columns and finite entries.
class DesignMatrix {
public:
    DesignMatrix(Eigen::MatrixXd x, std::vector<std::string> labels,
                 bool allow_zero_columns = false);

    [[nodiscard]] Eigen::Index rows() const noexcept { return x_.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return x_.cols(); }
    [[nodiscard]] const Eigen::MatrixXd& matrix() const noexcept { return x_; }
    [[nodiscard]] const std::vector<std::string>& labels() const noexcept { return labels_; }

private:
    Eigen::MatrixXd x_;
    std::vector<std::string> labels_;
};

struct OlsFit {
    std::vector<std::string> labels;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd t_statistics;
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    double rss = 0.0;
    double sigma2 = 0.0;  // rss / dof
    double r2 = 0.0;      // 1 - rss / centered tss
    double adjusted_r2 = 0.0;
    int dof = 0;
    bool has_intercept = false;
    Eigen::MatrixXd covariance;  // sigma2 (X'X)^{-1}
    Eigen::MatrixXd xtx_inverse;
};

struct FTestResult {
    double statistic = 0.0;
    int df_numerator = 0;
    int df_denominator = 0;
    double p_value = 1.0;
};

struct LagValue {
    int lag;
    double value;
};

/// Sample ACF or PACF with the +-1.96/sqrt(n) white-noise band.
struct Correlogram {
    std::vector<LagValue> values;
    double half_width = 0.0;
};

/// Relative residual norm below which a column counts as linearly dependent on its predecessors.
inline constexpr double kRankTolerance = 1e-10;

/// Least squares via Householder QR. Throws SingularityError naming the first dependent column.
[[nodiscard]] OlsFit ols_fit(const DesignMatrix& x, const Eigen::VectorXd& y);

/// F-test of R beta = r against the unrestricted fit `fit` of y on x.
[[nodiscard]] FTestResult f_test_restrictions(const OlsFit& fit, const DesignMatrix& x,
                                              const Eigen::VectorXd& y, const Eigen::MatrixXd& r_mat,
                                              const Eigen::VectorXd& r_vec);

[[nodiscard]] Correlogram acf(std::span<const double> series, int max_lag);
/// Durbin-Levinson recursion on the sample ACF; lags start at 1.
[[nodiscard]] Correlogram pacf(std::span<const double> series, int max_lag);

/// "*", "**", "***" for |t| >= 1, 2, 3 (1/2/3-sigma convention); empty otherwise.
[[nodiscard]] std::string_view significance_stars(double t_statistic) noexcept;

}  // namespace hpiconv
