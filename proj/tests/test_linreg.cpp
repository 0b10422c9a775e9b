#include "hpiconv/error.hpp"
#include "hpiconv/linreg.hpp"
#include "hpiconv/random.hpp"
#include "hpiconv/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <doctest.h>

#include <cmath>

using namespace hpiconv;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_design(RandomStream& rng, int n, int k, bool intercept = true)
{
    MatrixXd x(n, k);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) x(i, j) = (intercept && j == 0) ? 1.0 : rng.normal();
    }
    return x;
}

std::vector<std::string> labels(int k)
{
    std::vector<std::string> l;
    for (int j = 0; j < k; ++j) l.push_back("x" + std::to_string(j));
    return l;
}

VectorXd normal_vector(RandomStream& rng, int n)
{
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

// Restricted RSS by substitution: beta = b0 + N g with R b0 = r and R N = 0, then plain
// least squares of (y - X b0) on X N through the normal equations.
double restricted_rss_by_substitution(const MatrixXd& x, const VectorXd& y, const MatrixXd& r, const VectorXd& rv)
{
    Eigen::JacobiSVD<MatrixXd> svd(r, Eigen::ComputeFullV);
    const auto q = r.rows();
    const auto k = r.cols();
    const MatrixXd null = svd.matrixV().rightCols(k - q);
    const VectorXd b0 = r.transpose() * (r * r.transpose()).inverse() * rv;
    const VectorXd z = y - x * b0;
    if (null.cols() == 0) return z.squaredNorm();
    const MatrixXd w = x * null;
    const VectorXd g = (w.transpose() * w).inverse() * (w.transpose() * z);
    return (z - w * g).squaredNorm();
}

double f_sf_oracle(double f, double d1, double d2)
{
    return boost::math::cdf(boost::math::complement(boost::math::fisher_f(d1, d2), f));
}

}  // namespace

TEST_CASE("intercept-only fit")
{
    MatrixXd x = MatrixXd::Ones(3, 1);
    const auto fit = ols_fit(DesignMatrix(x, {"const"}), VectorXd::LinSpaced(3, 1, 3));
    CHECK(fit.coefficients(0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.residuals(0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(fit.residuals(1)) < 1e-14);
    CHECK(fit.residuals(2) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fit.rss == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fit.dof == 2);
    CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fit.has_intercept);
}

TEST_CASE("exact linear relation gives r2 = 1")
{
    RandomStream rng(1);
    const MatrixXd x = random_design(rng, 30, 3);
    const VectorXd y = x * Eigen::Vector3d(1.0, -2.0, 0.5);
    const auto fit = ols_fit(DesignMatrix(x, labels(3)), y);
    CHECK(fit.residuals.lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coefficients match the normal equations")
{
    RandomStream rng(2);
    for (int rep = 0; rep < 50; ++rep) {
        const MatrixXd x = random_design(rng, 200, 3);
        const VectorXd y = x * Eigen::Vector3d(0.3, 1.0, -0.7) + normal_vector(rng, 200);
        const auto fit = ols_fit(DesignMatrix(x, labels(3)), y);
        const MatrixXd xtx_inv = (x.transpose() * x).inverse();
        const VectorXd beta = xtx_inv * x.transpose() * y;
        CHECK((fit.coefficients - beta).lpNorm<Eigen::Infinity>() < 1e-9);
        const double s2 = (y - x * beta).squaredNorm() / 197.0;
        for (int j = 0; j < 3; ++j) {
            CHECK(fit.standard_errors(j) == doctest::Approx(std::sqrt(s2 * xtx_inv(j, j))).epsilon(1e-9));
        }
    }
}

TEST_CASE("fit invariants")
{
    RandomStream rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const MatrixXd x = random_design(rng, 80, 4);
        const VectorXd y = x * Eigen::Vector4d(1, 0.2, 0, -0.4) + normal_vector(rng, 80);
        const auto fit = ols_fit(DesignMatrix(x, labels(4)), y);
        const VectorXd ortho = x.transpose() * fit.residuals;
        for (int j = 0; j < 4; ++j) CHECK(std::abs(ortho(j)) <= 1e-8 * x.col(j).norm() * y.norm());
        CHECK(fit.r2 >= 0.0);
        CHECK(fit.r2 <= 1.0);
        CHECK(fit.adjusted_r2 <= fit.r2);
        CHECK((fit.covariance - fit.covariance.transpose()).norm() < 1e-14);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(fit.covariance);
        CHECK(es.eigenvalues().minCoeff() >= -1e-14);
    }
}

TEST_CASE("projection idempotence and scale equivariance")
{
    RandomStream rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const MatrixXd x = random_design(rng, 60, 3);
        const VectorXd y = x * Eigen::Vector3d(0.5, -1, 2) + normal_vector(rng, 60);
        const DesignMatrix d(x, labels(3));
        const auto fit = ols_fit(d, y);
        const auto refit = ols_fit(d, fit.fitted);
        CHECK((refit.coefficients - fit.coefficients).lpNorm<Eigen::Infinity>() < 1e-10);

        const double c = 3.7;
        const auto scaled = ols_fit(d, c * y);
        CHECK((scaled.coefficients - c * fit.coefficients).lpNorm<Eigen::Infinity>() < 1e-10 * c);
        CHECK((scaled.standard_errors - c * fit.standard_errors).lpNorm<Eigen::Infinity>() < 1e-10 * c);
        CHECK((scaled.residuals - c * fit.residuals).lpNorm<Eigen::Infinity>() < 1e-10 * c);
        CHECK((scaled.t_statistics - fit.t_statistics).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("rank deficiency names the dependent column")
{
    RandomStream rng(5);
    MatrixXd x = random_design(rng, 20, 3);
    x.col(2) = 2.0 * x.col(1) - x.col(0);
    try {
        (void)ols_fit(DesignMatrix(x, {"const", "a", "b"}), normal_vector(rng, 20));
        FAIL("expected singularity");
    } catch (const SingularityError& e) {
        CHECK(std::string(e.what()).find("'b'") != std::string::npos);
    }
}

TEST_CASE("design matrix preconditions")
{
    CHECK_THROWS_AS(DesignMatrix(MatrixXd::Ones(2, 2), labels(2)), Error);
    MatrixXd z = MatrixXd::Ones(5, 2);
    z.col(1).setZero();
    CHECK_THROWS_AS(DesignMatrix(z, labels(2)), Error);
    CHECK_NOTHROW(DesignMatrix(z, labels(2), true));
    z(0, 0) = NAN;
    CHECK_THROWS_AS(DesignMatrix(z, labels(2), true), Error);
}

TEST_CASE("incomplete beta and F tail against boost")
{
    for (double a : {0.5, 1.0, 1.5, 3.0, 10.0, 70.5}) {
        for (double b : {0.5, 2.0, 4.5, 30.0}) {
            for (double x : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-9}) {
                CHECK(std::abs(stats::incomplete_beta(a, b, x) - boost::math::ibeta(a, b, x)) < 1e-10);
            }
        }
    }
    for (double d1 : {1.0, 3.0, 6.0}) {
        for (double d2 : {5.0, 40.0, 135.0}) {
            for (double f : {0.0, 0.1, 1.0, 2.5, 4.7, 12.0, 80.0}) {
                CHECK(std::abs(stats::f_sf(f, d1, d2) - f_sf_oracle(f, d1, d2)) < 1e-10);
                CHECK(std::abs(stats::f_cdf(f, d1, d2) + stats::f_sf(f, d1, d2) - 1.0) < 1e-12);
            }
        }
    }
}

TEST_CASE("F test equals the restricted refit")
{
    RandomStream rng(6);
    for (int rep = 0; rep < 100; ++rep) {
        const MatrixXd x = random_design(rng, 50, 4);
        const VectorXd y = x * Eigen::Vector4d(0.1, 0.4, -0.3, 0.2) + normal_vector(rng, 50);
        const DesignMatrix d(x, labels(4));
        const auto fit = ols_fit(d, y);
        MatrixXd r = MatrixXd::Zero(2, 4);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 4; ++j) r(i, j) = rng.normal();
        }
        const VectorXd rv = normal_vector(rng, 2);
        const auto f = f_test_restrictions(fit, d, y, r, rv);
        const double rss_r = restricted_rss_by_substitution(x, y, r, rv);
        const double oracle = ((rss_r - fit.rss) / 2.0) / (fit.rss / 46.0);
        CHECK(f.statistic == doctest::Approx(oracle).epsilon(1e-8));
        CHECK(f.df_numerator == 2);
        CHECK(f.df_denominator == 46);
        CHECK(std::abs(f.p_value - f_sf_oracle(oracle, 2, 46)) < 1e-9);
        CHECK(f.p_value >= 0.0);
        CHECK(f.p_value <= 1.0);
    }
}

TEST_CASE("F test trivial cases")
{
    RandomStream rng(7);
    const MatrixXd x = random_design(rng, 100, 3);
    const VectorXd y = x * Eigen::Vector3d(1.0, 0.5, 0.0) + normal_vector(rng, 100);
    const DesignMatrix d(x, labels(3));
    const auto fit = ols_fit(d, y);

    const auto at_estimate = f_test_restrictions(fit, d, y, MatrixXd::Identity(3, 3), fit.coefficients);
    CHECK(std::abs(at_estimate.statistic) < 1e-10);
    CHECK(at_estimate.p_value == doctest::Approx(1.0));

    MatrixXd r(1, 3);
    r << 0, 0, 1;
    const auto null_true = f_test_restrictions(fit, d, y, r, VectorXd::Zero(1));
    CHECK(null_true.statistic >= 0.0);

    MatrixXd dependent(2, 3);
    dependent << 0, 1, 0, 0, 2, 0;
    CHECK_THROWS_AS((void)f_test_restrictions(fit, d, y, dependent, VectorXd::Zero(2)), Error);
}

TEST_CASE("F test size under a true restriction")
{
    RandomStream rng(8);
    int rejections = 0;
    const int reps = 2000;
    MatrixXd r = MatrixXd::Zero(2, 4);
    r(0, 2) = 1.0;
    r(1, 3) = 1.0;
    for (int rep = 0; rep < reps; ++rep) {
        const MatrixXd x = random_design(rng, 200, 4);
        const VectorXd y = x * Eigen::Vector4d(0.5, 1.0, 0.0, 0.0) + normal_vector(rng, 200);
        const DesignMatrix d(x, labels(4));
        const auto f = f_test_restrictions(ols_fit(d, y), d, y, r, VectorXd::Zero(2));
        if (f.p_value < 0.05) ++rejections;
    }
    const double rate = static_cast<double>(rejections) / reps;
    CHECK(std::abs(rate - 0.05) <= 0.02);
}

TEST_CASE("acf and pacf definitions")
{
    const std::vector<double> x{1, 3, 2, 5, 4, 6, 5, 8};
    const auto a = acf(x, 3);
    REQUIRE(a.values.size() == 4);
    CHECK(a.values[0].lag == 0);
    CHECK(a.values[0].value == 1.0);
    CHECK(a.half_width == doctest::Approx(1.96 / std::sqrt(8.0)));
    // hand computation around the mean 4.25
    double den = 0, num1 = 0;
    for (double v : x) den += (v - 4.25) * (v - 4.25);
    for (std::size_t t = 0; t + 1 < x.size(); ++t) num1 += (x[t] - 4.25) * (x[t + 1] - 4.25);
    CHECK(a.values[1].value == doctest::Approx(num1 / den).epsilon(1e-14));

    const auto p = pacf(x, 3);
    CHECK(p.values[0].lag == 1);
    CHECK(p.values[0].value == a.values[1].value);

    CHECK_THROWS_AS((void)acf(std::vector<double>{2, 2, 2, 2}, 2), DomainError);
}

TEST_CASE("pacf equals the last Yule-Walker coefficient")
{
    RandomStream rng(9);
    std::vector<double> x(300);
    double prev = 0;
    for (auto& v : x) v = prev = 0.5 * prev + rng.normal();
    const int m = 6;
    const auto a = acf(x, m);
    const auto p = pacf(x, m);
    for (int k = 1; k <= m; ++k) {
        MatrixXd toeplitz(k, k);
        VectorXd rhs(k);
        for (int i = 0; i < k; ++i) {
            rhs(i) = a.values[static_cast<std::size_t>(i) + 1].value;
            for (int j = 0; j < k; ++j) toeplitz(i, j) = a.values[static_cast<std::size_t>(std::abs(i - j))].value;
        }
        const VectorXd phi = toeplitz.lu().solve(rhs);
        CHECK(p.values[static_cast<std::size_t>(k) - 1].value == doctest::Approx(phi(k - 1)).epsilon(1e-10));
    }
}

TEST_CASE("correlograms of simulated processes")
{
    RandomStream rng(10);
    std::vector<double> noise(5000);
    for (auto& v : noise) v = rng.normal();
    const auto wn = acf(noise, 20);
    int inside = 0;
    for (int h = 1; h <= 20; ++h) inside += std::abs(wn.values[static_cast<std::size_t>(h)].value) < 3.0 / std::sqrt(5000.0);
    CHECK(inside >= 19);

    std::vector<double> ar(10000);
    double prev = 0;
    for (auto& v : ar) v = prev = 0.8 * prev + rng.normal();
    const auto a = acf(ar, 5);
    const auto p = pacf(ar, 5);
    CHECK(std::abs(a.values[1].value - 0.8) < 0.03);
    CHECK(std::abs(p.values[0].value - 0.8) < 0.03);
    for (int h = 2; h <= 5; ++h) CHECK(std::abs(p.values[static_cast<std::size_t>(h) - 1].value) < 0.05);

    std::vector<double> ma(10000);
    double e_prev = rng.normal();
    for (auto& v : ma) {
        const double e = rng.normal();
        v = e + 0.8 * e_prev;
        e_prev = e;
    }
    const auto pm = pacf(ma, 6);
    // gradual decay with alternating sign rather than a cut-off after lag 1
    CHECK(std::abs(pm.values[1].value) > 0.2);
    CHECK(std::abs(pm.values[2].value) > 0.1);
    CHECK(std::abs(pm.values[1].value) > std::abs(pm.values[3].value));
}

TEST_CASE("significance stars follow sigma thresholds")
{
    CHECK(significance_stars(0.99) == "");
    CHECK(significance_stars(1.0) == "*");
    CHECK(significance_stars(-2.5) == "**");
    CHECK(significance_stars(3.0) == "***");
}
