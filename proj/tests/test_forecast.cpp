#include "hpiconv/error.hpp"
#include "hpiconv/forecast.hpp"
#include "hpiconv/random.hpp"

#include <doctest.h>

#include <cmath>

using namespace hpiconv;

namespace {

const QuarterDate kStart{1976, 1};
const QuarterDate kTrainEnd{2008, 4};
const QuarterDate kSampleEnd{2012, 2};

QuarterlySeries index_path(RandomStream& rng, double drift, const std::string& label)
{
    std::vector<double> v(146);
    double x = std::log(100.0);
    for (auto& e : v) e = std::exp(x += drift + 0.01 * rng.normal());
    return {kStart, std::move(v), label, SeriesKind::IndexLevel};
}

MtarCoefficients coefficients(std::vector<double> beta, double sigma2 = 1e-4, double mean = 0.0)
{
    MtarCoefficients c;
    c.beta = std::move(beta);
    c.sigma2 = sigma2;
    c.ratio_mean = mean;
    return c;
}

ArmaFit ar1_fit(double c, double phi, double sigma2, bool exog = false, double beta = 0.0)
{
    ArmaFit f;
    f.spec = {1, 0, true, exog};
    f.intercept = c;
    f.phi = {phi};
    f.sigma2 = sigma2;
    if (exog) f.beta_exog = beta;
    return f;
}

// Forecaster that knows the realized path; rolling panels must reproduce it exactly.
class Oracle final : public Forecaster {
public:
    explicit Oracle(QuarterlySeries truth) : truth_(std::move(truth)) {}
    std::string name() const override { return "oracle"; }
    std::vector<double> forecast(QuarterDate origin, int h) const override
    {
        std::vector<double> v;
        for (int k = 1; k <= h; ++k) v.push_back(truth_.at(origin.plus(k)));
        return v;
    }
    std::vector<double> bands(QuarterDate, int h) const override { return std::vector<double>(static_cast<std::size_t>(h), 0.0); }

private:
    QuarterlySeries truth_;
};

}  // namespace

TEST_CASE("protocol validation")
{
    CHECK_NOTHROW(ForecastProtocol{kTrainEnd, kSampleEnd}.validate());
    CHECK_THROWS_AS(ForecastProtocol({kSampleEnd, kTrainEnd}).validate(), DomainError);
    CHECK_THROWS_AS(ForecastProtocol({kTrainEnd, kTrainEnd}).validate(), DomainError);
    CHECK_THROWS_AS(ForecastProtocol({kTrainEnd, kSampleEnd, {4, 1}}).validate(), DomainError);
    CHECK_THROWS_AS(ForecastProtocol({kTrainEnd, kSampleEnd, {0, 1}}).validate(), DomainError);
    CHECK_THROWS_AS(ForecastProtocol({kTrainEnd, kSampleEnd, {}}).validate(), DomainError);
}

TEST_CASE("zero coefficients forecast the national path")
{
    const std::vector<double> hist{0.1, 0.05, -0.02, 0.03, 0.04, 0.01};
    const std::vector<double> nat{0.01, 0.02, -0.005, 0.0};
    const auto p = mtar_dynamic_forecast(coefficients({0, 0, 0, 0, 0, 0}), hist, nat, 4);
    for (int k = 0; k < 4; ++k) {
        CHECK(p.ratio_change[static_cast<std::size_t>(k)] == 0.0);
        CHECK(p.regional_growth[static_cast<std::size_t>(k)] == nat[static_cast<std::size_t>(k)]);
        CHECK(p.ratio_level[static_cast<std::size_t>(k)] == 0.01);
    }
}

TEST_CASE("symmetric zero-lag recursion decays geometrically")
{
    const double b = -0.15;
    const double yt = 0.08;
    const std::vector<double> hist{0.05, yt};
    const std::vector<double> nat(10, 0.0);
    const auto p = mtar_dynamic_forecast(coefficients({b, b}), hist, nat, 10);
    for (int k = 1; k <= 10; ++k) {
        const double expect = b * std::pow(1.0 + b, k - 1) * yt;
        CHECK(std::abs(p.ratio_change[static_cast<std::size_t>(k) - 1] - expect) < 1e-14);
        CHECK(std::abs(p.ratio_level[static_cast<std::size_t>(k) - 1] - std::pow(1.0 + b, k) * yt) < 1e-14);
    }
    // a falling ratio decays towards zero, so every later step has a rising change
    CHECK(p.indicator[0] == 1);
    for (std::size_t k = 1; k < 10; ++k) CHECK(p.indicator[k] == 0);
}

TEST_CASE("one-step and two-step by hand")
{
    const auto c = coefficients({-0.1, -0.3, 0.2, 0.1});
    const std::vector<double> hist{0.00, 0.04, 0.01, 0.03};
    const std::vector<double> nat{0.005, 0.007};
    const auto p = mtar_dynamic_forecast(c, hist, nat, 2);
    // dy_T = 0.02 >= 0 so the first step uses beta_1; lags are dy_T = 0.02, dy_{T-1} = -0.03
    const double d1 = -0.1 * 0.03 + 0.2 * 0.02 + 0.1 * -0.03;
    CHECK(p.indicator[0] == 1);
    CHECK(std::abs(p.ratio_change[0] - d1) < 1e-15);
    CHECK(std::abs(p.regional_growth[0] - (d1 + 0.005)) < 1e-15);
    const double y1 = 0.03 + d1;
    const double d2 = (d1 >= 0 ? -0.1 : -0.3) * y1 + 0.2 * d1 + 0.1 * 0.02;
    CHECK(p.indicator[1] == (d1 >= 0 ? 1 : 0));
    CHECK(std::abs(p.ratio_change[1] - d2) < 1e-15);
}

TEST_CASE("dynamic forecast preconditions")
{
    const auto c = coefficients({-0.1, -0.1, 0.0, 0.0});
    CHECK_THROWS_AS((void)mtar_dynamic_forecast(c, std::vector<double>{0.1, 0.2}, std::vector<double>{0.0}, 1),
                    InsufficientDataError);
    CHECK_THROWS_AS((void)mtar_dynamic_forecast(c, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{0.0}, 2),
                    AlignmentError);
    CHECK_THROWS_AS((void)mtar_dynamic_forecast(c, std::vector<double>{0.1, 0.2, 0.3}, std::vector<double>{0.0}, 0),
                    DomainError);
}

TEST_CASE("mtar bands")
{
    const double b = -0.2;
    const auto c = coefficients({b, b}, 0.0004);
    const std::vector<int> ind(6, 1);
    const auto bands = mtar_forecast_bands(c, ind);
    CHECK(bands[0] == doctest::Approx(0.04).epsilon(1e-14));
    double var = 1.0;
    for (int k = 1; k < 6; ++k) {
        var += b * b * std::pow(1.0 + b, 2.0 * (k - 1));
        CHECK(bands[static_cast<std::size_t>(k)] == doctest::Approx(2.0 * std::sqrt(0.0004 * var)).epsilon(1e-12));
        CHECK(bands[static_cast<std::size_t>(k)] >= bands[static_cast<std::size_t>(k) - 1]);
    }

    RandomStream rng(1);
    for (int rep = 0; rep < 100; ++rep) {
        const auto cr = coefficients({-0.3 * rng.uniform(), -0.3 * rng.uniform(), 0.3 * rng.normal(), 0.3 * rng.normal()}, 0.01);
        std::vector<int> path(8);
        for (auto& i : path) i = rng.uniform() < 0.5;
        for (double w : mtar_forecast_bands(cr, path)) CHECK(w >= 0.2 - 1e-15);
    }
}

TEST_CASE("rolling origins and counts")
{
    RandomStream rng(2);
    const auto nat = index_path(rng, 0.01, "USA");
    const auto reg = index_path(rng, 0.01, "R");
    const auto growth = hpa(reg);
    const MtarForecaster model("MTAR", coefficients({-0.1, -0.2, 0.1, 0.0, 0.0, 0.0}, 1e-4), reg, nat);
    const auto panels = rolling_forecasts(model, ForecastProtocol{kTrainEnd, kSampleEnd}, growth);
    REQUIRE(panels.size() == 3);
    CHECK(panels[0].entries.size() == 14);
    CHECK(panels[1].entries.size() == 11);
    CHECK(panels[2].entries.size() == 7);
    CHECK(panels[2].entries.front().origin == QuarterDate(2008, 4));
    CHECK(panels[2].entries.front().target == QuarterDate(2010, 4));
    CHECK(panels[2].entries.back().target == kSampleEnd);
    for (const auto& p : panels) {
        CHECK(p.warning.empty());
        for (const auto& e : p.entries) {
            CHECK(e.target == e.origin.plus(p.horizon));
            CHECK(e.realized == growth.at(e.target));
            CHECK(std::isfinite(e.predicted));
            CHECK(e.band > 0.0);
        }
    }
}

TEST_CASE("perfect oracle reproduces realized values")
{
    RandomStream rng(3);
    const auto growth = hpa(index_path(rng, 0.0, "R"));
    for (const auto& p : rolling_forecasts(Oracle(growth), ForecastProtocol{kTrainEnd, kSampleEnd}, growth)) {
        for (const auto& e : p.entries) CHECK(e.predicted == e.realized);
    }
}

TEST_CASE("short evaluation windows produce warnings")
{
    RandomStream rng(4);
    const auto growth = hpa(index_path(rng, 0.0, "R"));
    const auto panels = rolling_forecasts(Oracle(growth), ForecastProtocol{{2011, 4}, kSampleEnd, {1, 4}}, growth);
    CHECK(panels[0].entries.size() == 2);
    CHECK(panels[1].entries.empty());
    CHECK_FALSE(panels[1].warning.empty());
}

TEST_CASE("forecasts do not look past the origin")
{
    RandomStream rng(5);
    const auto nat = index_path(rng, 0.01, "USA");
    const auto reg = index_path(rng, 0.012, "R");
    auto altered = std::vector<double>(reg.values().begin(), reg.values().end());
    const auto origin_idx = static_cast<std::size_t>(kTrainEnd.quarters_since(kStart));
    for (std::size_t i = origin_idx + 1; i < altered.size(); ++i) altered[i] *= 1.3;
    const QuarterlySeries reg2(kStart, altered, "R", SeriesKind::IndexLevel);

    const auto coefs = coefficients({-0.1, -0.05, 0.2, 0.1, 0.0, -0.1}, 1e-4, 0.02);
    const MtarForecaster m1("MTAR", coefs, reg, nat);
    const MtarForecaster m2("MTAR", coefs, reg2, nat);
    CHECK(m1.forecast(kTrainEnd, 8) == m2.forecast(kTrainEnd, 8));
    CHECK(m1.bands(kTrainEnd, 8) == m2.bands(kTrainEnd, 8));

    const ArmaForecaster a1("ARMAX", ar1_fit(0.001, 0.5, 1e-4, true, 0.8), hpa(reg), hpa(nat));
    const ArmaForecaster a2("ARMAX", ar1_fit(0.001, 0.5, 1e-4, true, 0.8), hpa(reg2), hpa(nat));
    CHECK(a1.forecast(kTrainEnd, 8) == a2.forecast(kTrainEnd, 8));
    CHECK(m1.forecast(kTrainEnd, 4) != m1.forecast(kTrainEnd.next(), 4));
}

TEST_CASE("arma forecaster closed form and bands")
{
    RandomStream rng(6);
    const auto nat = hpa(index_path(rng, 0.01, "USA"));
    const auto reg = hpa(index_path(rng, 0.01, "R"));
    const ArmaForecaster ar("ARMA", ar1_fit(0.004, 0.6, 4e-4), reg);
    const auto f = ar.forecast(kTrainEnd, 8);
    const double last = reg.at(kTrainEnd);
    for (int h = 1; h <= 8; ++h) {
        const double ph = std::pow(0.6, h);
        CHECK(std::abs(f[static_cast<std::size_t>(h) - 1] - (0.004 * (1 - ph) / 0.4 + ph * last)) < 1e-12);
    }
    const auto bands = ar.bands(kTrainEnd, 8);
    CHECK(bands[0] == doctest::Approx(2.0 * std::sqrt(4e-4)).epsilon(1e-14));
    for (std::size_t k = 1; k < 8; ++k) CHECK(bands[k] >= bands[k - 1]);

    ArmaFit white;
    white.spec = {0, 0, true, false};
    white.intercept = 0.003;
    white.sigma2 = 1e-4;
    const ArmaForecaster mean_only("ARMA", white, reg);
    for (double b : mean_only.bands(kTrainEnd, 8)) CHECK(b == doctest::Approx(0.02).epsilon(1e-14));
    for (double v : mean_only.forecast(kTrainEnd, 8)) CHECK(v == 0.003);

    const ArmaForecaster armax("ARMAX", ar1_fit(0.0, 0.0, 1e-4, true, 1.0), reg, nat);
    const auto fx = armax.forecast(kTrainEnd, 3);
    for (int k = 1; k <= 3; ++k) CHECK(std::abs(fx[static_cast<std::size_t>(k) - 1] - nat.at(kTrainEnd.plus(k))) < 1e-15);
    CHECK_THROWS_AS(ArmaForecaster("ARMAX", ar1_fit(0.0, 0.0, 1e-4, true, 1.0), reg), AlignmentError);
    CHECK_THROWS_AS((void)armax.forecast(kSampleEnd, 1), AlignmentError);
}

TEST_CASE("fitted mtar forecasts use the training mean")
{
    RandomStream rng(7);
    const auto nat = index_path(rng, 0.01, "USA");
    const auto reg = index_path(rng, 0.01, "R");
    const auto ratio = log_ratio(AlignedPair(reg, nat));
    const auto train = demean(ratio, DateRange{kStart, kTrainEnd});
    const auto fit = mtar_test(train, published_critical_values(), 4);
    const auto coefs = MtarCoefficients::from(fit);
    CHECK(coefs.lags() == 4);
    CHECK(coefs.ratio_mean == train.mean);

    const MtarForecaster model("MTAR", coefs, reg, nat);
    const auto from_class = model.path(kTrainEnd, 4);
    const auto hist = train.series.slice(kStart, kTrainEnd);
    const auto nat_growth = hpa(nat);
    std::vector<double> future;
    for (int k = 1; k <= 4; ++k) future.push_back(nat_growth.at(kTrainEnd.plus(k)));
    const auto direct = mtar_dynamic_forecast(coefs, hist.values(), future, 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(from_class.regional_growth[k] - direct.regional_growth[k]) < 1e-14);

    // the same history demeaned differently is re-centred on the fit's mean
    const auto full = demean(ratio.slice(kStart, kTrainEnd));
    const auto recentred = mtar_dynamic_forecast(fit, full, future, 4);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(recentred.regional_growth[k] - direct.regional_growth[k]) < 1e-12);
}
