#include "hpiconv/forecast.hpp"

#include "hpiconv/error.hpp"

#include <algorithm>
#include <cmath>

namespace hpiconv {

void ForecastProtocol::validate() const
{
    if (!(train_end < sample_end)) {
        throw DomainError("forecast protocol: train_end " + train_end.to_string() +
                          " must precede sample_end " + sample_end.to_string());
    }
    if (horizons.empty()) throw DomainError("forecast protocol: no horizons");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] < 1) throw DomainError("forecast horizons must be positive");
        if (i > 0 && horizons[i] <= horizons[i - 1]) {
            throw DomainError("forecast horizons must be strictly increasing");
        }
    }
}

MtarCoefficients MtarCoefficients::from(const MtarResult& fit)
{
    MtarCoefficients c;
    c.beta.assign(fit.fit.coefficients.data(),
                  fit.fit.coefficients.data() + fit.fit.coefficients.size());
    c.sigma2 = fit.fit.sigma2;
    c.ratio_mean = fit.ratio_mean;
    return c;
}

MtarForecastPath mtar_dynamic_forecast(const MtarCoefficients& fit, std::span<const double> history,
                                       std::span<const double> national_future, int h)
{
    if (h < 1) throw DomainError("forecast horizon must be positive");
    const int lags = fit.lags();
    if (lags < 0) throw DomainError("MTAR coefficients need beta_1 and beta_2");
    const auto need = static_cast<std::size_t>(std::max(lags, 1)) + 1;
    if (history.size() < need) {
        throw InsufficientDataError("MTAR forecast needs " + std::to_string(need) +
                                    " observations of history, got " +
                                    std::to_string(history.size()));
    }
    if (national_future.size() < static_cast<std::size_t>(h)) {
        throw AlignmentError("MTAR forecast needs " + std::to_string(h) +
                             " future national growth values, got " +
                             std::to_string(national_future.size()));
    }

    // level of the ratio at T and the most recent changes, newest first
    double level = history.back();
    std::vector<double> changes;
    for (std::size_t j = 0; j < need - 1; ++j) {
        const std::size_t t = history.size() - 1 - j;
        changes.push_back(history[t] - history[t - 1]);
    }

    MtarForecastPath path;
    for (int k = 0; k < h; ++k) {
        const int ind = heaviside(changes.front());
        double d = (ind ? fit.beta[0] : fit.beta[1]) * level;
        for (int j = 1; j <= lags; ++j) d += fit.beta[static_cast<std::size_t>(j) + 1] * changes[static_cast<std::size_t>(j) - 1];
        level += d;
        changes.insert(changes.begin(), d);
        changes.pop_back();
        path.indicator.push_back(ind);
        path.ratio_change.push_back(d);
        path.ratio_level.push_back(level);
        path.regional_growth.push_back(d + national_future[static_cast<std::size_t>(k)]);
    }
    return path;
}

MtarForecastPath mtar_dynamic_forecast(const MtarResult& fit, const DemeanedRatio& history,
                                       std::span<const double> national_future, int h)
{
    auto coef = MtarCoefficients::from(fit);
    if (std::abs(history.mean - fit.ratio_mean) > 1e-12 * std::max(1.0, std::abs(fit.ratio_mean))) {
        // re-center the history on the mean the model was estimated with
        std::vector<double> v(history.series.values().begin(), history.series.values().end());
        for (auto& x : v) x += history.mean - fit.ratio_mean;
        return mtar_dynamic_forecast(coef, v, national_future, h);
    }
    return mtar_dynamic_forecast(coef, history.series.values(), national_future, h);
}

std::vector<double> mtar_forecast_bands(const MtarCoefficients& fit, std::span<const int> indicator)
{
    const std::size_t h = indicator.size();
    const int lags = fit.lags();
    std::vector<double> var(h, 0.0);
    // response of each step's ratio change to a unit shock at step `shock`
    for (std::size_t shock = 0; shock < h; ++shock) {
        double level = 0.0;
        std::vector<double> changes(static_cast<std::size_t>(std::max(lags, 1)), 0.0);
        for (std::size_t k = shock; k < h; ++k) {
            double d = (k == shock ? 1.0 : 0.0) + (indicator[k] ? fit.beta[0] : fit.beta[1]) * level;
            for (int j = 1; j <= lags; ++j) d += fit.beta[static_cast<std::size_t>(j) + 1] * changes[static_cast<std::size_t>(j) - 1];
            level += d;
            changes.insert(changes.begin(), d);
            changes.pop_back();
            var[k] += d * d;
        }
    }
    std::vector<double> bands(h);
    for (std::size_t k = 0; k < h; ++k) bands[k] = 2.0 * std::sqrt(fit.sigma2 * var[k]);
    return bands;
}

// ---------------------------------------------------------------- forecasters

namespace {

std::vector<double> values_between(const QuarterlySeries& s, QuarterDate first, QuarterDate last)
{
    const auto i0 = s.index_of(first);
    const auto i1 = s.index_of(last);
    if (!i0 || !i1) {
        throw DomainError("series '" + s.label() + "' has no data for " + first.to_string() +
                          ".." + last.to_string());
    }
    const auto v = s.values();
    return {v.begin() + static_cast<std::ptrdiff_t>(*i0), v.begin() + static_cast<std::ptrdiff_t>(*i1) + 1};
}

}  // namespace

ArmaForecaster::ArmaForecaster(std::string name, ArmaFit fit, QuarterlySeries regional_growth,
                               std::optional<QuarterlySeries> national_growth)
    : name_(std::move(name)), fit_(std::move(fit)), regional_(std::move(regional_growth)),
      national_(std::move(national_growth))
{
    if (fit_.beta_exog && !national_) {
        throw AlignmentError(name_ + ": exogenous model needs the national growth series");
    }
    if (national_ && fit_.beta_exog &&
        (national_->start() > regional_.start() || national_->end() < regional_.end())) {
        throw AlignmentError(name_ + ": national growth must cover the regional sample");
    }
}

std::vector<double> ArmaForecaster::forecast(QuarterDate origin, int h) const
{
    const auto history = values_between(regional_, regional_.start(), origin);
    std::vector<double> exog_hist;
    std::vector<double> exog_future;
    if (fit_.beta_exog) {
        exog_hist = values_between(*national_, regional_.start(), origin);
        const auto last = origin.plus(h);
        if (!national_->index_of(last)) {
            throw AlignmentError(name_ + ": no national growth value for " + last.to_string());
        }
        exog_future = values_between(*national_, origin.next(), last);
    }
    return arma_forecast(fit_, history, exog_hist, exog_future, h);
}

std::vector<double> ArmaForecaster::bands(QuarterDate, int h) const { return forecast_bands(fit_, h); }

MtarForecaster::MtarForecaster(std::string name, MtarCoefficients fit, QuarterlySeries regional_index,
                               QuarterlySeries national_index)
    : name_(std::move(name)), fit_(std::move(fit)),
      ratio_([&] {
          const auto first = std::max(regional_index.start(), national_index.start());
          const auto last = std::min(regional_index.end(), national_index.end());
          // national may extend past the regional data (scenario paths)
          AlignedPair pair(regional_index.slice(first, last), national_index.slice(first, last));
          auto y = log_ratio(pair);
          std::vector<double> v(y.values().begin(), y.values().end());
          for (auto& x : v) x -= fit_.ratio_mean;
          return QuarterlySeries(y.start(), std::move(v), regional_index.label(), SeriesKind::LogRatio);
      }()),
      national_growth_(hpa(national_index))
{
}

MtarForecastPath MtarForecaster::path(QuarterDate origin, int h) const
{
    const auto history = values_between(ratio_, ratio_.start(), origin);
    const auto last = origin.plus(h);
    if (!national_growth_.index_of(last)) {
        throw AlignmentError(name_ + ": no national growth value for " + last.to_string());
    }
    const auto nat = values_between(national_growth_, origin.next(), last);
    return mtar_dynamic_forecast(fit_, history, nat, h);
}

std::vector<double> MtarForecaster::forecast(QuarterDate origin, int h) const
{
    return path(origin, h).regional_growth;
}

std::vector<double> MtarForecaster::bands(QuarterDate origin, int h) const
{
    return mtar_forecast_bands(fit_, path(origin, h).indicator);
}

std::vector<ForecastPanel> rolling_forecasts(const Forecaster& model, const ForecastProtocol& protocol,
                                             const QuarterlySeries& realized)
{
    protocol.validate();
    std::vector<ForecastPanel> panels;
    for (int h : protocol.horizons) {
        ForecastPanel panel;
        panel.model_name = model.name();
        panel.horizon = h;
        for (auto origin = protocol.train_end; origin.plus(h) <= protocol.sample_end; origin = origin.next()) {
            const auto target = origin.plus(h);
            const auto preds = model.forecast(origin, h);
            const auto bands = model.bands(origin, h);
            panel.entries.push_back({origin, target, preds.back(), realized.at(target), bands.back()});
        }
        if (panel.entries.empty()) {
            panel.warning = "horizon " + std::to_string(h) + " exceeds the sample after " +
                            protocol.train_end.to_string() + "; no forecasts";
        }
        panels.push_back(std::move(panel));
    }
    return panels;
}

}  // namespace hpiconv
