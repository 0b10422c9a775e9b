#pragma once

#include "hpiconv/arma.hpp"
#include "hpiconv/series.hpp"
#include "hpiconv/unitroot.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hpiconv {

struct ForecastProtocol {
    QuarterDate train_end;
    QuarterDate sample_end;
    std::vector<int> horizons{1, 4, 8};

    void validate() const;
};

struct ForecastEntry {
    QuarterDate origin;
    QuarterDate target;
    double predicted;
    double realized;
    double band;  // 2 sigma half-width
};

struct ForecastPanel {
    std::string model_name;
    int horizon = 1;
    std::vector<ForecastEntry> entries;
    std::string warning;
};

/// MTAR coefficients needed to run the forward recursion.
struct MtarCoefficients {
    std::vector<double> beta;  // beta_1, beta_2, then one per lagged difference
    double sigma2 = 0.0;
    double ratio_mean = 0.0;   // mean removed from the log ratio before fitting

    [[nodiscard]] int lags() const noexcept { return static_cast<int>(beta.size()) - 2; }
    [[nodiscard]] static MtarCoefficients from(const MtarResult& fit);
};

struct MtarForecastPath {
    std::vector<double> ratio_change;     // forecast dy_{T+k}
    std::vector<double> ratio_level;      // forecast demeaned y_{T+k}
    std::vector<int> indicator;           // I_{T+k} used at each step
    std::vector<double> regional_growth;  // ratio_change + national growth
};

/// Iterates the MTAR equation forward from the end of `history` (demeaned ratio up to T),
/// feeding forecasts back as lags; regional growth = forecast ratio change + national growth.
[[nodiscard]] MtarForecastPath mtar_dynamic_forecast(const MtarCoefficients& fit,
                                                     std::span<const double> history,
                                                     std::span<const double> national_growth_future,
                                                     int h);
[[nodiscard]] MtarForecastPath mtar_dynamic_forecast(const MtarResult& fit,
                                                     const DemeanedRatio& history,
                                                     std::span<const double> national_growth_future,
                                                     int h);

/// 2 sigma half-widths from the recursion linearized around a fixed indicator path.
/// Approximate: the true multi-step error distribution depends on the indicator switching.
[[nodiscard]] std::vector<double> mtar_forecast_bands(const MtarCoefficients& fit,
                                                      std::span<const int> indicator_path);

/// A model fitted once and able to forecast regional growth from any origin.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    [[nodiscard]] virtual std::string name() const = 0;
    /// Regional growth forecasts for origin+1 .. origin+h.
    [[nodiscard]] virtual std::vector<double> forecast(QuarterDate origin, int h) const = 0;
    /// 2 sigma half-widths for steps 1 .. h from `origin`.
    [[nodiscard]] virtual std::vector<double> bands(QuarterDate origin, int h) const = 0;
};

/// ARMA or ARMAX forecaster. Innovations at each origin are rebuilt over the actual
/// regional history up to the origin; ARMAX uses the national path beyond it.
class ArmaForecaster final : public Forecaster {
public:
    ArmaForecaster(std::string name, ArmaFit fit, QuarterlySeries regional_growth,
                   std::optional<QuarterlySeries> national_growth = std::nullopt);

    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] std::vector<double> forecast(QuarterDate origin, int h) const override;
    [[nodiscard]] std::vector<double> bands(QuarterDate origin, int h) const override;
    [[nodiscard]] const ArmaFit& fit() const noexcept { return fit_; }

private:
    std::string name_;
    ArmaFit fit_;
    QuarterlySeries regional_;
    std::optional<QuarterlySeries> national_;
};

/// MTAR forecaster over index levels. The log ratio is demeaned with the fit's
/// (training-sample) mean so no information past the training end enters.
class MtarForecaster final : public Forecaster {
public:
    MtarForecaster(std::string name, MtarCoefficients fit, QuarterlySeries regional_index,
                   QuarterlySeries national_index);

    [[nodiscard]] std::string name() const override { return name_; }
    [[nodiscard]] std::vector<double> forecast(QuarterDate origin, int h) const override;
    [[nodiscard]] std::vector<double> bands(QuarterDate origin, int h) const override;
    [[nodiscard]] MtarForecastPath path(QuarterDate origin, int h) const;

private:
    std::string name_;
    MtarCoefficients fit_;
    QuarterlySeries ratio_;           // demeaned with fit_.ratio_mean
    QuarterlySeries national_growth_;
};

/// One panel per protocol horizon. Origins run from train_end while origin + h <= sample_end.
[[nodiscard]] std::vector<ForecastPanel> rolling_forecasts(const Forecaster& model,
                                                           const ForecastProtocol& protocol,
                                                           const QuarterlySeries& realized_growth);

}  // namespace hpiconv
