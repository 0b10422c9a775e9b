#pragma once

#include "hpiconv/arma.hpp"
#include "hpiconv/eval.hpp"
#include "hpiconv/forecast.hpp"
#include "hpiconv/linreg.hpp"
#include "hpiconv/series.hpp"
#include "hpiconv/unitroot.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hpiconv {

using Json = nlohmann::ordered_json;

[[nodiscard]] Json to_json(const CriticalValueTable& table);
[[nodiscard]] CriticalValueTable critical_table_from_json(const Json& j);
[[nodiscard]] CriticalValueTable read_critical_table(const std::filesystem::path& path);
void write_critical_table(const std::filesystem::path& path, const CriticalValueTable& table);

[[nodiscard]] Json to_json(const OlsFit& fit);
[[nodiscard]] Json to_json(const FTestResult& f);
[[nodiscard]] Json to_json(const Correlogram& c);
[[nodiscard]] Json to_json(const SeriesSummary& s);
[[nodiscard]] Json to_json(const MtarResult& r);
[[nodiscard]] Json to_json(const AdfResult& r);

[[nodiscard]] Json to_json(const ArmaFit& fit);
/// Restores a fit written by to_json; residuals and the optimizer trace are not stored.
[[nodiscard]] ArmaFit arma_fit_from_json(const Json& j);

[[nodiscard]] Json to_json(const MtarCoefficients& c);
[[nodiscard]] MtarCoefficients mtar_coefficients_from_json(const Json& j);

[[nodiscard]] Json to_json(const ForecastPanel& panel);
[[nodiscard]] ForecastPanel forecast_panel_from_json(const Json& j);
/// Columns: model, horizon, origin, target, predicted, realized, band.
void write_panels_csv(std::ostream& out, const std::vector<ForecastPanel>& panels);

[[nodiscard]] Json to_json(const RmsfeResult& r);
[[nodiscard]] Json to_json(const PairwiseWinner& w);
[[nodiscard]] Json to_json(const WinnerTable& t);
[[nodiscard]] Json to_json(const EncompassingResult& r);

[[nodiscard]] Json read_json(const std::filesystem::path& path);
/// Two-space indented dump with a trailing newline.
[[nodiscard]] std::string dump(const Json& j);

}  // namespace hpiconv
