#include "hpiconv/io.hpp"

#include "hpiconv/error.hpp"
#include "hpiconv/format.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hpiconv {

namespace {

// JSON has no inf/nan: non-finite numbers round-trip as strings.
Json number(double v)
{
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double read_number(const Json& j)
{
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ParseError("expected a number, got " + j.dump());
}

Json numbers(const std::vector<double>& v)
{
    Json a = Json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

std::vector<double> read_numbers(const Json& j)
{
    std::vector<double> v;
    for (const auto& x : j) v.push_back(read_number(x));
    return v;
}

Json range_json(const DateRange& r) { return {{"first", r.first.to_string()}, {"last", r.last.to_string()}}; }

}  // namespace

// ---------------------------------------------------------------- critical values

Json to_json(const CriticalValueTable& table)
{
    Json rows = Json::array();
    for (const auto& row : table.rows) {
        Json q = Json::object();
        for (const auto& [quantile, value] : row.quantiles) q[format_double(quantile)] = number(value);
        rows.push_back({{"n_obs", row.n_obs}, {"quantiles", q}});
    }
    return {{"statistic", table.statistic}, {"source", table.source},
            {"seed", table.seed},           {"replications", table.replications},
            {"lags", table.lags},           {"rows", rows}};
}

CriticalValueTable critical_table_from_json(const Json& j)
{
    try {
        CriticalValueTable t;
        t.statistic = j.at("statistic").get<std::string>();
        t.source = j.value("source", std::string("simulated"));
        t.seed = j.at("seed").get<std::uint64_t>();
        t.replications = j.at("replications").get<int>();
        t.lags = j.value("lags", 4);
        for (const auto& r : j.at("rows")) {
            CriticalValueRow row{r.at("n_obs").get<int>(), {}};
            for (const auto& [key, value] : r.at("quantiles").items()) {
                row.quantiles.emplace_back(std::stod(key), read_number(value));
            }
            std::sort(row.quantiles.begin(), row.quantiles.end());
            t.rows.push_back(std::move(row));
        }
        std::sort(t.rows.begin(), t.rows.end(),
                  [](const auto& a, const auto& b) { return a.n_obs < b.n_obs; });
        return t;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("critical value table: ") + e.what());
    }
}

Json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

CriticalValueTable read_critical_table(const std::filesystem::path& path)
{
    return critical_table_from_json(read_json(path));
}

void write_critical_table(const std::filesystem::path& path, const CriticalValueTable& table)
{
    // write next to the target and rename so readers never see a partial file
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write " + tmp.string());
        out << dump(to_json(table));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------- regression and tests

Json to_json(const OlsFit& fit)
{
    Json coef = Json::array();
    for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i) {
        const double t = fit.t_statistics(i);
        coef.push_back({{"label", fit.labels[static_cast<std::size_t>(i)]},
                        {"estimate", number(fit.coefficients(i))},
                        {"std_error", number(fit.standard_errors(i))},
                        {"t", number(t)},
                        {"stars", std::string(significance_stars(t))}});
    }
    return {{"coefficients", coef}, {"rss", number(fit.rss)},   {"sigma2", number(fit.sigma2)},
            {"r2", number(fit.r2)}, {"adjusted_r2", number(fit.adjusted_r2)},
            {"dof", fit.dof},       {"n", fit.residuals.size()}};
}

Json to_json(const FTestResult& f)
{
    return {{"statistic", number(f.statistic)}, {"df_numerator", f.df_numerator},
            {"df_denominator", f.df_denominator}, {"p_value", number(f.p_value)}};
}

Json to_json(const Correlogram& c)
{
    Json lags = Json::array();
    Json values = Json::array();
    for (const auto& v : c.values) {
        lags.push_back(v.lag);
        values.push_back(number(v.value));
    }
    return {{"lags", lags}, {"values", values}, {"band", number(c.half_width)}};
}

Json to_json(const SeriesSummary& s)
{
    return {{"count", s.count},
            {"min", number(s.min)},
            {"max", number(s.max)},
            {"last", number(s.last)},
            {"mean", number(s.mean)},
            {"median", number(s.median)},
            {"std_dev", number(s.std_dev)},
            {"skewness", number(s.skewness)},
            {"excess_kurtosis", number(s.excess_kurtosis)},
            {"degenerate", s.degenerate},
            {"moment_convention", std::string(kMomentConvention)}};
}

Json to_json(const MtarResult& r)
{
    Json cv = Json::array();
    for (const auto& [conf, value] : r.critical_values) {
        cv.push_back({{"confidence", conf}, {"value", number(value)}});
    }
    return {{"regression", to_json(r.fit)},
            {"lags", r.lags},
            {"f_statistic", number(r.f_statistic)},
            {"overall_f", to_json(r.overall_f)},
            {"critical_values", cv},
            {"critical_values_clamped", r.critical_values_clamped},
            {"reject_90", r.reject_90},
            {"reject_95", r.reject_95},
            {"n_obs", r.n_obs},
            {"n_usable", r.n_usable},
            {"ratio_mean", number(r.ratio_mean)},
            {"sample", range_json(r.sample)},
            {"usable_range", range_json(r.usable_range)}};
}

Json to_json(const AdfResult& r)
{
    return {{"regression", to_json(r.fit)},
            {"level_coefficient", number(r.level_coefficient)},
            {"t_statistic", number(r.t_statistic)},
            {"lags", r.lags},
            {"trend_suspected", r.trend_suspected},
            {"diagnostics", r.diagnostics}};
}

// ---------------------------------------------------------------- models

Json to_json(const ArmaFit& fit)
{
    Json j = {{"spec",
               {{"ar_order", fit.spec.ar_order},
                {"ma_order", fit.spec.ma_order},
                {"include_intercept", fit.spec.include_intercept},
                {"exogenous", fit.spec.exogenous},
                {"name", fit.spec.name()}}},
              {"intercept", number(fit.intercept)},
              {"phi", numbers(fit.phi)},
              {"theta", numbers(fit.theta)},
              {"beta_exog", fit.beta_exog ? number(*fit.beta_exog) : Json(nullptr)},
              {"sigma2", number(fit.sigma2)},
              {"loglik", number(fit.loglik)},
              {"aic", number(fit.aic)},
              {"n_obs", fit.n_obs},
              {"presample_mean", number(fit.presample_mean)},
              {"converged", fit.converged},
              {"warning", fit.warning},
              {"evaluations", fit.evaluations}};
    j["sample_window"] = fit.sample_window ? range_json(*fit.sample_window) : Json(nullptr);
    return j;
}

ArmaFit arma_fit_from_json(const Json& j)
{
    try {
        ArmaFit f;
        const auto& s = j.at("spec");
        f.spec.ar_order = s.at("ar_order").get<int>();
        f.spec.ma_order = s.at("ma_order").get<int>();
        f.spec.include_intercept = s.at("include_intercept").get<bool>();
        f.spec.exogenous = s.at("exogenous").get<bool>();
        f.spec.validate();
        f.intercept = read_number(j.at("intercept"));
        f.phi = read_numbers(j.at("phi"));
        f.theta = read_numbers(j.at("theta"));
        if (!j.at("beta_exog").is_null()) f.beta_exog = read_number(j.at("beta_exog"));
        f.sigma2 = read_number(j.at("sigma2"));
        f.loglik = read_number(j.at("loglik"));
        f.aic = read_number(j.at("aic"));
        f.n_obs = j.at("n_obs").get<int>();
        f.presample_mean = read_number(j.at("presample_mean"));
        f.converged = j.at("converged").get<bool>();
        f.warning = j.value("warning", std::string());
        f.evaluations = j.value("evaluations", 0);
        if (j.contains("sample_window") && !j["sample_window"].is_null()) {
            f.sample_window = DateRange{QuarterDate::parse(j["sample_window"].at("first").get<std::string>()),
                                        QuarterDate::parse(j["sample_window"].at("last").get<std::string>())};
        }
        if (static_cast<int>(f.phi.size()) != f.spec.ar_order ||
            static_cast<int>(f.theta.size()) != f.spec.ma_order ||
            f.beta_exog.has_value() != f.spec.exogenous) {
            throw ParseError("ARMA fit: coefficient counts do not match the spec");
        }
        return f;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("ARMA fit: ") + e.what());
    }
}

Json to_json(const MtarCoefficients& c)
{
    return {{"beta", numbers(c.beta)}, {"sigma2", number(c.sigma2)}, {"ratio_mean", number(c.ratio_mean)}};
}

MtarCoefficients mtar_coefficients_from_json(const Json& j)
{
    try {
        MtarCoefficients c;
        c.beta = read_numbers(j.at("beta"));
        c.sigma2 = read_number(j.at("sigma2"));
        c.ratio_mean = read_number(j.at("ratio_mean"));
        if (c.beta.size() < 2) throw ParseError("MTAR coefficients need at least two betas");
        return c;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("MTAR coefficients: ") + e.what());
    }
}

// ---------------------------------------------------------------- forecasts and evaluation

Json to_json(const ForecastPanel& panel)
{
    Json entries = Json::array();
    for (const auto& e : panel.entries) {
        entries.push_back({{"origin", e.origin.to_string()},
                           {"target", e.target.to_string()},
                           {"predicted", number(e.predicted)},
                           {"realized", number(e.realized)},
                           {"band", number(e.band)}});
    }
    Json j = {{"model", panel.model_name}, {"horizon", panel.horizon}, {"entries", entries}};
    if (!panel.warning.empty()) j["warning"] = panel.warning;
    return j;
}

ForecastPanel forecast_panel_from_json(const Json& j)
{
    try {
        ForecastPanel p;
        p.model_name = j.at("model").get<std::string>();
        p.horizon = j.at("horizon").get<int>();
        p.warning = j.value("warning", std::string());
        for (const auto& e : j.at("entries")) {
            p.entries.push_back({QuarterDate::parse(e.at("origin").get<std::string>()),
                                 QuarterDate::parse(e.at("target").get<std::string>()),
                                 read_number(e.at("predicted")), read_number(e.at("realized")),
                                 read_number(e.at("band"))});
        }
        return p;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("forecast panel: ") + e.what());
    }
}

void write_panels_csv(std::ostream& out, const std::vector<ForecastPanel>& panels)
{
    out << "model,horizon,origin,target,predicted,realized,band\n";
    for (const auto& p : panels) {
        for (const auto& e : p.entries) {
            out << p.model_name << ',' << p.horizon << ',' << e.origin.to_string() << ','
                << e.target.to_string() << ',' << format_double(e.predicted) << ','
                << format_double(e.realized) << ',' << format_double(e.band) << '\n';
        }
    }
}

Json to_json(const RmsfeResult& r)
{
    return {{"rmsfe", number(r.value)}, {"n", r.n}, {"bias", number(r.bias)},
            {"error_variance", number(r.error_variance)}};
}

Json to_json(const PairwiseWinner& w)
{
    return {{"first", w.first},
            {"second", w.second},
            {"horizons", w.horizons},
            {"rmsfe_first", numbers(w.rmsfe_first)},
            {"rmsfe_second", numbers(w.rmsfe_second)},
            {"horizon_winner", w.horizon_winner},
            {"winner", w.winner},
            {"rule", w.rule}};
}

Json to_json(const WinnerTable& t)
{
    Json scores = Json::array();
    for (const auto& s : t.scores) {
        scores.push_back({{"model", s.model}, {"horizons", s.horizons}, {"rmsfe", numbers(s.rmsfe)}});
    }
    Json pairs = Json::array();
    for (const auto& p : t.pairs) pairs.push_back(to_json(p));
    return {{"region", t.region}, {"scores", scores}, {"pairs", pairs}};
}

Json to_json(const EncompassingResult& r)
{
    Json j = {{"test1", to_json(r.test1)},
              {"test2", to_json(r.test2)},
              {"reject1", r.reject1},
              {"reject2", r.reject2},
              {"confidence", r.confidence},
              {"verdict", to_string(r.verdict)},
              {"collinear", r.collinear},
              {"caveats", r.caveats}};
    j["regression"] = r.regression ? to_json(*r.regression) : Json(nullptr);
    return j;
}

}  // namespace hpiconv
