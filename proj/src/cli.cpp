#include "hpiconv/cli.hpp"

#include "hpiconv/arma.hpp"
#include "hpiconv/error.hpp"
#include "hpiconv/eval.hpp"
#include "hpiconv/forecast.hpp"
#include "hpiconv/format.hpp"
#include "hpiconv/io.hpp"
#include "hpiconv/series.hpp"
#include "hpiconv/svg.hpp"
#include "hpiconv/synth.hpp"
#include "hpiconv/unitroot.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#ifndef HPICONV_VERSION
#define HPICONV_VERSION "0.0.0"
#endif

namespace hpiconv {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string hex64(std::uint64_t v)
{
    std::ostringstream o;
    o << std::hex << std::setw(16) << std::setfill('0') << v;
    return o.str();
}

template <class T>
std::string join(const std::vector<T>& v, std::string_view sep = ",")
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        if constexpr (std::is_same_v<T, double>) {
            out += format_double(v[i]);
        } else if constexpr (std::is_same_v<T, std::string>) {
            out += v[i];
        } else {
            out += std::to_string(v[i]);
        }
    }
    return out;
}

class UsageError : public Error {
public:
    using Error::Error;
};

class StageError : public Error {
public:
    StageError(const std::string& stage, const std::string& message)
        : Error("[" + stage + "] " + message)
    {
    }
};

template <class F>
decltype(auto) stage(const std::string& name, F&& f)
{
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

template <class F>
decltype(auto) for_region(const std::string& region, F&& f)
{
    try {
        return f();
    } catch (const std::exception& e) {
        throw Error("region " + region + ": " + e.what());
    }
}

}  // namespace

// ---------------------------------------------------------------- RunConfig

void RunConfig::validate() const
{
    if (horizons.empty()) throw UsageError("--horizons must list at least one horizon");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] < 1) throw UsageError("--horizons must be positive");
        if (i && horizons[i] <= horizons[i - 1]) throw UsageError("--horizons must be strictly increasing");
    }
    if (replications < 1000) throw UsageError("--reps must be at least 1000");
    if (lags < 0 || lags > 12) throw UsageError("--lags must lie in 0..12");
    if (ar_max < 0 || ma_max < 0 || ar_max > 8 || ma_max > 8) {
        throw UsageError("--ar-max and --ma-max must lie in 0..8");
    }
    if (!(encompassing_confidence > 0.0 && encompassing_confidence < 1.0)) {
        throw UsageError("--confidence must lie in (0, 1)");
    }
    for (int n : critval_n) {
        if (n < static_cast<int>(mtar_min_length(lags))) {
            throw UsageError("--n " + std::to_string(n) + " is too short for " + std::to_string(lags) + " lags");
        }
    }
    for (const auto& f : formats) {
        if (f != "csv" && f != "json" && f != "svg") {
            throw UsageError("--format accepts csv, json and svg, got '" + f + "'");
        }
    }
    try {
        (void)QuarterDate::parse(train_end);
        if (!sample_end.empty()) (void)QuarterDate::parse(sample_end);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

std::string RunConfig::canonical() const
{
    // paths are excluded: inputs are identified by content hashes in the metadata
    std::map<std::string, std::string> kv{
        {"command", command},
        {"national", national_column},
        {"regions", regions_given ? join(regional_columns) : "*"},
        {"train_end", train_end},
        {"sample_end", sample_end.empty() ? "*" : sample_end},
        {"horizons", join(horizons)},
        {"ar_max", std::to_string(ar_max)},
        {"ma_max", std::to_string(ma_max)},
        {"lags", std::to_string(lags)},
        {"confidence", format_double(encompassing_confidence)},
        {"seed", std::to_string(seed)},
        {"reps", std::to_string(replications)},
        {"n", join(critval_n)},
        {"critvals", critvals == "published" || critvals == "simulate" ? critvals : "file"},
        {"scenario", scenario_path.empty() ? "none" : "file"},
        {"format", join(formats)},
    };
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(canonical())); }

bool RunConfig::wants(std::string_view format) const
{
    return std::find(formats.begin(), formats.end(), format) != formats.end();
}

namespace {

// ---------------------------------------------------------------- output buffering

struct OutputFile {
    std::string name;
    std::string format;
    std::string content;
};

/// Collects outputs in memory; nothing touches disk until commit().
class Outputs {
public:
    explicit Outputs(const RunConfig& cfg) : cfg_(cfg) {}

    void add(std::string name, std::string format, std::string content)
    {
        if (!cfg_.wants(format)) return;
        files_.push_back({std::move(name), std::move(format), std::move(content)});
    }
    [[nodiscard]] std::vector<std::string> names() const
    {
        std::vector<std::string> n;
        for (const auto& f : files_) n.push_back(f.name);
        return n;
    }

    /// Writes every file or none: on failure, files written so far are removed.
    void commit(const fs::path& dir) const
    {
        std::vector<fs::path> written;
        try {
            fs::create_directories(dir);
            for (const auto& f : files_) {
                const auto path = dir / f.name;
                auto tmp = path;
                tmp += ".partial";
                {
                    std::ofstream out(tmp, std::ios::binary);
                    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
                    written.push_back(tmp);
                    out << f.content;
                    out.close();
                    if (!out) throw Error("write failed for " + tmp.string());
                }
                fs::rename(tmp, path);
                written.back() = path;
            }
        } catch (...) {
            std::error_code ec;
            for (const auto& p : written) fs::remove(p, ec);
            throw;
        }
    }

private:
    const RunConfig& cfg_;
    std::vector<OutputFile> files_;
};

// ---------------------------------------------------------------- inputs

struct Dataset {
    QuarterlySeries national;
    std::vector<QuarterlySeries> regions;
    std::string data_hash;
};

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Context {
    RunConfig cfg;
    Json inputs = Json::object();  // input name -> content hash

    [[nodiscard]] Json meta() const
    {
        Json m = {{"software", "hpiconv"},
                  {"version", HPICONV_VERSION},
                  {"command", cfg.command},
                  {"config_hash", cfg.hash()},
                  {"seed", cfg.seed}};
        m["inputs"] = inputs;
        return m;
    }
    [[nodiscard]] std::string csv_header() const
    {
        return "# hpiconv " HPICONV_VERSION " command=" + cfg.command + " config_hash=" + cfg.hash() +
               " seed=" + std::to_string(cfg.seed) + "\n";
    }
    std::string remember(const std::string& name, const fs::path& path)
    {
        auto bytes = read_file(path);
        inputs[name] = hex64(fnv1a64(bytes));
        return bytes;
    }
};

Dataset load_dataset(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.data_path.empty()) throw UsageError("--data is required for '" + cfg.command + "'");
    if (cfg.regions_given && cfg.regional_columns.empty()) throw UsageError("the regional list is empty");
    const auto bytes = ctx.remember("data", cfg.data_path);
    std::istringstream in(bytes);
    auto columns = read_csv(in, "", {}, cfg.data_path.string());
    auto nat = columns.find(cfg.national_column);
    if (nat == columns.end()) {
        throw MissingColumnError("national column '" + cfg.national_column + "' not found in " +
                                 cfg.data_path.string());
    }
    Dataset d{nat->second, {}, ctx.inputs["data"].get<std::string>()};
    if (cfg.regions_given) {
        for (const auto& r : cfg.regional_columns) {
            auto it = columns.find(r);
            if (it == columns.end()) {
                throw MissingColumnError("regional column '" + r + "' not found in " + cfg.data_path.string());
            }
            d.regions.push_back(it->second);
        }
    } else {
        for (const auto& [name, s] : columns) {
            if (name != cfg.national_column) d.regions.push_back(s);
        }
    }
    if (d.regions.empty()) throw UsageError("the regional list is empty");
    for (const auto& r : d.regions) {
        if (r.start() != d.national.start() || r.size() != d.national.size()) {
            throw AlignmentError("column '" + r.label() + "' does not cover the same quarters as '" +
                                 d.national.label() + "'");
        }
    }
    const auto te = QuarterDate::parse(cfg.train_end);
    if (!d.national.range().contains(te) || te == d.national.end()) {
        throw DomainError("train_end " + te.to_string() + " must lie inside the data range " +
                          d.national.start().to_string() + ".." + d.national.end().to_string() +
                          " and before its last quarter");
    }
    return d;
}

QuarterDate sample_end(const RunConfig& cfg, const Dataset& d)
{
    if (cfg.sample_end.empty()) return d.national.end();
    const auto se = QuarterDate::parse(cfg.sample_end);
    if (!d.national.range().contains(se)) {
        throw DomainError("sample_end " + se.to_string() + " lies outside the data");
    }
    return se;
}

CriticalValueTable critical_table(Context& ctx)
{
    const auto& cfg = ctx.cfg;
    if (cfg.critvals == "published") return published_critical_values();
    if (cfg.critvals == "simulate") {
        return simulate_critical_values(cfg.critval_n, cfg.replications, cfg.seed, {0.90, 0.95}, cfg.lags,
                                        cfg.threads);
    }
    ctx.remember("critvals", cfg.critvals);
    auto t = read_critical_table(cfg.critvals);
    if (t.lags != cfg.lags) {
        throw DomainError("critical values in " + cfg.critvals + " were simulated with " +
                          std::to_string(t.lags) + " lags, the test uses " + std::to_string(cfg.lags));
    }
    return t;
}

double year_fraction(QuarterDate d) { return d.year() + (d.quarter() - 1) / 4.0; }

const char* palette(std::size_t i)
{
    static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return colors[i % 10];
}

SvgChart correlogram_chart(const std::string& title, const Correlogram& c)
{
    SvgChart chart{title, "lag", "correlation", {}, {c.half_width, -c.half_width}};
    SvgSeries s{"residuals", {}, {}, "#1f4e79", false, true};
    for (const auto& v : c.values) {
        if (v.lag == 0) continue;
        s.x.push_back(v.lag);
        s.y.push_back(v.value);
    }
    chart.series.push_back(std::move(s));
    return chart;
}

// ---------------------------------------------------------------- commands

void cmd_synth(Context& ctx, Outputs& out)
{
    const auto panel = make_synthetic_panel({ctx.cfg.seed});
    std::vector<QuarterlySeries> cols{panel.national};
    cols.insert(cols.end(), panel.regions.begin(), panel.regions.end());
    std::ostringstream csv;
    csv << ctx.csv_header();
    write_csv(csv, cols);
    out.add("synthetic.csv", "csv", csv.str());

    Json regions = Json::array();
    for (const auto& r : panel.truth) {
        regions.push_back({{"region", r.name},
                           {"ratio", r.stationary ? "stationary-mtar" : "random-walk"},
                           {"beta", r.beta},
                           {"ratio_sd", r.ratio_sd}});
    }
    Json j = {{"meta", ctx.meta()},
              {"national", panel.national.label()},
              {"first", panel.national.start().to_string()},
              {"last", panel.national.end().to_string()},
              {"regions", regions}};
    out.add("synthetic_truth.json", "json", dump(j));
}

void cmd_ingest(Context& ctx, const Dataset& d, Outputs& out)
{
    Json regions = Json::array();
    std::ostringstream table;
    table << ctx.csv_header()
          << "series,count,min,max,last,mean,median,std_dev,skewness,excess_kurtosis\n";
    auto row = [&](const std::string& name, const SeriesSummary& s) {
        table << name << ',' << s.count << ',' << format_double(s.min) << ',' << format_double(s.max) << ','
              << format_double(s.last) << ',' << format_double(s.mean) << ',' << format_double(s.median)
              << ',' << format_double(s.std_dev) << ',' << format_double(s.skewness) << ','
              << format_double(s.excess_kurtosis) << '\n';
    };
    const auto nat_hpa = describe(hpa(d.national));
    row(d.national.label(), nat_hpa);

    std::vector<QuarterlySeries> ratios;
    SvgChart chart{"Demeaned log ratio of regional to national index", "year", "log ratio", {}, {}};
    for (std::size_t i = 0; i < d.regions.size(); ++i) {
        const auto& r = d.regions[i];
        for_region(r.label(), [&] {
            const auto growth = describe(hpa(r));
            row(r.label(), growth);
            const auto ratio = log_ratio(AlignedPair(r, d.national));
            const auto dm = demean(ratio);
            ratios.push_back(dm.series.relabel(r.label()));
            regions.push_back({{"region", r.label()},
                               {"hpa", to_json(growth)},
                               {"ratio_mean", dm.mean},
                               {"ratio", to_json(describe(ratio))}});
            SvgSeries s{r.label(), {}, {}, palette(i)};
            for (std::size_t t = 0; t < dm.series.size(); ++t) {
                s.x.push_back(year_fraction(dm.series.date_at(t)));
                s.y.push_back(dm.series[t]);
            }
            chart.series.push_back(std::move(s));
        });
    }
    Json j = {{"meta", ctx.meta()},
              {"first", d.national.start().to_string()},
              {"last", d.national.end().to_string()},
              {"national", {{"name", d.national.label()}, {"hpa", to_json(nat_hpa)}}},
              {"regions", regions}};
    out.add("ingest.json", "json", dump(j));
    out.add("ingest.csv", "csv", table.str());
    std::ostringstream rcsv;
    rcsv << ctx.csv_header();
    write_csv(rcsv, ratios);
    out.add("ratios.csv", "csv", rcsv.str());
    out.add("ratios.svg", "svg", render_svg(chart));
}

void cmd_unitroot(Context& ctx, const Dataset& d, Outputs& out)
{
    const auto table = stage("critvals", [&] { return critical_table(ctx); });
    const int lags = ctx.cfg.lags;
    Json regions = Json::array();
    std::ostringstream csv;
    csv << ctx.csv_header() << "region";
    for (int j = 1; j <= lags + 2; ++j) csv << ",beta" << j << ",t" << j;
    csv << ",r2,adj_r2,f_statistic,cv90,cv95,reject90,reject95,n_usable,adf_t\n";

    for (const auto& r : d.regions) {
        for_region(r.label(), [&] {
            const auto ratio = log_ratio(AlignedPair(r, d.national));
            const auto dm = demean(ratio);
            const auto res = mtar_test(dm, table, lags);
            const auto adf = adf_test(ratio, lags);
            const auto resid = std::span<const double>(res.fit.residuals.data(),
                                                       static_cast<std::size_t>(res.fit.residuals.size()));
            const int max_lag = std::min(20, static_cast<int>(resid.size()) / 4);
            const auto racf = acf(resid, max_lag);
            const auto rpacf = pacf(resid, max_lag);
            regions.push_back({{"region", r.label()},
                               {"mtar", to_json(res)},
                               {"adf", to_json(adf)},
                               {"residual_acf", to_json(racf)},
                               {"residual_pacf", to_json(rpacf)}});
            csv << r.label();
            for (Eigen::Index j = 0; j < res.fit.coefficients.size(); ++j) {
                csv << ',' << format_double(res.fit.coefficients(j)) << ','
                    << format_double(res.fit.t_statistics(j));
            }
            csv << ',' << format_double(res.fit.r2) << ',' << format_double(res.fit.adjusted_r2) << ','
                << format_double(res.f_statistic) << ',' << format_double(res.critical_values[0].second)
                << ',' << format_double(res.critical_values[1].second) << ',' << res.reject_90 << ','
                << res.reject_95 << ',' << res.n_usable << ',' << format_double(adf.t_statistic) << '\n';
            out.add("resid_acf_" + r.label() + ".svg", "svg",
                    render_svg(correlogram_chart(r.label() + ": MTAR residual ACF", racf)));
            out.add("resid_pacf_" + r.label() + ".svg", "svg",
                    render_svg(correlogram_chart(r.label() + ": MTAR residual PACF", rpacf)));
        });
    }
    Json j = {{"meta", ctx.meta()}, {"critical_values", to_json(table)}, {"regions", regions}};
    out.add("unitroot.json", "json", dump(j));
    out.add("unitroot.csv", "csv", csv.str());
}

std::vector<std::pair<int, int>> order_grid(const RunConfig& cfg)
{
    std::vector<std::pair<int, int>> g;
    for (int r = 0; r <= cfg.ar_max; ++r) {
        for (int m = 0; m <= cfg.ma_max; ++m) g.emplace_back(r, m);
    }
    return g;
}

Json grid_json(const OrderSelection& sel)
{
    Json cells = Json::array();
    for (const auto& c : sel.cells) {
        Json cell = {{"ar", c.spec.ar_order}, {"ma", c.spec.ma_order}};
        if (c.fit) {
            cell["aic"] = c.fit->aic;
            cell["converged"] = c.fit->converged;
        } else {
            cell["aic"] = nullptr;
            cell["converged"] = false;
            cell["error"] = c.error;
        }
        cells.push_back(cell);
    }
    return cells;
}

Json cmd_fit(Context& ctx, const Dataset& d, Outputs& out)
{
    const auto& cfg = ctx.cfg;
    const auto te = QuarterDate::parse(cfg.train_end);
    const auto grid = order_grid(cfg);
    const CriticalValueTable table = published_critical_values();
    ArmaFitOptions opts;
    opts.seed = cfg.seed;

    Json regions = Json::array();
    std::ostringstream fit_csv, grid_csv;
    fit_csv << ctx.csv_header() << "region,model,ar,ma,aic,loglik,sigma2,converged\n";
    grid_csv << ctx.csv_header() << "region,model,ar,ma,aic,selected\n";
    const auto nat_growth = hpa(d.national.slice(d.national.start(), te));
    for (const auto& r : d.regions) {
        for_region(r.label(), [&] {
            const auto train = r.slice(r.start(), te);
            const auto growth = hpa(train);
            const auto arma = select_order(growth, std::nullopt, grid, opts);
            const auto armax = select_order(growth, nat_growth, grid, opts);
            const auto ratio = log_ratio(AlignedPair(train, d.national.slice(d.national.start(), te)));
            const auto mtar = mtar_test(demean(ratio), table, cfg.lags);
            regions.push_back({{"region", r.label()},
                               {"arma", to_json(arma.fit)},
                               {"armax", to_json(armax.fit)},
                               {"mtar", to_json(MtarCoefficients::from(mtar))},
                               {"mtar_test", to_json(mtar)},
                               {"arma_grid", grid_json(arma)},
                               {"armax_grid", grid_json(armax)}});
            for (const auto* sel : {&arma, &armax}) {
                const auto& f = sel->fit;
                const std::string model = f.spec.exogenous ? "ARMAX" : "ARMA";
                fit_csv << r.label() << ',' << model << ',' << f.spec.ar_order << ',' << f.spec.ma_order << ','
                        << format_double(f.aic) << ',' << format_double(f.loglik) << ','
                        << format_double(f.sigma2) << ',' << f.converged << '\n';
                for (const auto& c : sel->cells) {
                    grid_csv << r.label() << ',' << model << ',' << c.spec.ar_order << ',' << c.spec.ma_order
                             << ',' << (c.fit ? format_double(c.fit->aic) : "") << ','
                             << (c.spec == sel->spec) << '\n';
                }
            }
            fit_csv << r.label() << ",MTAR,,," << ",," << format_double(mtar.fit.sigma2) << ",1\n";
        });
    }
    Json j = {{"meta", ctx.meta()},
              {"train_start", d.national.start().to_string()},
              {"train_end", te.to_string()},
              {"lags", cfg.lags},
              {"regions", regions}};
    out.add("models.json", "json", dump(j));
    out.add("fit.csv", "csv", fit_csv.str());
    out.add("aic_grid.csv", "csv", grid_csv.str());
    return j;
}

struct RegionModels {
    std::string region;
    std::vector<std::unique_ptr<Forecaster>> models;
};

std::vector<RegionModels> build_forecasters(const Json& models, const Dataset& d,
                                            const QuarterlySeries& national_index)
{
    const auto nat_growth = hpa(national_index);
    std::vector<RegionModels> out;
    for (const auto& r : d.regions) {
        const Json* entry = nullptr;
        for (const auto& m : models.at("regions")) {
            if (m.at("region").get<std::string>() == r.label()) entry = &m;
        }
        if (!entry) throw Error("models file has no fit for region " + r.label());
        RegionModels rm{r.label(), {}};
        const auto growth = hpa(r);
        rm.models.push_back(std::make_unique<ArmaForecaster>("ARMA", arma_fit_from_json(entry->at("arma")), growth));
        rm.models.push_back(std::make_unique<ArmaForecaster>("ARMAX", arma_fit_from_json(entry->at("armax")),
                                                             growth, nat_growth));
        rm.models.push_back(std::make_unique<MtarForecaster>(
            "MTAR", mtar_coefficients_from_json(entry->at("mtar")), r, national_index));
        out.push_back(std::move(rm));
    }
    return out;
}

Json forecast_decisions(bool scenario)
{
    return {{"estimation", "parameters estimated once on the training sample"},
            {"ratio_demeaning", "training-sample mean of the log ratio"},
            {"mtar_bands", "linearized recursion with the forecast indicator path held fixed (approximate)"},
            {"national_path", scenario ? "scenario" : "actual"}};
}

Json cmd_forecast(Context& ctx, const Dataset& d, const Json& models, Outputs& out)
{
    const auto& cfg = ctx.cfg;
    const auto te = QuarterDate::parse(cfg.train_end);
    if (models.at("train_end").get<std::string>() != te.to_string()) {
        throw DomainError("models were fit with train_end " + models.at("train_end").get<std::string>() +
                          " but the run uses " + te.to_string());
    }
    ForecastProtocol protocol{te, sample_end(cfg, d), cfg.horizons};
    protocol.validate();
    const auto regions = build_forecasters(models, d, d.national);

    Json jregions = Json::array();
    std::ostringstream csv;
    csv << ctx.csv_header() << "region,model,horizon,origin,target,predicted,realized,band\n";
    for (const auto& rm : regions) {
        for_region(rm.region, [&] {
            const auto& series =
                *std::find_if(d.regions.begin(), d.regions.end(), [&](const auto& s) { return s.label() == rm.region; });
            const auto realized = hpa(series);
            Json panels = Json::array();
            Json warnings = Json::array();
            for (const auto& model : rm.models) {
                for (const auto& p : rolling_forecasts(*model, protocol, realized)) {
                    panels.push_back(to_json(p));
                    if (!p.warning.empty()) warnings.push_back(model->name() + ": " + p.warning);
                    for (const auto& e : p.entries) {
                        csv << rm.region << ',' << p.model_name << ',' << p.horizon << ','
                            << e.origin.to_string() << ',' << e.target.to_string() << ','
                            << format_double(e.predicted) << ',' << format_double(e.realized) << ','
                            << format_double(e.band) << '\n';
                    }
                }
            }
            jregions.push_back({{"region", rm.region}, {"panels", panels}, {"warnings", warnings}});
        });
    }
    Json j = {{"meta", ctx.meta()},
              {"protocol",
               {{"train_end", protocol.train_end.to_string()},
                {"sample_end", protocol.sample_end.to_string()},
                {"horizons", protocol.horizons}}},
              {"decisions", forecast_decisions(false)},
              {"regions", jregions}};
    out.add("forecasts.json", "json", dump(j));
    out.add("forecasts.csv", "csv", csv.str());

    if (!cfg.scenario_path.empty()) {
        const auto bytes = ctx.remember("scenario", cfg.scenario_path);
        std::istringstream in(bytes);
        auto cols = read_csv(in, "", {cfg.national_column}, cfg.scenario_path.string());
        const auto& path = cols.at(cfg.national_column);
        if (path.start() != d.national.end().next()) {
            throw AlignmentError("scenario path must start at " + d.national.end().next().to_string() +
                                 ", got " + path.start().to_string());
        }
        std::vector<double> ext(d.national.values().begin(), d.national.values().end());
        ext.insert(ext.end(), path.values().begin(), path.values().end());
        const QuarterlySeries extended(d.national.start(), std::move(ext), d.national.label(),
                                       SeriesKind::IndexLevel);
        const auto h = static_cast<int>(path.size());
        const auto scen = build_forecasters(models, d, extended);
        std::ostringstream scsv;
        scsv << ctx.csv_header() << "region,model,step,target,predicted,band\n";
        Json sregions = Json::array();
        for (const auto& rm : scen) {
            for_region(rm.region, [&] {
                Json jm = Json::array();
                for (const auto& model : rm.models) {
                    const auto origin = d.national.end();
                    const auto pred = model->forecast(origin, h);
                    const auto band = model->bands(origin, h);
                    Json steps = Json::array();
                    for (int k = 0; k < h; ++k) {
                        const auto target = origin.plus(k + 1).to_string();
                        const auto ku = static_cast<std::size_t>(k);
                        scsv << rm.region << ',' << model->name() << ',' << k + 1 << ',' << target << ','
                             << format_double(pred[ku]) << ',' << format_double(band[ku]) << '\n';
                        steps.push_back({{"step", k + 1}, {"target", target}, {"predicted", pred[ku]}, {"band", band[ku]}});
                    }
                    jm.push_back({{"model", model->name()}, {"steps", steps}});
                }
                sregions.push_back({{"region", rm.region}, {"models", jm}});
            });
        }
        Json s = {{"meta", ctx.meta()},
                  {"origin", d.national.end().to_string()},
                  {"decisions", forecast_decisions(true)},
                  {"regions", sregions}};
        out.add("scenario.json", "json", dump(s));
        out.add("scenario.csv", "csv", scsv.str());
    }
    return j;
}

Json cmd_evaluate(Context& ctx, const Json& forecasts, Outputs& out)
{
    const double conf = ctx.cfg.encompassing_confidence;
    Json jregions = Json::array();
    std::ostringstream rm_csv, win_csv, enc_csv;
    rm_csv << ctx.csv_header() << "region,model,horizon,n,rmsfe,bias,error_variance\n";
    win_csv << ctx.csv_header() << "region,first,second,winner,rule,horizon_winners\n";
    enc_csv << ctx.csv_header() << "region,model1,model2,horizon,n,f1,p1,f2,p2,verdict\n";

    if (!forecasts.contains("regions") || !forecasts.at("regions").is_array()) {
        throw ParseError("forecasts file has no 'regions' array");
    }
    for (const auto& jr : forecasts.at("regions")) {
        const auto region = jr.at("region").get<std::string>();
        for_region(region, [&] {
            std::vector<std::string> names;
            std::map<std::string, std::vector<ForecastPanel>> by_model;
            for (const auto& jp : jr.at("panels")) {
                auto p = forecast_panel_from_json(jp);
                if (!by_model.count(p.model_name)) names.push_back(p.model_name);
                by_model[p.model_name].push_back(std::move(p));
            }
            std::vector<std::vector<ForecastPanel>> panels;
            for (const auto& n : names) panels.push_back(by_model[n]);

            Json scores = Json::array();
            for (const auto& n : names) {
                for (const auto& p : by_model[n]) {
                    if (p.entries.empty()) continue;
                    const auto r = rmsfe(p);
                    Json s = to_json(r);
                    s["model"] = n;
                    s["horizon"] = p.horizon;
                    if (r.n < 10) s["caveat"] = "fewer than 10 forecasts";
                    scores.push_back(s);
                    rm_csv << region << ',' << n << ',' << p.horizon << ',' << r.n << ','
                           << format_double(r.value) << ',' << format_double(r.bias) << ','
                           << format_double(r.error_variance) << '\n';
                }
            }
            // horizons with no forecasts cannot be scored
            std::vector<std::vector<ForecastPanel>> scored(panels.size());
            for (std::size_t m = 0; m < panels.size(); ++m) {
                for (const auto& p : panels[m]) {
                    if (!p.entries.empty()) scored[m].push_back(p);
                }
            }
            const auto table = winner_table(region, scored);
            for (const auto& w : table.pairs) {
                win_csv << region << ',' << w.first << ',' << w.second << ',' << w.winner << ',' << w.rule << ','
                        << join(w.horizon_winner, ";") << '\n';
            }

            Json enc = Json::array();
            const std::vector<std::pair<std::string, std::string>> pairs{
                {"MTAR", "ARMA"}, {"MTAR", "ARMAX"}, {"ARMAX", "ARMA"}};
            for (const auto& [m1, m2] : pairs) {
                if (!by_model.count(m1) || !by_model.count(m2)) continue;
                Json per = Json::array();
                std::vector<std::string> verdicts;
                for (std::size_t k = 0; k < by_model[m1].size(); ++k) {
                    const auto& p1 = by_model[m1][k];
                    const auto& p2 = by_model[m2].at(k);
                    std::vector<double> x, f1, f2;
                    for (std::size_t i = 0; i < p1.entries.size(); ++i) {
                        x.push_back(p1.entries[i].realized);
                        f1.push_back(p1.entries[i].predicted);
                        f2.push_back(p2.entries.at(i).predicted);
                    }
                    Json h = {{"horizon", p1.horizon}, {"n", x.size()}};
                    std::string verdict_model;
                    if (x.size() < 5) {
                        h["verdict"] = "inconclusive";
                        h["skipped"] = "fewer than 5 forecasts";
                        enc_csv << region << ',' << m1 << ',' << m2 << ',' << p1.horizon << ',' << x.size()
                                << ",,,,,skipped\n";
                    } else {
                        auto res = encompassing_test(x, f1, f2, conf);
                        if (p1.horizon > 1) {
                            res.caveats.push_back("overlapping multi-step errors are serially correlated; "
                                                  "classical F-tests are not corrected");
                        }
                        if (res.verdict == Verdict::Model1Encompasses) verdict_model = m1;
                        if (res.verdict == Verdict::Model2Encompasses) verdict_model = m2;
                        h["result"] = to_json(res);
                        h["verdict"] = verdict_model.empty() ? "inconclusive" : verdict_model;
                        enc_csv << region << ',' << m1 << ',' << m2 << ',' << p1.horizon << ',' << x.size() << ','
                                << format_double(res.test1.statistic) << ',' << format_double(res.test1.p_value)
                                << ',' << format_double(res.test2.statistic) << ','
                                << format_double(res.test2.p_value) << ','
                                << (verdict_model.empty() ? "inconclusive" : verdict_model) << '\n';
                    }
                    verdicts.push_back(verdict_model);
                    per.push_back(h);
                }
                const auto overall = overall_encompassing(verdicts);
                const std::string ov = overall.model.empty() ? "inconclusive" : overall.model;
                enc_csv << region << ',' << m1 << ',' << m2 << ",overall,,,,,," << ov
                        << (overall.conflict ? " (conflict)" : "") << '\n';
                enc.push_back({{"model1", m1},
                               {"model2", m2},
                               {"horizons", per},
                               {"overall", {{"verdict", ov}, {"conflict", overall.conflict}}}});
            }
            jregions.push_back({{"region", region}, {"rmsfe", scores}, {"winners", to_json(table)}, {"encompassing", enc}});
        });
    }
    Json j = {{"meta", ctx.meta()},
              {"protocol", forecasts.contains("protocol") ? forecasts.at("protocol") : Json(nullptr)},
              {"confidence", conf},
              {"rules",
               {{"winner", "lower RMSFE per horizon; strict majority of horizons, else longest decisive horizon, else tie"},
                {"encompassing", "per-horizon regressions with classical F-tests"}}},
              {"regions", jregions}};
    out.add("evaluation.json", "json", dump(j));
    out.add("rmsfe.csv", "csv", rm_csv.str());
    out.add("winners.csv", "csv", win_csv.str());
    out.add("encompassing.csv", "csv", enc_csv.str());
    return j;
}

void cmd_critvals(Context& ctx, Outputs& out)
{
    const auto& cfg = ctx.cfg;
    const auto table = simulate_critical_values(cfg.critval_n, cfg.replications, cfg.seed, {0.90, 0.95},
                                                cfg.lags, cfg.threads);
    Json j = {{"meta", ctx.meta()}};
    const auto body = to_json(table);
    for (const auto& [k, v] : body.items()) j[k] = v;
    out.add("critvals.json", "json", dump(j));
    std::ostringstream csv;
    csv << ctx.csv_header() << "n_obs,quantile,value\n";
    for (const auto& row : table.rows) {
        for (const auto& [q, v] : row.quantiles) csv << row.n_obs << ',' << format_double(q) << ',' << format_double(v) << '\n';
    }
    out.add("critvals.csv", "csv", csv.str());
}

void forecast_fans(const Dataset& d, const Json& forecasts, Outputs& out)
{
    const auto te = QuarterDate::parse(forecasts.at("protocol").at("train_end").get<std::string>());
    for (const auto& jr : forecasts.at("regions")) {
        const auto region = jr.at("region").get<std::string>();
        const auto& series =
            *std::find_if(d.regions.begin(), d.regions.end(), [&](const auto& s) { return s.label() == region; });
        const auto growth = hpa(series);
        std::map<std::string, std::vector<SvgChart>> charts;
        std::vector<std::string> order;
        for (const auto& jp : jr.at("panels")) {
            const auto p = forecast_panel_from_json(jp);
            if (!charts.count(p.model_name)) order.push_back(p.model_name);
            SvgChart c{region + " " + p.model_name + ": " + std::to_string(p.horizon) + "-step forecasts", "year",
                       "growth", {}, {}};
            SvgSeries hist{"actual", {}, {}, "#1f4e79"};
            const auto first = std::max(growth.start(), te.plus(-12));
            for (auto q = first; q <= growth.end(); q = q.next()) {
                hist.x.push_back(year_fraction(q));
                hist.y.push_back(growth.at(q));
            }
            SvgSeries fc{"forecast", {}, {}, "#d62728"};
            SvgSeries up{"2 sigma band", {}, {}, "#2ca02c", true};
            SvgSeries lo{"", {}, {}, "#2ca02c", true};
            for (const auto& e : p.entries) {
                const double x = year_fraction(e.target);
                fc.x.push_back(x);
                fc.y.push_back(e.predicted);
                up.x.push_back(x);
                up.y.push_back(e.predicted + e.band);
                lo.x.push_back(x);
                lo.y.push_back(e.predicted - e.band);
            }
            c.series = {hist, fc, up, lo};
            charts[p.model_name].push_back(std::move(c));
        }
        for (const auto& m : order) out.add("forecast_" + region + "_" + m + ".svg", "svg", render_svg_stack(charts[m]));
    }
}

Json load_json_input(Context& ctx, const std::string& name, const fs::path& path)
{
    ctx.remember(name, path);
    return read_json(path);
}

void dispatch(Context& ctx, Outputs& out)
{
    const auto cmd = ctx.cfg.command;
    if (cmd == "synth") return stage("synth", [&] { cmd_synth(ctx, out); });
    if (cmd == "critvals") return stage("critvals", [&] { cmd_critvals(ctx, out); });
    if (cmd == "evaluate") {
        const auto path = ctx.cfg.forecasts_path.empty() ? ctx.cfg.output_dir / "forecasts.json" : ctx.cfg.forecasts_path;
        const auto fc = stage("load", [&] { return load_json_input(ctx, "forecasts", path); });
        stage("evaluate", [&] { (void)cmd_evaluate(ctx, fc, out); });
        return;
    }
    const auto data = stage("load", [&] { return load_dataset(ctx); });
    if (cmd == "ingest") return stage("ingest", [&] { cmd_ingest(ctx, data, out); });
    if (cmd == "unitroot") return stage("unitroot", [&] { cmd_unitroot(ctx, data, out); });
    if (cmd == "fit") {
        stage("fit", [&] { (void)cmd_fit(ctx, data, out); });
        return;
    }
    if (cmd == "forecast") {
        const auto path = ctx.cfg.models_path.empty() ? ctx.cfg.output_dir / "models.json" : ctx.cfg.models_path;
        const auto models = stage("load", [&] { return load_json_input(ctx, "models", path); });
        stage("forecast", [&] { (void)cmd_forecast(ctx, data, models, out); });
        return;
    }
    if (cmd == "report") {
        stage("ingest", [&] { cmd_ingest(ctx, data, out); });
        stage("unitroot", [&] { cmd_unitroot(ctx, data, out); });
        const auto models = stage("fit", [&] { return cmd_fit(ctx, data, out); });
        const auto fc = stage("forecast", [&] { return cmd_forecast(ctx, data, models, out); });
        stage("evaluate", [&] { (void)cmd_evaluate(ctx, fc, out); });
        stage("report", [&] { forecast_fans(data, fc, out); });
        auto files = out.names();
        files.push_back("report.json");
        out.add("report.json", "json", dump(Json{{"meta", ctx.meta()}, {"files", files}}));
        return;
    }
    throw UsageError("unknown command '" + cmd + "'");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    RunConfig cfg;
    CLI::App app{"Regional index convergence tests and forecast comparison", "hpiconv"};
    app.set_version_flag("--version", std::string(HPICONV_VERSION));
    app.set_config("--config", "", "Flat key=value settings file; command-line flags take precedence");
    app.require_subcommand(1, 1);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"ingest", "Load index data and describe growth rates and log ratios"},
        {"unitroot", "MTAR and ADF tests on each regional log ratio"},
        {"fit", "Estimate ARMA, ARMAX and MTAR models on the training sample"},
        {"forecast", "Rolling dynamic forecasts from the fitted models"},
        {"evaluate", "RMSFE, winner tables and encompassing tests"},
        {"critvals", "Simulate MTAR critical values"},
        {"report", "Run the whole pipeline and render plots"},
        {"synth", "Write the seeded synthetic nine-region dataset"}};
    for (const auto& [name, desc] : commands) app.add_subcommand(name, desc)->fallthrough();

    std::vector<std::string> regions;
    std::string out_dir;
    app.add_option("--data", cfg.data_path, "Quarterly CSV: dates in the first column, one column per index");
    app.add_option("--national", cfg.national_column, "Column holding the national index")->capture_default_str();
    auto* regions_opt = app.add_option("--regions", regions, "Comma-separated regional columns (default: all others)")
                            ->delimiter(',');
    app.add_option("--train-end", cfg.train_end, "Last quarter of the estimation sample")->capture_default_str();
    app.add_option("--sample-end", cfg.sample_end, "Last quarter used for forecast evaluation (default: data end)");
    app.add_option("--horizons", cfg.horizons, "Forecast horizons in quarters")->delimiter(',')->capture_default_str();
    app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
    app.add_option("--reps", cfg.replications, "Monte-Carlo replications")->capture_default_str();
    app.add_option("--n", cfg.critval_n, "Series lengths for critical values")->delimiter(',')->capture_default_str();
    app.add_option("--lags", cfg.lags, "Lagged differences in the MTAR and ADF regressions")->capture_default_str();
    app.add_option("--critvals", cfg.critvals, "published, simulate, or a critical-value JSON file")->capture_default_str();
    app.add_option("--models", cfg.models_path, "Fitted models file (default: <out>/models.json)");
    app.add_option("--forecasts", cfg.forecasts_path, "Forecast panels file (default: <out>/forecasts.json)");
    app.add_option("--scenario", cfg.scenario_path, "CSV of future national index levels for scenario forecasts");
    app.add_option("--confidence", cfg.encompassing_confidence, "Confidence level of encompassing verdicts")
        ->capture_default_str();
    app.add_option("--ar-max", cfg.ar_max, "Largest AR order in the AIC grid")->capture_default_str();
    app.add_option("--ma-max", cfg.ma_max, "Largest MA order in the AIC grid")->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker threads (0: all cores); results do not depend on it");
    auto* out_opt = app.add_option("--out", out_dir, std::string("Output directory (default: $") + kOutputDirEnv +
                                                         " or ./out)");
    app.add_option("--format", cfg.formats, "Output formats: csv, json, svg")->delimiter(',')->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    if (argv.empty()) argv.push_back("hpiconv");
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    cfg.regions_given = regions_opt->count() > 0;
    for (auto& r : regions) {
        if (!r.empty()) cfg.regional_columns.push_back(r);
    }
    if (out_opt->count() > 0 && !out_dir.empty()) {
        cfg.output_dir = out_dir;
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
        cfg.output_dir = env;
    } else {
        cfg.output_dir = "out";
    }

    try {
        cfg.validate();
        Context ctx{cfg};
        Outputs outputs(ctx.cfg);
        dispatch(ctx, outputs);
        stage("write", [&] { outputs.commit(ctx.cfg.output_dir); });
        for (const auto& n : outputs.names()) out << (ctx.cfg.output_dir / n).string() << '\n';
        return 0;
    } catch (const UsageError& e) {
        err << "hpiconv " << cfg.command << ": usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "hpiconv " << cfg.command << ": " << e.what() << '\n';
        return 1;
    }
}

}  // namespace hpiconv
