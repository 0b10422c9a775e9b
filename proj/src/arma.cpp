#include "hpiconv/arma.hpp"

#include "hpiconv/error.hpp"
#include "hpiconv/optimize.hpp"
#include "hpiconv/parallel.hpp"
#include "hpiconv/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hpiconv {

void ArmaSpec::validate() const
{
    if (ar_order < 0 || ma_order < 0) throw DomainError("ARMA orders must be non-negative");
    if (ar_order + ma_order < 1 && !include_intercept) {
        throw DomainError("ARMA spec needs at least one AR/MA term or an intercept");
    }
}

std::string ArmaSpec::name() const
{
    return std::string(exogenous ? "ARMAX(" : "ARMA(") + std::to_string(ar_order) + "," +
           std::to_string(ma_order) + ")";
}

ArmaParams ArmaFit::params() const
{
    return {intercept, phi, theta, beta_exog.value_or(0.0)};
}

// ------------------------------------------------------------------ objective

CssValue css_objective(const ArmaParams& p, std::span<const double> x, std::span<const double> z,
                       std::optional<double> presample_mean)
{
    const std::size_t n = x.size();
    if (n == 0) throw InsufficientDataError("css_objective: empty series");
    if (!z.empty() && z.size() != n) {
        throw AlignmentError("css_objective: exogenous series length " + std::to_string(z.size()) +
                             " differs from series length " + std::to_string(n));
    }
    const double pm = presample_mean.value_or(std::accumulate(x.begin(), x.end(), 0.0) /
                                              static_cast<double>(n));
    const std::size_t r = p.phi.size();
    const std::size_t m = p.theta.size();
    CssValue out{std::numeric_limits<double>::infinity(), 0.0, std::vector<double>(n)};
    auto& e = out.innovations;
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        double pred = p.intercept;
        if (!z.empty()) pred += p.beta * z[t];
        for (std::size_t j = 1; j <= r; ++j) pred += p.phi[j - 1] * (t >= j ? x[t - j] : pm);
        for (std::size_t j = 1; j <= m && j <= t; ++j) pred += p.theta[j - 1] * e[t - j];
        e[t] = x[t] - pred;
        ss += e[t] * e[t];
    }
    out.sigma2 = ss / static_cast<double>(n);
    if (std::isfinite(ss) && out.sigma2 > 0.0) {
        out.nll = 0.5 * static_cast<double>(n) *
                  (std::log(2.0 * std::numbers::pi * out.sigma2) + 1.0);
    }
    return out;
}

// ---------------------------------------------------------- parameterization

std::vector<double> unconstrained_to_ar(std::span<const double> raw)
{
    const std::size_t p = raw.size();
    std::vector<double> phi(p), work(p);
    for (std::size_t k = 0; k < p; ++k) {
        const double a = std::tanh(raw[k]);
        // phi^(k)_j = phi^(k-1)_j - a_k phi^(k-1)_{k-j}
        for (std::size_t j = 0; j < k; ++j) work[j] = phi[j] - a * phi[k - 1 - j];
        std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k), phi.begin());
        phi[k] = a;
    }
    return phi;
}

std::vector<double> ar_to_partials(std::span<const double> phi_in)
{
    std::vector<double> phi(phi_in.begin(), phi_in.end());
    const std::size_t p = phi.size();
    std::vector<double> partials(p), work(p);
    for (std::size_t k = p; k-- > 0;) {
        const double a = phi[k];
        partials[k] = a;
        if (std::abs(a) >= 1.0) {
            // not stationary; remaining partials are meaningless
            for (std::size_t j = 0; j < k; ++j) partials[j] = std::numeric_limits<double>::quiet_NaN();
            break;
        }
        const double denom = 1.0 - a * a;
        for (std::size_t j = 0; j < k; ++j) work[j] = (phi[j] + a * phi[k - 1 - j]) / denom;
        std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k), phi.begin());
    }
    return partials;
}

std::vector<double> ar_to_unconstrained(std::span<const double> phi)
{
    auto partials = ar_to_partials(phi);
    for (auto& a : partials) {
        if (!(std::abs(a) < 1.0)) throw DomainError("AR coefficients are not stationary");
        a = std::atanh(a);
    }
    return partials;
}

bool is_stationary(std::span<const double> phi)
{
    const auto partials = ar_to_partials(phi);
    return std::all_of(partials.begin(), partials.end(), [](double a) { return std::abs(a) < 1.0; });
}

bool is_invertible(std::span<const double> theta)
{
    std::vector<double> neg(theta.begin(), theta.end());
    for (auto& v : neg) v = -v;
    return is_stationary(neg);
}

// ------------------------------------------------------------------ fitting

namespace {

struct Scaling {
    double x_mean;
    double x_sd;
    double z_mean;
    double z_sd;
};

/// Internal vector: [m (intercept, mean form, in sd units)] [AR raw] [MA raw] [g (scaled beta)].
ArmaParams decode(const ArmaSpec& spec, std::span<const double> u, const Scaling& s)
{
    std::size_t pos = 0;
    double m = 0.0;
    if (spec.include_intercept) m = u[pos++];
    const auto ar_raw = u.subspan(pos, static_cast<std::size_t>(spec.ar_order));
    pos += static_cast<std::size_t>(spec.ar_order);
    const auto ma_raw = u.subspan(pos, static_cast<std::size_t>(spec.ma_order));
    pos += static_cast<std::size_t>(spec.ma_order);

    ArmaParams p;
    p.phi = unconstrained_to_ar(ar_raw);
    p.theta = unconstrained_to_ar(ma_raw);
    for (auto& t : p.theta) t = -t;
    if (spec.exogenous) p.beta = u[pos] * s.x_sd / s.z_sd;
    if (spec.include_intercept) {
        const double ar_sum = std::accumulate(p.phi.begin(), p.phi.end(), 0.0);
        const double mu = s.x_mean + s.x_sd * m;
        p.intercept = mu * (1.0 - ar_sum) - (spec.exogenous ? p.beta * s.z_mean : 0.0);
    }
    return p;
}

double mean_of(std::span<const double> v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v, double mean)
{
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

ArmaFit fit_arma(std::span<const double> x, const ArmaSpec& spec, std::span<const double> z,
                 const ArmaFitOptions& opts)
{
    spec.validate();
    const std::size_t n = x.size();
    if (spec.exogenous && z.size() != n) {
        throw AlignmentError("ARMAX fit needs an exogenous series aligned with the data (got " +
                             std::to_string(z.size()) + " vs " + std::to_string(n) + ")");
    }
    if (!spec.exogenous && !z.empty()) {
        throw AlignmentError("exogenous series supplied for a spec without an exogenous term");
    }
    const auto k = static_cast<std::size_t>(spec.parameter_count());
    if (n < k + 3 || n <= static_cast<std::size_t>(std::max(spec.ar_order, spec.ma_order)) + 1) {
        throw InsufficientDataError("ARMA fit of " + spec.name() + " needs more than " +
                                    std::to_string(k + 2) + " observations, got " +
                                    std::to_string(n));
    }
    Scaling s{};
    s.x_mean = mean_of(x);
    s.x_sd = sd_of(x, s.x_mean);
    if (!(s.x_sd > 1e-14 * std::max(1.0, std::abs(s.x_mean)))) {
        throw DomainError("cannot fit ARMA to a zero-variance series");
    }
    s.z_mean = 0.0;
    s.z_sd = 1.0;
    if (spec.exogenous) {
        s.z_mean = mean_of(z);
        s.z_sd = sd_of(z, s.z_mean);
        if (!(s.z_sd > 1e-14 * std::max(1.0, std::abs(s.z_mean)))) {
            throw DomainError("exogenous series has zero variance");
        }
    }

    const std::size_t dim = k - 1;  // sigma^2 is profiled
    auto objective = [&](std::span<const double> u) {
        return css_objective(decode(spec, u, s), x, z, s.x_mean).nll;
    };

    std::vector<double> start(dim, 0.0);
    if (spec.exogenous) {
        double sxz = 0.0;
        double szz = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            sxz += (x[t] - s.x_mean) * (z[t] - s.z_mean);
            szz += (z[t] - s.z_mean) * (z[t] - s.z_mean);
        }
        start.back() = (sxz / szz) * s.z_sd / s.x_sd;
    }

    ArmaFit fit;
    fit.spec = spec;
    std::vector<double> best = start;
    double best_value = objective(best);
    fit.objective_trace.push_back(best_value);
    auto absorb = [&](const optim::Result& r) {
        fit.evaluations += r.evaluations;
        for (double v : r.trace) {
            if (v < fit.objective_trace.back()) fit.objective_trace.push_back(v);
        }
        if (r.value < best_value) {
            best_value = r.value;
            best = r.x;
        }
    };

    optim::NelderMeadOptions nm;
    nm.initial_step.assign(dim, 0.3);
    RandomStream rng(opts.seed, static_cast<std::uint64_t>(spec.ar_order) * 64 +
                                    static_cast<std::uint64_t>(spec.ma_order) * 2 +
                                    (spec.exogenous ? 1 : 0));
    bool cycle_converged = false;
    bool bfgs_ok = false;
    for (int cycle = 0; cycle < opts.max_cycles; ++cycle) {
        const double cycle_start = best_value;
        absorb(optim::nelder_mead(objective, best, nm));
        const auto anchor = best;
        for (int rs = 0; rs < opts.restarts; ++rs) {
            auto trial = anchor;
            for (auto& v : trial) v += 0.5 * rng.normal();
            absorb(optim::nelder_mead(objective, trial, nm));
        }
        const auto polished = optim::bfgs(objective, best);
        absorb(polished);
        bfgs_ok = polished.converged;
        if (std::isfinite(best_value) && cycle_start - best_value < opts.tolerance) {
            cycle_converged = true;
            break;
        }
    }

    const auto params = decode(spec, best, s);
    const auto css = css_objective(params, x, z, s.x_mean);
    fit.intercept = params.intercept;
    fit.phi = params.phi;
    fit.theta = params.theta;
    if (spec.exogenous) fit.beta_exog = params.beta;
    fit.sigma2 = css.sigma2;
    fit.loglik = -css.nll;
    fit.aic = 2.0 * static_cast<double>(k) - 2.0 * fit.loglik;
    fit.residuals = css.innovations;
    fit.n_obs = static_cast<int>(n);
    fit.presample_mean = s.x_mean;
    fit.converged = cycle_converged && std::isfinite(css.nll) && fit.sigma2 > 0.0;
    if (!fit.converged) {
        fit.warning = spec.name() + ": objective still improving after " +
                      std::to_string(opts.max_cycles) + " optimization cycles";
    } else if (!bfgs_ok) {
        fit.warning = spec.name() + ": quasi-Newton polish stopped before the gradient tolerance";
    }
    return fit;
}

ArmaFit fit_arma(const QuarterlySeries& series, const ArmaSpec& spec,
                 const std::optional<QuarterlySeries>& exog, const ArmaFitOptions& opts)
{
    if (series.kind() != SeriesKind::GrowthRate) {
        throw DomainError("ARMA models are fitted to growth-rate series; '" + series.label() +
                          "' is " + std::string(to_string(series.kind())));
    }
    std::span<const double> z;
    if (spec.exogenous) {
        if (!exog) throw AlignmentError("ARMAX spec requires an exogenous series");
        if (exog->start() != series.start() || exog->size() != series.size()) {
            throw AlignmentError("exogenous series '" + exog->label() + "' is not aligned with '" +
                                 series.label() + "'");
        }
        z = exog->values();
    }
    auto fit = fit_arma(series.values(), spec, z, opts);
    fit.sample_window = series.range();
    return fit;
}

std::vector<std::pair<int, int>> default_order_grid()
{
    std::vector<std::pair<int, int>> grid;
    for (int r = 0; r <= 4; ++r) {
        for (int m = 0; m <= 4; ++m) grid.emplace_back(r, m);
    }
    return grid;
}

OrderSelection select_order(std::span<const double> x, std::span<const double> z,
                            const std::vector<std::pair<int, int>>& grid,
                            const ArmaFitOptions& opts)
{
    if (grid.empty()) throw DomainError("select_order: empty order grid");
    std::vector<GridCell> cells(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        auto& cell = cells[i];
        cell.spec = ArmaSpec{grid[i].first, grid[i].second, true, !z.empty()};
        try {
            cell.fit = fit_arma(x, cell.spec, z, opts);
        } catch (const Error& e) {
            cell.error = e.what();
        }
    });

    const GridCell* best = nullptr;
    for (const auto& c : cells) {
        if (!c.fit || !c.fit->converged) continue;
        if (!best) {
            best = &c;
            continue;
        }
        const double a = c.fit->aic;
        const double b = best->fit->aic;
        const double tol = 1e-9 * std::max(1.0, std::abs(b));
        const int order_c = c.spec.ar_order + c.spec.ma_order;
        const int order_b = best->spec.ar_order + best->spec.ma_order;
        if (a < b - tol ||
            (std::abs(a - b) <= tol &&
             (order_c < order_b || (order_c == order_b && c.spec.ar_order < best->spec.ar_order)))) {
            best = &c;
        }
    }
    if (!best) {
        std::string msg = "select_order: no converged fit on the grid;";
        for (const auto& c : cells) {
            msg += " " + c.spec.name() + ": " +
                   (c.error.empty() ? (c.fit ? c.fit->warning : std::string("failed")) : c.error) + ";";
        }
        throw Error(msg);
    }
    OrderSelection sel{best->spec, *best->fit, {}};
    sel.cells = std::move(cells);
    return sel;
}

OrderSelection select_order(const QuarterlySeries& series, const std::optional<QuarterlySeries>& exog,
                            const std::vector<std::pair<int, int>>& grid,
                            const ArmaFitOptions& opts)
{
    if (series.kind() != SeriesKind::GrowthRate) {
        throw DomainError("select_order expects a growth-rate series");
    }
    std::span<const double> z;
    if (exog) {
        if (exog->start() != series.start() || exog->size() != series.size()) {
            throw AlignmentError("exogenous series '" + exog->label() + "' is not aligned with '" +
                                 series.label() + "'");
        }
        z = exog->values();
    }
    auto sel = select_order(series.values(), z, grid, opts);
    sel.fit.sample_window = series.range();
    for (auto& c : sel.cells) {
        if (c.fit) c.fit->sample_window = series.range();
    }
    return sel;
}

// ---------------------------------------------------------------- forecasting

std::vector<double> arma_innovations(const ArmaFit& fit, std::span<const double> history,
                                     std::span<const double> exog_history)
{
    if (fit.beta_exog && exog_history.size() != history.size()) {
        throw AlignmentError("ARMAX innovations need exogenous history aligned with the series");
    }
    if (!fit.beta_exog) exog_history = {};
    return css_objective(fit.params(), history, exog_history, fit.presample_mean).innovations;
}

std::vector<double> arma_forecast(const ArmaFit& fit, std::span<const double> history,
                                  std::span<const double> exog_history,
                                  std::span<const double> exog_future, int h)
{
    if (h < 1) throw DomainError("forecast horizon must be positive");
    const auto r = fit.phi.size();
    const auto m = fit.theta.size();
    if (history.size() < std::max<std::size_t>({r, m, 1})) {
        throw InsufficientDataError("forecast history shorter than the model order");
    }
    if (fit.beta_exog && exog_future.size() < static_cast<std::size_t>(h)) {
        throw AlignmentError("ARMAX forecast needs " + std::to_string(h) +
                             " future exogenous values, got " + std::to_string(exog_future.size()));
    }
    const auto eps = arma_innovations(fit, history, exog_history);
    const std::size_t n = history.size();
    std::vector<double> xs(history.begin(), history.end());
    std::vector<double> es(eps.begin(), eps.end());
    xs.resize(n + static_cast<std::size_t>(h));
    es.resize(n + static_cast<std::size_t>(h), 0.0);
    std::vector<double> out(static_cast<std::size_t>(h));
    for (std::size_t step = 0; step < static_cast<std::size_t>(h); ++step) {
        const std::size_t t = n + step;
        double pred = fit.intercept;
        if (fit.beta_exog) pred += *fit.beta_exog * exog_future[step];
        for (std::size_t j = 1; j <= r; ++j) {
            pred += fit.phi[j - 1] * (t >= j ? xs[t - j] : fit.presample_mean);
        }
        for (std::size_t j = 1; j <= m && j <= t; ++j) pred += fit.theta[j - 1] * es[t - j];
        xs[t] = pred;
        out[step] = pred;
    }
    return out;
}

std::vector<double> psi_weights(std::span<const double> phi, std::span<const double> theta, int count)
{
    std::vector<double> psi(static_cast<std::size_t>(std::max(count, 0)), 0.0);
    for (std::size_t j = 0; j < psi.size(); ++j) {
        double v = j == 0 ? 1.0 : (j <= theta.size() ? theta[j - 1] : 0.0);
        for (std::size_t i = 1; i <= std::min(j, phi.size()); ++i) v += phi[i - 1] * psi[j - i];
        psi[j] = v;
    }
    return psi;
}

std::vector<double> forecast_bands(const ArmaFit& fit, int h)
{
    const auto psi = psi_weights(fit.phi, fit.theta, h);
    std::vector<double> bands(psi.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) {
        acc += psi[k] * psi[k];
        bands[k] = 2.0 * std::sqrt(fit.sigma2 * acc);
    }
    return bands;
}

}  // namespace hpiconv
