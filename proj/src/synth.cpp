#include "hpiconv/synth.hpp"

#include "hpiconv/random.hpp"
#include "hpiconv/unitroot.hpp"

#include <cmath>

namespace hpiconv {

namespace {

const std::vector<SyntheticRegion>& region_templates()
{
    static const std::vector<SyntheticRegion> regions = {
        {"CENC", true, {-0.06, -0.35, 0.30, 0.10, 0.0, 0.0}, 0.008},
        {"CESC", false, {}, 0.007},
        {"CMAC", false, {}, 0.009},
        {"CMTN", true, {-0.10, -0.25, 0.35, 0.0, 0.10, 0.0}, 0.010},
        {"CNEC", false, {}, 0.011},
        {"CPAC", true, {-0.05, -0.40, 0.40, 0.10, 0.0, -0.10}, 0.012},
        {"CSAC", true, {-0.15, -0.20, 0.25, 0.0, 0.0, 0.0}, 0.008},
        {"CWSC", false, {}, 0.007},
        {"CWNC", true, {-0.08, -0.30, 0.20, 0.15, 0.0, 0.0}, 0.006},
    };
    return regions;
}

std::vector<double> to_index(const std::vector<double>& log_level, std::size_t base)
{
    std::vector<double> v(log_level.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 100.0 * std::exp(log_level[i] - log_level[base]);
    return v;
}

}  // namespace

SyntheticPanel make_synthetic_panel(const SyntheticOptions& opts)
{
    const auto n = static_cast<std::size_t>(opts.end.quarters_since(opts.start)) + 1;
    const auto base = static_cast<std::size_t>(opts.base.quarters_since(opts.start));
    constexpr std::size_t burn = 50;

    // national log growth: AR(1) around 1.2% per quarter
    RandomStream nat_rng(opts.seed, 0);
    std::vector<double> nat_log(n);
    double g = 0.012;
    double level = 0.0;
    for (std::size_t t = 0; t < burn + n; ++t) {
        g = 0.012 + 0.6 * (g - 0.012) + nat_rng.normal(0.0, 0.008);
        level += g;
        if (t >= burn) nat_log[t - burn] = level;
    }

    SyntheticPanel panel{QuarterlySeries(opts.start, to_index(nat_log, base), opts.national_name,
                                         SeriesKind::IndexLevel),
                         {}, region_templates(), opts.seed};
    const auto& templates = region_templates();
    for (std::size_t r = 0; r < templates.size(); ++r) {
        const auto& spec = templates[r];
        RandomStream rng(opts.seed, r + 1);
        const int lags = spec.stationary ? static_cast<int>(spec.beta.size()) - 2 : 0;
        std::vector<double> y(burn + n, 0.0);
        std::vector<double> dy(burn + n, 0.0);
        for (std::size_t t = 1; t < burn + n; ++t) {
            double d = rng.normal(0.0, spec.ratio_sd);
            if (spec.stationary) {
                d += (heaviside(dy[t - 1]) ? spec.beta[0] : spec.beta[1]) * y[t - 1];
                for (int j = 1; j <= lags && static_cast<std::size_t>(j) < t; ++j) {
                    d += spec.beta[static_cast<std::size_t>(j) + 1] * dy[t - static_cast<std::size_t>(j)];
                }
            }
            dy[t] = d;
            y[t] = y[t - 1] + d;
        }
        std::vector<double> reg_log(n);
        for (std::size_t t = 0; t < n; ++t) reg_log[t] = nat_log[t] + y[t + burn];
        panel.regions.emplace_back(opts.start, to_index(reg_log, base), spec.name, SeriesKind::IndexLevel);
    }
    return panel;
}

}  // namespace hpiconv
