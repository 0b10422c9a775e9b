#include "hpiconv/eval.hpp"

#include "hpiconv/error.hpp"

#include <cmath>

namespace hpiconv {

RmsfeResult rmsfe(std::span<const double> predicted, std::span<const double> realized)
{
    if (predicted.size() != realized.size()) {
        throw AlignmentError("rmsfe: " + std::to_string(predicted.size()) + " predictions vs " +
                             std::to_string(realized.size()) + " realized values");
    }
    if (predicted.empty()) throw InsufficientDataError("rmsfe: empty forecast panel");
    const auto n = static_cast<double>(predicted.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) sum += predicted[i] - realized[i];
    const double bias = sum / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double d = predicted[i] - realized[i] - bias;
        ss += d * d;
    }
    RmsfeResult r;
    r.n = static_cast<int>(predicted.size());
    r.bias = bias;
    r.error_variance = ss / n;
    // assembled from the two moments so the decomposition is exact by construction
    r.value = std::sqrt(bias * bias + r.error_variance);
    return r;
}

RmsfeResult rmsfe(const ForecastPanel& panel)
{
    std::vector<double> p, a;
    p.reserve(panel.entries.size());
    a.reserve(panel.entries.size());
    for (const auto& e : panel.entries) {
        p.push_back(e.predicted);
        a.push_back(e.realized);
    }
    if (p.empty()) {
        throw InsufficientDataError("rmsfe: panel for " + panel.model_name + " at horizon " +
                                    std::to_string(panel.horizon) + " is empty");
    }
    return rmsfe(p, a);
}

PairwiseWinner compare_pair(const ModelScores& a, const ModelScores& b)
{
    if (a.horizons != b.horizons || a.rmsfe.size() != a.horizons.size() ||
        b.rmsfe.size() != b.horizons.size()) {
        throw AlignmentError("winner table: " + a.model + " and " + b.model +
                             " are scored on different horizons");
    }
    PairwiseWinner w{a.model, b.model, a.horizons, a.rmsfe, b.rmsfe, {}, "tie", "tie"};
    int wins_a = 0;
    int wins_b = 0;
    std::string longest = "tie";
    for (std::size_t i = 0; i < a.horizons.size(); ++i) {
        std::string hw = "tie";
        if (a.rmsfe[i] < b.rmsfe[i]) {
            hw = a.model;
            ++wins_a;
        } else if (b.rmsfe[i] < a.rmsfe[i]) {
            hw = b.model;
            ++wins_b;
        }
        if (hw != "tie") longest = hw;  // horizons ascend
        w.horizon_winner.push_back(hw);
    }
    const auto half = static_cast<int>(a.horizons.size()) / 2;
    if (wins_a > half) {
        w.winner = a.model;
        w.rule = "majority";
    } else if (wins_b > half) {
        w.winner = b.model;
        w.rule = "majority";
    } else if (longest != "tie") {
        w.winner = longest;
        w.rule = "longest-horizon";
    }
    return w;
}

WinnerTable winner_table(const std::string& region, const std::vector<std::vector<ForecastPanel>>& panels)
{
    WinnerTable table;
    table.region = region;
    for (std::size_t m = 0; m < panels.size(); ++m) {
        ModelScores s;
        for (std::size_t k = 0; k < panels[m].size(); ++k) {
            const auto& p = panels[m][k];
            if (s.model.empty()) s.model = p.model_name;
            if (m > 0) {
                const auto& ref = panels[0].at(k);
                bool same = ref.horizon == p.horizon && ref.entries.size() == p.entries.size();
                for (std::size_t i = 0; same && i < p.entries.size(); ++i) {
                    same = ref.entries[i].origin == p.entries[i].origin &&
                           ref.entries[i].target == p.entries[i].target;
                }
                if (!same || panels[m].size() != panels[0].size()) {
                    throw AlignmentError(region + ": panels for " + p.model_name + " and " +
                                         ref.model_name + " at horizon " +
                                         std::to_string(p.horizon) + " cover different origins");
                }
            }
            s.horizons.push_back(p.horizon);
            s.rmsfe.push_back(rmsfe(p).value);
        }
        table.scores.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < table.scores.size(); ++i) {
        for (std::size_t j = i + 1; j < table.scores.size(); ++j) {
            table.pairs.push_back(compare_pair(table.scores[i], table.scores[j]));
        }
    }
    return table;
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Model1Encompasses: return "model1";
    case Verdict::Model2Encompasses: return "model2";
    case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

EncompassingResult encompassing_test(std::span<const double> realized, std::span<const double> f1,
                                     std::span<const double> f2, double confidence)
{
    if (realized.size() != f1.size() || realized.size() != f2.size()) {
        throw AlignmentError("encompassing test: series lengths differ");
    }
    if (realized.size() < 5) {
        throw InsufficientDataError("encompassing test needs at least 5 observations, got " +
                                    std::to_string(realized.size()));
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw DomainError("encompassing test: confidence must lie in (0, 1)");
    }
    const auto n = static_cast<Eigen::Index>(realized.size());
    Eigen::MatrixXd x(n, 3);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        x(i, 0) = 1.0;
        x(i, 1) = f1[k];
        x(i, 2) = f2[k];
        y(i) = realized[k];
    }

    EncompassingResult res;
    res.confidence = confidence;
    if (realized.size() < 10) {
        res.caveats.push_back("only " + std::to_string(realized.size()) +
                              " observations; F-test size is unreliable");
    }
    try {
        const DesignMatrix design(x, {"const", "f1", "f2"}, true);
        const auto fit = ols_fit(design, y);
        Eigen::MatrixXd r = Eigen::MatrixXd::Identity(3, 3);
        res.test1 = f_test_restrictions(fit, design, y, r, Eigen::Vector3d(0.0, 1.0, 0.0));
        res.test2 = f_test_restrictions(fit, design, y, r, Eigen::Vector3d(0.0, 0.0, 1.0));
        res.regression = fit;
    } catch (const SingularityError& e) {
        res.collinear = true;
        res.caveats.push_back(std::string("collinear forecasts: ") + e.what());
        return res;
    }
    const double alpha = 1.0 - confidence;
    res.reject1 = res.test1.p_value < alpha;
    res.reject2 = res.test2.p_value < alpha;
    if (!res.reject1 && res.reject2) {
        res.verdict = Verdict::Model1Encompasses;
    } else if (res.reject1 && !res.reject2) {
        res.verdict = Verdict::Model2Encompasses;
    }
    return res;
}

OverallVerdict overall_encompassing(const std::vector<std::string>& per_horizon)
{
    OverallVerdict out;
    for (const auto& v : per_horizon) {
        if (v.empty()) continue;
        if (out.model.empty() && !out.conflict) {
            out.model = v;
        } else if (v != out.model) {
            out.conflict = true;
            out.model.clear();
        }
    }
    return out;
}

}  // namespace hpiconv
