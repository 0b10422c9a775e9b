#pragma once

#include "hpiconv/forecast.hpp"
#include "hpiconv/linreg.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hpiconv {

/// value^2 = bias^2 + error_variance, both moments with a 1/n denominator.
struct RmsfeResult {
    double value = 0.0;
    int n = 0;
    double bias = 0.0;           // mean of predicted - realized
    double error_variance = 0.0;
};

[[nodiscard]] RmsfeResult rmsfe(std::span<const double> predicted, std::span<const double> realized);
[[nodiscard]] RmsfeResult rmsfe(const ForecastPanel& panel);

/// RMSFE of one model at each horizon.
struct ModelScores {
    std::string model;
    std::vector<int> horizons;
    std::vector<double> rmsfe;
};

struct PairwiseWinner {
    std::string first;
    std::string second;
    std::vector<int> horizons;
    std::vector<double> rmsfe_first;
    std::vector<double> rmsfe_second;
    std::vector<std::string> horizon_winner;  // model name or "tie"
    std::string winner;                       // model name or "tie"
    std::string rule;                         // "majority", "longest-horizon", "tie"
};

/// Lower RMSFE wins each horizon; a strict majority of horizons decides the pair,
/// otherwise the model winning the longest decisive horizon, otherwise a tie.
[[nodiscard]] PairwiseWinner compare_pair(const ModelScores& a, const ModelScores& b);

struct WinnerTable {
    std::string region;
    std::vector<ModelScores> scores;
    std::vector<PairwiseWinner> pairs;  // every unordered pair in input order
};

/// panels[m] holds one panel per horizon for model m; origins and targets must agree across models.
[[nodiscard]] WinnerTable winner_table(const std::string& region,
                                       const std::vector<std::vector<ForecastPanel>>& panels);

enum class Verdict { Model1Encompasses, Model2Encompasses, Inconclusive };
[[nodiscard]] std::string to_string(Verdict v);

struct EncompassingResult {
    std::optional<OlsFit> regression;  // empty when the design is collinear
    FTestResult test1;  // H0: a0 = 0, a1 = 1, a2 = 0
    FTestResult test2;  // H0: a0 = 0, a1 = 0, a2 = 1
    bool reject1 = false;
    bool reject2 = false;
    double confidence = 0.95;
    Verdict verdict = Verdict::Inconclusive;
    bool collinear = false;
    std::vector<std::string> caveats;
};

/// Regression realized = a0 + a1 f1 + a2 f2 with two joint F-tests at `confidence`.
[[nodiscard]] EncompassingResult encompassing_test(std::span<const double> realized,
                                                   std::span<const double> f1,
                                                   std::span<const double> f2,
                                                   double confidence = 0.95);

/// Per-horizon outcome expressed with model names ("" for inconclusive).
struct OverallVerdict {
    std::string model;  // empty when inconclusive
    bool conflict = false;
};

/// All conclusive verdicts agree -> that model; none -> inconclusive; disagreement -> inconclusive + conflict.
[[nodiscard]] OverallVerdict overall_encompassing(const std::vector<std::string>& per_horizon);

}  // namespace hpiconv
