#pragma once

#include "hpiconv/series.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hpiconv {

struct SyntheticRegion {
    std::string name;
    bool stationary;            // MTAR-stationary log ratio, otherwise a random walk
    std::vector<double> beta;   // MTAR coefficients when stationary
    double ratio_sd;
};

struct SyntheticPanel {
    QuarterlySeries national;
    std::vector<QuarterlySeries> regions;
    std::vector<SyntheticRegion> truth;
    std::uint64_t seed;
};

struct SyntheticOptions {
    std::uint64_t seed = 20130101;
    QuarterDate start{1976, 1};
    QuarterDate end{2012, 2};
    QuarterDate base{2000, 1};  // every index equals 100 here
    std::string national_name = "USA";
};

/// Nine Census-division-like regions around a national index whose growth is AR(1).
/// Five log ratios follow a stationary MTAR process and four are random walks.
[[nodiscard]] SyntheticPanel make_synthetic_panel(const SyntheticOptions& opts = {});

}  // namespace hpiconv
