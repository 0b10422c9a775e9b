#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hpiconv {

/// Effective settings of one CLI invocation after merging the config file and flags.
struct RunConfig {
    std::string command;
    std::filesystem::path data_path;
    std::string national_column = "USA";
    std::vector<std::string> regional_columns;  // empty: every non-national column
    bool regions_given = false;
    std::string train_end = "2008Q4";
    std::string sample_end;                     // empty: last data quarter
    std::vector<int> horizons{1, 4, 8};
    int ar_max = 4;
    int ma_max = 4;
    int lags = 4;
    std::vector<double> confidence{0.90, 0.95};
    double encompassing_confidence = 0.95;
    std::uint64_t seed = 20130101;
    int replications = 50000;
    std::vector<int> critval_n{100, 200};
    std::string critvals = "published";         // "published", "simulate" or a table path
    std::filesystem::path models_path;          // default <out>/models.json
    std::filesystem::path forecasts_path;       // default <out>/forecasts.json
    std::filesystem::path scenario_path;
    std::filesystem::path output_dir;
    std::vector<std::string> formats{"csv", "json", "svg"};
    unsigned threads = 0;

    void validate() const;
    /// Sorted key=value lines of every setting that can change output content.
    [[nodiscard]] std::string canonical() const;
    /// 16 hex digits of FNV-1a over canonical().
    [[nodiscard]] std::string hash() const;
    [[nodiscard]] bool wants(std::string_view format) const;
};

[[nodiscard]] std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutputDirEnv = "HPICONV_OUT";

/// Entry point shared by the executable and the tests. args[0] is the program name.
/// Returns 0 when every requested output was written, 1 on a stage failure, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hpiconv
