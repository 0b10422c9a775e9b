#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hpiconv {

/// Calendar quarter. Ordered lexicographically by (year, quarter).
class QuarterDate {
public:
    QuarterDate(int year, int quarter);

    /// Accepts "1976Q1", "1976q1", "1976-03" and "1976-03-31"; months map to their quarter.
    static QuarterDate parse(std::string_view text);

    [[nodiscard]] int year() const noexcept { return year_; }
    [[nodiscard]] int quarter() const noexcept { return quarter_; }
    [[nodiscard]] std::string to_string() const;

    /// Shift by a signed number of quarters.
    [[nodiscard]] QuarterDate plus(int quarters) const;
    [[nodiscard]] QuarterDate next() const { return plus(1); }

    /// Number of quarters from `other` to *this.
    [[nodiscard]] int quarters_since(QuarterDate other) const noexcept;

    auto operator<=>(const QuarterDate&) const = default;

private:
    [[nodiscard]] int ordinal() const noexcept { return year_ * 4 + (quarter_ - 1); }

    int year_;
    int quarter_;
};

/// Inclusive range of quarters.
struct DateRange {
    QuarterDate first{1970, 1};
    QuarterDate last{1970, 1};

    [[nodiscard]] bool contains(QuarterDate d) const noexcept { return first <= d && d <= last; }
    [[nodiscard]] std::size_t length() const noexcept
    {
        return last < first ? 0 : static_cast<std::size_t>(last.quarters_since(first)) + 1;
    }
};

enum class SeriesKind { IndexLevel, GrowthRate, LogRatio };

[[nodiscard]] std::string_view to_string(SeriesKind kind) noexcept;

/// Contiguous quarterly sequence anchored at a start quarter.
///
/// The constructor enforces non-empty finite values, and strictly positive
/// values for index levels.
class QuarterlySeries {
public:
    QuarterlySeries(QuarterDate start, std::vector<double> values, std::string label,
                    SeriesKind kind);

    [[nodiscard]] QuarterDate start() const noexcept { return start_; }
    [[nodiscard]] QuarterDate end() const { return start_.plus(static_cast<int>(values_.size()) - 1); }
    [[nodiscard]] DateRange range() const { return {start_, end()}; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] SeriesKind kind() const noexcept { return kind_; }

    [[nodiscard]] QuarterDate date_at(std::size_t i) const { return start_.plus(static_cast<int>(i)); }
    [[nodiscard]] std::optional<std::size_t> index_of(QuarterDate d) const;
    /// Value at a date; throws DomainError when the date is outside the series.
    [[nodiscard]] double at(QuarterDate d) const;

    /// Sub-series over [first, last]; the range must lie inside the series.
    [[nodiscard]] QuarterlySeries slice(QuarterDate first, QuarterDate last) const;
    [[nodiscard]] QuarterlySeries relabel(std::string label) const;

private:
    QuarterDate start_;
    std::vector<double> values_;
    std::string label_;
    SeriesKind kind_;
};

/// Regional and national series with identical start, length and kind.
class AlignedPair {
public:
    AlignedPair(QuarterlySeries regional, QuarterlySeries national);

    [[nodiscard]] const QuarterlySeries& regional() const noexcept { return regional_; }
    [[nodiscard]] const QuarterlySeries& national() const noexcept { return national_; }

private:
    QuarterlySeries regional_;
    QuarterlySeries national_;
};

/// Log-ratio series with its mean removed. `mean` is the value that was subtracted.
struct DemeanedRatio {
    QuarterlySeries series;
    double mean;
    DateRange mean_window;
};

struct SeriesSummary {
    std::size_t count;
    double min;
    double max;
    double last;
    double mean;
    double median;
    double std_dev;          // (n-1) denominator
    double skewness;         // m3 / m2^{3/2}
    double excess_kurtosis;  // m4 / m2^2 - 3
    bool degenerate;         // zero variance; skewness and kurtosis reported as 0
};

inline constexpr std::string_view kMomentConvention =
    "std: sample (n-1); skew: m3/m2^1.5; kurtosis: excess m4/m2^2-3 (biased moments)";

using SeriesMap = std::map<std::string, QuarterlySeries>;

/// Reads quarterly columns. An empty `date_column` means the first column; empty
/// `value_columns` selects every column except the date column.
[[nodiscard]] SeriesMap load_csv(const std::filesystem::path& path, std::string_view date_column,
                                 const std::vector<std::string>& value_columns);
[[nodiscard]] SeriesMap read_csv(std::istream& in, std::string_view date_column,
                                 const std::vector<std::string>& value_columns,
                                 std::string_view source_name = "<stream>");

/// Writes aligned series as a date-first CSV with the given column order.
void write_csv(std::ostream& out, const std::vector<QuarterlySeries>& columns,
               std::string_view date_header = "date");

/// Quarterly log growth: ln(v_t / v_{t-1}).
[[nodiscard]] QuarterlySeries hpa(const QuarterlySeries& index);
[[nodiscard]] QuarterlySeries log_ratio(const AlignedPair& pair);
[[nodiscard]] DemeanedRatio demean(const QuarterlySeries& series,
                                   std::optional<DateRange> window = std::nullopt);
[[nodiscard]] QuarterlySeries diff(const QuarterlySeries& series);
[[nodiscard]] SeriesSummary describe(const QuarterlySeries& series);
[[nodiscard]] SeriesSummary describe(std::span<const double> values);

}  // namespace hpiconv
