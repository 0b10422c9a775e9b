#include "hpiconv/series.hpp"

#include "hpiconv/error.hpp"
#include "hpiconv/format.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace hpiconv {

// ---------------------------------------------------------------- QuarterDate

QuarterDate::QuarterDate(int year, int quarter) : year_(year), quarter_(quarter)
{
    if (quarter < 1 || quarter > 4) {
        throw DomainError("quarter must be in 1..4, got " + std::to_string(quarter));
    }
}

namespace {

std::optional<int> parse_int(std::string_view s)
{
    int v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
    return v;
}

std::string_view trim(std::string_view s)
{
    const auto ws = " \t\r\n\"'";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

}  // namespace

QuarterDate QuarterDate::parse(std::string_view text)
{
    const auto s = trim(text);
    auto fail = [&]() -> QuarterDate {
        throw ParseError("cannot parse quarter date '" + std::string(s) + "'");
    };
    if (s.size() == 6 && (s[4] == 'Q' || s[4] == 'q')) {
        auto y = parse_int(s.substr(0, 4));
        auto q = parse_int(s.substr(5, 1));
        if (!y || !q || *q < 1 || *q > 4) return fail();
        return {*y, *q};
    }
    if ((s.size() == 7 || s.size() == 10) && s[4] == '-') {
        auto y = parse_int(s.substr(0, 4));
        auto m = parse_int(s.substr(5, 2));
        if (!y || !m || *m < 1 || *m > 12) return fail();
        if (s.size() == 10 && (s[7] != '-' || !parse_int(s.substr(8, 2)))) return fail();
        return {*y, (*m - 1) / 3 + 1};
    }
    return fail();
}

std::string QuarterDate::to_string() const
{
    return std::to_string(year_) + "Q" + std::to_string(quarter_);
}

QuarterDate QuarterDate::plus(int quarters) const
{
    const int ord = ordinal() + quarters;
    // floor division keeps negative years well defined
    const int y = ord >= 0 ? ord / 4 : -((-ord + 3) / 4);
    return {y, ord - y * 4 + 1};
}

int QuarterDate::quarters_since(QuarterDate other) const noexcept
{
    return ordinal() - other.ordinal();
}

std::string_view to_string(SeriesKind kind) noexcept
{
    switch (kind) {
    case SeriesKind::IndexLevel: return "IndexLevel";
    case SeriesKind::GrowthRate: return "GrowthRate";
    case SeriesKind::LogRatio: return "LogRatio";
    }
    return "?";
}

// ------------------------------------------------------------ QuarterlySeries

QuarterlySeries::QuarterlySeries(QuarterDate start, std::vector<double> values, std::string label,
                                 SeriesKind kind)
    : start_(start), values_(std::move(values)), label_(std::move(label)), kind_(kind)
{
    if (values_.empty()) throw InsufficientDataError("series '" + label_ + "' is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (!std::isfinite(v)) {
            throw DomainError("non-finite value in series '" + label_ + "' at " +
                              date_at(i).to_string());
        }
        if (kind_ == SeriesKind::IndexLevel && v <= 0.0) {
            throw DomainError("non-positive index value " + format_double(v) + " in series '" +
                              label_ + "' at " + date_at(i).to_string());
        }
    }
}

std::optional<std::size_t> QuarterlySeries::index_of(QuarterDate d) const
{
    const int k = d.quarters_since(start_);
    if (k < 0 || static_cast<std::size_t>(k) >= values_.size()) return std::nullopt;
    return static_cast<std::size_t>(k);
}

double QuarterlySeries::at(QuarterDate d) const
{
    const auto i = index_of(d);
    if (!i) {
        throw DomainError("date " + d.to_string() + " outside series '" + label_ + "' (" +
                          start_.to_string() + ".." + end().to_string() + ")");
    }
    return values_[*i];
}

QuarterlySeries QuarterlySeries::slice(QuarterDate first, QuarterDate last) const
{
    const auto i0 = index_of(first);
    const auto i1 = index_of(last);
    if (!i0 || !i1 || *i1 < *i0) {
        throw DomainError("slice " + first.to_string() + ".." + last.to_string() +
                          " not inside series '" + label_ + "'");
    }
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(*i0),
                          values_.begin() + static_cast<std::ptrdiff_t>(*i1) + 1);
    return {first, std::move(v), label_, kind_};
}

QuarterlySeries QuarterlySeries::relabel(std::string label) const
{
    return {start_, values_, std::move(label), kind_};
}

AlignedPair::AlignedPair(QuarterlySeries regional, QuarterlySeries national)
    : regional_(std::move(regional)), national_(std::move(national))
{
    if (regional_.start() != national_.start() || regional_.size() != national_.size()) {
        throw AlignmentError("series '" + regional_.label() + "' (" +
                             regional_.start().to_string() + ", n=" +
                             std::to_string(regional_.size()) + ") and '" + national_.label() +
                             "' (" + national_.start().to_string() +
                             ", n=" + std::to_string(national_.size()) + ") are not aligned");
    }
    if (regional_.kind() != national_.kind() || regional_.kind() == SeriesKind::LogRatio) {
        throw AlignmentError("aligned pair requires two index levels or two growth rates");
    }
}

// ------------------------------------------------------------------------ CSV

namespace {

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        out.push_back(trim(line.substr(pos, c == std::string_view::npos ? line.npos : c - pos)));
        if (c == std::string_view::npos) break;
        pos = c + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s)
{
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return v;
}

}  // namespace

SeriesMap read_csv(std::istream& in, std::string_view date_column,
                   const std::vector<std::string>& value_columns, std::string_view source_name)
{
    const std::string src(source_name);
    std::string line;
    std::vector<std::string> header;
    std::vector<std::pair<QuarterDate, std::vector<std::string>>> rows;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        auto cells = split_commas(t);
        if (header.empty()) {
            for (auto c : cells) header.emplace_back(c);
            continue;
        }
        if (cells.size() != header.size()) {
            throw ParseError(src + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, found " +
                             std::to_string(cells.size()));
        }
        std::vector<std::string> vals(cells.begin(), cells.end());
        rows.emplace_back(QuarterDate::parse(cells.front()), std::move(vals));
    }
    if (header.empty()) throw ParseError(src + ": missing header row");

    auto column_index = [&](std::string_view name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw MissingColumnError("column '" + std::string(name) + "' not found in " + src);
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t date_idx = date_column.empty() ? 0 : column_index(date_column);
    if (date_idx != 0) {
        for (auto& [d, cells] : rows) d = QuarterDate::parse(cells[date_idx]);
    }

    std::vector<std::string> wanted = value_columns;
    if (wanted.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j != date_idx) wanted.push_back(header[j]);
        }
    }
    std::vector<std::size_t> idx;
    for (const auto& w : wanted) idx.push_back(column_index(w));

    if (rows.empty()) throw InsufficientDataError(src + ": no data rows");
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto prev = rows[i - 1].first;
        const auto cur = rows[i].first;
        if (cur == prev) throw ContiguityError(src + ": duplicate quarter " + cur.to_string());
        if (cur != prev.next()) {
            throw ContiguityError(src + ": missing quarter " + prev.next().to_string());
        }
    }

    SeriesMap out;
    for (std::size_t c = 0; c < wanted.size(); ++c) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (const auto& [d, cells] : rows) {
            const auto x = parse_double(cells[idx[c]]);
            if (!x) {
                throw ParseError(src + ": missing or non-numeric value '" + cells[idx[c]] +
                                 "' in column '" + wanted[c] + "' at " + d.to_string());
            }
            v.push_back(*x);
        }
        out.insert_or_assign(wanted[c], QuarterlySeries(rows.front().first, std::move(v),
                                                        wanted[c], SeriesKind::IndexLevel));
    }
    return out;
}

SeriesMap load_csv(const std::filesystem::path& path, std::string_view date_column,
                   const std::vector<std::string>& value_columns)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return read_csv(in, date_column, value_columns, path.string());
}

void write_csv(std::ostream& out, const std::vector<QuarterlySeries>& columns,
               std::string_view date_header)
{
    if (columns.empty()) return;
    const auto& first = columns.front();
    for (const auto& c : columns) {
        if (c.start() != first.start() || c.size() != first.size()) {
            throw AlignmentError("write_csv: column '" + c.label() + "' not aligned with '" +
                                 first.label() + "'");
        }
    }
    out << date_header;
    for (const auto& c : columns) out << ',' << c.label();
    out << '\n';
    for (std::size_t i = 0; i < first.size(); ++i) {
        out << first.date_at(i).to_string();
        for (const auto& c : columns) out << ',' << format_double(c[i]);
        out << '\n';
    }
}

// ----------------------------------------------------------------- transforms

QuarterlySeries hpa(const QuarterlySeries& index)
{
    if (index.kind() != SeriesKind::IndexLevel) {
        throw DomainError("hpa requires an index-level series, got " +
                          std::string(to_string(index.kind())));
    }
    if (index.size() < 2) {
        throw InsufficientDataError("hpa needs at least 2 observations in '" + index.label() + "'");
    }
    std::vector<double> g(index.size() - 1);
    for (std::size_t i = 1; i < index.size(); ++i) g[i - 1] = std::log(index[i] / index[i - 1]);
    return {index.start().next(), std::move(g), index.label(), SeriesKind::GrowthRate};
}

QuarterlySeries log_ratio(const AlignedPair& pair)
{
    const auto& reg = pair.regional();
    const auto& nat = pair.national();
    if (reg.kind() != SeriesKind::IndexLevel) {
        throw AlignmentError("log_ratio requires index-level series");
    }
    std::vector<double> y(reg.size());
    // difference of logs keeps log_ratio(a, b) == -log_ratio(b, a) exactly
    for (std::size_t i = 0; i < reg.size(); ++i) y[i] = std::log(reg[i]) - std::log(nat[i]);
    return {reg.start(), std::move(y), reg.label() + "/" + nat.label(), SeriesKind::LogRatio};
}

DemeanedRatio demean(const QuarterlySeries& series, std::optional<DateRange> window)
{
    if (series.kind() != SeriesKind::LogRatio) {
        throw DomainError("demean expects a log-ratio series");
    }
    const DateRange w = window.value_or(series.range());
    if (w.length() == 0) throw InsufficientDataError("demean: empty window");
    const auto i0 = series.index_of(w.first);
    const auto i1 = series.index_of(w.last);
    if (!i0 || !i1) {
        throw DomainError("demean window " + w.first.to_string() + ".." + w.last.to_string() +
                          " not inside series '" + series.label() + "'");
    }
    const auto v = series.values();
    const auto sub = v.subspan(*i0, *i1 - *i0 + 1);
    const double mean = std::accumulate(sub.begin(), sub.end(), 0.0) / static_cast<double>(sub.size());
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x -= mean;
    // second pass removes the rounding residue left by the first mean
    double resid = 0.0;
    for (std::size_t i = *i0; i <= *i1; ++i) resid += out[i];
    resid /= static_cast<double>(sub.size());
    for (auto& x : out) x -= resid;
    return {QuarterlySeries(series.start(), std::move(out), series.label(), SeriesKind::LogRatio),
            mean + resid, w};
}

QuarterlySeries diff(const QuarterlySeries& series)
{
    if (series.size() < 2) {
        throw InsufficientDataError("diff needs at least 2 observations in '" + series.label() +
                                    "'");
    }
    std::vector<double> d(series.size() - 1);
    for (std::size_t i = 1; i < series.size(); ++i) d[i - 1] = series[i] - series[i - 1];
    const auto kind = series.kind() == SeriesKind::IndexLevel ? SeriesKind::GrowthRate : series.kind();
    return {series.start().next(), std::move(d), series.label(), kind};
}

SeriesSummary describe(std::span<const double> values)
{
    if (values.empty()) throw InsufficientDataError("describe: empty series");
    const auto n = static_cast<double>(values.size());
    SeriesSummary s{};
    s.count = values.size();
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    s.min = *mn;
    s.max = *mx;
    s.last = values.back();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    s.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : values) {
        const double d = x - s.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    s.std_dev = values.size() > 1 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double scale = std::max(1.0, std::abs(s.mean));
    if (m2 <= 1e-28 * scale * scale) {
        s.degenerate = true;
        s.std_dev = 0.0;
        s.skewness = 0.0;
        s.excess_kurtosis = 0.0;
    } else {
        s.degenerate = false;
        s.skewness = m3 / std::pow(m2, 1.5);
        s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return s;
}

SeriesSummary describe(const QuarterlySeries& series) { return describe(series.values()); }

}  // namespace hpiconv
