#pragma once

#include <algorithm>
#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dqnpm/error.hpp"
#include "dqnpm/text.hpp"

namespace dqnpm {

/// Calendar date used as an opaque ordered label. No exchange calendar.
struct Date {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;

    auto operator<=>(const Date&) const = default;
};

inline bool parse_date(std::string_view s, Date& out) {
    s = text::trim(s);
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    int y = 0;
    unsigned m = 0, d = 0;
    if (!text::parse_int(s.substr(0, 4), y) || !text::parse_int(s.substr(5, 2), m) ||
        !text::parse_int(s.substr(8, 2), d))
        return false;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return false;
    out = Date{y, m, d};
    return true;
}

inline Date date_from_string(std::string_view s) {
    Date d;
    if (!parse_date(s, d)) throw Error(ErrorKind::format, "bad date '" + std::string(s) + "'");
    return d;
}

inline std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", d.year, d.month, d.day);
    return buf;
}

struct OhlcBar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;

    bool valid() const {
        return open > 0 && high > 0 && low > 0 && close > 0 && low <= std::min(open, close) &&
               high >= std::max(open, close);
    }

    bool operator==(const OhlcBar&) const = default;
};

using BarSeries = std::vector<OhlcBar>;

/// Date-aligned bars for M risky assets. bars[i][t] is asset i at period t.
struct PricePanel {
    std::vector<std::string> assets;
    std::vector<BarSeries> bars;
    std::size_t period_days = 1;

    std::size_t asset_count() const { return assets.size(); }
    std::size_t size() const { return bars.empty() ? 0 : bars.front().size(); }
    bool empty() const { return size() == 0; }
    const OhlcBar& bar(std::size_t asset, std::size_t t) const { return bars[asset][t]; }
    const Date& date(std::size_t t) const { return bars.front()[t].date; }

    /// Periods [first, first + count).
    PricePanel slice(std::size_t first, std::size_t count) const {
        PricePanel out{assets, {}, period_days};
        out.bars.reserve(bars.size());
        for (const auto& series : bars)
            out.bars.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(first),
                                  series.begin() + static_cast<std::ptrdiff_t>(first + count));
        return out;
    }

    bool operator==(const PricePanel&) const = default;
};

/// Parses one asset's CSV text. Columns are located by header name, so
/// extra columns (volume, adjusted close) are ignored. Row numbers in
/// errors count data rows from 1.
inline BarSeries parse_csv(std::string_view contents, const std::string& source = "<csv>") {
    std::vector<std::string> lines;
    {
        std::size_t start = 0;
        while (start <= contents.size()) {
            auto pos = contents.find('\n', start);
            if (pos == std::string_view::npos) pos = contents.size();
            auto line = text::trim(contents.substr(start, pos - start));
            if (!line.empty()) lines.emplace_back(line);
            start = pos + 1;
        }
    }
    if (lines.empty()) throw Error(ErrorKind::format, source + ": empty file");

    const auto header = text::split(lines.front(), ',');
    std::map<std::string, std::size_t> column;
    for (std::size_t i = 0; i < header.size(); ++i) column.emplace(text::lower(header[i]), i);
    std::size_t idx[5];
    const char* required[5] = {"date", "open", "high", "low", "close"};
    for (int k = 0; k < 5; ++k) {
        auto it = column.find(required[k]);
        if (it == column.end())
            throw Error(ErrorKind::format, source + ": missing column '" + required[k] + "'");
        idx[k] = it->second;
    }
    const std::size_t width = *std::max_element(std::begin(idx), std::end(idx)) + 1;

    BarSeries bars;
    bars.reserve(lines.size() - 1);
    std::set<Date> seen;
    for (std::size_t r = 1; r < lines.size(); ++r) {
        const auto where = source + " row " + std::to_string(r);
        const auto fields = text::split(lines[r], ',');
        if (fields.size() < width) throw Error(ErrorKind::format, where + ": too few fields");
        OhlcBar bar;
        if (!parse_date(fields[idx[0]], bar.date))
            throw Error(ErrorKind::format, where + ": bad date '" + fields[idx[0]] + "'");
        double* prices[4] = {&bar.open, &bar.high, &bar.low, &bar.close};
        for (int k = 0; k < 4; ++k)
            if (!text::parse_double(fields[idx[k + 1]], *prices[k]))
                throw Error(ErrorKind::format,
                            where + ": bad " + required[k + 1] + " '" + fields[idx[k + 1]] + "'");
        if (!bar.valid()) throw Error(ErrorKind::data, where + ": inconsistent or non-positive prices");
        if (!seen.insert(bar.date).second)
            throw Error(ErrorKind::data, where + ": duplicate date " + to_string(bar.date));
        bars.push_back(bar);
    }
    std::sort(bars.begin(), bars.end(),
              [](const OhlcBar& a, const OhlcBar& b) { return a.date < b.date; });
    return bars;
}

inline BarSeries load_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "no such file: " + path.string());
    return parse_csv(text::read_file(path), path.string());
}

/// Restricts every series to the dates all of them share.
inline PricePanel align(const std::vector<std::string>& assets, const std::vector<BarSeries>& series) {
    if (series.empty()) throw Error(ErrorKind::alignment, "no assets");
    if (assets.size() != series.size())
        throw Error(ErrorKind::alignment, "asset names and series differ in count");
    for (std::size_t i = 0; i < series.size(); ++i)
        if (series[i].empty()) throw Error(ErrorKind::alignment, "asset " + assets[i] + " has no bars");

    std::map<Date, std::size_t> hits;
    for (const auto& s : series)
        for (const auto& b : s) ++hits[b.date];
    std::set<Date> common;
    for (const auto& [d, n] : hits)
        if (n == series.size()) common.insert(d);
    if (common.empty()) throw Error(ErrorKind::alignment, "assets share no dates");

    PricePanel panel{assets, {}, 1};
    for (const auto& s : series) {
        BarSeries kept;
        kept.reserve(common.size());
        for (const auto& b : s)
            if (common.count(b.date)) kept.push_back(b);
        std::sort(kept.begin(), kept.end(),
                  [](const OhlcBar& a, const OhlcBar& b) { return a.date < b.date; });
        panel.bars.push_back(std::move(kept));
    }
    return panel;
}

inline PricePanel align(const PricePanel& panel) { return align(panel.assets, panel.bars); }

/// Merges consecutive groups of period_days bars; a trailing partial group
/// is dropped. A merged bar carries the date of its last constituent.
inline PricePanel resample(const PricePanel& panel, std::size_t period_days) {
    if (period_days == 0) throw Error(ErrorKind::parameter, "period_days must be >= 1");
    PricePanel out{panel.assets, {}, panel.period_days * period_days};
    const std::size_t groups = panel.size() / period_days;
    for (const auto& series : panel.bars) {
        BarSeries merged;
        merged.reserve(groups);
        for (std::size_t g = 0; g < groups; ++g) {
            const auto* first = &series[g * period_days];
            const auto* last = &series[g * period_days + period_days - 1];
            OhlcBar bar{last->date, first->open, first->high, first->low, last->close};
            for (const auto* b = first; b <= last; ++b) {
                bar.high = std::max(bar.high, b->high);
                bar.low = std::min(bar.low, b->low);
            }
            merged.push_back(bar);
        }
        out.bars.push_back(std::move(merged));
    }
    return out;
}

struct PanelSplit {
    PricePanel train;
    PricePanel test;
};

/// Train gets every period dated on or before train_end. Both halves must
/// be non-empty.
inline PanelSplit split(const PricePanel& panel, const Date& train_end) {
    if (panel.empty()) throw Error(ErrorKind::range, "empty panel");
    if (train_end < panel.date(0) || !(train_end < panel.date(panel.size() - 1)))
        throw Error(ErrorKind::range, "train_end " + to_string(train_end) + " outside [" +
                                          to_string(panel.date(0)) + ", " +
                                          to_string(panel.date(panel.size() - 1)) + ")");
    std::size_t n_train = 0;
    while (n_train < panel.size() && !(train_end < panel.date(n_train))) ++n_train;
    return {panel.slice(0, n_train), panel.slice(n_train, panel.size() - n_train)};
}

} // namespace dqnpm
