#include "bugcast/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <json.hpp>

#include "bugcast/error.hpp"
#include "bugcast/io.hpp"

namespace bugcast {

RawBugRecords::RawBugRecords(std::vector<BugRecord> records) : records_(std::move(records)) {
    std::sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const auto& r = records_[i];
        if (r.id == 0) throw Error(ErrorKind::Validation, "bug id must be positive");
        if (i > 0 && records_[i - 1].id == r.id) {
            throw Error(ErrorKind::Validation, "duplicate bug id " + std::to_string(r.id));
        }
        if (r.resolved && *r.resolved < r.created) {
            throw Error(ErrorKind::Validation, "bug " + std::to_string(r.id) + " resolved before it was created");
        }
    }
}

std::string to_string(SeriesLabel label) { return label == SeriesLabel::Arrival ? "arrival" : "resolved"; }

SeriesLabel parse_series_label(std::string_view text) {
    if (text == "arrival") return SeriesLabel::Arrival;
    if (text == "resolved") return SeriesLabel::Resolved;
    throw Error(ErrorKind::Validation, "series label must be arrival or resolved, got '" + std::string(text) + "'");
}

WeeklySeries::WeeklySeries(Date first_week, std::vector<std::int64_t> counts, SeriesLabel label)
    : first_week_(first_week), counts_(std::move(counts)), label_(label) {
    if (!first_week_.is_monday()) {
        throw Error(ErrorKind::Validation, "week start " + first_week_.to_string() + " is not a Monday");
    }
    if (counts_.empty()) throw Error(ErrorKind::Validation, "weekly series must hold at least one week");
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] < 0) {
            throw Error(ErrorKind::Validation, "negative count for week " + week_start(i).to_string());
        }
    }
}

std::vector<Date> WeeklySeries::week_starts() const {
    std::vector<Date> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(week_start(i));
    return out;
}

std::vector<double> WeeklySeries::values() const { return {counts_.begin(), counts_.end()}; }

std::optional<std::size_t> WeeklySeries::index_of(Date week) const {
    const auto days = first_week_.days_until(week);
    if (days < 0 || days % 7 != 0) return std::nullopt;
    const auto idx = static_cast<std::size_t>(days / 7);
    if (idx >= size()) return std::nullopt;
    return idx;
}

WeeklySeries WeeklySeries::head(std::size_t n) const {
    if (n == 0 || n > size()) throw Error(ErrorKind::InvalidRange, "head length out of range");
    return WeeklySeries(first_week_, {counts_.begin(), counts_.begin() + static_cast<std::ptrdiff_t>(n)}, label_);
}

ReleaseCalendar::ReleaseCalendar(std::vector<Release> releases) : releases_(std::move(releases)) {
    std::sort(releases_.begin(), releases_.end(),
              [](const Release& a, const Release& b) { return std::tie(a.date, a.version) < std::tie(b.date, b.version); });
    releases_.erase(std::unique(releases_.begin(), releases_.end(),
                                [](const Release& a, const Release& b) {
                                    return a.date == b.date && a.version == b.version;
                                }),
                    releases_.end());
}

bool ReleaseCalendar::any_between(Date from, Date to) const {
    auto it = std::lower_bound(releases_.begin(), releases_.end(), from,
                               [](const Release& r, Date d) { return r.date < d; });
    return it != releases_.end() && it->date <= to;
}

WeeklySeries aggregate_weekly(const RawBugRecords& records, Date start, Date end, SeriesLabel which) {
    const Date first = start.is_monday() ? start : start.monday().plus_days(7);
    const Date last = end.monday();
    if (end < start || last < first || first.days_until(end) < 6) {
        throw Error(ErrorKind::InvalidRange, "range " + start.to_string() + ".." + end.to_string() +
                                                 " does not span a full Monday-to-Sunday week");
    }
    const auto weeks = static_cast<std::size_t>(first.days_until(last) / 7 + 1);
    std::vector<std::int64_t> counts(weeks, 0);
    for (const auto& r : records.records()) {
        std::optional<Timestamp> when;
        if (which == SeriesLabel::Arrival) {
            when = r.created;
        } else {
            when = r.resolved;
        }
        if (!when) continue;
        const auto days = first.days_until(date_of(*when));
        if (days < 0) continue;
        const auto idx = static_cast<std::size_t>(days / 7);
        if (idx < weeks) ++counts[idx];
    }
    return WeeklySeries(first, std::move(counts), which);
}

WeeklySeries remove_outliers(const WeeklySeries& series, const OutlierSpec& spec) {
    std::vector<std::int64_t> counts(series.counts().begin(), series.counts().end());
    const auto original = counts;
    for (const auto& removal : spec.removals) {
        const auto idx = series.index_of(removal.week_start);
        if (!idx) {
            throw Error(ErrorKind::UnknownWeek,
                        "outlier week " + removal.week_start.to_string() + " is not part of the series");
        }
        const auto i = *idx;
        if (const auto* cap = std::get_if<CapAt>(&removal.rule)) {
            counts[i] = std::min(counts[i], cap->value);
            continue;
        }
        const bool has_prev = i > 0;
        const bool has_next = i + 1 < counts.size();
        if (has_prev && has_next) {
            counts[i] = static_cast<std::int64_t>(std::llround(0.5 * static_cast<double>(original[i - 1] + original[i + 1])));
        } else if (has_prev) {
            counts[i] = original[i - 1];
        } else if (has_next) {
            counts[i] = original[i + 1];
        }
    }
    return WeeklySeries(series.first_week(), std::move(counts), series.label());
}

WeeklySeries parse_series_csv(std::string_view text, SeriesLabel label) {
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "week_start,count") {
        throw Error(ErrorKind::Validation, "row 1: expected header 'week_start,count'");
    }
    std::optional<Date> first;
    std::vector<std::int64_t> counts;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        const auto line = lines[row];
        if (line.empty() && row + 1 == lines.size()) break;
        const auto where = "row " + std::to_string(row + 1);
        const auto fields = split_fields(line);
        if (fields.size() != 2) throw Error(ErrorKind::Validation, where + ": expected 2 columns");
        Date week;
        try {
            week = Date::parse(fields[0]);
        } catch (const ParseError& e) {
            throw Error(ErrorKind::Validation, where + ", column week_start: " + e.what());
        }
        std::int64_t count = 0;
        auto [ptr, ec] = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), count);
        if (ec != std::errc{} || ptr != fields[1].data() + fields[1].size() || fields[1].empty()) {
            throw Error(ErrorKind::Validation, where + ", column count: not an integer '" + std::string(fields[1]) + "'");
        }
        if (count < 0) throw Error(ErrorKind::Validation, where + ", column count: negative count " + std::to_string(count));
        if (!first) {
            if (!week.is_monday()) throw Error(ErrorKind::Validation, where + ", column week_start: not a Monday");
            first = week;
        } else {
            const auto expected = first->plus_days(7 * static_cast<std::int64_t>(counts.size()));
            if (week != expected) {
                if (week > expected) {
                    throw Error(ErrorKind::Validation, where + ": missing week " + expected.to_string());
                }
                throw Error(ErrorKind::Validation, where + ", column week_start: expected " + expected.to_string() +
                                                       ", got " + week.to_string());
            }
        }
        counts.push_back(count);
    }
    if (!first) throw Error(ErrorKind::Validation, "series CSV holds no rows");
    return WeeklySeries(*first, std::move(counts), label);
}

WeeklySeries load_series_csv(const std::filesystem::path& path, SeriesLabel label) {
    try {
        return parse_series_csv(read_file(path), label);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

std::string format_series_csv(const WeeklySeries& series) {
    std::string out = "week_start,count\n";
    out.reserve(out.size() + series.size() * 16);
    for (std::size_t i = 0; i < series.size(); ++i) {
        out += series.week_start(i).to_string();
        out += ',';
        out += std::to_string(series.counts()[i]);
        out += '\n';
    }
    return out;
}

void save_series_csv(const WeeklySeries& series, const std::filesystem::path& path) {
    write_file_atomic(path, format_series_csv(series));
}

ReleaseCalendar parse_release_calendar(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "version,release_date") {
        throw Error(ErrorKind::Validation, "row 1: expected header 'version,release_date'");
    }
    std::vector<Release> releases;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (lines[row].empty()) continue;
        const auto fields = split_fields(lines[row]);
        const auto where = "row " + std::to_string(row + 1);
        if (fields.size() != 2) throw Error(ErrorKind::Validation, where + ": expected 2 columns");
        try {
            releases.push_back({std::string(fields[0]), Date::parse(fields[1])});
        } catch (const ParseError& e) {
            throw Error(ErrorKind::Validation, where + ", column release_date: " + e.what());
        }
    }
    return ReleaseCalendar(std::move(releases));
}

ReleaseCalendar load_release_calendar(const std::filesystem::path& path) {
    try {
        return parse_release_calendar(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

OutlierSpec parse_outlier_spec(std::string_view json_text) {
    OutlierSpec spec;
    try {
        const auto doc = nlohmann::json::parse(json_text);
        for (const auto& item : doc.at("removals")) {
            OutlierRemoval removal{Date::parse(item.at("week_start").get<std::string>()), Interpolate{}};
            const auto rule = item.value("rule", std::string("interpolate"));
            if (rule == "cap") {
                removal.rule = CapAt{item.at("value").get<std::int64_t>()};
            } else if (rule != "interpolate") {
                throw Error(ErrorKind::Validation, "unknown outlier rule '" + rule + "'");
            }
            spec.removals.push_back(removal);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid outlier spec", e.what());
    }
    return spec;
}

OutlierSpec load_outlier_spec(const std::filesystem::path& path) { return parse_outlier_spec(read_file(path)); }

}  // namespace bugcast
