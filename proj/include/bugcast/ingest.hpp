#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bugcast/date.hpp"

namespace bugcast {

struct BugRecord {
    std::uint64_t id = 0;
    Timestamp created{};
    std::optional<Timestamp> resolved;

    friend bool operator==(const BugRecord&, const BugRecord&) = default;
};

/// Bug records sorted by id, ids unique.
class RawBugRecords {
public:
    RawBugRecords() = default;
    /// Sorts by id and validates uniqueness and creation <= resolution.
    explicit RawBugRecords(std::vector<BugRecord> records);

    [[nodiscard]] std::span<const BugRecord> records() const { return records_; }
    [[nodiscard]] std::size_t size() const { return records_.size(); }
    [[nodiscard]] bool empty() const { return records_.empty(); }

    friend bool operator==(const RawBugRecords&, const RawBugRecords&) = default;

private:
    std::vector<BugRecord> records_;
};

enum class SeriesLabel { Arrival, Resolved };

std::string to_string(SeriesLabel label);
SeriesLabel parse_series_label(std::string_view text);

/// Gap-free weekly count series. Weeks start on Monday and are exactly seven days apart.
class WeeklySeries {
public:
    /// Throws ErrorKind::Validation when the week grid or counts are invalid.
    WeeklySeries(Date first_week, std::vector<std::int64_t> counts,
                 SeriesLabel label = SeriesLabel::Arrival);

    [[nodiscard]] std::size_t size() const { return counts_.size(); }
    [[nodiscard]] Date first_week() const { return first_week_; }
    [[nodiscard]] Date last_week() const { return week_start(size() - 1); }
    [[nodiscard]] Date week_start(std::size_t i) const {
        return first_week_.plus_days(7 * static_cast<std::int64_t>(i));
    }
    [[nodiscard]] std::vector<Date> week_starts() const;
    [[nodiscard]] std::span<const std::int64_t> counts() const { return counts_; }
    [[nodiscard]] std::vector<double> values() const;
    [[nodiscard]] SeriesLabel label() const { return label_; }

    /// Index of the week starting on `week`, if present.
    [[nodiscard]] std::optional<std::size_t> index_of(Date week) const;

    /// Leading weeks [0, n).
    [[nodiscard]] WeeklySeries head(std::size_t n) const;

    friend bool operator==(const WeeklySeries&, const WeeklySeries&) = default;

private:
    Date first_week_;
    std::vector<std::int64_t> counts_;
    SeriesLabel label_;
};

struct Release {
    std::string version;
    Date date;

    friend auto operator<=>(const Release&, const Release&) = default;
};

/// Release calendar sorted ascending by date, without duplicate rows.
class ReleaseCalendar {
public:
    ReleaseCalendar() = default;
    explicit ReleaseCalendar(std::vector<Release> releases);

    [[nodiscard]] std::span<const Release> releases() const { return releases_; }
    [[nodiscard]] bool empty() const { return releases_.empty(); }

    /// True when some release falls on [from, to] inclusive.
    [[nodiscard]] bool any_between(Date from, Date to) const;

private:
    std::vector<Release> releases_;
};

struct Interpolate {};
struct CapAt {
    std::int64_t value = 0;
};
using ReplacementRule = std::variant<Interpolate, CapAt>;

struct OutlierRemoval {
    Date week_start;
    ReplacementRule rule;
};

struct OutlierSpec {
    std::vector<OutlierRemoval> removals;
};

/// Weeks covered by [start, end]: every Monday inside the range.
/// Records outside [first Monday, last Monday + 7 days) are not counted.
WeeklySeries aggregate_weekly(const RawBugRecords& records, Date start, Date end, SeriesLabel which);

WeeklySeries remove_outliers(const WeeklySeries& series, const OutlierSpec& spec);

WeeklySeries load_series_csv(const std::filesystem::path& path, SeriesLabel label = SeriesLabel::Arrival);
WeeklySeries parse_series_csv(std::string_view text, SeriesLabel label = SeriesLabel::Arrival);
std::string format_series_csv(const WeeklySeries& series);
void save_series_csv(const WeeklySeries& series, const std::filesystem::path& path);

ReleaseCalendar load_release_calendar(const std::filesystem::path& path);
ReleaseCalendar parse_release_calendar(std::string_view text);

/// JSON document: {"removals": [{"week_start": "YYYY-MM-DD", "rule": "interpolate" | "cap", "value": n}]}
OutlierSpec load_outlier_spec(const std::filesystem::path& path);
OutlierSpec parse_outlier_spec(std::string_view json_text);

}  // namespace bugcast
