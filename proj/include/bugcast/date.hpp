#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace bugcast {

/// Calendar date (UTC, day resolution).
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}

    static Date from_ymd(int year, unsigned month, unsigned day);

    /// Parses `YYYY-MM-DD`; throws ParseError on anything else.
    static Date parse(std::string_view text);

    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] int year() const;
    [[nodiscard]] unsigned month() const;
    [[nodiscard]] unsigned day() const;

    /// Monday on or before this date.
    [[nodiscard]] Date monday() const;
    [[nodiscard]] bool is_monday() const;

    [[nodiscard]] Date plus_days(std::int64_t n) const { return Date(days_ + std::chrono::days(n)); }
    [[nodiscard]] std::int64_t days_until(Date other) const {
        return (other.days_ - days_).count();
    }

    [[nodiscard]] std::chrono::sys_days sys_days() const { return days_; }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

using Timestamp = std::chrono::sys_seconds;

/// Parses ISO-8601 UTC timestamps of the form `YYYY-MM-DDTHH:MM:SSZ`.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

inline Date date_of(Timestamp ts) {
    return Date(std::chrono::floor<std::chrono::days>(ts));
}

}  // namespace bugcast
