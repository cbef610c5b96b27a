#include "bugcast/date.hpp"

#include <charconv>
#include <cstdio>

#include "bugcast/error.hpp"

namespace bugcast {

namespace {

template <class Int>
bool parse_digits(std::string_view text, std::size_t pos, std::size_t len, Int& out) {
    if (pos + len > text.size()) return false;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, out);
    return ec == std::errc{};
}

bool parse_ymd(std::string_view text, std::chrono::year_month_day& out) {
    int y = 0;
    unsigned m = 0, d = 0;
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return false;
    if (!parse_digits(text, 0, 4, y) || !parse_digits(text, 5, 2, m) || !parse_digits(text, 8, 2, d)) return false;
    out = std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    return out.ok();
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw Error(ErrorKind::Validation, "invalid calendar date " + std::to_string(year) + "-" +
                                               std::to_string(month) + "-" + std::to_string(day));
    }
    return Date(std::chrono::sys_days{ymd});
}

Date Date::parse(std::string_view text) {
    std::chrono::year_month_day ymd;
    if (text.size() != 10 || !parse_ymd(text, ymd)) {
        throw ParseError("expected date YYYY-MM-DD", std::string(text.substr(0, 40)));
    }
    return Date(std::chrono::sys_days{ymd});
}

std::string Date::to_string() const {
    std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    return buf;
}

int Date::year() const { return static_cast<int>(std::chrono::year_month_day{days_}.year()); }
unsigned Date::month() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.month()); }
unsigned Date::day() const { return static_cast<unsigned>(std::chrono::year_month_day{days_}.day()); }

Date Date::monday() const {
    std::chrono::weekday wd{days_};
    const auto offset = (wd - std::chrono::Monday).count();  // 0..6
    return Date(days_ - std::chrono::days(offset));
}

bool Date::is_monday() const { return std::chrono::weekday{days_} == std::chrono::Monday; }

Timestamp parse_timestamp(std::string_view text) {
    std::chrono::year_month_day ymd;
    int hh = 0, mm = 0, ss = 0;
    const bool ok = text.size() == 20 && parse_ymd(text, ymd) && text[10] == 'T' && text[13] == ':' &&
                    text[16] == ':' && text[19] == 'Z' && parse_digits(text, 11, 2, hh) &&
                    parse_digits(text, 14, 2, mm) && parse_digits(text, 17, 2, ss) && hh < 24 && mm < 60 && ss < 61;
    if (!ok) throw ParseError("expected timestamp YYYY-MM-DDTHH:MM:SSZ", std::string(text.substr(0, 40)));
    return std::chrono::sys_days{ymd} + std::chrono::hours(hh) + std::chrono::minutes(mm) + std::chrono::seconds(ss);
}

std::string format_timestamp(Timestamp ts) {
    const auto day = std::chrono::floor<std::chrono::days>(ts);
    const std::chrono::hh_mm_ss tod{ts - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", Date(day).to_string().c_str(),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

}  // namespace bugcast
