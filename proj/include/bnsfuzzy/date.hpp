#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace bnsfuzzy {

/// Calendar date (proleptic Gregorian), ordered and printable as YYYY-MM-DD.
class Date {
public:
    constexpr Date() = default;
    constexpr Date(int y, unsigned m, unsigned d)
        : ymd_{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}} {}
    constexpr explicit Date(std::chrono::year_month_day ymd) : ymd_{ymd} {}

    constexpr int year() const { return static_cast<int>(ymd_.year()); }
    constexpr unsigned month() const { return static_cast<unsigned>(ymd_.month()); }
    constexpr unsigned day() const { return static_cast<unsigned>(ymd_.day()); }
    constexpr bool ok() const { return ymd_.ok(); }

    /// Days since 1970-01-01.
    long days() const {
        return std::chrono::sys_days{ymd_}.time_since_epoch().count();
    }
    static Date from_days(long n) {
        return Date{std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{n}}}};
    }
    /// 0 = Sunday ... 6 = Saturday.
    unsigned weekday() const {
        return std::chrono::weekday{std::chrono::sys_days{ymd_}}.c_encoding();
    }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
        return buf;
    }

    /// Parses strict `YYYY-MM-DD`; nullopt on any deviation or invalid calendar date.
    static std::optional<Date> parse(std::string_view s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
            return std::nullopt;
        }
        int y = 0;
        unsigned m = 0;
        unsigned d = 0;
        auto field = [&](std::size_t pos, std::size_t len, auto& out) {
            auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, out);
            return ec == std::errc{} && p == s.data() + pos + len;
        };
        if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) {
            return std::nullopt;
        }
        Date out{y, m, d};
        if (!out.ok()) {
            return std::nullopt;
        }
        return out;
    }

    friend constexpr auto operator<=>(const Date& a, const Date& b) {
        return std::chrono::sys_days{a.ymd_} <=> std::chrono::sys_days{b.ymd_};
    }
    friend constexpr bool operator==(const Date&, const Date&) = default;

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::January,
                                     std::chrono::day{1}};
};

}  // namespace bnsfuzzy
