#ifndef SIGDECAY_DATE_HPP
#define SIGDECAY_DATE_HPP

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace sigdecay {

/// Calendar date stored as a day count since 1970-01-01.
class Date {
  public:
    Date() = default;

    static Date from_days(int days) { return Date(days); }

    static std::optional<Date> from_ymd(int year, unsigned month, unsigned day) {
        const std::chrono::year_month_day ymd{std::chrono::year{year},
                                              std::chrono::month{month}, std::chrono::day{day}};
        if (!ymd.ok())
            return std::nullopt;
        return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
    }

    /// Parses strict ISO-8601 "YYYY-MM-DD". Returns nullopt on anything else.
    static std::optional<Date> parse(std::string_view text) {
        if (text.size() != 10 || text[4] != '-' || text[7] != '-')
            return std::nullopt;
        int y = 0;
        unsigned m = 0, d = 0;
        for (int i = 0; i < 4; ++i) {
            if (text[i] < '0' || text[i] > '9')
                return std::nullopt;
            y = y * 10 + (text[i] - '0');
        }
        for (int i = 5; i < 7; ++i) {
            if (text[i] < '0' || text[i] > '9')
                return std::nullopt;
            m = m * 10 + unsigned(text[i] - '0');
        }
        for (int i = 8; i < 10; ++i) {
            if (text[i] < '0' || text[i] > '9')
                return std::nullopt;
            d = d * 10 + unsigned(text[i] - '0');
        }
        return from_ymd(y, m, d);
    }

    int days() const { return days_; }

    int year() const {
        const std::chrono::year_month_day ymd{
            std::chrono::sys_days{std::chrono::days{days_}}};
        return int(ymd.year());
    }

    Date plus_days(int n) const { return Date(days_ + n); }

    std::string to_string() const {
        const std::chrono::year_month_day ymd{
            std::chrono::sys_days{std::chrono::days{days_}}};
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()));
        return buf;
    }

    auto operator<=>(const Date &) const = default;

  private:
    explicit Date(int days) : days_(days) {}
    int days_ = 0;
};

struct StudyWindow {
    Date start;
    Date end;

    bool contains(Date d) const { return start <= d && d <= end; }
    int length_days() const { return end.days() - start.days() + 1; }
};

} // namespace sigdecay

#endif
