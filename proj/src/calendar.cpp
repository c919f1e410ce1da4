#include "eop/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "eop/error.hpp"

namespace eop {

using namespace std::chrono;

year_month_day parse_date(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    auto field = [&](std::size_t pos, std::size_t width, auto& out) {
        const char* begin = text.data() + pos;
        const auto [ptr, ec] = std::from_chars(begin, begin + width, out);
        if (ec != std::errc{} || ptr != begin + width) {
            throw Error("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
        }
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        throw Error("malformed date '" + std::string(text) + "', expected YYYY-MM-DD");
    }
    field(0, 4, y);
    field(5, 2, m);
    field(8, 2, d);
    const year_month_day date{year{y}, month{m}, day{d}};
    if (!date.ok()) throw Error("invalid date '" + std::string(text) + "'");
    return date;
}

std::string format_date(year_month_day date) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
    return buf;
}

std::size_t trading_days_between(year_month_day quote_date, year_month_day expiry_date,
                                 std::span<const year_month_day> holidays) {
    if (sys_days{expiry_date} <= sys_days{quote_date}) {
        throw Error("expiry date " + format_date(expiry_date) + " is not after quote date " +
                    format_date(quote_date));
    }
    std::size_t count = 0;
    for (sys_days d = sys_days{quote_date} + days{1}; d <= sys_days{expiry_date}; d += days{1}) {
        const weekday wd{d};
        if (wd == Saturday || wd == Sunday) continue;
        const year_month_day ymd{d};
        if (std::find(holidays.begin(), holidays.end(), ymd) != holidays.end()) continue;
        ++count;
    }
    return count;
}

std::size_t expiry_minutes(year_month_day quote_date, year_month_day expiry_date,
                           int minutes_per_day, std::span<const year_month_day> holidays) {
    if (minutes_per_day < 1) throw Error("minutes per day must be positive");
    const std::size_t days = trading_days_between(quote_date, expiry_date, holidays);
    if (days == 0) throw Error("no trading days between quote and expiry");
    return days * static_cast<std::size_t>(minutes_per_day);
}

}  // namespace eop
