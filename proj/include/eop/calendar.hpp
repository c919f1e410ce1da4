#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace eop {

std::chrono::year_month_day parse_date(std::string_view text);
std::string format_date(std::chrono::year_month_day date);

// Weekdays d with quote_date < d <= expiry_date that are not holidays.
std::size_t trading_days_between(std::chrono::year_month_day quote_date,
                                 std::chrono::year_month_day expiry_date,
                                 std::span<const std::chrono::year_month_day> holidays = {});

std::size_t expiry_minutes(std::chrono::year_month_day quote_date,
                           std::chrono::year_month_day expiry_date, int minutes_per_day,
                           std::span<const std::chrono::year_month_day> holidays = {});

}  // namespace eop
