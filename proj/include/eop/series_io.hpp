#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "eop/marketdata.hpp"

namespace eop {

// Text series files. The first line is "# eop-series v1", followed by
// "# key=value" metadata lines ("kind" is prices or returns), then the data:
//   prices:  a "timestamp,price" header and one record per line
//   returns: one value per line
// Numbers are written in shortest round-trip form.
inline constexpr std::string_view kSeriesMagic = "# eop-series v1";

void write_prices(std::ostream& out, const PriceSeries& series);
void write_returns(std::ostream& out, const ReturnSeries& series);
PriceSeries read_prices(std::istream& in);
ReturnSeries read_returns(std::istream& in);

PriceSeries load_prices(const std::filesystem::path& path);
ReturnSeries load_returns(const std::filesystem::path& path);

std::string format_double(double value);

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace eop
