#include "eop/marketdata.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "eop/error.hpp"
#include "eop/numeric.hpp"

namespace eop {

namespace {

using namespace std::chrono;

int parse_digits(std::string_view text, std::size_t pos, std::size_t width) {
    int value = 0;
    const char* begin = text.data() + pos;
    const auto [ptr, ec] = std::from_chars(begin, begin + width, value);
    if (ec != std::errc{} || ptr != begin + width) {
        throw Error("malformed timestamp '" + std::string(text) + "'");
    }
    return value;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            return fields;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

year_month_day date_of(Timestamp t) {
    return year_month_day{floor<days>(t)};
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
    text = trim(text);
    // YYYY-MM-DD?HH:MM[:SS]
    if (text.size() != 16 && text.size() != 19) {
        throw Error("malformed timestamp '" + std::string(text) + "'");
    }
    if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':') {
        throw Error("malformed timestamp '" + std::string(text) + "'");
    }
    const int y = parse_digits(text, 0, 4);
    const int mo = parse_digits(text, 5, 2);
    const int d = parse_digits(text, 8, 2);
    const int h = parse_digits(text, 11, 2);
    const int mi = parse_digits(text, 14, 2);
    if (text.size() == 19) {
        if (text[16] != ':' || parse_digits(text, 17, 2) != 0) {
            throw Error("timestamp '" + std::string(text) + "' is not minute-aligned");
        }
    }
    const year_month_day date{year{y}, month{static_cast<unsigned>(mo)},
                              day{static_cast<unsigned>(d)}};
    if (!date.ok() || h > 23 || mi > 59) {
        throw Error("invalid timestamp '" + std::string(text) + "'");
    }
    return sys_days{date} + hours{h} + minutes{mi};
}

std::string format_timestamp(Timestamp t) {
    const auto day_start = floor<days>(t);
    const year_month_day date{day_start};
    const auto since = t - day_start;
    const auto h = duration_cast<hours>(since);
    const auto mi = since - h;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d", static_cast<int>(date.year()),
                  static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                  static_cast<int>(h.count()), static_cast<int>(mi.count()));
    return buf;
}

std::vector<double> PriceSeries::prices() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.price);
    return out;
}

void PriceSeries::detect_sessions() {
    session_boundaries.clear();
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (date_of(records[i].timestamp) != date_of(records[i - 1].timestamp)) {
            session_boundaries.push_back(i);
        }
    }
}

PriceSeries parse_price_csv(std::istream& in, const CsvFormat& format) {
    std::string line;
    std::size_t line_no = 0;
    std::optional<std::size_t> ts_col;
    std::optional<std::size_t> px_col;
    std::size_t width = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw Error("price csv is empty");
    const auto header = split(line, format.delimiter);
    width = header.size();
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == format.timestamp_column) ts_col = c;
        if (header[c] == format.price_column) px_col = c;
    }
    if (!ts_col || !px_col) {
        throw Error("price csv header lacks columns '" + format.timestamp_column + "' and '" +
                    format.price_column + "'");
    }

    PriceSeries series;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line, format.delimiter);
        const std::string where = "row " + std::to_string(line_no);
        if (fields.size() != width) {
            throw Error(where + ": expected " + std::to_string(width) + " fields, got " +
                        std::to_string(fields.size()));
        }
        PriceRecord record;
        try {
            record.timestamp = parse_timestamp(fields[*ts_col]);
        } catch (const Error& e) {
            throw Error(where + ": " + e.what());
        }
        const auto text = fields[*px_col];
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), record.price);
        if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(record.price)) {
            throw Error(where + ": malformed price '" + std::string(text) + "'");
        }
        if (record.price <= 0.0) {
            throw Error(where + ": non-positive price " + std::string(text));
        }
        if (!series.records.empty()) {
            const auto prev = series.records.back().timestamp;
            if (record.timestamp == prev) {
                throw Error(where + ": duplicate timestamp " + format_timestamp(prev));
            }
            if (record.timestamp < prev) {
                throw Error(where + ": timestamp " + format_timestamp(record.timestamp) +
                            " precedes " + format_timestamp(prev));
            }
        }
        series.records.push_back(record);
    }
    series.detect_sessions();
    return series;
}

PriceSeries ingest_csv(const std::filesystem::path& path, const CsvFormat& format) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return parse_price_csv(in, format);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

PriceSeries fill_gaps(const PriceSeries& series) {
    PriceSeries out;
    out.minutes_per_day = series.minutes_per_day;
    out.records.reserve(series.records.size());
    std::size_t next_boundary = 0;
    for (std::size_t i = 0; i < series.records.size(); ++i) {
        const bool new_session =
            i == 0 || (next_boundary < series.session_boundaries.size() &&
                       series.session_boundaries[next_boundary] == i);
        if (new_session && i != 0) {
            ++next_boundary;
            out.session_boundaries.push_back(out.records.size());
        }
        if (!new_session) {
            const PriceRecord last = out.records.back();
            for (auto t = last.timestamp + minutes{1}; t < series.records[i].timestamp;
                 t += minutes{1}) {
                out.records.push_back({t, last.price});
            }
        }
        out.records.push_back(series.records[i]);
    }
    return out;
}

std::vector<double> log_returns(std::span<const double> prices) {
    if (prices.size() < 2) throw Error("log_returns needs at least two prices");
    std::vector<double> out(prices.size() - 1);
    for (std::size_t n = 0; n + 1 < prices.size(); ++n) {
        out[n] = std::log(prices[n + 1] / prices[n]);
    }
    return out;
}

std::vector<double> log_returns(const PriceSeries& series) {
    return log_returns(series.prices());
}

PurifyResult purify(std::span<const double> returns, double outlier_sigma, int max_iterations) {
    if (returns.empty()) throw Error("purify needs a non-empty series");
    if (!(outlier_sigma > 0.0)) throw Error("outlier_sigma must be positive");
    PurifyResult result;
    result.values.assign(returns.begin(), returns.end());
    for (int pass = 0; pass < max_iterations; ++pass) {
        const double limit = outlier_sigma * stddev(result.values);
        std::size_t flagged = 0;
        if (limit > 0.0) {
            for (double& v : result.values) {
                if (std::abs(v) > limit) {
                    v = 0.0;
                    ++flagged;
                }
            }
        }
        result.iterations = pass + 1;
        result.outliers += flagged;
        if (flagged == 0) break;
    }
    return result;
}

ReturnSeries detrend(std::span<const double> returns, std::size_t drift_window) {
    if (returns.empty()) throw Error("detrend needs a non-empty series");
    if (drift_window < 2) throw Error("drift window must be at least 2 samples");
    ReturnSeries out;
    out.drift.window_minutes = drift_window;
    out.values.resize(returns.size());
    const double global = mean(returns);

    std::vector<double> removed(returns.size(), global);
    if (returns.size() < drift_window) {
        out.drift_fallback = true;
        out.drift.per_minute_drift = global;
    } else {
        // Prefix sums in extended precision keep the trailing means exact
        // enough over long series.
        std::vector<long double> prefix(returns.size() + 1, 0.0L);
        for (std::size_t n = 0; n < returns.size(); ++n) prefix[n + 1] = prefix[n] + returns[n];
        const long double w = static_cast<long double>(drift_window);
        for (std::size_t n = drift_window; n < returns.size(); ++n) {
            removed[n] = static_cast<double>((prefix[n] - prefix[n - drift_window]) / w);
        }
        const std::size_t end = returns.size();
        out.drift.per_minute_drift =
            static_cast<double>((prefix[end] - prefix[end - drift_window]) / w);
    }
    for (std::size_t n = 0; n < returns.size(); ++n) out.values[n] = returns[n] - removed[n];

    // Re-centre exactly: the causal drift estimate leaves a small offset.
    double shift = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double m = mean(out.values);
        for (double& v : out.values) v -= m;
        shift += m;
    }
    out.mean_removed = mean(removed) + shift;
    return out;
}

ReturnSeries preprocess(const PriceSeries& series, const PreprocessOptions& options) {
    const auto raw = log_returns(series);
    auto purified = purify(raw, options.outlier_sigma);
    ReturnSeries out = detrend(purified.values, options.drift_window);
    out.outliers_neutralized = purified.outliers;
    if (!series.empty()) {
        out.first = series.records.front().timestamp;
        out.last = series.records.back().timestamp;
    }
    return out;
}

}  // namespace eop
