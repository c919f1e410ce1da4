#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eop {

using Timestamp = std::chrono::sys_time<std::chrono::minutes>;

// Parses "YYYY-MM-DDTHH:MM" (a space separator and a ":00" seconds suffix are
// also accepted).
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);

struct PriceRecord {
    Timestamp timestamp;
    double price = 0.0;
};

struct PriceSeries {
    std::vector<PriceRecord> records;
    // Index of the first record of every session after the first one.
    std::vector<std::size_t> session_boundaries;
    int minutes_per_day = 510;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::vector<double> prices() const;

    // Recomputes session_boundaries from calendar date changes.
    void detect_sessions();
};

struct CsvFormat {
    std::string timestamp_column = "timestamp";
    std::string price_column = "price";
    char delimiter = ',';
};

PriceSeries parse_price_csv(std::istream& in, const CsvFormat& format = {});
PriceSeries ingest_csv(const std::filesystem::path& path, const CsvFormat& format = {});

// Forward-fills missing minutes inside each session. Overnight gaps are kept
// closed: sessions are concatenated back to back.
PriceSeries fill_gaps(const PriceSeries& series);

std::vector<double> log_returns(std::span<const double> prices);
std::vector<double> log_returns(const PriceSeries& series);

struct PurifyResult {
    std::vector<double> values;
    std::size_t outliers = 0;
    int iterations = 0;
};

// Zeroes every element larger than outlier_sigma global standard deviations,
// recomputing the deviation until no new element is flagged (at most
// max_iterations passes).
PurifyResult purify(std::span<const double> returns, double outlier_sigma = 10.0,
                    int max_iterations = 10);

struct DriftEstimate {
    std::size_t window_minutes = 2550;
    // Trailing-window drift at the end of the series.
    double per_minute_drift = 0.0;
};

struct ReturnSeries {
    std::vector<double> values;
    int step_minutes = 1;
    // Average of the per-element drift that was subtracted.
    double mean_removed = 0.0;
    std::size_t outliers_neutralized = 0;
    std::optional<Timestamp> first;
    std::optional<Timestamp> last;
    DriftEstimate drift;
    // Set when the series was shorter than the drift window and only the
    // global mean was removed.
    bool drift_fallback = false;

    std::size_t size() const { return values.size(); }
    std::span<const double> view() const { return values; }
};

ReturnSeries detrend(std::span<const double> returns, std::size_t drift_window = 2550);

struct PreprocessOptions {
    double outlier_sigma = 10.0;
    std::size_t drift_window = 2550;
};

// log_returns -> purify -> detrend, carrying the source span into metadata.
ReturnSeries preprocess(const PriceSeries& series, const PreprocessOptions& options = {});

}  // namespace eop
