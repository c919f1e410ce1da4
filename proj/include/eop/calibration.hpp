#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "eop/marketdata.hpp"
#include "eop/pricing.hpp"

namespace eop {

struct MarketQuote {
    double strike = 0.0;
    double premium = 0.0;
    bool excluded = false;
};

struct MarketQuoteSet {
    std::chrono::year_month_day quote_date{};
    std::chrono::year_month_day expiry_date{};
    double spot = 0.0;
    double rate_annual = 0.0;
    std::vector<MarketQuote> quotes;

    std::size_t usable_count() const;
    // At least two usable quotes, distinct strikes, positive spot.
    void validate() const;
};

// Columns quote_date, expiry_date, spot, strike, premium. Every row must share
// the quote date, expiry date and spot. An optional "excluded" column (0/1)
// marks strikes kept out of the fit.
MarketQuoteSet parse_quotes_csv(std::istream& in, double rate_annual);

struct CalibrationOptions {
    double lower = 0.1;
    double upper = 3.0;
    double grid_step = 0.01;
    double tolerance = 1e-4;
    int max_iterations = 200;
    int minutes_per_year = kDefaultMinutesPerYear;
    // Drop strikes whose model premium at g = 1 falls below this floor.
    std::optional<double> exclusion_floor;
    unsigned threads = 0;
};

struct StrikeFit {
    double strike = 0.0;
    double market = 0.0;
    double model = 0.0;
    double residual = 0.0;  // model - market
    bool excluded = false;
};

struct CalibrationResult {
    double g = 0.0;
    double sigma_historical = 0.0;  // annualized
    double sigma_star = 0.0;        // g * sigma_historical
    double rss = 0.0;
    std::vector<StrikeFit> per_strike;
    int iterations = 0;
    bool at_boundary = false;
};

// Least-squares objective over one quote set. Window moments are computed
// once at construction and shared by every evaluation.
class Calibrator {
public:
    Calibrator(const MarketQuoteSet& quotes, const ReturnSeries& returns,
               const EnsembleSpec& spec, const CalibrationOptions& options = {});

    double objective(double g) const;
    std::vector<double> model_premiums(double g) const;
    CalibrationResult fit() const;

    const MarketQuoteSet& quotes() const { return quotes_; }

private:
    PricingRequest base_request(double g) const;

    MarketQuoteSet quotes_;
    EnsembleSpec spec_;
    CalibrationOptions options_;
    LadderPricer pricer_;
    double sigma_historical_;
};

double objective(double g, const MarketQuoteSet& quotes, const ReturnSeries& returns,
                 const EnsembleSpec& spec, const CalibrationOptions& options = {});

CalibrationResult fit_g(const MarketQuoteSet& quotes, const ReturnSeries& returns,
                        const EnsembleSpec& spec, const CalibrationOptions& options = {});

}  // namespace eop
