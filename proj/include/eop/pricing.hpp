#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eop/marketdata.hpp"

namespace eop {

inline constexpr int kDefaultMinutesPerYear = 510 * 252;

struct EnsembleSpec {
    std::size_t window_length = 0;  // N, the expiry in samples
    std::size_t stride = 60;        // translation between windows
};

// Non-owning view of the windows {x[m*stride], ..., x[m*stride + N - 1]}.
// The underlying values must outlive the ensemble.
class Ensemble {
public:
    Ensemble(std::span<const double> values, const EnsembleSpec& spec);

    std::size_t size() const { return count_; }
    const EnsembleSpec& spec() const { return spec_; }
    std::span<const double> window(std::size_t m) const;
    std::span<const double> values() const { return values_; }

private:
    std::span<const double> values_;
    EnsembleSpec spec_;
    std::size_t count_;
};

Ensemble build_ensemble(const ReturnSeries& returns, const EnsembleSpec& spec);

struct PricingRequest {
    double spot = 0.0;
    double strike = 0.0;
    std::size_t expiry_minutes = 0;
    double rate_annual = 0.0;
    double g_factor = 1.0;
    int minutes_per_year = kDefaultMinutesPerYear;

    // r * T with T converted to years.
    double rate_times_expiry() const;
    void validate() const;
};

struct PremiumQuote {
    double strike = 0.0;
    double premium = 0.0;
    std::size_t sample_count = 0;
    double payoff_stddev = 0.0;  // of the discounted payoff across windows
    double exercised_fraction = 0.0;
};

std::vector<double> scale_window(std::span<const double> window, double g);

// S * exp(rT + sum(dx - dx^2 / 2)) for an already g-scaled window.
double terminal_price(std::span<const double> window, const PricingRequest& request);

// Per-window sums of the increments and of their squares. The terminal
// exponent for any g is g*sum - g^2*sum_sq/2, so one pass serves every
// strike and every g.
struct WindowMoments {
    std::vector<double> sum;
    std::vector<double> sum_sq;

    std::size_t size() const { return sum.size(); }
};

// One sequential pass over the series with extended-precision running sums;
// each window's moments are differences of the running sums at its ends.
WindowMoments window_moments(const Ensemble& ensemble);

// Prices strike ladders against precomputed window moments.
class LadderPricer {
public:
    LadderPricer(const ReturnSeries& returns, const EnsembleSpec& spec, unsigned threads = 0);
    LadderPricer(const Ensemble& ensemble, unsigned threads = 0);

    std::size_t sample_count() const { return moments_.size(); }
    std::size_t window_length() const { return spec_.window_length; }
    const WindowMoments& moments() const { return moments_; }

    // Requests must share spot, expiry, rate, g and minutes_per_year.
    std::vector<PremiumQuote> price(std::span<const PricingRequest> requests) const;

    // Discounted mean of the terminal price, e^{-rT} <S(T)>.
    double discounted_forward(const PricingRequest& request) const;

private:
    std::vector<double> terminal_prices(const PricingRequest& request) const;

    EnsembleSpec spec_;
    WindowMoments moments_;
    unsigned threads_;
};

PremiumQuote price_call(const ReturnSeries& returns, const PricingRequest& request,
                        const EnsembleSpec& spec, unsigned threads = 0);

std::vector<PremiumQuote> price_ladder(const ReturnSeries& returns,
                                       std::span<const PricingRequest> requests,
                                       const EnsembleSpec& spec, unsigned threads = 0);

// Same spot/expiry/rate/g for every strike.
std::vector<PricingRequest> make_ladder(const PricingRequest& base, std::span<const double> strikes);

}  // namespace eop
