#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eop/marketdata.hpp"
#include "eop/pricing.hpp"

namespace eop {

struct HorizonHistogram {
    std::size_t horizon_minutes = 0;
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
    std::size_t sample_count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double excess_kurtosis = 0.0;
};

// Sums of each length-horizon window, windows spaced by stride.
std::vector<double> horizon_sums(std::span<const double> returns, std::size_t horizon,
                                 std::size_t stride);

// Equal-width bins over mean +/- 6 stddev. Sums beyond the range land in the
// outermost bins so counts always add up to the window count.
HorizonHistogram horizon_histogram(const ReturnSeries& returns, std::size_t horizon,
                                   std::size_t stride = 60, std::size_t bins = 61);

// Same, on caller-supplied edges (used to compare two series bin by bin).
HorizonHistogram horizon_histogram(const ReturnSeries& returns, std::size_t horizon,
                                   std::size_t stride, std::span<const double> edges);

// Sum of absolute differences of the normalized bin masses. Both histograms
// must share edges.
double histogram_l1_distance(const HorizonHistogram& a, const HorizonHistogram& b);

double black_scholes_call(double spot, double strike, double expiry_minutes,
                          double rate_annual, double sigma_annual,
                          int minutes_per_year = kDefaultMinutesPerYear);

enum class Distribution { gaussian, student_t };

struct SyntheticSpec {
    Distribution kind = Distribution::gaussian;
    double nu = 4.0;  // student_t only, must exceed 2
    std::size_t length = 0;
    double per_minute_sigma = 1e-4;
    std::uint64_t seed = 1;
};

// i.i.d. zero-mean draws with standard deviation per_minute_sigma. Test and
// demo plumbing only.
ReturnSeries generate_synthetic(const SyntheticSpec& spec);

struct ComparisonRow {
    double strike = 0.0;
    double premium_original = 0.0;
    double premium_filtered = 0.0;
    std::optional<double> market;
    double abs_diff = 0.0;
    double rel_diff = 0.0;  // abs_diff / premium_original; 0 when both vanish, inf when only OP does
    double exercised_original = 0.0;
    double exercised_filtered = 0.0;
};

std::vector<ComparisonRow> compare_premiums(const ReturnSeries& original,
                                            const ReturnSeries& filtered,
                                            std::span<const PricingRequest> ladder,
                                            const EnsembleSpec& spec,
                                            std::span<const std::optional<double>> market = {},
                                            unsigned threads = 0);

}  // namespace eop
