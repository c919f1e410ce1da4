#include "eop/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "eop/error.hpp"
#include "eop/numeric.hpp"

namespace eop {

std::vector<double> horizon_sums(std::span<const double> returns, std::size_t horizon,
                                 std::size_t stride) {
    if (horizon < 1 || stride < 1) throw Error("horizon and stride must be positive");
    if (returns.size() < horizon) {
        throw Error("series of " + std::to_string(returns.size()) +
                    " samples is shorter than the horizon of " + std::to_string(horizon));
    }
    const std::size_t count = (returns.size() - horizon) / stride + 1;
    std::vector<double> sums(count);
    for (std::size_t m = 0; m < count; ++m) {
        double s = 0.0;
        for (double v : returns.subspan(m * stride, horizon)) s += v;
        sums[m] = s;
    }
    return sums;
}

HorizonHistogram horizon_histogram(const ReturnSeries& returns, std::size_t horizon,
                                   std::size_t stride, std::size_t bins) {
    if (bins < 1) throw Error("histogram needs at least one bin");
    const auto sums = horizon_sums(returns.view(), horizon, stride);
    const Moments m = moments(sums);
    const double half = m.stddev > 0.0 ? 6.0 * m.stddev : 0.5 * std::max(1.0, std::abs(m.mean));
    const double lo = m.mean - half;
    const double width = 2.0 * half / static_cast<double>(bins);
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + static_cast<double>(i) * width;
    edges.back() = m.mean + half;
    return horizon_histogram(returns, horizon, stride, edges);
}

HorizonHistogram horizon_histogram(const ReturnSeries& returns, std::size_t horizon,
                                   std::size_t stride, std::span<const double> edges) {
    if (edges.size() < 2) throw Error("histogram needs at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i] > edges[i - 1])) throw Error("histogram edges must increase strictly");
    }
    const auto sums = horizon_sums(returns.view(), horizon, stride);
    HorizonHistogram h;
    h.horizon_minutes = horizon;
    h.bin_edges.assign(edges.begin(), edges.end());
    h.counts.assign(edges.size() - 1, 0);
    const std::size_t last_bin = h.counts.size() - 1;
    for (double s : sums) {
        const auto it = std::upper_bound(edges.begin(), edges.end(), s);
        std::size_t bin = it == edges.begin() ? 0 : static_cast<std::size_t>(it - edges.begin()) - 1;
        h.counts[std::min(bin, last_bin)] += 1;
    }
    const Moments m = moments(sums);
    h.sample_count = sums.size();
    h.mean = m.mean;
    h.stddev = m.stddev;
    h.excess_kurtosis = m.excess_kurtosis;
    return h;
}

double histogram_l1_distance(const HorizonHistogram& a, const HorizonHistogram& b) {
    if (a.bin_edges != b.bin_edges) throw Error("histograms must share bin edges");
    if (a.sample_count == 0 || b.sample_count == 0) throw Error("histogram is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
        total += std::abs(static_cast<double>(a.counts[i]) / static_cast<double>(a.sample_count) -
                          static_cast<double>(b.counts[i]) / static_cast<double>(b.sample_count));
    }
    return total;
}

double black_scholes_call(double spot, double strike, double expiry_minutes, double rate_annual,
                          double sigma_annual, int minutes_per_year) {
    if (!(spot > 0.0) || !(strike > 0.0) || !(expiry_minutes > 0.0) || minutes_per_year < 1) {
        throw Error("black_scholes_call needs positive spot, strike, expiry and year length");
    }
    if (sigma_annual < 0.0) throw Error("volatility must be non-negative");
    const double t = expiry_minutes / static_cast<double>(minutes_per_year);
    const double discounted_strike = strike * std::exp(-rate_annual * t);
    const double vol = sigma_annual * std::sqrt(t);
    if (vol == 0.0) return std::max(0.0, spot - discounted_strike);
    const double d1 = (std::log(spot / strike) + rate_annual * t) / vol + 0.5 * vol;
    const double d2 = d1 - vol;
    const auto cdf = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
    return spot * cdf(d1) - discounted_strike * cdf(d2);
}

ReturnSeries generate_synthetic(const SyntheticSpec& spec) {
    if (spec.length < 1) throw Error("synthetic series length must be at least 1");
    if (!(spec.per_minute_sigma > 0.0)) throw Error("synthetic sigma must be positive");
    ReturnSeries out;
    out.values.resize(spec.length);
    std::mt19937_64 rng(spec.seed);
    switch (spec.kind) {
    case Distribution::gaussian: {
        std::normal_distribution<double> dist(0.0, spec.per_minute_sigma);
        for (double& v : out.values) v = dist(rng);
        break;
    }
    case Distribution::student_t: {
        if (!(spec.nu > 2.0)) throw Error("student-t degrees of freedom must exceed 2");
        std::student_t_distribution<double> dist(spec.nu);
        const double scale = spec.per_minute_sigma / std::sqrt(spec.nu / (spec.nu - 2.0));
        for (double& v : out.values) v = scale * dist(rng);
        break;
    }
    }
    return out;
}

std::vector<ComparisonRow> compare_premiums(const ReturnSeries& original, const ReturnSeries& filtered,
                                            std::span<const PricingRequest> ladder,
                                            const EnsembleSpec& spec,
                                            std::span<const std::optional<double>> market,
                                            unsigned threads) {
    if (!market.empty() && market.size() != ladder.size()) {
        throw Error("market premiums must match the ladder length");
    }
    const auto op = LadderPricer(original, spec, threads).price(ladder);
    const auto fp = LadderPricer(filtered, spec, threads).price(ladder);
    std::vector<ComparisonRow> rows(ladder.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ComparisonRow& r = rows[i];
        r.strike = ladder[i].strike;
        r.premium_original = op[i].premium;
        r.premium_filtered = fp[i].premium;
        if (!market.empty()) r.market = market[i];
        r.abs_diff = std::abs(r.premium_original - r.premium_filtered);
        if (r.premium_original > 0.0) {
            r.rel_diff = r.abs_diff / r.premium_original;
        } else {
            r.rel_diff = r.abs_diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        }
        r.exercised_original = op[i].exercised_fraction;
        r.exercised_filtered = fp[i].exercised_fraction;
    }
    return rows;
}

}  // namespace eop
