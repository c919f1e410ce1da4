#include "eop/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "eop/error.hpp"
#include "eop/numeric.hpp"

namespace eop {

Ensemble::Ensemble(std::span<const double> values, const EnsembleSpec& spec)
    : values_(values), spec_(spec), count_(0) {
    if (spec.window_length < 1) throw Error("ensemble window length must be at least 1");
    if (spec.stride < 1) throw Error("ensemble stride must be at least 1");
    if (values.size() < spec.window_length) {
        throw Error("series of " + std::to_string(values.size()) +
                    " samples is shorter than the window of " +
                    std::to_string(spec.window_length));
    }
    count_ = (values.size() - spec.window_length) / spec.stride + 1;
}

std::span<const double> Ensemble::window(std::size_t m) const {
    if (m >= count_) throw Error("window index out of range");
    return values_.subspan(m * spec_.stride, spec_.window_length);
}

Ensemble build_ensemble(const ReturnSeries& returns, const EnsembleSpec& spec) {
    return Ensemble(returns.view(), spec);
}

double PricingRequest::rate_times_expiry() const {
    return rate_annual * static_cast<double>(expiry_minutes) / static_cast<double>(minutes_per_year);
}

void PricingRequest::validate() const {
    if (!(spot > 0.0)) throw Error("spot must be positive");
    if (!(strike > 0.0)) throw Error("strike must be positive");
    if (expiry_minutes < 1) throw Error("expiry must be at least one minute");
    if (!(g_factor > 0.0)) throw Error("g factor must be positive");
    if (minutes_per_year < 1) throw Error("minutes per year must be positive");
    if (!std::isfinite(rate_annual)) throw Error("rate must be finite");
}

std::vector<double> scale_window(std::span<const double> window, double g) {
    if (!(g > 0.0)) throw Error("g factor must be positive");
    std::vector<double> out(window.size());
    std::transform(window.begin(), window.end(), out.begin(), [g](double v) { return g * v; });
    return out;
}

double terminal_price(std::span<const double> window, const PricingRequest& request) {
    double exponent = 0.0;
    for (double dx : window) exponent += dx - 0.5 * dx * dx;
    return request.spot * std::exp(request.rate_times_expiry() + exponent);
}

WindowMoments window_moments(const Ensemble& ensemble) {
    const std::size_t count = ensemble.size();
    const std::size_t stride = ensemble.spec().stride;
    const std::size_t length = ensemble.spec().window_length;
    const auto values = ensemble.values();

    WindowMoments out;
    out.sum.resize(count);
    out.sum_sq.resize(count);
    std::vector<long double> start_sum(count);
    std::vector<long double> start_sq(count);

    long double running_sum = 0.0L;
    long double running_sq = 0.0L;
    std::size_t next_start = 0;
    std::size_t next_end = 0;
    const std::size_t last = (count - 1) * stride + length;
    for (std::size_t i = 0; i <= last; ++i) {
        if (next_start < count && i == next_start * stride) {
            start_sum[next_start] = running_sum;
            start_sq[next_start] = running_sq;
            ++next_start;
        }
        while (next_end < count && i == next_end * stride + length) {
            out.sum[next_end] = static_cast<double>(running_sum - start_sum[next_end]);
            out.sum_sq[next_end] = static_cast<double>(running_sq - start_sq[next_end]);
            ++next_end;
        }
        if (i < values.size()) {
            if (!std::isfinite(values[i])) throw Error("return " + std::to_string(i) + " is not finite");
            const long double v = values[i];
            running_sum += v;
            running_sq += v * v;
        }
    }
    return out;
}

LadderPricer::LadderPricer(const ReturnSeries& returns, const EnsembleSpec& spec, unsigned threads)
    : LadderPricer(build_ensemble(returns, spec), threads) {}

LadderPricer::LadderPricer(const Ensemble& ensemble, unsigned threads)
    : spec_(ensemble.spec()), moments_(window_moments(ensemble)), threads_(threads) {}

std::vector<double> LadderPricer::terminal_prices(const PricingRequest& request) const {
    request.validate();
    if (request.expiry_minutes != spec_.window_length) {
        throw Error("expiry of " + std::to_string(request.expiry_minutes) +
                    " minutes does not match the ensemble window of " +
                    std::to_string(spec_.window_length));
    }
    const double g = request.g_factor;
    const double drift = request.rate_times_expiry();
    std::vector<double> out(moments_.size());
    for (std::size_t m = 0; m < out.size(); ++m) {
        const double exponent = g * moments_.sum[m] - 0.5 * g * g * moments_.sum_sq[m];
        out[m] = request.spot * std::exp(drift + exponent);
    }
    return out;
}

double LadderPricer::discounted_forward(const PricingRequest& request) const {
    const auto terminal = terminal_prices(request);
    return std::exp(-request.rate_times_expiry()) * mean(terminal);
}

std::vector<PremiumQuote> LadderPricer::price(std::span<const PricingRequest> requests) const {
    std::vector<PremiumQuote> quotes;
    if (requests.empty()) return quotes;
    const PricingRequest& head = requests.front();
    for (const auto& r : requests) {
        if (r.spot != head.spot || r.expiry_minutes != head.expiry_minutes ||
            r.rate_annual != head.rate_annual || r.g_factor != head.g_factor ||
            r.minutes_per_year != head.minutes_per_year) {
            throw Error("ladder requests must differ only in strike");
        }
    }
    const auto terminal = terminal_prices(head);
    const double discount = std::exp(-head.rate_times_expiry());
    const double n = static_cast<double>(terminal.size());

    quotes.resize(requests.size());
    parallel_for(requests.size(), threads_, [&](std::size_t i) {
        const double strike = requests[i].strike;
        std::vector<double> payoff(terminal.size());
        std::size_t exercised = 0;
        for (std::size_t m = 0; m < terminal.size(); ++m) {
            const double intrinsic = terminal[m] - strike;
            if (intrinsic > 0.0) {
                payoff[m] = discount * intrinsic;
                ++exercised;
            } else {
                payoff[m] = 0.0;
            }
        }
        PremiumQuote& q = quotes[i];
        q.strike = strike;
        q.sample_count = terminal.size();
        q.premium = pairwise_sum(payoff) / n;
        q.payoff_stddev = stddev(payoff);
        q.exercised_fraction = static_cast<double>(exercised) / n;
    });
    return quotes;
}

PremiumQuote price_call(const ReturnSeries& returns, const PricingRequest& request,
                        const EnsembleSpec& spec, unsigned threads) {
    const LadderPricer pricer(returns, spec, threads);
    return pricer.price(std::span(&request, 1)).front();
}

std::vector<PremiumQuote> price_ladder(const ReturnSeries& returns,
                                       std::span<const PricingRequest> requests,
                                       const EnsembleSpec& spec, unsigned threads) {
    const LadderPricer pricer(returns, spec, threads);
    return pricer.price(requests);
}

std::vector<PricingRequest> make_ladder(const PricingRequest& base, std::span<const double> strikes) {
    std::vector<PricingRequest> out;
    out.reserve(strikes.size());
    for (double strike : strikes) {
        PricingRequest r = base;
        r.strike = strike;
        out.push_back(r);
    }
    return out;
}

}  // namespace eop
