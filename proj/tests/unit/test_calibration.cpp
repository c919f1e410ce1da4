#include <doctest.h>

#include <cmath>
#include <sstream>

#include "eop/calibration.hpp"
#include "eop/error.hpp"
#include "unit/helpers.hpp"

using namespace eop;
using eop::test::random_vector;

namespace {

ReturnSeries noisy(std::size_t n, std::uint64_t seed, double sigma = 2.2e-4) {
    ReturnSeries r;
    r.values = random_vector(n, seed, sigma);
    return r;
}

// Quotes priced by the model itself at g_true.
MarketQuoteSet model_quotes(const ReturnSeries& r, const EnsembleSpec& spec, double g_true,
                            const std::vector<double>& strikes, double spot = 5528.1) {
    PricingRequest base;
    base.spot = spot;
    base.expiry_minutes = spec.window_length;
    base.rate_annual = 0.045;
    base.g_factor = g_true;
    const auto q = price_ladder(r, make_ladder(base, strikes), spec);
    MarketQuoteSet set;
    set.spot = spot;
    set.rate_annual = 0.045;
    for (const auto& p : q) set.quotes.push_back({p.strike, p.premium});
    return set;
}

}  // namespace

TEST_CASE("objective") {
    const auto r = noisy(100000, 1);
    const EnsembleSpec spec{5100, 60};
    const std::vector<double> strikes{5325, 5425, 5525, 5625, 5725};
    const auto quotes = model_quotes(r, spec, 0.85, strikes);

    SUBCASE("vanishes at the generating g") {
        CHECK(objective(0.85, quotes, r, spec) == 0.0);
    }
    SUBCASE("is positive elsewhere") {
        const double a = objective(0.7, quotes, r, spec);
        const double b = objective(1.1, quotes, r, spec);
        CHECK(a > 0.0);
        CHECK(b > 0.0);
        CHECK(a != b);
    }
    SUBCASE("g has no effect on a zero series") {
        ReturnSeries zero;
        zero.values.assign(10000, 0.0);
        MarketQuoteSet set;
        set.spot = 100;
        set.quotes.push_back({90, 10});
        for (double g : {0.1, 0.5, 1.0, 2.9}) CHECK(objective(g, set, zero, {510, 60}) == 0.0);
    }
    SUBCASE("invariant when the series is scaled by c and g by 1/c") {
        auto scaled = r;
        for (double& v : scaled.values) v *= 2.0;
        const double a = objective(0.9, quotes, r, spec);
        const double b = objective(0.45, quotes, scaled, spec);
        CHECK(b == doctest::Approx(a).epsilon(1e-9));
    }
    SUBCASE("needs a usable quote") {
        auto set = quotes;
        for (auto& q : set.quotes) q.excluded = true;
        CHECK_THROWS_AS(objective(1.0, set, r, spec), Error);
    }
}

TEST_CASE("fit_g recovers the generating factor") {
    const auto r = noisy(150000, 2);
    const EnsembleSpec spec{5100, 60};
    const auto quotes = model_quotes(r, spec, 0.85, {5225, 5325, 5425, 5525, 5625, 5725, 5825});
    CalibrationOptions options;
    const Calibrator calibrator(quotes, r, spec, options);
    const auto result = calibrator.fit();
    CHECK(std::abs(result.g - 0.85) <= 0.01);
    CHECK_FALSE(result.at_boundary);
    CHECK(result.rss >= 0.0);
    CHECK(result.per_strike.size() == 7);
    CHECK(result.sigma_star == doctest::Approx(result.g * result.sigma_historical));

    for (double g = options.lower; g <= options.upper + 1e-12; g += options.grid_step) {
        CHECK(result.rss <= calibrator.objective(g));
    }
}

TEST_CASE("fit_g flags a boundary solution") {
    const auto r = noisy(60000, 3, 1e-5);
    const EnsembleSpec spec{510, 60};
    MarketQuoteSet set;
    set.spot = 5500;
    set.rate_annual = 0.0;
    set.quotes = {{5900, 0.0}, {6000, 0.0}, {6100, 0.0}};
    const auto result = fit_g(set, r, spec);
    CHECK(result.at_boundary);
    CHECK(result.g <= 0.1 + 0.01);
}

TEST_CASE("fit_g argument checks") {
    const auto r = noisy(20000, 4);
    MarketQuoteSet set;
    set.spot = 5500;
    set.quotes = {{5500, 30.0}, {5600, 5.0}};
    CalibrationOptions bad;
    bad.lower = 2.0;
    bad.upper = 1.0;
    CHECK_THROWS_AS(fit_g(set, r, {510, 60}, bad), Error);
    set.quotes = {{5500, 30.0}};
    CHECK_THROWS_AS(fit_g(set, r, {510, 60}), Error);
    set.quotes = {{5500, 30.0}, {5500, 31.0}};
    CHECK_THROWS_AS(fit_g(set, r, {510, 60}), Error);
}

TEST_CASE("fit_g refuses a corrupt series") {
    auto r = noisy(20000, 5);
    r.values[100] = std::numeric_limits<double>::quiet_NaN();
    MarketQuoteSet set;
    set.spot = 5500;
    set.quotes = {{5500, 30.0}, {5600, 5.0}};
    CHECK_THROWS_AS(fit_g(set, r, {510, 60}), Error);
}

TEST_CASE("exclusion floor drops strikes with negligible model premium") {
    const auto r = noisy(60000, 6);
    MarketQuoteSet set;
    set.spot = 5500;
    set.quotes = {{5400, 110.0}, {5500, 30.0}, {5600, 4.0}, {7000, 0.0}};
    CalibrationOptions options;
    options.exclusion_floor = 0.05;
    const Calibrator calibrator(set, r, {2550, 60}, options);
    CHECK(calibrator.quotes().quotes[3].excluded);
    CHECK_FALSE(calibrator.quotes().quotes[0].excluded);
}

TEST_CASE("parse_quotes_csv") {
    std::istringstream in(
        "quote_date,expiry_date,spot,strike,premium\n"
        "2005-12-02,2005-12-16,5528.1,5425,122.5\n"
        "2005-12-02,2005-12-16,5528.1,5525,50\n");
    const auto set = parse_quotes_csv(in, 0.045);
    CHECK(set.spot == 5528.1);
    CHECK(set.quotes.size() == 2);
    CHECK(set.rate_annual == 0.045);

    std::istringstream mixed(
        "quote_date,expiry_date,spot,strike,premium\n"
        "2005-12-02,2005-12-16,5528.1,5425,122.5\n"
        "2005-12-06,2005-12-16,5538.8,5525,53.5\n");
    CHECK_THROWS_AS(parse_quotes_csv(mixed, 0.045), Error);

    std::istringstream missing("quote_date,spot,strike,premium\n2005-12-02,5528.1,5425,122.5\n");
    CHECK_THROWS_AS(parse_quotes_csv(missing, 0.045), Error);
}
