#include "eop/calibration.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <set>
#include <string>

#include "eop/calendar.hpp"
#include "eop/error.hpp"
#include "eop/numeric.hpp"

namespace eop {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

double to_double(std::string_view text, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw Error(where + ": malformed number '" + std::string(text) + "'");
    }
    return v;
}

constexpr double kGolden = 0.6180339887498949;

}  // namespace

std::size_t MarketQuoteSet::usable_count() const {
    return static_cast<std::size_t>(
        std::count_if(quotes.begin(), quotes.end(), [](const MarketQuote& q) { return !q.excluded; }));
}

void MarketQuoteSet::validate() const {
    if (!(spot > 0.0)) throw Error("quote set spot must be positive");
    std::set<double> strikes;
    for (const auto& q : quotes) {
        if (!(q.strike > 0.0)) throw Error("quote strikes must be positive");
        if (!(q.premium >= 0.0)) throw Error("quote premiums must be non-negative");
        if (!strikes.insert(q.strike).second) {
            throw Error("duplicate strike " + std::to_string(q.strike) + " in quote set");
        }
    }
    if (usable_count() == 0) throw Error("quote set has no usable quotes");
}

MarketQuoteSet parse_quotes_csv(std::istream& in, double rate_annual) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) break;
    }
    const auto header = split_csv(line);
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == name) return c;
        }
        return std::nullopt;
    };
    const auto c_quote = column("quote_date");
    const auto c_expiry = column("expiry_date");
    const auto c_spot = column("spot");
    const auto c_strike = column("strike");
    const auto c_premium = column("premium");
    const auto c_excluded = column("excluded");
    if (!c_quote || !c_expiry || !c_spot || !c_strike || !c_premium) {
        throw Error("quotes csv needs columns quote_date, expiry_date, spot, strike, premium");
    }

    MarketQuoteSet set;
    set.rate_annual = rate_annual;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = "quotes row " + std::to_string(line_no);
        const auto f = split_csv(line);
        if (f.size() != header.size()) throw Error(where + ": wrong number of fields");
        const auto quote_date = parse_date(f[*c_quote]);
        const auto expiry_date = parse_date(f[*c_expiry]);
        const double spot = to_double(f[*c_spot], where);
        if (first) {
            set.quote_date = quote_date;
            set.expiry_date = expiry_date;
            set.spot = spot;
            first = false;
        } else if (quote_date != set.quote_date || expiry_date != set.expiry_date ||
                   spot != set.spot) {
            throw Error(where + ": all quotes must share quote date, expiry date and spot");
        }
        MarketQuote q;
        q.strike = to_double(f[*c_strike], where);
        q.premium = to_double(f[*c_premium], where);
        if (c_excluded) q.excluded = to_double(f[*c_excluded], where) != 0.0;
        set.quotes.push_back(q);
    }
    if (first) throw Error("quotes csv has no rows");
    set.validate();
    return set;
}

Calibrator::Calibrator(const MarketQuoteSet& quotes, const ReturnSeries& returns,
                       const EnsembleSpec& spec, const CalibrationOptions& options)
    : quotes_(quotes), spec_(spec), options_(options), pricer_(returns, spec, options.threads),
      sigma_historical_(stddev(returns.view()) *
                        std::sqrt(static_cast<double>(options.minutes_per_year))) {
    quotes_.validate();
    if (!(options.lower > 0.0) || !(options.upper > options.lower)) {
        throw Error("calibration bounds must satisfy 0 < lower < upper");
    }
    if (!(options.grid_step > 0.0) || !(options.tolerance > 0.0)) {
        throw Error("calibration grid step and tolerance must be positive");
    }
    if (options.exclusion_floor) {
        const auto premiums = model_premiums(1.0);
        for (std::size_t i = 0; i < quotes_.quotes.size(); ++i) {
            if (premiums[i] < *options.exclusion_floor) quotes_.quotes[i].excluded = true;
        }
        if (quotes_.usable_count() == 0) {
            throw Error("exclusion floor removed every quote from the fit");
        }
    }
}

PricingRequest Calibrator::base_request(double g) const {
    PricingRequest r;
    r.spot = quotes_.spot;
    r.expiry_minutes = spec_.window_length;
    r.rate_annual = quotes_.rate_annual;
    r.g_factor = g;
    r.minutes_per_year = options_.minutes_per_year;
    return r;
}

std::vector<double> Calibrator::model_premiums(double g) const {
    std::vector<double> strikes;
    strikes.reserve(quotes_.quotes.size());
    for (const auto& q : quotes_.quotes) strikes.push_back(q.strike);
    const auto ladder = make_ladder(base_request(g), strikes);
    const auto priced = pricer_.price(ladder);
    std::vector<double> out;
    out.reserve(priced.size());
    for (const auto& p : priced) out.push_back(p.premium);
    return out;
}

double Calibrator::objective(double g) const {
    if (!(g > 0.0)) throw Error("g factor must be positive");
    const auto premiums = model_premiums(g);
    double rss = 0.0;
    for (std::size_t i = 0; i < premiums.size(); ++i) {
        if (quotes_.quotes[i].excluded) continue;
        const double r = premiums[i] - quotes_.quotes[i].premium;
        rss += r * r;
    }
    return rss;
}

CalibrationResult Calibrator::fit() const {
    if (quotes_.usable_count() < 2) throw Error("calibration needs at least two usable quotes");
    const double lower = options_.lower;
    const double upper = options_.upper;
    const double step = options_.grid_step;
    const auto intervals = static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9));

    std::vector<double> grid;
    for (std::size_t i = 0; i <= intervals; ++i) grid.push_back(lower + static_cast<double>(i) * step);
    if (upper - grid.back() > 1e-12) grid.push_back(upper);

    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        values[i] = objective(grid[i]);
        if (!std::isfinite(values[i])) {
            throw Error("objective is not finite at g = " + std::to_string(grid[i]));
        }
    }
    const auto best = static_cast<std::size_t>(
        std::min_element(values.begin(), values.end()) - values.begin());

    // Golden-section refinement inside the bracket around the grid minimum.
    double a = best == 0 ? grid.front() : grid[best - 1];
    double b = best + 1 == grid.size() ? grid.back() : grid[best + 1];
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    int iterations = 0;
    while (b - a > options_.tolerance && iterations < options_.max_iterations) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = objective(d);
        }
        ++iterations;
    }
    double g = 0.5 * (a + b);
    double rss = objective(g);
    if (!(rss <= values[best])) {
        g = grid[best];
        rss = values[best];
    }

    CalibrationResult result;
    result.g = g;
    result.rss = rss;
    result.iterations = static_cast<int>(grid.size()) + iterations;
    result.sigma_historical = sigma_historical_;
    result.sigma_star = g * sigma_historical_;
    result.at_boundary = best == 0 || best + 1 == grid.size();
    const auto premiums = model_premiums(g);
    for (std::size_t i = 0; i < premiums.size(); ++i) {
        const auto& q = quotes_.quotes[i];
        result.per_strike.push_back(
            {q.strike, q.premium, premiums[i], premiums[i] - q.premium, q.excluded});
    }
    return result;
}

double objective(double g, const MarketQuoteSet& quotes, const ReturnSeries& returns,
                 const EnsembleSpec& spec, const CalibrationOptions& options) {
    return Calibrator(quotes, returns, spec, options).objective(g);
}

CalibrationResult fit_g(const MarketQuoteSet& quotes, const ReturnSeries& returns,
                        const EnsembleSpec& spec, const CalibrationOptions& options) {
    return Calibrator(quotes, returns, spec, options).fit();
}

}  // namespace eop
