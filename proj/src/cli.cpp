#include "eop/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "eop/analytics.hpp"
#include "eop/calendar.hpp"
#include "eop/calibration.hpp"
#include "eop/config.hpp"
#include "eop/error.hpp"
#include "eop/marketdata.hpp"
#include "eop/pricing.hpp"
#include "eop/series_io.hpp"
#include "eop/version.hpp"
#include "eop/wavelet.hpp"

namespace eop::cli {

namespace {

using Json = nlohmann::ordered_json;

// Signals a flag combination CLI11 cannot express; mapped to the usage exit code.
class UsageError : public Error {
public:
    using Error::Error;
};

struct PendingFile {
    std::string path;
    std::string contents;
};

// Collects artifacts and writes them only once the whole computation has
// succeeded, followed by the manifest.
class Run {
public:
    Run(std::string subcommand, const RunConfig& config) : subcommand_(std::move(subcommand)) {
        manifest_["tool"] = "eop";
        manifest_["version"] = kVersion;
        manifest_["subcommand"] = subcommand_;
        manifest_["config"] = Json::parse(config.to_json().dump());
        manifest_["parameters"] = Json::object();
        manifest_["inputs"] = Json::array();
        manifest_["outputs"] = Json::array();
    }

    Json& parameters() { return manifest_["parameters"]; }
    Json& results() { return manifest_["results"]; }

    void input(const std::string& path) {
        manifest_["inputs"].push_back({{"path", path}, {"sha256", sha256_file(path)}});
    }

    void output(std::string path, std::string contents) {
        files_.push_back({std::move(path), std::move(contents)});
    }

    void commit(const std::string& manifest_path) {
        for (const auto& f : files_) {
            manifest_["outputs"].push_back({{"path", f.path}, {"sha256", sha256_hex(f.contents)}});
        }
        for (const auto& f : files_) write_file_atomic(f.path, f.contents);
        write_file_atomic(manifest_path, manifest_.dump(2) + "\n");
    }

    std::string default_manifest_path() const {
        if (!files_.empty()) return files_.front().path + ".manifest.json";
        return "eop-" + subcommand_ + ".manifest.json";
    }

private:
    std::string subcommand_;
    Json manifest_;
    std::vector<PendingFile> files_;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError("malformed " + what + " '" + text + "'");
    }
}

// "lo:hi:step" (inclusive) or a comma-separated list.
std::vector<double> parse_strikes(const std::string& text) {
    std::vector<double> strikes;
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw UsageError("strike range must be lo:hi:step");
        const double lo = to_double(parts[0], "strike");
        const double hi = to_double(parts[1], "strike");
        const double step = to_double(parts[2], "strike step");
        if (!(step > 0.0) || hi < lo) throw UsageError("strike range needs lo <= hi and step > 0");
        const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
        for (std::size_t i = 0; i <= count; ++i) strikes.push_back(lo + static_cast<double>(i) * step);
    } else {
        for (const auto& s : split(text, ',')) strikes.push_back(to_double(s, "strike"));
    }
    if (strikes.empty()) throw UsageError("no strikes given");
    return strikes;
}

std::pair<double, double> parse_bounds(const std::string& text) {
    const auto parts = split(text, ':');
    if (parts.size() != 2) throw UsageError("bounds must be lo:hi");
    return {to_double(parts[0], "bound"), to_double(parts[1], "bound")};
}

std::vector<std::chrono::year_month_day> parse_holidays(const std::string& text) {
    std::vector<std::chrono::year_month_day> out;
    for (const auto& s : split(text, ',')) out.push_back(parse_date(s));
    return out;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Expiry from either --expiry-minutes or the --quote-date/--expiry-date pair.
struct ExpiryFlags {
    std::size_t minutes = 0;
    std::string quote_date;
    std::string expiry_date;
    std::string holidays;
    CLI::Option* minutes_opt = nullptr;
    CLI::Option* quote_opt = nullptr;
    CLI::Option* expiry_opt = nullptr;

    void add(CLI::App* app) {
        minutes_opt = app->add_option("--expiry-minutes", minutes, "Expiry in trading minutes");
        quote_opt = app->add_option("--quote-date", quote_date, "Quote date YYYY-MM-DD");
        expiry_opt = app->add_option("--expiry-date", expiry_date, "Expiry date YYYY-MM-DD");
        app->add_option("--holidays", holidays, "Comma-separated non-trading dates");
    }

    std::size_t resolve(const RunConfig& config, Json& params) const {
        const bool by_minutes = minutes_opt->count() > 0;
        const bool by_dates = quote_opt->count() > 0 || expiry_opt->count() > 0;
        if (by_minutes && by_dates) {
            throw UsageError("--expiry-minutes conflicts with --quote-date/--expiry-date");
        }
        if (by_minutes) {
            if (minutes < 1) throw UsageError("--expiry-minutes must be positive");
            params["expiry_minutes"] = minutes;
            return minutes;
        }
        if (quote_opt->count() == 0 || expiry_opt->count() == 0) {
            throw UsageError("give --expiry-minutes or both --quote-date and --expiry-date");
        }
        const auto hol = parse_holidays(holidays);
        const auto q = parse_date(quote_date);
        const auto e = parse_date(expiry_date);
        const std::size_t n = expiry_minutes(q, e, config.minutes_per_day, hol);
        params["quote_date"] = format_date(q);
        params["expiry_date"] = format_date(e);
        params["trading_days"] = trading_days_between(q, e, hol);
        params["expiry_minutes"] = n;
        return n;
    }
};

std::string quote_table(const std::vector<PremiumQuote>& quotes) {
    std::ostringstream t;
    t << pad("strike", 10) << pad("premium", 12) << pad("exercised", 11) << pad("stddev", 12)
      << pad("windows", 9) << '\n';
    for (const auto& q : quotes) {
        t << pad(fixed(q.strike, 2), 10) << pad(fixed(q.premium, 4), 12)
          << pad(fixed(q.exercised_fraction, 4), 11) << pad(fixed(q.payoff_stddev, 4), 12)
          << pad(std::to_string(q.sample_count), 9) << '\n';
    }
    return t.str();
}

Json quotes_json(const std::vector<PremiumQuote>& quotes) {
    Json arr = Json::array();
    for (const auto& q : quotes) {
        arr.push_back({{"strike", q.strike},
                       {"premium", q.premium},
                       {"exercised_fraction", q.exercised_fraction},
                       {"payoff_stddev", q.payoff_stddev},
                       {"sample_count", q.sample_count}});
    }
    return arr;
}

Json report_json(const CompressionReport& r) {
    return {{"total_samples", r.total_samples},
            {"subseries_count", r.subseries_count},
            {"retained_coefficients", r.retained_coefficients},
            {"retention_fraction", r.retention_fraction},
            {"subseries_length", r.subseries_length},
            {"remainder_samples", r.remainder_samples},
            {"J", r.max_scale},
            {"j_star", r.j_star}};
}

std::string serialize_prices(const PriceSeries& s) {
    std::ostringstream out;
    write_prices(out, s);
    return out.str();
}

std::string serialize_returns(const ReturnSeries& s) {
    std::ostringstream out;
    write_returns(out, s);
    return out.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Empirical option pricing on raw and Haar-filtered return series", "eop"};
    app.set_version_flag("--version", std::string("eop ") + kVersion + " (" + kBuildInfo + ")");
    app.require_subcommand(1);

    std::string config_path;
    unsigned threads = 0;
    std::string manifest_path;
    app.add_option("--config", config_path, "Key-value config file (default: $EOP_CONFIG)");
    app.add_option("--threads", threads, "Worker threads, 0 = all cores");
    app.add_option("--manifest", manifest_path, "Manifest path (default: <first output>.manifest.json)");

    // Config overrides shared by every subcommand.
    RunConfig flags;
    std::string bounds_text;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> overrides;
    auto override_opt = [&](CLI::App* sub, const std::string& name, auto RunConfig::*member,
                            const std::string& help) {
        auto* opt = sub->add_option(name, flags.*member, help);
        overrides.emplace_back(opt, [member, &flags](RunConfig& c) { c.*member = flags.*member; });
    };

    auto common = [&](CLI::App* sub) {
        override_opt(sub, "--minutes-per-day", &RunConfig::minutes_per_day, "Trading minutes per day");
        override_opt(sub, "--minutes-per-year", &RunConfig::minutes_per_year, "Trading minutes per year");
    };

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Parse a minute price CSV and fill intra-session gaps");
    std::string ingest_input, ingest_out;
    CsvFormat csv;
    std::string delimiter = ",";
    bool no_fill = false;
    ingest->add_option("--input", ingest_input, "Price CSV")->required();
    ingest->add_option("--out", ingest_out, "Output price series file")->required();
    ingest->add_option("--timestamp-column", csv.timestamp_column, "Timestamp column name");
    ingest->add_option("--price-column", csv.price_column, "Price column name");
    ingest->add_option("--delimiter", delimiter, "Field delimiter");
    ingest->add_flag("--no-fill", no_fill, "Keep missing minutes missing");
    common(ingest);

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "Log-returns, outlier purification and detrending");
    std::string prep_in, prep_out;
    prep->add_option("--in", prep_in, "Price series file")->required();
    prep->add_option("--out", prep_out, "Output return series file")->required();
    override_opt(prep, "--outlier-sigma", &RunConfig::outlier_sigma, "Outlier threshold in standard deviations");
    override_opt(prep, "--drift-window", &RunConfig::drift_window_minutes, "Trailing drift window in minutes");
    common(prep);

    // filter
    auto* filt = app.add_subcommand("filter", "Haar low-pass filter per subseries");
    std::string filt_in, filt_out, filt_report;
    filt->add_option("--in", filt_in, "Return series file")->required();
    filt->add_option("--out", filt_out, "Filtered return series file")->required();
    filt->add_option("--report", filt_report, "Compression report JSON");
    override_opt(filt, "--J", &RunConfig::max_scale, "Subseries length is 2^(J+1)");
    override_opt(filt, "--jstar", &RunConfig::j_star, "Keep scales j < jstar");
    bool drop_mean = false;
    filt->add_flag("--drop-mean", drop_mean, "Discard each subseries mean");
    common(filt);

    // price
    auto* price = app.add_subcommand("price", "Price a call strike ladder");
    std::string price_series, price_strikes, price_out, price_json;
    double spot = 0.0;
    double g = 1.0;
    ExpiryFlags price_expiry;
    price->add_option("--series", price_series, "Return series file")->required();
    price->add_option("--spot", spot, "Spot index level")->required();
    price->add_option("--strikes", price_strikes, "lo:hi:step or comma list")->required();
    price->add_option("--g", g, "Volatility correction factor");
    price->add_option("--out", price_out, "Write the table here instead of stdout");
    price->add_option("--json", price_json, "Also write quotes as JSON");
    price_expiry.add(price);
    override_opt(price, "--rate", &RunConfig::rate_annual, "Annual risk-free rate");
    override_opt(price, "--stride", &RunConfig::ensemble_stride, "Window translation in minutes");
    common(price);

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Least-squares fit of the g factor");
    std::string cal_series, cal_quotes, cal_out, cal_json, cal_holidays;
    double exclude_below = 0.0;
    cal->add_option("--series", cal_series, "Return series file")->required();
    cal->add_option("--quotes", cal_quotes, "Market quotes CSV")->required();
    cal->add_option("--out", cal_out, "Write the table here instead of stdout");
    cal->add_option("--json", cal_json, "Also write the result as JSON");
    cal->add_option("--holidays", cal_holidays, "Comma-separated non-trading dates");
    auto* bounds_opt = cal->add_option("--bounds", bounds_text, "Search interval lo:hi");
    auto* exclude_opt =
        cal->add_option("--exclude-below", exclude_below, "Drop strikes whose g=1 premium is below this");
    override_opt(cal, "--rate", &RunConfig::rate_annual, "Annual risk-free rate");
    override_opt(cal, "--stride", &RunConfig::ensemble_stride, "Window translation in minutes");
    common(cal);

    // hist
    auto* hist = app.add_subcommand("hist", "Histograms of horizon-aggregated returns");
    std::string hist_series, hist_horizons = "100,300,600", hist_out, hist_edges_from;
    std::size_t hist_stride = 60;
    std::size_t bins = 61;
    hist->add_option("--series", hist_series, "Return series file")->required();
    hist->add_option("--horizons", hist_horizons, "Comma-separated horizons in minutes");
    hist->add_option("--out", hist_out, "Output CSV")->required();
    hist->add_option("--hist-stride", hist_stride, "Window translation in minutes");
    hist->add_option("--bins", bins, "Number of bins");
    hist->add_option("--edges-from", hist_edges_from, "Take bin edges from this series' histograms");
    common(hist);

    // compare
    auto* cmp = app.add_subcommand("compare", "Premiums on original vs filtered series");
    std::string cmp_original, cmp_filtered, cmp_strikes, cmp_out, cmp_market;
    double cmp_spot = 0.0;
    double cmp_g = 1.0;
    ExpiryFlags cmp_expiry;
    cmp->add_option("--original", cmp_original, "Original return series")->required();
    cmp->add_option("--filtered", cmp_filtered, "Filtered return series")->required();
    auto* cmp_spot_opt = cmp->add_option("--spot", cmp_spot, "Spot index level");
    auto* cmp_strikes_opt = cmp->add_option("--strikes", cmp_strikes, "lo:hi:step or comma list");
    cmp->add_option("--g", cmp_g, "Volatility correction factor");
    cmp->add_option("--market", cmp_market, "Market quotes CSV (supplies spot, dates, strikes, MKT)");
    cmp->add_option("--out", cmp_out, "Output .csv or .json")->required();
    cmp_expiry.add(cmp);
    override_opt(cmp, "--rate", &RunConfig::rate_annual, "Annual risk-free rate");
    override_opt(cmp, "--stride", &RunConfig::ensemble_stride, "Window translation in minutes");
    common(cmp);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "eop: " << e.what() << '\n';
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        RunConfig config;
        if (config_path.empty()) {
            if (const char* env = std::getenv("EOP_CONFIG"); env != nullptr && *env != '\0') {
                config_path = env;
            }
        }
        if (!config_path.empty()) apply_config_file(config, config_path);
        for (auto& [opt, apply] : overrides) {
            if (opt->count() > 0) apply(config);
        }
        if (bounds_opt->count() > 0) {
            const auto [lo, hi] = parse_bounds(bounds_text);
            config.calibration_lower = lo;
            config.calibration_upper = hi;
        }
        config.validate();

        Run run(sub->get_name(), config);
        auto& params = run.parameters();

        if (sub == ingest) {
            if (delimiter.size() != 1) throw UsageError("--delimiter must be a single character");
            csv.delimiter = delimiter.front();
            run.input(ingest_input);
            PriceSeries series = ingest_csv(ingest_input, csv);
            series.minutes_per_day = config.minutes_per_day;
            const std::size_t raw = series.size();
            if (!no_fill) series = fill_gaps(series);
            params["fill_gaps"] = !no_fill;
            run.results() = {{"records_read", raw},
                             {"records_written", series.size()},
                             {"sessions", series.empty() ? 0 : series.session_boundaries.size() + 1}};
            run.output(ingest_out, serialize_prices(series));
        } else if (sub == prep) {
            run.input(prep_in);
            const PriceSeries prices = load_prices(prep_in);
            const ReturnSeries returns =
                preprocess(prices, {config.outlier_sigma, config.drift_window_minutes});
            run.results() = {{"samples", returns.size()},
                             {"outliers_neutralized", returns.outliers_neutralized},
                             {"drift_fallback", returns.drift_fallback},
                             {"mean_removed", returns.mean_removed}};
            run.output(prep_out, serialize_returns(returns));
        } else if (sub == filt) {
            run.input(filt_in);
            const ReturnSeries returns = load_returns(filt_in);
            FilterSpec spec{config.j_star, !drop_mean};
            params["keep_mean"] = spec.keep_mean;
            const auto filtered = filter_series(returns, config.max_scale, spec, threads);
            const Json report = report_json(filtered.report);
            run.results() = report;
            run.output(filt_out, serialize_returns(filtered.series));
            if (!filt_report.empty()) run.output(filt_report, report.dump(2) + "\n");
            if (filtered.report.remainder_samples != 0) {
                err << "eop: " << filtered.report.remainder_samples
                    << " trailing samples excluded (not a whole subseries)\n";
            }
        } else if (sub == price) {
            const std::size_t n = price_expiry.resolve(config, params);
            run.input(price_series);
            const ReturnSeries returns = load_returns(price_series);
            PricingRequest base;
            base.spot = spot;
            base.expiry_minutes = n;
            base.rate_annual = config.rate_annual;
            base.g_factor = g;
            base.minutes_per_year = config.minutes_per_year;
            const auto strikes = parse_strikes(price_strikes);
            params["spot"] = spot;
            params["g"] = g;
            params["strikes"] = strikes;
            const auto ladder = make_ladder(base, strikes);
            const auto quotes =
                price_ladder(returns, ladder, {n, config.ensemble_stride}, threads);
            std::ostringstream table;
            table << "# spot=" << format_double(spot) << " expiry_minutes=" << n
                  << " rate=" << format_double(config.rate_annual) << " g=" << format_double(g)
                  << " windows=" << quotes.front().sample_count << '\n'
                  << quote_table(quotes);
            if (price_out.empty()) {
                out << table.str();
            } else {
                run.output(price_out, table.str());
            }
            if (!price_json.empty()) {
                Json doc = {{"parameters", params}, {"quotes", quotes_json(quotes)}};
                run.output(price_json, doc.dump(2) + "\n");
            }
            run.results() = {{"table_sha256", sha256_hex(table.str())}};
        } else if (sub == cal) {
            run.input(cal_series);
            run.input(cal_quotes);
            const ReturnSeries returns = load_returns(cal_series);
            std::ifstream qin(cal_quotes);
            if (!qin) throw Error("cannot open " + cal_quotes);
            const MarketQuoteSet quotes = parse_quotes_csv(qin, config.rate_annual);
            const auto hol = parse_holidays(cal_holidays);
            const std::size_t n =
                expiry_minutes(quotes.quote_date, quotes.expiry_date, config.minutes_per_day, hol);
            CalibrationOptions options;
            options.lower = config.calibration_lower;
            options.upper = config.calibration_upper;
            options.minutes_per_year = config.minutes_per_year;
            options.threads = threads;
            if (exclude_opt->count() > 0) options.exclusion_floor = exclude_below;
            params["quote_date"] = format_date(quotes.quote_date);
            params["expiry_date"] = format_date(quotes.expiry_date);
            params["expiry_minutes"] = n;
            params["spot"] = quotes.spot;
            if (options.exclusion_floor) params["exclude_below"] = *options.exclusion_floor;
            const auto result = fit_g(quotes, returns, {n, config.ensemble_stride}, options);

            std::ostringstream table;
            table << "# g=" << fixed(result.g, 4) << " sigma_star=" << fixed(result.sigma_star, 6)
                  << " sigma_historical=" << fixed(result.sigma_historical, 6)
                  << " rss=" << fixed(result.rss, 6) << " iterations=" << result.iterations
                  << (result.at_boundary ? " boundary=1" : " boundary=0") << '\n';
            table << pad("strike", 10) << pad("market", 12) << pad("model", 12) << pad("residual", 12)
                  << pad("used", 6) << '\n';
            Json rows = Json::array();
            for (const auto& s : result.per_strike) {
                table << pad(fixed(s.strike, 2), 10) << pad(fixed(s.market, 4), 12)
                      << pad(fixed(s.model, 4), 12) << pad(fixed(s.residual, 4), 12)
                      << pad(s.excluded ? "no" : "yes", 6) << '\n';
                rows.push_back({{"strike", s.strike},
                                {"market", s.market},
                                {"model", s.model},
                                {"residual", s.residual},
                                {"excluded", s.excluded}});
            }
            const Json doc = {{"g", result.g},
                              {"sigma_star", result.sigma_star},
                              {"sigma_historical", result.sigma_historical},
                              {"rss", result.rss},
                              {"iterations", result.iterations},
                              {"at_boundary", result.at_boundary},
                              {"per_strike", rows}};
            if (cal_out.empty()) {
                out << table.str();
            } else {
                run.output(cal_out, table.str());
            }
            if (!cal_json.empty()) run.output(cal_json, doc.dump(2) + "\n");
            run.results() = {{"g", result.g}, {"rss", result.rss}, {"sigma_star", result.sigma_star}};
        } else if (sub == hist) {
            run.input(hist_series);
            const ReturnSeries returns = load_returns(hist_series);
            std::optional<ReturnSeries> reference;
            if (!hist_edges_from.empty()) {
                run.input(hist_edges_from);
                reference = load_returns(hist_edges_from);
            }
            std::vector<std::size_t> horizons;
            for (const auto& h : split(hist_horizons, ',')) {
                const double v = to_double(h, "horizon");
                if (!(v >= 1.0) || v != std::floor(v)) throw UsageError("horizons must be positive integers");
                horizons.push_back(static_cast<std::size_t>(v));
            }
            if (horizons.empty()) throw UsageError("no horizons given");
            params["horizons"] = horizons;
            params["hist_stride"] = hist_stride;
            params["bins"] = bins;
            std::ostringstream csv_out;
            csv_out << "horizon,bin_left,bin_right,count\n";
            Json stats = Json::array();
            for (std::size_t h : horizons) {
                HorizonHistogram hg;
                if (reference) {
                    const auto ref = horizon_histogram(*reference, h, hist_stride, bins);
                    hg = horizon_histogram(returns, h, hist_stride, ref.bin_edges);
                } else {
                    hg = horizon_histogram(returns, h, hist_stride, bins);
                }
                for (std::size_t b = 0; b < hg.counts.size(); ++b) {
                    csv_out << h << ',' << format_double(hg.bin_edges[b]) << ','
                            << format_double(hg.bin_edges[b + 1]) << ',' << hg.counts[b] << '\n';
                }
                stats.push_back({{"horizon", h},
                                 {"sample_count", hg.sample_count},
                                 {"mean", hg.mean},
                                 {"stddev", hg.stddev},
                                 {"excess_kurtosis", hg.excess_kurtosis}});
            }
            run.results() = {{"histograms", stats}};
            run.output(hist_out, csv_out.str());
        } else if (sub == cmp) {
            run.input(cmp_original);
            run.input(cmp_filtered);
            const ReturnSeries original = load_returns(cmp_original);
            const ReturnSeries filtered = load_returns(cmp_filtered);
            std::vector<double> strikes;
            std::vector<std::optional<double>> market;
            std::size_t n = 0;
            double s0 = cmp_spot;
            if (!cmp_market.empty()) {
                if (cmp_spot_opt->count() > 0 || cmp_strikes_opt->count() > 0 ||
                    cmp_expiry.minutes_opt->count() > 0 || cmp_expiry.quote_opt->count() > 0 ||
                    cmp_expiry.expiry_opt->count() > 0) {
                    throw UsageError("--market supplies spot, strikes and dates; do not repeat them");
                }
                run.input(cmp_market);
                std::ifstream qin(cmp_market);
                if (!qin) throw Error("cannot open " + cmp_market);
                const auto quotes = parse_quotes_csv(qin, config.rate_annual);
                n = expiry_minutes(quotes.quote_date, quotes.expiry_date, config.minutes_per_day,
                                   parse_holidays(cmp_expiry.holidays));
                s0 = quotes.spot;
                for (const auto& q : quotes.quotes) {
                    strikes.push_back(q.strike);
                    market.emplace_back(q.premium);
                }
                params["quote_date"] = format_date(quotes.quote_date);
                params["expiry_date"] = format_date(quotes.expiry_date);
                params["expiry_minutes"] = n;
            } else {
                if (cmp_spot_opt->count() == 0 || cmp_strikes_opt->count() == 0) {
                    throw UsageError("compare needs --spot and --strikes, or --market");
                }
                n = cmp_expiry.resolve(config, params);
                strikes = parse_strikes(cmp_strikes);
            }
            params["spot"] = s0;
            params["g"] = cmp_g;
            params["strikes"] = strikes;
            PricingRequest base;
            base.spot = s0;
            base.expiry_minutes = n;
            base.rate_annual = config.rate_annual;
            base.g_factor = cmp_g;
            base.minutes_per_year = config.minutes_per_year;
            const auto ladder = make_ladder(base, strikes);
            const auto rows = compare_premiums(original, filtered, ladder,
                                               {n, config.ensemble_stride}, market, threads);
            std::string body;
            if (ends_with(cmp_out, ".json")) {
                Json arr = Json::array();
                for (const auto& r : rows) {
                    Json row = {{"strike", r.strike},
                                {"market", r.market ? Json(*r.market) : Json(nullptr)},
                                {"premium_original", r.premium_original},
                                {"premium_filtered", r.premium_filtered},
                                {"abs_diff", r.abs_diff},
                                {"rel_diff", std::isfinite(r.rel_diff) ? Json(r.rel_diff) : Json(nullptr)},
                                {"exercised_original", r.exercised_original},
                                {"exercised_filtered", r.exercised_filtered}};
                    arr.push_back(row);
                }
                body = Json{{"parameters", params}, {"rows", arr}}.dump(2) + "\n";
            } else {
                std::ostringstream c;
                c << "strike,market,premium_original,premium_filtered,abs_diff,rel_diff\n";
                for (const auto& r : rows) {
                    c << format_double(r.strike) << ','
                      << (r.market ? format_double(*r.market) : std::string()) << ','
                      << format_double(r.premium_original) << ',' << format_double(r.premium_filtered)
                      << ',' << format_double(r.abs_diff) << ',' << format_double(r.rel_diff) << '\n';
                }
                body = c.str();
            }
            double worst = 0.0;
            for (const auto& r : rows) worst = std::max(worst, r.abs_diff);
            run.results() = {{"rows", rows.size()}, {"max_abs_diff", worst}};
            run.output(cmp_out, body);
        }

        run.commit(manifest_path.empty() ? run.default_manifest_path() : manifest_path);
        return kExitOk;
    } catch (const UsageError& e) {
        err << "eop " << sub->get_name() << ": " << e.what() << '\n' << sub->help();
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "eop " << sub->get_name() << ": " << e.what() << '\n';
        return kExitFailure;
    }
}

}  // namespace eop::cli
