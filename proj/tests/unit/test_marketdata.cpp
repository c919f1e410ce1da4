#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "eop/error.hpp"
#include "eop/marketdata.hpp"
#include "eop/numeric.hpp"
#include "unit/helpers.hpp"

using namespace eop;
using eop::test::random_vector;

namespace {

PriceSeries from_csv(const std::string& text) {
    std::istringstream in(text);
    return parse_price_csv(in);
}

}  // namespace

TEST_CASE("timestamps parse at minute precision") {
    const auto t = parse_timestamp("2005-12-02T08:01");
    CHECK(format_timestamp(t) == "2005-12-02T08:01");
    CHECK(parse_timestamp("2005-12-02 08:01") == t);
    CHECK(parse_timestamp("2005-12-02T08:01:00") == t);
    CHECK_THROWS_AS(parse_timestamp("2005-12-02T08:01:30"), Error);
    CHECK_THROWS_AS(parse_timestamp("2005-13-02T08:01"), Error);
    CHECK_THROWS_AS(parse_timestamp("02/12/2005 08:01"), Error);
}

TEST_CASE("ingest: three rows, one session") {
    const auto s = from_csv("timestamp,price\n2005-12-02T08:00,100\n2005-12-02T08:01,101\n2005-12-02T08:02,102\n");
    REQUIRE(s.size() == 3);
    CHECK(s.session_boundaries.empty());
    CHECK(s.records[2].price == 102.0);
}

TEST_CASE("ingest: a date change opens a session") {
    const auto s = from_csv(
        "timestamp,price\n2005-12-02T16:29,100\n2005-12-02T16:30,101\n2005-12-05T08:00,99\n"
        "2005-12-05T08:01,98\n");
    REQUIRE(s.session_boundaries.size() == 1);
    CHECK(s.session_boundaries[0] == 2);
}

TEST_CASE("ingest: column mapping and extra columns") {
    std::istringstream in("px;when;volume\n100.5;2005-12-02T08:00;7\n101;2005-12-02T08:01;3\n");
    CsvFormat f;
    f.timestamp_column = "when";
    f.price_column = "px";
    f.delimiter = ';';
    const auto s = parse_price_csv(in, f);
    REQUIRE(s.size() == 2);
    CHECK(s.records[0].price == 100.5);
}

TEST_CASE("ingest errors name the offending row") {
    auto message = [](const std::string& text) {
        try {
            from_csv(text);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("timestamp,price\n2005-12-02T08:00,100\n2005-12-02T08:01,-5\n").find("row 3") !=
          std::string::npos);
    CHECK(message("timestamp,price\n2005-12-02T08:00,100\n2005-12-02T08:01,abc\n").find("row 3") !=
          std::string::npos);
    CHECK(message("timestamp,price\n2005-12-02T08:01,100\n2005-12-02T08:01,101\n").find("duplicate") !=
          std::string::npos);
    CHECK(message("timestamp,price\n2005-12-02T08:02,100\n2005-12-02T08:01,101\n").find("precedes") !=
          std::string::npos);
    CHECK(message("time,price\n2005-12-02T08:02,100\n").find("lacks") != std::string::npos);
    CHECK_THROWS_AS(ingest_csv("/nonexistent/prices.csv"), Error);
}

TEST_CASE("fill_gaps") {
    SUBCASE("forward-fills a missing minute") {
        const auto s = fill_gaps(
            from_csv("timestamp,price\n2005-12-02T08:00,100\n2005-12-02T08:01,101\n2005-12-02T08:03,103\n"));
        REQUIRE(s.size() == 4);
        CHECK(s.prices() == std::vector<double>{100, 101, 101, 103});
        CHECK(format_timestamp(s.records[2].timestamp) == "2005-12-02T08:02");
    }
    SUBCASE("dense input is unchanged") {
        const auto in = from_csv("timestamp,price\n2005-12-02T08:00,100\n2005-12-02T08:01,101\n");
        const auto s = fill_gaps(in);
        CHECK(s.prices() == in.prices());
    }
    SUBCASE("two full sessions are concatenated without overnight rows") {
        std::ostringstream csv;
        csv << "timestamp,price\n";
        for (int day : {2, 5}) {
            for (int m = 0; m < 510; ++m) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "2005-12-%02dT%02d:%02d,%d\n", day, 8 + m / 60, m % 60, 100 + m);
                csv << buf;
            }
        }
        const auto s = fill_gaps(from_csv(csv.str()));
        CHECK(s.size() == 1020);
        REQUIRE(s.session_boundaries.size() == 1);
        CHECK(s.session_boundaries[0] == 510);
    }
    SUBCASE("never alters existing records and leaves every session dense") {
        std::mt19937_64 rng(3);
        std::ostringstream csv;
        csv << "timestamp,price\n";
        PriceSeries original;
        for (int day : {5, 6, 7}) {
            for (int m = 0; m < 200; ++m) {
                if (rng() % 3 == 0) continue;
                char buf[64];
                std::snprintf(buf, sizeof buf, "2005-12-%02dT%02d:%02d,%d\n", day, 8 + m / 60, m % 60, 50 + m);
                csv << buf;
            }
        }
        const auto in = from_csv(csv.str());
        const auto s = fill_gaps(in);
        std::size_t j = 0;
        for (const auto& r : in.records) {
            while (s.records[j].timestamp != r.timestamp) ++j;
            CHECK(s.records[j].price == r.price);
        }
        std::size_t b = 0;
        for (std::size_t i = 1; i < s.size(); ++i) {
            if (b < s.session_boundaries.size() && s.session_boundaries[b] == i) {
                ++b;
                continue;
            }
            CHECK(s.records[i].timestamp - s.records[i - 1].timestamp == std::chrono::minutes{1});
        }
    }
}

TEST_CASE("log_returns") {
    CHECK(log_returns(std::vector<double>{100, 100}) == std::vector<double>{0.0});
    const auto r = log_returns(std::vector<double>{100, 100 * std::exp(0.01)});
    CHECK(r[0] == doctest::Approx(0.01).epsilon(1e-14));
    const auto r2 = log_returns(std::vector<double>{100, 110, 99});
    CHECK(r2[0] == doctest::Approx(std::log(1.1)).epsilon(1e-15));
    CHECK(r2[1] == doctest::Approx(std::log(0.9)).epsilon(1e-15));
    CHECK_THROWS_AS(log_returns(std::vector<double>{100}), Error);
}

TEST_CASE("log_returns compose with the cumulative exponential") {
    std::vector<double> prices{5528.1};
    for (double r : random_vector(5000, 17, 3e-4)) prices.push_back(prices.back() * std::exp(r));
    const auto r = log_returns(prices);
    double p = prices.front();
    double worst = 0.0;
    for (std::size_t n = 0; n < r.size(); ++n) {
        p = prices[n] * std::exp(r[n]);
        worst = std::max(worst, std::abs(p - prices[n + 1]) / prices[n + 1]);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("purify") {
    SUBCASE("an injected 50-sigma return is neutralized") {
        auto x = random_vector(10000, 1);
        x[1234] = 50.0;
        const auto r = purify(x);
        CHECK(r.values[1234] == 0.0);
        CHECK(r.outliers >= 1);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (i != 1234) CHECK(r.values[i] == x[i]);
        }
    }
    SUBCASE("all-zero input is unchanged") {
        const std::vector<double> x(100, 0.0);
        const auto r = purify(x);
        CHECK(r.values == x);
        CHECK(r.outliers == 0);
    }
    SUBCASE("nothing beyond the threshold") {
        auto x = random_vector(1000, 2);
        const double s = stddev(x);
        for (double& v : x) v = std::clamp(v, -3 * s, 3 * s);
        const auto r = purify(x);
        CHECK(r.values == x);
        CHECK(r.outliers == 0);
    }
    SUBCASE("idempotent") {
        auto x = random_vector(20000, 3);
        x[5] = 40.0;
        x[6] = -25.0;
        x[9000] = 15.0;
        const auto once = purify(x);
        const auto twice = purify(once.values);
        CHECK(twice.values == once.values);
        CHECK(twice.outliers == 0);
    }
    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(purify(std::vector<double>{}), Error);
        CHECK_THROWS_AS(purify(std::vector<double>{1.0}, 0.0), Error);
    }
}

TEST_CASE("detrend") {
    SUBCASE("constant drift is removed entirely") {
        const std::vector<double> x(6000, 2.5e-5);
        const auto r = detrend(x, 2550);
        for (double v : r.values) CHECK(std::abs(v) < 1e-18);
        CHECK(r.mean_removed == doctest::Approx(2.5e-5));
        CHECK_FALSE(r.drift_fallback);
    }
    SUBCASE("zero-mean noise keeps its variance and loses its mean") {
        const auto x = random_vector(200000, 4, 1e-4);
        const auto r = detrend(x, 2550);
        const double s = stddev(r.values);
        CHECK(std::abs(mean(r.values)) <= 1e-12 * s);
        const double ratio = (s * s) / (stddev(x) * stddev(x));
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.05));
    }
    SUBCASE("a linear log-price trend plus noise") {
        // log S_n = c n + noise_n, so returns are c + noise_{n+1} - noise_n.
        const double c = 2e-5;
        const auto noise = random_vector(30001, 5, 1e-3);
        std::vector<double> prices(noise.size());
        for (std::size_t n = 0; n < prices.size(); ++n) {
            prices[n] = 5000.0 * std::exp(c * static_cast<double>(n) + noise[n]);
        }
        const auto r = detrend(log_returns(prices), 2550);
        const double s = stddev(r.values);
        CHECK(std::abs(mean(r.values)) <= 1e-12 * s);
        const std::size_t n = r.size();
        double tail = 0.0;
        for (std::size_t i = n - 2550; i < n; ++i) tail += r.values[i];
        CHECK(std::abs(tail / 2550.0) < 1e-3 * s);
    }
    SUBCASE("short series fall back to global-mean removal") {
        const auto x = random_vector(100, 6, 1e-4);
        const auto r = detrend(x, 2550);
        CHECK(r.drift_fallback);
        CHECK(std::abs(mean(r.values)) <= 1e-12 * stddev(r.values));
    }
    SUBCASE("window below two samples is rejected") {
        CHECK_THROWS_AS(detrend(std::vector<double>(10, 0.0), 1), Error);
    }
}

TEST_CASE("preprocess carries metadata through") {
    std::ostringstream csv;
    csv << "timestamp,price\n";
    double p = 5500.0;
    const auto shocks = random_vector(3000, 8, 2e-4);
    for (int m = 0; m < 3000; ++m) {
        if (m == 1500) p *= 1.05;
        p *= std::exp(shocks[m]);
        char buf[64];
        std::snprintf(buf, sizeof buf, "2005-12-%02dT%02d:%02d,%.6f\n", 1 + m / 510 + (m / 510 >= 2 ? 2 : 0),
                      8 + (m % 510) / 60, (m % 510) % 60, p);
        csv << buf;
    }
    const auto series = fill_gaps(from_csv(csv.str()));
    const auto r = preprocess(series, {10.0, 2550});
    CHECK(r.size() == series.size() - 1);
    CHECK(r.outliers_neutralized >= 1);
    REQUIRE(r.first.has_value());
    CHECK(format_timestamp(*r.first) == "2005-12-01T08:00");
}
