#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <span>
#include <stdexcept>

#include "eop/analytics.hpp"
#include "eop/calibration.hpp"
#include "eop/error.hpp"
#include "eop/marketdata.hpp"
#include "eop/pricing.hpp"
#include "eop/version.hpp"
#include "eop/wavelet.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::span<const double> as_span(const Array& a) {
    if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
    return {a.data(), static_cast<std::size_t>(a.shape(0))};
}

Array to_array(const std::vector<double>& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

eop::ReturnSeries as_series(const Array& a) {
    const auto s = as_span(a);
    eop::ReturnSeries out;
    out.values.assign(s.begin(), s.end());
    return out;
}

py::dict quote_dict(const eop::PremiumQuote& q) {
    py::dict d;
    d["strike"] = q.strike;
    d["premium"] = q.premium;
    d["sample_count"] = q.sample_count;
    d["payoff_stddev"] = q.payoff_stddev;
    d["exercised_fraction"] = q.exercised_fraction;
    return d;
}

eop::PricingRequest request(double spot, double strike, std::size_t expiry_minutes, double rate,
                            double g, int minutes_per_year) {
    eop::PricingRequest r;
    r.spot = spot;
    r.strike = strike;
    r.expiry_minutes = expiry_minutes;
    r.rate_annual = rate;
    r.g_factor = g;
    r.minutes_per_year = minutes_per_year;
    return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Empirical option pricing and Haar low-pass filtering";
    m.attr("__version__") = eop::kVersion;

    py::register_exception<eop::Error>(m, "EopError", PyExc_ValueError);

    py::class_<eop::WaveletDecomposition>(m, "WaveletDecomposition")
        .def_property_readonly("max_scale", &eop::WaveletDecomposition::max_scale)
        .def_property_readonly("length", &eop::WaveletDecomposition::length)
        .def_property_readonly("mean", &eop::WaveletDecomposition::mean)
        .def("coefficient",
             [](const eop::WaveletDecomposition& d, int j, std::size_t k) {
                 return d.coefficient({j, k});
             },
             py::arg("j"), py::arg("k"))
        .def("coefficient_count", &eop::WaveletDecomposition::coefficient_count)
        .def("retained_values", &eop::WaveletDecomposition::retained_values)
        .def("dense", [](const eop::WaveletDecomposition& d) {
            const auto s = d.dense();
            return to_array({s.begin(), s.end()});
        });

    m.def("haar_forward", [](const Array& x) { return eop::haar_forward(as_span(x)); },
          py::arg("segment"));
    m.def("haar_inverse", [](const eop::WaveletDecomposition& d) { return to_array(eop::haar_inverse(d)); },
          py::arg("decomposition"));
    m.def("lowpass_filter",
          [](const eop::WaveletDecomposition& d, int j_star, bool keep_mean) {
              return eop::lowpass_filter(d, {j_star, keep_mean});
          },
          py::arg("decomposition"), py::arg("j_star") = 4, py::arg("keep_mean") = true);

    m.def("filter_series",
          [](const Array& x, int max_scale, int j_star, bool keep_mean, unsigned threads) {
              const auto f = eop::filter_series(as_series(x), max_scale, {j_star, keep_mean}, threads);
              py::dict report;
              report["total_samples"] = f.report.total_samples;
              report["subseries_count"] = f.report.subseries_count;
              report["subseries_length"] = f.report.subseries_length;
              report["retained_coefficients"] = f.report.retained_coefficients;
              report["retention_fraction"] = f.report.retention_fraction;
              report["remainder_samples"] = f.report.remainder_samples;
              return py::make_tuple(to_array(f.series.values), report);
          },
          py::arg("returns"), py::arg("J") = 11, py::arg("j_star") = 4, py::arg("keep_mean") = true,
          py::arg("threads") = 0);

    m.def("log_returns", [](const Array& prices) { return to_array(eop::log_returns(as_span(prices))); },
          py::arg("prices"));
    m.def("purify",
          [](const Array& x, double outlier_sigma) {
              auto r = eop::purify(as_span(x), outlier_sigma);
              return py::make_tuple(to_array(r.values), r.outliers);
          },
          py::arg("returns"), py::arg("outlier_sigma") = 10.0);
    m.def("detrend",
          [](const Array& x, std::size_t window) { return to_array(eop::detrend(as_span(x), window).values); },
          py::arg("returns"), py::arg("drift_window") = 2550);

    m.def("price_call",
          [](const Array& x, double spot, double strike, std::size_t expiry, double rate, double g,
             std::size_t stride, int mpy, unsigned threads) {
              return quote_dict(eop::price_call(as_series(x), request(spot, strike, expiry, rate, g, mpy),
                                                {expiry, stride}, threads));
          },
          py::arg("returns"), py::arg("spot"), py::arg("strike"), py::arg("expiry_minutes"),
          py::arg("rate") = 0.0, py::arg("g") = 1.0, py::arg("stride") = 60,
          py::arg("minutes_per_year") = eop::kDefaultMinutesPerYear, py::arg("threads") = 0);

    m.def("price_ladder",
          [](const Array& x, double spot, const std::vector<double>& strikes, std::size_t expiry,
             double rate, double g, std::size_t stride, int mpy, unsigned threads) {
              const auto ladder = eop::make_ladder(request(spot, strikes.at(0), expiry, rate, g, mpy), strikes);
              py::list out;
              for (const auto& q : eop::price_ladder(as_series(x), ladder, {expiry, stride}, threads)) {
                  out.append(quote_dict(q));
              }
              return out;
          },
          py::arg("returns"), py::arg("spot"), py::arg("strikes"), py::arg("expiry_minutes"),
          py::arg("rate") = 0.0, py::arg("g") = 1.0, py::arg("stride") = 60,
          py::arg("minutes_per_year") = eop::kDefaultMinutesPerYear, py::arg("threads") = 0);

    m.def("fit_g",
          [](const Array& x, double spot, const std::vector<double>& strikes,
             const std::vector<double>& premiums, std::size_t expiry, double rate, double lower,
             double upper, std::size_t stride, int mpy) {
              if (strikes.size() != premiums.size()) {
                  throw std::invalid_argument("strikes and premiums differ in length");
              }
              eop::MarketQuoteSet quotes;
              quotes.spot = spot;
              quotes.rate_annual = rate;
              for (std::size_t i = 0; i < strikes.size(); ++i) quotes.quotes.push_back({strikes[i], premiums[i]});
              eop::CalibrationOptions options;
              options.lower = lower;
              options.upper = upper;
              options.minutes_per_year = mpy;
              const auto r = eop::fit_g(quotes, as_series(x), {expiry, stride}, options);
              py::dict d;
              d["g"] = r.g;
              d["sigma_star"] = r.sigma_star;
              d["sigma_historical"] = r.sigma_historical;
              d["rss"] = r.rss;
              d["iterations"] = r.iterations;
              d["at_boundary"] = r.at_boundary;
              return d;
          },
          py::arg("returns"), py::arg("spot"), py::arg("strikes"), py::arg("premiums"),
          py::arg("expiry_minutes"), py::arg("rate") = 0.0, py::arg("lower") = 0.1,
          py::arg("upper") = 3.0, py::arg("stride") = 60,
          py::arg("minutes_per_year") = eop::kDefaultMinutesPerYear);

    m.def("black_scholes_call", &eop::black_scholes_call, py::arg("spot"), py::arg("strike"),
          py::arg("expiry_minutes"), py::arg("rate"), py::arg("sigma"),
          py::arg("minutes_per_year") = eop::kDefaultMinutesPerYear);

    m.def("generate_synthetic",
          [](const std::string& kind, std::size_t length, double sigma, std::uint64_t seed, double nu) {
              eop::SyntheticSpec spec;
              if (kind == "gaussian") {
                  spec.kind = eop::Distribution::gaussian;
              } else if (kind == "student_t") {
                  spec.kind = eop::Distribution::student_t;
              } else {
                  throw std::invalid_argument("kind must be 'gaussian' or 'student_t'");
              }
              spec.length = length;
              spec.per_minute_sigma = sigma;
              spec.seed = seed;
              spec.nu = nu;
              return to_array(eop::generate_synthetic(spec).values);
          },
          py::arg("kind"), py::arg("length"), py::arg("per_minute_sigma"), py::arg("seed") = 1,
          py::arg("nu") = 4.0);

    m.def("horizon_histogram",
          [](const Array& x, std::size_t horizon, std::size_t stride, std::size_t bins) {
              const auto h = eop::horizon_histogram(as_series(x), horizon, stride, bins);
              py::dict d;
              d["horizon_minutes"] = h.horizon_minutes;
              d["bin_edges"] = to_array(h.bin_edges);
              d["counts"] = h.counts;
              d["sample_count"] = h.sample_count;
              d["mean"] = h.mean;
              d["stddev"] = h.stddev;
              d["excess_kurtosis"] = h.excess_kurtosis;
              return d;
          },
          py::arg("returns"), py::arg("horizon"), py::arg("stride") = 60, py::arg("bins") = 61);
}
