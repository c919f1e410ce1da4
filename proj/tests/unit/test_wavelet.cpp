#include <doctest.h>

#include <cmath>
#include <vector>

#include "eop/error.hpp"
#include "eop/wavelet.hpp"
#include "unit/helpers.hpp"

using namespace eop;
using eop::test::max_abs_diff;
using eop::test::random_vector;

namespace {

// psi_jk(i/N) straight from the mother wavelet definition.
double basis(int j, std::size_t k, std::size_t i, std::size_t n) {
    const double t = std::ldexp(static_cast<double>(i) / static_cast<double>(n), j) - static_cast<double>(k);
    if (t >= 0.0 && t < 0.5) return 1.0;
    if (t >= 0.5 && t < 1.0) return -1.0;
    return 0.0;
}

// Least squares on [1, psi_00, psi_10, psi_11, ...] by Gaussian elimination on
// the normal equations. Returns mean followed by level-ordered coefficients.
std::vector<double> brute_force_projection(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::vector<double>> cols;
    cols.emplace_back(n, 1.0);
    for (int j = 0; (std::size_t{2} << j) <= n; ++j) {
        for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
            std::vector<double> c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = basis(j, k, i, n);
            cols.push_back(c);
        }
    }
    const std::size_t m = cols.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            for (std::size_t i = 0; i < n; ++i) a[r][c] += cols[r][i] * cols[c][i];
        }
        for (std::size_t i = 0; i < n; ++i) a[r][m] += cols[r][i] * x[i];
    }
    for (std::size_t p = 0; p < m; ++p) {
        std::size_t best = p;
        for (std::size_t r = p + 1; r < m; ++r) {
            if (std::abs(a[r][p]) > std::abs(a[best][p])) best = r;
        }
        std::swap(a[p], a[best]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r == p) continue;
            const double f = a[r][p] / a[p][p];
            for (std::size_t c = p; c <= m; ++c) a[r][c] -= f * a[p][c];
        }
    }
    std::vector<double> out(m);
    for (std::size_t r = 0; r < m; ++r) out[r] = a[r][m] / a[r][r];
    return out;
}

std::vector<double> block_averages(const std::vector<double>& x, std::size_t block) {
    std::vector<double> out(x.size());
    for (std::size_t b = 0; b < x.size(); b += block) {
        double s = 0.0;
        for (std::size_t i = b; i < b + block; ++i) s += x[i];
        for (std::size_t i = b; i < b + block; ++i) out[i] = s / static_cast<double>(block);
    }
    return out;
}

}  // namespace

TEST_CASE("haar_forward: constant segment has only a mean") {
    const std::vector<double> x(32, 2.5);
    const auto d = haar_forward(x);
    CHECK(d.mean() == doctest::Approx(2.5));
    for (double c : d.dense()) CHECK(c == 0.0);
    CHECK(d.coefficient_count() == 31);
}

TEST_CASE("haar_forward: (1, -1) is one mother wavelet") {
    const std::vector<double> x{1.0, -1.0};
    const auto d = haar_forward(x);
    CHECK(d.max_scale() == 0);
    CHECK(*d.mean() == 0.0);
    CHECK(*d.coefficient({0, 0}) == 1.0);
}

TEST_CASE("haar_forward matches a brute-force least-squares projection") {
    const auto x = random_vector(16, 42);
    const auto oracle = brute_force_projection(x);
    const auto d = haar_forward(x);
    REQUIRE(oracle.size() == 16);
    CHECK(std::abs(*d.mean() - oracle[0]) < 1e-10);
    const auto dense = d.dense();
    for (std::size_t i = 0; i < dense.size(); ++i) {
        CHECK(std::abs(dense[i] - oracle[i + 1]) < 1e-10);
    }
}

TEST_CASE("haar_forward rejects lengths that are not powers of two") {
    CHECK_THROWS_AS(haar_forward(std::vector<double>(12, 0.0)), Error);
    CHECK_THROWS_AS(haar_forward(std::vector<double>(1, 0.0)), Error);
    CHECK_THROWS_AS(haar_forward(std::vector<double>{}), Error);
}

TEST_CASE("haar_inverse round-trips every power-of-two length") {
    for (std::size_t n = 2; n <= 8192; n *= 2) {
        const auto x = random_vector(n, n, 1e-3);
        const auto y = haar_inverse(haar_forward(x));
        double scale = 0.0;
        for (double v : x) scale = std::max(scale, std::abs(v));
        CHECK(max_abs_diff(x, y) / scale < 1e-10);
    }
}

TEST_CASE("haar_inverse of a sparse decomposition") {
    WaveletDecomposition d(3);
    SUBCASE("mean only gives a constant") {
        d.set_mean(-0.75);
        for (double v : haar_inverse(d)) CHECK(v == -0.75);
    }
    SUBCASE("empty decomposition gives zeros") {
        for (double v : haar_inverse(d)) CHECK(v == 0.0);
    }
    SUBCASE("a single wavelet is a +1/-1 step on its support") {
        d.set_coefficient({1, 1}, 2.0);
        const std::vector<double> expected{0, 0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2, -2, -2, -2, -2};
        CHECK(haar_inverse(d) == expected);
    }
}

TEST_CASE("WaveletDecomposition index validation") {
    WaveletDecomposition d(2);
    CHECK_THROWS_AS(d.set_coefficient({3, 0}, 1.0), Error);
    CHECK_THROWS_AS(d.set_coefficient({1, 2}, 1.0), Error);
    CHECK_THROWS_AS(d.coefficient({-1, 0}), Error);
    d.set_coefficient({2, 3}, 1.0);
    CHECK(d.coefficient_count() == 1);
    d.erase_coefficient({2, 3});
    CHECK_FALSE(d.coefficient({2, 3}).has_value());
}

TEST_CASE("Parseval split in the +1/-1 convention") {
    for (std::size_t n : {2u, 64u, 4096u}) {
        const auto x = random_vector(n, 7 + n);
        const auto d = haar_forward(x);
        double lhs = 0.0;
        for (double v : x) lhs += v * v;
        double rhs = static_cast<double>(n) * *d.mean() * *d.mean();
        for (int j = 0; j <= d.max_scale(); ++j) {
            const double norm = static_cast<double>(n >> j);
            for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
                const double c = *d.coefficient({j, k});
                rhs += c * c * norm;
            }
        }
        CHECK(std::abs(lhs - rhs) / lhs < 1e-9);
    }
}

TEST_CASE("haar_forward is linear") {
    const auto x = random_vector(256, 1);
    const auto y = random_vector(256, 2);
    const double a = 1.7;
    const double b = -0.3;
    std::vector<double> z(256);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * x[i] + b * y[i];
    const auto dx = haar_forward(x);
    const auto dy = haar_forward(y);
    const auto dz = haar_forward(z);
    CHECK(std::abs(*dz.mean() - (a * *dx.mean() + b * *dy.mean())) < 1e-10);
    for (std::size_t i = 0; i < dz.dense().size(); ++i) {
        CHECK(std::abs(dz.dense()[i] - (a * dx.dense()[i] + b * dy.dense()[i])) < 1e-10);
    }
}

TEST_CASE("lowpass_filter") {
    const auto x = random_vector(4096, 11);
    const auto d = haar_forward(x);

    SUBCASE("j* = J + 1 keeps everything") {
        const auto f = lowpass_filter(d, {12, true});
        CHECK(f.retained_values() == 4096);
        CHECK(max_abs_diff(haar_inverse(f), x) < 1e-12);
    }
    SUBCASE("J = 11, j* = 4 keeps 15 wavelets and the mean") {
        const auto f = lowpass_filter(d, {4, true});
        CHECK(f.coefficient_count() == 15);
        CHECK(f.retained_values() == 16);
        CHECK(f.coefficient({3, 7}).has_value());
        CHECK_FALSE(f.coefficient({4, 0}).has_value());
    }
    SUBCASE("reconstruction equals 256-sample block averages") {
        const auto f = lowpass_filter(d, {4, true});
        CHECK(max_abs_diff(haar_inverse(f), block_averages(x, 256)) < 1e-10);
    }
    SUBCASE("every threshold equals block averaging") {
        for (int js = 1; js <= 12; ++js) {
            const auto f = lowpass_filter(d, {js, true});
            CHECK(max_abs_diff(haar_inverse(f), block_averages(x, 4096u >> js)) < 1e-10);
        }
    }
    SUBCASE("dropping the mean removes the DC level") {
        const auto f = lowpass_filter(d, {1, false});
        CHECK(f.retained_values() == 1);
        const auto y = haar_inverse(f);
        CHECK(std::abs(y[0] + y[4095]) < 1e-12);
    }
    SUBCASE("out-of-range thresholds are rejected") {
        CHECK_THROWS_AS(lowpass_filter(d, {0, true}), Error);
        CHECK_THROWS_AS(lowpass_filter(d, {13, true}), Error);
    }
}

TEST_CASE("filter_series partitions, filters and reports") {
    SUBCASE("241664 samples give 59 subseries and 944 retained values") {
        ReturnSeries r;
        r.values = random_vector(241664, 5, 1e-4);
        const auto f = filter_series(r, 11, {4, true});
        CHECK(f.report.subseries_count == 59);
        CHECK(f.report.retained_coefficients == 944);
        CHECK(f.report.total_samples == 241664);
        CHECK(f.report.remainder_samples == 0);
        CHECK(f.report.retention_fraction == doctest::Approx(944.0 / 241664.0));
        CHECK(f.series.size() == 241664);
    }
    SUBCASE("full retention is the identity") {
        ReturnSeries r;
        r.values = random_vector(4096, 6, 1e-4);
        const auto f = filter_series(r, 11, {12, true});
        CHECK(max_abs_diff(f.series.values, r.values) < 1e-16);
        CHECK(f.report.retained_coefficients == 4096);
    }
    SUBCASE("a 5000-sample series leaves a 904-sample remainder") {
        ReturnSeries r;
        r.values = random_vector(5000, 7, 1e-4);
        const auto f = filter_series(r, 11, {4, true});
        CHECK(f.report.subseries_count == 1);
        CHECK(f.report.remainder_samples == 904);
        CHECK(f.series.size() == 4096);
    }
    SUBCASE("too short a series is an error") {
        ReturnSeries r;
        r.values.assign(4095, 0.0);
        CHECK_THROWS_AS(filter_series(r, 11, {4, true}), Error);
    }
    SUBCASE("output does not depend on the thread count") {
        ReturnSeries r;
        r.values = random_vector(8 * 4096, 8, 1e-4);
        const auto one = filter_series(r, 11, {4, true}, 1);
        const auto four = filter_series(r, 11, {4, true}, 4);
        CHECK(one.series.values == four.series.values);
    }
    SUBCASE("block sums survive filtering") {
        ReturnSeries r;
        r.values = random_vector(2 * 4096, 9, 1e-4);
        const auto f = filter_series(r, 11, {4, true});
        for (std::size_t start = 0; start + 512 <= r.size(); start += 256) {
            double a = 0.0;
            double b = 0.0;
            for (std::size_t i = start; i < start + 512; ++i) {
                a += r.values[i];
                b += f.series.values[i];
            }
            CHECK(std::abs(a - b) < 1e-14);
        }
    }
}
