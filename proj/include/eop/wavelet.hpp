#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "eop/marketdata.hpp"

namespace eop {

// Scale j in [0, J], translation k in [0, 2^j - 1]. The basis function is the
// unnormalized +1/-1 Haar wavelet supported on samples [k*N/2^j, (k+1)*N/2^j).
struct HaarIndex {
    int j = 0;
    std::size_t k = 0;

    friend bool operator==(const HaarIndex&, const HaarIndex&) = default;
};

// Haar expansion of one subseries of length N = 2^(J+1): a mean plus the
// coefficients c_jk in the +1/-1 convention, so that
//   x_i = mean + sum_jk c_jk * psi_jk(i / N).
// Coefficients may be absent (filtered out); absent ones count as zero.
class WaveletDecomposition {
public:
    explicit WaveletDecomposition(int max_scale);

    int max_scale() const { return max_scale_; }
    std::size_t length() const { return std::size_t{2} << max_scale_; }

    std::optional<double> mean() const { return mean_; }
    void set_mean(std::optional<double> value) { mean_ = value; }

    std::optional<double> coefficient(HaarIndex index) const;
    void set_coefficient(HaarIndex index, double value);
    void erase_coefficient(HaarIndex index);

    // Present wavelet coefficients (the mean is not counted).
    std::size_t coefficient_count() const;
    // Present coefficients plus the mean, if kept.
    std::size_t retained_values() const;

    // Dense level-ordered storage: slot 2^j - 1 + k. Absent slots hold 0.
    std::span<const double> dense() const { return values_; }

private:
    std::size_t slot(HaarIndex index) const;

    int max_scale_;
    std::optional<double> mean_;
    std::vector<double> values_;
    std::vector<bool> present_;
};

// Pyramid algorithm, O(N). Length must be a power of two and at least 2.
WaveletDecomposition haar_forward(std::span<const double> segment);
std::vector<double> haar_inverse(const WaveletDecomposition& decomposition);

struct FilterSpec {
    // Modes with scale index j < j_star are kept; 1 <= j_star <= J + 1.
    int j_star = 4;
    bool keep_mean = true;
};

WaveletDecomposition lowpass_filter(const WaveletDecomposition& decomposition,
                                    const FilterSpec& spec);

struct CompressionReport {
    std::size_t total_samples = 0;  // samples in filtered subseries
    std::size_t subseries_count = 0;
    std::size_t subseries_length = 0;
    std::size_t retained_coefficients = 0;  // wavelet coefficients + kept means
    double retention_fraction = 0.0;
    std::size_t remainder_samples = 0;  // trailing samples excluded
    int max_scale = 0;
    int j_star = 0;
};

struct FilteredSeries {
    ReturnSeries series;
    CompressionReport report;
};

// Splits the series into disjoint subseries of 2^(J+1) samples, low-pass
// filters each one and concatenates the reconstructions. The trailing
// remainder is dropped and reported.
FilteredSeries filter_series(const ReturnSeries& returns, int max_scale,
                             const FilterSpec& spec, unsigned threads = 0);

}  // namespace eop
