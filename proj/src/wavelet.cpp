#include "eop/wavelet.hpp"

#include <algorithm>
#include <bit>

#include "eop/error.hpp"
#include "eop/numeric.hpp"

namespace eop {

WaveletDecomposition::WaveletDecomposition(int max_scale) : max_scale_(max_scale) {
    if (max_scale < 0 || max_scale > 40) {
        throw Error("wavelet max scale out of range: " + std::to_string(max_scale));
    }
    const std::size_t count = length() - 1;
    values_.assign(count, 0.0);
    present_.assign(count, false);
}

std::size_t WaveletDecomposition::slot(HaarIndex index) const {
    if (index.j < 0 || index.j > max_scale_ || index.k >= (std::size_t{1} << index.j)) {
        throw Error("invalid Haar index (j=" + std::to_string(index.j) +
                    ", k=" + std::to_string(index.k) + ")");
    }
    return (std::size_t{1} << index.j) - 1 + index.k;
}

std::optional<double> WaveletDecomposition::coefficient(HaarIndex index) const {
    const std::size_t s = slot(index);
    if (!present_[s]) return std::nullopt;
    return values_[s];
}

void WaveletDecomposition::set_coefficient(HaarIndex index, double value) {
    const std::size_t s = slot(index);
    values_[s] = value;
    present_[s] = true;
}

void WaveletDecomposition::erase_coefficient(HaarIndex index) {
    const std::size_t s = slot(index);
    values_[s] = 0.0;
    present_[s] = false;
}

std::size_t WaveletDecomposition::coefficient_count() const {
    std::size_t n = 0;
    for (bool p : present_) n += p ? 1 : 0;
    return n;
}

std::size_t WaveletDecomposition::retained_values() const {
    return coefficient_count() + (mean_ ? 1 : 0);
}

WaveletDecomposition haar_forward(std::span<const double> segment) {
    const std::size_t n = segment.size();
    if (n < 2 || !std::has_single_bit(n)) {
        throw Error("Haar transform needs a power-of-two length >= 2, got " + std::to_string(n));
    }
    const int max_scale = std::countr_zero(n) - 1;
    WaveletDecomposition out(max_scale);

    // Averaging pyramid: at scale j the pair (a, b) of block means of length
    // N/2^(j+1) gives c_jk = (a - b) / 2 and the parent block mean (a + b) / 2.
    std::vector<double> level(segment.begin(), segment.end());
    for (int j = max_scale; j >= 0; --j) {
        const std::size_t half = std::size_t{1} << j;
        for (std::size_t k = 0; k < half; ++k) {
            const double a = level[2 * k];
            const double b = level[2 * k + 1];
            out.set_coefficient({j, k}, 0.5 * (a - b));
            level[k] = 0.5 * (a + b);
        }
    }
    out.set_mean(level[0]);
    return out;
}

std::vector<double> haar_inverse(const WaveletDecomposition& decomposition) {
    const int max_scale = decomposition.max_scale();
    const auto dense = decomposition.dense();
    std::vector<double> level(decomposition.length(), 0.0);
    level[0] = decomposition.mean().value_or(0.0);
    for (int j = 0; j <= max_scale; ++j) {
        const std::size_t half = std::size_t{1} << j;
        const double* c = dense.data() + (half - 1);
        // Expand in place from the back so parents are read before overwrite.
        for (std::size_t k = half; k-- > 0;) {
            const double parent = level[k];
            level[2 * k] = parent + c[k];
            level[2 * k + 1] = parent - c[k];
        }
    }
    return level;
}

WaveletDecomposition lowpass_filter(const WaveletDecomposition& decomposition,
                                    const FilterSpec& spec) {
    const int max_scale = decomposition.max_scale();
    if (spec.j_star < 1 || spec.j_star > max_scale + 1) {
        throw Error("j* must lie in [1, " + std::to_string(max_scale + 1) + "], got " +
                    std::to_string(spec.j_star));
    }
    WaveletDecomposition out(max_scale);
    if (spec.keep_mean) out.set_mean(decomposition.mean());
    for (int j = 0; j < spec.j_star; ++j) {
        for (std::size_t k = 0; k < (std::size_t{1} << j); ++k) {
            if (const auto c = decomposition.coefficient({j, k})) out.set_coefficient({j, k}, *c);
        }
    }
    return out;
}

FilteredSeries filter_series(const ReturnSeries& returns, int max_scale, const FilterSpec& spec,
                             unsigned threads) {
    if (max_scale < 0 || max_scale > 40) {
        throw Error("wavelet max scale out of range: " + std::to_string(max_scale));
    }
    const std::size_t block = std::size_t{2} << max_scale;
    if (returns.size() < block) {
        throw Error("series of " + std::to_string(returns.size()) +
                    " samples is shorter than one subseries of " + std::to_string(block));
    }
    if (spec.j_star < 1 || spec.j_star > max_scale + 1) {
        throw Error("j* must lie in [1, " + std::to_string(max_scale + 1) + "], got " +
                    std::to_string(spec.j_star));
    }

    const std::size_t count = returns.size() / block;
    FilteredSeries out;
    out.series = returns;
    out.series.values.assign(count * block, 0.0);
    std::vector<std::size_t> retained(count, 0);

    const std::span<const double> input = returns.view();
    parallel_for(count, threads, [&](std::size_t s) {
        const auto decomposition = haar_forward(input.subspan(s * block, block));
        const auto filtered = lowpass_filter(decomposition, spec);
        retained[s] = filtered.retained_values();
        const auto rebuilt = haar_inverse(filtered);
        std::copy(rebuilt.begin(), rebuilt.end(), out.series.values.begin() + s * block);
    });

    auto& report = out.report;
    report.total_samples = count * block;
    report.subseries_count = count;
    report.subseries_length = block;
    for (std::size_t r : retained) report.retained_coefficients += r;
    report.retention_fraction =
        static_cast<double>(report.retained_coefficients) / static_cast<double>(report.total_samples);
    report.remainder_samples = returns.size() - count * block;
    if (report.remainder_samples != 0) out.series.last.reset();
    report.max_scale = max_scale;
    report.j_star = spec.j_star;
    return out;
}

}  // namespace eop
