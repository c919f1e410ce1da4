#include "eop/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace eop {

namespace {

constexpr std::size_t kPairwiseBlock = 64;

}  // namespace

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= kPairwiseBlock) {
        double total = 0.0;
        for (double v : values) total += v;
        return total;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
    return moments(values).stddev;
}

Moments moments(std::span<const double> values) {
    Moments m;
    if (values.empty()) return m;
    m.mean = mean(values);
    std::vector<double> sq(values.size());
    std::vector<double> quad(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double d = values[i] - m.mean;
        sq[i] = d * d;
        quad[i] = sq[i] * sq[i];
    }
    const double n = static_cast<double>(values.size());
    const double m2 = pairwise_sum(sq) / n;
    const double m4 = pairwise_sum(quad) / n;
    m.stddev = std::sqrt(m2);
    m.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    return m;
}

unsigned resolve_threads(unsigned requested) {
    if (requested != 0) return requested;
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body) {
    const std::size_t workers =
        std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &body] {
            for (std::size_t i = begin; i < end; ++i) body(i);
        });
    }
}

}  // namespace eop
