#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace eop {

// Pairwise summation with a fixed split order. The result depends only on the
// values and their order, never on how they were produced.
double pairwise_sum(std::span<const double> values);

double mean(std::span<const double> values);

// Population standard deviation about the sample mean.
double stddev(std::span<const double> values);

struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
    double excess_kurtosis = 0.0;
};

Moments moments(std::span<const double> values);

// Resolves a requested worker count; 0 means hardware concurrency.
unsigned resolve_threads(unsigned requested);

// Runs body(i) for i in [0, count) over a static partition of the index
// range. Callers write to disjoint slots so the output is scheduling-free.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace eop
