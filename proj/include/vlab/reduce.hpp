// Deterministic summation helpers.
//
// All particle/cell reductions in this codebase go through pairwise (tree)
// summation with a split that depends only on the range length, never on the
// number of OpenMP workers. Re-running with a different thread count must
// reproduce every sum bit for bit.
#pragma once

#include <cstddef>

namespace vlab {

inline constexpr std::size_t kPairwiseLeaf = 8;

// Sum f(i) for i in [begin, end) with a fixed binary reduction tree.
template <class F>
double pairwise_sum(std::size_t begin, std::size_t end, F&& f) {
    const std::size_t n = end - begin;
    if (n <= kPairwiseLeaf) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) acc += f(i);
        return acc;
    }
    const std::size_t mid = begin + n / 2;
    return pairwise_sum(begin, mid, f) + pairwise_sum(mid, end, f);
}

inline double pairwise_sum(const double* x, std::size_t n) {
    return pairwise_sum(std::size_t{0}, n, [x](std::size_t i) { return x[i]; });
}

}  // namespace vlab
