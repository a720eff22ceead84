#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace qsrc {

// Pairwise summation: a fixed reduction tree, so the result does not depend
// on chunking or worker count, and rounding error stays O(log n).
template <typename T>
T pairwise_sum(std::span<const T> v) {
    if (v.size() <= 8) {
        T s{};
        for (const T& x : v) s += x;
        return s;
    }
    std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(std::span<const double> v) { return pairwise_sum<double>(v); }

} // namespace qsrc
