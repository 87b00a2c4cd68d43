#pragma once

#include <limits>
#include <span>
#include <vector>

namespace ult::detail {

struct subset_candidate {
    double err = std::numeric_limits<double>::infinity();
    std::vector<int> idx;
};

// Total order used for tie-breaking: error, then cardinality, then lexicographic.
bool candidate_less(const subset_candidate& a, const subset_candidate& b);

// Best subset of size <= K among those whose smallest index lies in [first_lo, first_hi).
subset_candidate best_k_scan(std::span<const double> v, double z, int K, int first_lo, int first_hi,
                             bool include_empty);

} // namespace ult::detail
