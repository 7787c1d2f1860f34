#pragma once

#include <cstdint>
#include <limits>

namespace latticelab {

/// Sentinel for an unbounded upper index.
inline constexpr std::uint64_t kInfiniteIndex = std::numeric_limits<std::uint64_t>::max();

/// Sum of j^(-q) for first <= j <= last (last may be kInfiniteIndex).
///
/// Short ranges are summed directly; long ranges use the Euler-Maclaurin
/// formula with three Bernoulli correction terms after a direct head of 32
/// terms, which keeps the relative error below 1e-14 for q >= 0. Returns
/// +infinity for divergent infinite ranges (q <= 1) and 0 for empty ranges.
double power_sum(double q, std::uint64_t first, std::uint64_t last);

}  // namespace latticelab
