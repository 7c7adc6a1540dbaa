#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cdp/partition.hpp"

namespace cdp {

/// Largest n accepted by the enumerators (Bell(12) = 4,213,597).
inline constexpr int kMaxEnumerationItems = 12;

/// Cap on the number of coloured partitions materialized at once.
inline constexpr std::uint64_t kMaxColouredPartitions = 10'000'000;

std::uint64_t bell_number(int n);
std::uint64_t stirling2(int n, int k);

/// Visits every partition of {0..n-1} as a restricted growth string, in
/// increasing lexicographic (= canonical) order. The span is only valid during
/// the call. Throws TooLarge for n > kMaxEnumerationItems.
void for_each_partition(int n, const std::function<void(std::span<const int> labels, int degree)>& visit);

std::vector<Partition> enumerate_partitions(int n);

/// Every partition with every assignment of colours in [0,K) to its clusters;
/// the count is the sum over partitions of K^d.
std::vector<ColouredPartition> enumerate_coloured_partitions(int n, int num_colours);

/// Every cluster-size configuration (integer partition) of n.
std::vector<ConfigurationCounts> enumerate_configurations(int n);

}  // namespace cdp
