#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lvlingam {

/// Sorted index multiset, i_1 <= ... <= i_k.
using IndexKey = std::vector<std::size_t>;

/// Sorted copy of `idx`.
IndexKey canonical_key(std::span<const std::size_t> idx);

/// All sorted multisets of size `order` over {0, ..., dim-1}, in lexicographic order.
std::vector<IndexKey> multisets(std::size_t dim, std::size_t order);

/// Number of multisets of size `order` over `dim` symbols.
std::size_t multiset_count(std::size_t dim, std::size_t order);

/// A set partition of {0, ..., n-1}; each block is sorted, blocks are ordered by
/// their smallest element.
using SetPartition = std::vector<std::vector<std::size_t>>;

/// Every set partition of {0, ..., n-1} (Bell(n) of them).
std::vector<SetPartition> set_partitions(std::size_t n);

/// Cached set partitions of {0, ..., n-1} without singleton blocks, n <= 6.
const std::vector<SetPartition>& partitions_without_singletons(std::size_t n);

}  // namespace lvlingam
