#include "lvlingam/multiset.hpp"

#include <algorithm>
#include <array>
#include <mutex>

#include "lvlingam/errors.hpp"

namespace lvlingam {

IndexKey canonical_key(std::span<const std::size_t> idx) {
  IndexKey key(idx.begin(), idx.end());
  std::sort(key.begin(), key.end());
  return key;
}

namespace {

void grow_multisets(std::size_t dim, std::size_t order, std::size_t lo, IndexKey& cur,
                    std::vector<IndexKey>& out) {
  if (cur.size() == order) {
    out.push_back(cur);
    return;
  }
  for (std::size_t v = lo; v < dim; ++v) {
    cur.push_back(v);
    grow_multisets(dim, order, v, cur, out);
    cur.pop_back();
  }
}

void grow_partitions(std::size_t n, std::size_t next, SetPartition& cur,
                     std::vector<SetPartition>& out) {
  if (next == n) {
    out.push_back(cur);
    return;
  }
  for (std::size_t b = 0; b < cur.size(); ++b) {
    cur[b].push_back(next);
    grow_partitions(n, next + 1, cur, out);
    cur[b].pop_back();
  }
  cur.push_back({next});
  grow_partitions(n, next + 1, cur, out);
  cur.pop_back();
}

}  // namespace

std::vector<IndexKey> multisets(std::size_t dim, std::size_t order) {
  std::vector<IndexKey> out;
  IndexKey cur;
  cur.reserve(order);
  grow_multisets(dim, order, 0, cur, out);
  return out;
}

std::size_t multiset_count(std::size_t dim, std::size_t order) {
  // C(dim + order - 1, order)
  if (dim == 0) return order == 0 ? 1 : 0;
  std::size_t num = 1;
  for (std::size_t r = 1; r <= order; ++r) num = num * (dim + r - 1) / r;
  return num;
}

std::vector<SetPartition> set_partitions(std::size_t n) {
  std::vector<SetPartition> out;
  SetPartition cur;
  if (n == 0) {
    out.push_back(cur);
    return out;
  }
  grow_partitions(n, 0, cur, out);
  return out;
}

const std::vector<SetPartition>& partitions_without_singletons(std::size_t n) {
  static std::array<std::vector<SetPartition>, 7> cache;
  static std::once_flag once;
  if (n >= cache.size()) throw Error(ErrorCode::kUnsupportedOrder, "partition order above 6");
  std::call_once(once, [] {
    for (std::size_t k = 0; k < cache.size(); ++k) {
      for (auto& p : set_partitions(k)) {
        const bool ok = std::none_of(p.begin(), p.end(), [](const auto& b) { return b.size() == 1; });
        if (ok) cache[k].push_back(std::move(p));
      }
    }
  });
  return cache[n];
}

}  // namespace lvlingam
